#include "crowdcount/widerface.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "crowdcount/error.hpp"
#include "text_util.hpp"

namespace crowdcount {
namespace {

struct FlagRange {
  const char* name;
  int max;
};

// Attribute columns after x y w h, with their documented upper bounds.
constexpr std::array<FlagRange, 6> kFlags{{{"blur", 2},
                                           {"expression", 1},
                                           {"illumination", 1},
                                           {"invalid", 1},
                                           {"occlusion", 2},
                                           {"pose", 1}}};

class LineReader {
public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    if (has_peeked_) {
      has_peeked_ = false;
      line = std::move(peeked_);
      ++number_;
      return true;
    }
    if (!std::getline(in_, line)) return false;
    ++number_;
    return true;
  }

  const std::string* peek() {
    if (!has_peeked_) {
      if (!std::getline(in_, peeked_)) return nullptr;
      has_peeked_ = true;
    }
    return &peeked_;
  }

  std::size_t number() const noexcept { return number_; }

private:
  std::istream& in_;
  std::string peeked_;
  bool has_peeked_ = false;
  std::size_t number_ = 0;
};

// Ten numeric fields, or nullopt.
std::optional<std::array<double, 10>> numeric_record(std::string_view line) {
  const auto tokens = text::split_ws(line);
  if (tokens.size() != 10) return std::nullopt;
  std::array<double, 10> values{};
  for (std::size_t i = 0; i < 10; ++i) {
    const auto v = text::parse_number<double>(tokens[i]);
    if (!v) return std::nullopt;
    values[i] = *v;
  }
  return values;
}

}  // namespace

WiderfaceSet parse_widerface(std::istream& in) {
  WiderfaceSet set;
  LineReader reader(in);
  std::string line;
  while (reader.next(line)) {
    const auto path = text::trim(line);
    if (path.empty()) continue;

    AnnotatedImage image;
    image.image_id = std::string(path);

    if (!reader.next(line)) throw ParseError("missing face count for " + image.image_id, reader.number() + 1);
    const auto count = text::parse_number<std::size_t>(text::trim(line));
    if (!count) throw ParseError("malformed face count '" + line + "'", reader.number());

    if (*count == 0) {
      // The published files follow a zero count with a placeholder record.
      if (const std::string* next = reader.peek(); next && numeric_record(*next)) reader.next(line);
    }

    for (std::size_t f = 0; f < *count; ++f) {
      if (!reader.next(line)) {
        throw ParseError("expected " + std::to_string(*count) + " face records for " + image.image_id +
                             ", found " + std::to_string(f),
                         reader.number() + 1);
      }
      const auto record = numeric_record(line);
      if (!record) throw ParseError("expected 10 numeric fields, got '" + line + "'", reader.number());

      Annotation a;
      a.image_id = image.image_id;
      a.box = {(*record)[0], (*record)[1], (*record)[2], (*record)[3]};
      std::array<int, 6> flags{};
      for (std::size_t k = 0; k < kFlags.size(); ++k) {
        const double v = (*record)[4 + k];
        if (v != static_cast<int>(v) || v < 0 || v > kFlags[k].max) {
          throw ParseError(std::string(kFlags[k].name) + " flag out of range in '" + line + "'",
                           reader.number());
        }
        flags[k] = static_cast<int>(v);
      }
      a.blur = static_cast<Blur>(flags[0]);
      a.expression = flags[1];
      a.illumination = flags[2];
      a.invalid = flags[3];
      a.occlusion = flags[4];
      a.pose = flags[5];

      if (!a.box.valid()) {
        ++image.dropped;
        continue;
      }
      image.faces.push_back(std::move(a));
    }
    set.dropped += image.dropped;
    set.images.push_back(std::move(image));
  }
  return set;
}

WiderfaceSet parse_widerface_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open annotation file " + path);
  return parse_widerface(in);
}

void write_widerface(std::ostream& out, const WiderfaceSet& set) {
  for (const auto& image : set.images) {
    out << image.image_id << '\n' << image.faces.size() << '\n';
    if (image.faces.empty()) {
      out << "0 0 0 0 0 0 0 0 0 0\n";
      continue;
    }
    for (const auto& f : image.faces) {
      out << text::shortest(f.box.x) << ' ' << text::shortest(f.box.y) << ' ' << text::shortest(f.box.w)
          << ' ' << text::shortest(f.box.h) << ' ' << static_cast<int>(f.blur) << ' ' << f.expression
          << ' ' << f.illumination << ' ' << f.invalid << ' ' << f.occlusion << ' ' << f.pose << '\n';
    }
  }
}

std::vector<Box2D> boxes_of(const AnnotatedImage& image) {
  std::vector<Box2D> out;
  out.reserve(image.faces.size());
  for (const auto& f : image.faces) out.push_back(f.box);
  return out;
}

}  // namespace crowdcount
