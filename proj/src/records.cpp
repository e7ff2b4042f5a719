#include "crowdcount/records.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "crowdcount/error.hpp"

namespace crowdcount {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

double number_field(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw ParseError(std::string("field '") + key + "' missing or not a number", line);
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ParseError(std::string("field '") + key + "' is not finite", line);
  return v;
}

Box2D box_field(const json& obj, std::size_t line) {
  if (!obj.is_object()) throw ParseError("box must be an object", line);
  Box2D b{number_field(obj, "x", line), number_field(obj, "y", line), number_field(obj, "w", line),
          number_field(obj, "h", line)};
  if (!b.valid()) throw ParseError("box width and height must be positive", line);
  return b;
}

json parse_line(const std::string& text, std::size_t line) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line);
  }
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

template <typename J>
J box_json(const Box2D& b) {
  return J{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}};
}

}  // namespace

DetectionMap load_detections(std::istream& in) {
  DetectionMap out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    const json doc = parse_line(text, line);
    if (!doc.is_object()) throw ParseError("detection record must be an object", line);
    const auto image = doc.find("image");
    if (image == doc.end() || !image->is_string()) throw ParseError("field 'image' missing or not a string", line);
    const auto boxes = doc.find("boxes");
    if (boxes == doc.end() || !boxes->is_array()) throw ParseError("field 'boxes' missing or not an array", line);

    auto& dest = out[image->get<std::string>()];
    for (const auto& b : *boxes) {
      const Box2D box = box_field(b, line);
      dest.push_back({box, number_field(b, "score", line)});
    }
  }
  return out;
}

DetectionMap load_detections(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open detection file " + path.string());
  return load_detections(in);
}

void write_detections(std::ostream& out, const DetectionMap& detections) {
  for (const auto& [image, boxes] : detections) {
    ordered_json doc;
    doc["image"] = image;
    doc["boxes"] = ordered_json::array();
    for (const auto& b : boxes) {
      auto entry = box_json<ordered_json>(b.box);
      entry["score"] = b.score;
      doc["boxes"].push_back(std::move(entry));
    }
    out << doc.dump() << '\n';
  }
}

std::vector<FaceInstance> load_embeddings(std::istream& in) {
  std::vector<FaceInstance> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    const json doc = parse_line(text, line);
    if (!doc.is_object()) throw ParseError("embedding record must be an object", line);

    FaceInstance face;
    const auto frame = doc.find("frame");
    if (frame == doc.end() || !frame->is_number_integer() || frame->get<long long>() < 0) {
      throw ParseError("field 'frame' missing or not a non-negative integer", line);
    }
    face.frame_index = frame->get<std::size_t>();

    const auto id = doc.find("face_id");
    if (id == doc.end() || !id->is_string()) throw ParseError("field 'face_id' missing or not a string", line);
    face.face_id = id->get<std::string>();

    const auto box = doc.find("box");
    if (box == doc.end()) throw ParseError("field 'box' missing", line);
    face.box = box_field(*box, line);

    const auto vec = doc.find("vec");
    if (vec == doc.end() || !vec->is_array() || vec->size() != kEmbeddingDim) {
      throw ParseError("field 'vec' must be an array of " + std::to_string(kEmbeddingDim) + " numbers", line);
    }
    for (std::size_t i = 0; i < kEmbeddingDim; ++i) {
      const auto& v = (*vec)[i];
      if (!v.is_number() || !std::isfinite(v.get<double>())) {
        throw ParseError("vec[" + std::to_string(i) + "] is not a finite number", line);
      }
      face.embedding[i] = v.get<double>();
    }

    if (const auto label = doc.find("label"); label != doc.end()) {
      if (!label->is_string()) throw ParseError("field 'label' must be a string", line);
      face.identity_label = label->get<std::string>();
    }
    out.push_back(std::move(face));
  }
  return out;
}

std::vector<FaceInstance> load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open embedding file " + path.string());
  return load_embeddings(in);
}

void write_embeddings(std::ostream& out, const std::vector<FaceInstance>& faces) {
  for (const auto& f : faces) {
    ordered_json doc;
    doc["frame"] = f.frame_index;
    doc["face_id"] = f.face_id;
    doc["box"] = box_json<ordered_json>(f.box);
    doc["vec"] = f.embedding.values;
    if (f.identity_label) doc["label"] = *f.identity_label;
    out << doc.dump() << '\n';
  }
}

}  // namespace crowdcount
