// crowdcount command line: detector evaluation studies and unique-face counting.
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crowdcount/counter.hpp"
#include "crowdcount/error.hpp"
#include "crowdcount/matchkit.hpp"
#include "crowdcount/records.hpp"
#include "crowdcount/reports.hpp"
#include "crowdcount/studies.hpp"
#include "crowdcount/subprocess_backend.hpp"
#include "crowdcount/widerface.hpp"

namespace fs = std::filesystem;
using namespace crowdcount;
using nlohmann::json;

namespace {

struct Options {
  std::string annotations;
  std::string detections;
  std::string embeddings;
  std::string frames_dir;
  std::string images_dir;
  std::string backend_cmd;
  std::string embed_cmd;
  std::string pairs;
  std::string calibration;
  std::string scales = "-2:1";
  std::string ap_mode = "pooled";
  std::string out = ".";
  std::vector<std::string> runs;
  std::vector<std::string> scaled_detections;
  std::vector<double> study_scales{1.0, 0.5, 0.25};
  std::vector<std::string> images;
  std::size_t stride = kDefaultStride;
  std::size_t gallery_depth = 1;
  std::size_t folds = 1;
  std::size_t n_frames = 0;
  double iou_threshold = 0.5;
  double nms_threshold = 0.3;
  double neighborhood = 600.0;
  std::optional<double> threshold;
  std::uint64_t seed = 0;
  int threads = 0;
};

void warn(const std::string& message) { std::cerr << json{{"warning", message}}.dump() << "\n"; }

fs::path out_dir(const Options& o) {
  fs::path dir(o.out);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidInput("failed writing " + path.string());
}

template <class Writer>
void write_csv(const fs::path& path, Writer&& writer) {
  std::ostringstream s;
  writer(s);
  write_text(path, s.str());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw InvalidInput(std::string("missing required option ") + flag);
}

PyramidConfig pyramid_from(const Options& o) {
  PyramidConfig c;
  const auto colon = o.scales.find(':');
  if (colon == std::string::npos) throw InvalidInput("--scales expects k_min:k_max, got '" + o.scales + "'");
  try {
    std::size_t used = 0;
    c.k_min = std::stoi(o.scales.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("");
    const std::string hi = o.scales.substr(colon + 1);
    c.k_max = std::stoi(hi, &used);
    if (used != hi.size()) throw std::invalid_argument("");
  } catch (const std::logic_error&) {
    throw InvalidInput("--scales expects integers k_min:k_max, got '" + o.scales + "'");
  }
  c.nms_threshold = o.nms_threshold;
  c.validate();
  return c;
}

EvalOptions eval_options(const Options& o) {
  EvalOptions e;
  e.iou_threshold = o.iou_threshold;
  e.ap_mode = parse_ap_mode(o.ap_mode);
  return e;
}

ImageRaster load_image(const fs::path& dir, const std::string& id) {
  fs::path p = dir / id;
  if (!fs::exists(p)) p.replace_extension(".ppm");
  if (!fs::exists(p)) throw InvalidInput("image '" + id + "' not found under " + dir.string());
  return read_ppm(p);
}

// --- eval -------------------------------------------------------------------

int cmd_eval(const Options& o) {
  require(o.annotations, "--annotations");
  require(o.detections, "--detections");
  const auto annotations = parse_widerface_file(o.annotations);
  const auto detections = load_detections(fs::path(o.detections));
  if (overlap_count(annotations, detections) == 0) {
    throw InvalidInput("no image appears in both the annotations and the detections");
  }
  std::vector<std::string> warnings;
  const auto images = join_detections(annotations, detections, warnings);
  auto report = evaluate(images, eval_options(o));
  report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
  if (annotations.dropped > 0) {
    report.warnings.push_back(std::to_string(annotations.dropped) + " zero-size ground-truth boxes dropped");
  }
  const auto dir = out_dir(o);
  write_json(dir / "report.json", to_json(report));
  write_csv(dir / "pr_curve.csv", [&](std::ostream& s) { write_pr_curve_csv(s, report.pr_curve); });
  write_csv(dir / "per_image.csv", [&](std::ostream& s) { write_per_image_csv(s, report.per_image); });
  for (const auto& w : report.warnings) warn(w);
  return 0;
}

// --- studies ----------------------------------------------------------------

std::pair<double, std::string> split_scale_path(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw InvalidInput("--scaled-detections expects SCALE:PATH, got '" + spec + "'");
  try {
    return {std::stod(spec.substr(0, colon)), spec.substr(colon + 1)};
  } catch (const std::logic_error&) {
    throw InvalidInput("--scaled-detections: bad scale in '" + spec + "'");
  }
}

int cmd_study_resolution(const Options& o) {
  require(o.annotations, "--annotations");
  const auto annotations = parse_widerface_file(o.annotations);
  std::vector<ResolutionRow> rows;
  if (!o.scaled_detections.empty()) {
    std::vector<std::pair<double, DetectionMap>> stored;
    for (const auto& spec : o.scaled_detections) {
      const auto [scale, path] = split_scale_path(spec);
      stored.emplace_back(scale, load_detections(fs::path(path)));
    }
    rows = resolution_study_stored(annotations, stored, o.iou_threshold);
  } else {
    require(o.backend_cmd, "--backend-cmd (or --scaled-detections)");
    require(o.images_dir, "--images-dir");
    if (o.study_scales.empty()) throw InvalidInput("--study-scales is empty");
    SubprocessDetector detector(o.backend_cmd);
    const fs::path dir(o.images_dir);
    rows = resolution_study(annotations, [&](const std::string& id) { return load_image(dir, id); }, detector,
                            o.study_scales, pyramid_from(o), o.iou_threshold);
  }
  write_csv(out_dir(o) / "resolution.csv", [&](std::ostream& s) { write_resolution_csv(s, rows); });
  return 0;
}

int cmd_study_blur(const Options& o) {
  require(o.annotations, "--annotations");
  require(o.detections, "--detections");
  const auto annotations = parse_widerface_file(o.annotations);
  const auto detections = load_detections(fs::path(o.detections));
  if (overlap_count(annotations, detections) == 0) {
    throw InvalidInput("no image appears in both the annotations and the detections");
  }
  const auto study = blur_study(annotations, detections, eval_options(o));
  write_json(out_dir(o) / "blur.json", to_json(study));
  if (study.heavy_blur_empty) warn("no heavy-blur faces in the annotations");
  return 0;
}

int cmd_benchmark(const Options& o) {
  require(o.annotations, "--annotations");
  if (o.runs.empty()) throw InvalidInput("benchmark needs at least one --run ALGO:CATEGORY:PATH");
  const auto annotations = parse_widerface_file(o.annotations);
  std::vector<BenchmarkRun> runs;
  for (const auto& spec : o.runs) {
    const auto a = spec.find(':');
    const auto b = a == std::string::npos ? a : spec.find(':', a + 1);
    if (b == std::string::npos) throw InvalidInput("--run expects ALGO:CATEGORY:PATH, got '" + spec + "'");
    BenchmarkRun run;
    run.algorithm = spec.substr(0, a);
    run.category = spec.substr(a + 1, b - a - 1);
    const fs::path path = spec.substr(b + 1);
    run.detections = load_detections(path);
    // precomputed runs carry their timing in a sidecar
    const fs::path meta = path.string() + ".meta.json";
    if (fs::exists(meta)) {
      std::ifstream in(meta);
      const auto m = json::parse(in, nullptr, false);
      if (m.is_discarded() || !m.is_object()) throw InvalidInput("malformed metadata file " + meta.string());
      if (auto t = m.find("wall_time_s"); t != m.end()) {
        if (!t->is_number()) throw InvalidInput("wall_time_s must be a number in " + meta.string());
        run.wall_time_s = t->get<double>();
      }
    }
    runs.push_back(std::move(run));
  }
  std::vector<std::string> warnings;
  const auto rows = benchmark_table(annotations, runs, o.iou_threshold, warnings);
  write_csv(out_dir(o) / "benchmark.csv", [&](std::ostream& s) { write_benchmark_csv(s, rows); });
  for (const auto& w : warnings) warn(w);
  return 0;
}

// --- counting ---------------------------------------------------------------

// Frame number of a detection image id: "17", "000017.ppm", "frame_17.jpg".
std::size_t frame_of(const std::string& image_id) {
  const std::string stem = fs::path(image_id).stem().string();
  auto end = stem.size();
  auto begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
  if (begin == end) throw InvalidInput("cannot read a frame number from image id '" + image_id + "'");
  return std::stoull(stem.substr(begin, end - begin));
}

fs::path frame_path(const fs::path& dir, std::size_t frame) {
  char name[32];
  std::snprintf(name, sizeof name, "%06zu.ppm", frame);
  return dir / name;
}

bool same_box(const Box2D& a, const Box2D& b) {
  return std::abs(a.x - b.x) <= 1e-6 && std::abs(a.y - b.y) <= 1e-6 && std::abs(a.w - b.w) <= 1e-6 &&
         std::abs(a.h - b.h) <= 1e-6;
}

// Lazily decoded frames, kept while the analysis window needs them.
class FrameCache {
public:
  explicit FrameCache(fs::path dir) : dir_(std::move(dir)) {}
  const ImageRaster* get(std::size_t frame) {
    if (auto it = cache_.find(frame); it != cache_.end()) return &it->second;
    const auto p = frame_path(dir_, frame);
    if (!fs::exists(p)) return nullptr;
    return &cache_.emplace(frame, read_ppm(p)).first->second;
  }
  void drop_before(std::size_t frame) { cache_.erase(cache_.begin(), cache_.lower_bound(frame)); }

private:
  fs::path dir_;
  std::map<std::size_t, ImageRaster> cache_;
};

std::map<std::size_t, std::vector<FaceInstance>> by_frame(std::vector<FaceInstance> faces) {
  std::map<std::size_t, std::vector<FaceInstance>> out;
  for (auto& f : faces) out[f.frame_index].push_back(std::move(f));
  return out;
}

// Faces per frame from stored embeddings, or embedded live from detections.
std::map<std::size_t, std::vector<FaceInstance>> gather_faces(const Options& o, FrameCache* frames,
                                                              EmbedderBackend* live) {
  std::map<std::size_t, std::vector<FaceInstance>> faces;
  if (!o.embeddings.empty()) faces = by_frame(load_embeddings(fs::path(o.embeddings)));
  if (o.detections.empty()) {
    if (o.embeddings.empty()) throw InvalidInput("count needs --embeddings or --detections with --embed-cmd");
    return faces;
  }
  const auto detections = load_detections(fs::path(o.detections));
  std::map<std::size_t, std::vector<FaceInstance>> joined;
  for (const auto& [image_id, boxes] : detections) {
    const std::size_t frame = frame_of(image_id);
    auto& out = joined[frame];
    for (std::size_t k = 0; k < boxes.size(); ++k) {
      const auto& box = boxes[k].box;
      if (live != nullptr) {
        const ImageRaster* img = frames->get(frame);
        if (img == nullptr) throw InvalidInput("frame " + std::to_string(frame) + " image missing for live embedding");
        FaceInstance f;
        f.frame_index = frame;
        f.face_id = "f" + std::to_string(frame) + "_" + std::to_string(k);
        f.box = box;
        f.embedding = live->embed(crop(*img, box));
        out.push_back(std::move(f));
        continue;
      }
      const auto stored = faces.find(frame);
      const FaceInstance* match = nullptr;
      if (stored != faces.end()) {
        for (const auto& f : stored->second)
          if (same_box(f.box, box)) match = &f;
      }
      if (match == nullptr) {
        throw InvalidInput("frame " + std::to_string(frame) + ": no embedding for detection " + std::to_string(k) +
                           " of image '" + image_id + "'");
      }
      out.push_back(*match);
    }
  }
  return joined;
}

double threshold_of(const Options& o) {
  if (o.threshold) return *o.threshold;
  if (o.calibration.empty()) throw InvalidInput("count needs --threshold or --calibration");
  std::ifstream in(o.calibration);
  if (!in) throw InvalidInput("cannot open calibration report " + o.calibration);
  const auto j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("threshold")) throw InvalidInput("calibration report lacks a threshold");
  return threshold_from_json(j.at("threshold"));
}

CounterConfig counter_config(const Options& o) {
  CounterConfig c;
  c.match.neighborhood_px = o.neighborhood;
  c.gallery_depth = o.gallery_depth;
  c.models.seed = o.seed;
  c.models.svm.seed = o.seed;
  return c;
}

struct PositiveSetup {
  std::unique_ptr<FrameCache> frames;
  std::unique_ptr<SubprocessEmbedder> embedder;
  std::unique_ptr<PositiveSource> source;
};

// Image-based augmentation needs frames and an embedder. Otherwise positives
// are jittered copies of the stored embedding.
PositiveSetup positive_setup(const Options& o) {
  PositiveSetup s;
  if (!o.frames_dir.empty()) s.frames = std::make_unique<FrameCache>(o.frames_dir);
  if (!o.embed_cmd.empty()) {
    if (!s.frames) throw InvalidInput("--embed-cmd requires --frames-dir");
    s.embedder = std::make_unique<SubprocessEmbedder>(o.embed_cmd);
    AugmentationSpec spec;
    spec.seed = o.seed;
    FrameCache* cache = s.frames.get();
    s.source = std::make_unique<ImagePositiveSource>([cache](std::size_t f) { return cache->get(f); }, *s.embedder,
                                                     spec);
  } else {
    JitterSpec spec;
    spec.seed = o.seed;
    s.source = std::make_unique<JitterPositiveSource>(spec);
  }
  return s;
}

int cmd_count(const Options& o) {
  auto config = counter_config(o);
  config.match.threshold = threshold_of(o);
  auto setup = positive_setup(o);
  const auto faces = gather_faces(o, setup.frames.get(), setup.embedder.get());

  std::size_t n_frames = o.n_frames;
  if (n_frames == 0) n_frames = faces.empty() ? 0 : faces.rbegin()->first + 1;
  if (n_frames == 0) throw InvalidInput("no frames to count");

  CountState state;
  const std::vector<FaceInstance> none;
  for (std::size_t f : sample_frames(FrameStream::contiguous(n_frames), o.stride)) {
    const auto it = faces.find(f);
    update_count(state, it == faces.end() ? none : it->second, f, config, *setup.source);
    if (setup.frames) setup.frames->drop_before(f);
  }
  const auto result = final_count(state);
  const auto dir = out_dir(o);
  write_json(dir / "count.json", to_json(result));
  write_csv(dir / "count_log.csv", [&](std::ostream& s) { write_count_log_csv(s, result.log); });
  std::cout << result.total << "\n";
  return 0;
}

// --- calibration ------------------------------------------------------------

struct FaceRef {
  std::size_t frame;
  std::string face_id;
};

FaceRef face_ref(const json& j, std::size_t line) {
  if (!j.is_object() || !j.contains("frame") || !j.contains("face_id") || !j["frame"].is_number_unsigned() ||
      !j["face_id"].is_string()) {
    throw ParseError("face reference needs an unsigned 'frame' and a string 'face_id'", line);
  }
  return {j["frame"].get<std::size_t>(), j["face_id"].get<std::string>()};
}

// Labeled pairs carry either a precomputed "score" or face references that
// are scored with the query face's model.
std::vector<LabeledScore> load_pairs(const Options& o) {
  std::ifstream in(o.pairs);
  if (!in) throw InvalidInput("cannot open pair file " + o.pairs);

  struct Pending {
    FaceRef query, candidate;
    bool match;
  };
  std::vector<LabeledScore> scored;
  std::vector<Pending> pending;
  std::string text;
  for (std::size_t line = 1; std::getline(in, text); ++line) {
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("not a JSON object", line);
    if (!j.contains("match") || !j["match"].is_boolean()) throw ParseError("missing boolean 'match'", line);
    const bool match = j["match"].get<bool>();
    if (j.contains("score")) {
      if (!j["score"].is_number()) throw ParseError("'score' must be a number", line);
      scored.push_back({j["score"].get<double>(), match});
    } else if (j.contains("query") && j.contains("candidate")) {
      pending.push_back({face_ref(j["query"], line), face_ref(j["candidate"], line), match});
    } else {
      throw ParseError("pair needs 'score' or 'query' and 'candidate'", line);
    }
  }
  if (scored.empty() && pending.empty()) throw InvalidInput("pair file " + o.pairs + " is empty");
  if (pending.empty()) return scored;

  require(o.embeddings, "--embeddings (pairs reference faces)");
  const auto frames = by_frame(load_embeddings(fs::path(o.embeddings)));
  auto find = [&](const FaceRef& r) -> std::pair<const std::vector<FaceInstance>*, std::size_t> {
    const auto it = frames.find(r.frame);
    if (it != frames.end()) {
      for (std::size_t i = 0; i < it->second.size(); ++i)
        if (it->second[i].face_id == r.face_id) return {&it->second, i};
    }
    throw InvalidInput("no embedding for face '" + r.face_id + "' in frame " + std::to_string(r.frame));
  };

  auto setup = positive_setup(o);
  const auto config = counter_config(o);
  // models are trained per query frame exactly as the counter would
  std::map<std::size_t, std::vector<LinearSVM>> models;
  for (const auto& p : pending) {
    const auto [list, index] = find(p.query);
    auto it = models.find(p.query.frame);
    if (it == models.end()) {
      it = models.emplace(p.query.frame, train_face_models(*list, {}, {}, config.models, *setup.source)).first;
    }
    const auto [clist, cindex] = find(p.candidate);
    scored.push_back({svm_score(it->second[index], (*clist)[cindex].embedding.normalized()), p.match});
  }
  return scored;
}

int cmd_calibrate(const Options& o) {
  require(o.pairs, "--pairs");
  const auto labeled = load_pairs(o);
  const auto cv = cross_validate_threshold(labeled, o.folds, o.seed);
  auto j = to_json(cv.calibration);
  std::vector<std::string> warnings;
  if (cv.calibration.f_half <= 0.5) {
    warnings.push_back("best F0.5 is " + format_real(cv.calibration.f_half) + "; scores barely separate matches");
  }
  if (o.folds > 1) {
    j["folds"] = o.folds;
    j["fold_f_half"] = cv.fold_f_half;
    j["mean_f_half"] = cv.mean_f_half;
  }
  j["warnings"] = warnings;
  write_json(out_dir(o) / "calibration.json", j);
  for (const auto& w : warnings) warn(w);
  return 0;
}

// --- detection --------------------------------------------------------------

int cmd_detect(const Options& o) {
  require(o.backend_cmd, "--backend-cmd");
  if (o.images.empty()) throw InvalidInput("detect needs at least one --image");
  const auto pyramid = pyramid_from(o);
  SubprocessDetector detector(o.backend_cmd);
  DetectionMap out;
  for (const auto& path : o.images) {
    const auto img = read_ppm(fs::path(path));
    out[fs::path(path).filename().string()] = detect_multiscale(img, detector, pyramid);
  }
  std::ostringstream s;
  write_detections(s, out);
  write_text(out_dir(o) / "detections.jsonl", s.str());
  return 0;
}

// --- errors -----------------------------------------------------------------

int fail(const char* kind, const std::string& message, std::optional<std::size_t> line = {}) {
  json err{{"error", kind}, {"message", message}};
  if (line) err["line"] = *line;
  std::cerr << err.dump() << "\n";
  return kind == std::string("usage") ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowdcount: face-detector evaluation and unique-face counting"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;

  app.add_option("--threads", o.threads, "OpenMP worker threads (0 keeps the default)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", o.out, "output directory");
  app.add_option("--seed", o.seed, "seed for every randomized step");

  auto annotations = [&](CLI::App* c) { c->add_option("--annotations", o.annotations, "WIDERFACE ground truth file"); };
  auto detections = [&](CLI::App* c) { c->add_option("--detections", o.detections, "detection JSONL"); };
  auto iou = [&](CLI::App* c) {
    c->add_option("--iou-threshold", o.iou_threshold, "IoU needed for a true positive")->check(CLI::Range(0.0, 1.0));
  };
  auto pyramid = [&](CLI::App* c) {
    c->add_option("--backend-cmd", o.backend_cmd, "detector backend command (subprocess JSONL)");
    c->add_option("--scales", o.scales, "pyramid exponents k_min:k_max");
    c->add_option("--nms-threshold", o.nms_threshold, "NMS overlap threshold")->check(CLI::Range(0.0, 1.0));
  };
  auto matching = [&](CLI::App* c) {
    c->add_option("--embeddings", o.embeddings, "embedding JSONL");
    c->add_option("--frames-dir", o.frames_dir, "directory of NNNNNN.ppm frames");
    c->add_option("--embed-cmd", o.embed_cmd, "embedder backend command (subprocess JSONL)");
    c->add_option("--neighborhood", o.neighborhood, "side of the square match window in pixels")
        ->check(CLI::PositiveNumber);
  };

  auto* eval = app.add_subcommand("eval", "TP/GT, AP and mean IoU of stored detections");
  annotations(eval);
  detections(eval);
  iou(eval);
  eval->add_option("--ap-mode", o.ap_mode, "pooled or per-image-mean");

  auto* res = app.add_subcommand("study-resolution", "detection quality against input downscaling");
  annotations(res);
  iou(res);
  pyramid(res);
  res->add_option("--images-dir", o.images_dir, "directory holding the annotated images (PPM)");
  res->add_option("--study-scales", o.study_scales, "downscaling factors")->delimiter(',');
  res->add_option("--scaled-detections", o.scaled_detections, "SCALE:PATH of precomputed detections");

  auto* blur = app.add_subcommand("study-blur", "all faces against heavy-blur faces");
  annotations(blur);
  detections(blur);
  iou(blur);
  blur->add_option("--ap-mode", o.ap_mode, "pooled or per-image-mean");

  auto* bench = app.add_subcommand("benchmark", "TP/GT per algorithm and category");
  annotations(bench);
  iou(bench);
  bench->add_option("--run", o.runs, "ALGO:CATEGORY:PATH; PATH.meta.json may give wall_time_s");

  auto* count = app.add_subcommand("count", "unique faces over a clip");
  detections(count);
  matching(count);
  count->add_option("--stride", o.stride, "analyze every n-th frame")->check(CLI::PositiveNumber);
  count->add_option("--gallery-depth", o.gallery_depth, "analyzed frames kept for matching")
      ->check(CLI::PositiveNumber);
  count->add_option("--n-frames", o.n_frames, "clip length (default: last frame with faces + 1)");
  auto* thr = count->add_option("--threshold", o.threshold, "match threshold on the SVM score");
  count->add_option("--calibration", o.calibration, "calibration.json from the calibrate command")->excludes(thr);

  auto* calib = app.add_subcommand("calibrate", "F0.5-optimal match threshold from labeled pairs");
  matching(calib);
  calib->add_option("--pairs", o.pairs, "labeled pair JSONL");
  calib->add_option("--folds", o.folds, "cross-validation folds")->check(CLI::PositiveNumber);

  auto* detect = app.add_subcommand("detect", "run the pyramid detector on PPM images");
  pyramid(detect);
  detect->add_option("--image", o.images, "input image (PPM)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (o.threads > 0) omp_set_num_threads(o.threads);
    if (*eval) return cmd_eval(o);
    if (*res) return cmd_study_resolution(o);
    if (*blur) return cmd_study_blur(o);
    if (*bench) return cmd_benchmark(o);
    if (*count) return cmd_count(o);
    if (*calib) return cmd_calibrate(o);
    if (*detect) return cmd_detect(o);
  } catch (const ParseError& e) {
    return fail("parse", e.what(), e.line());
  } catch (const ProtocolError& e) {
    return fail("protocol", e.what());
  } catch (const BackendError& e) {
    return fail("backend", e.what());
  } catch (const InvalidInput& e) {
    return fail("input", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return fail("usage", "no subcommand");
}
