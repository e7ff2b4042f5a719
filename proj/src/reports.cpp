#include "crowdcount/reports.hpp"

#include <cmath>
#include <ostream>

#include "crowdcount/error.hpp"
#include "text_util.hpp"

namespace crowdcount {

using nlohmann::json;

std::string format_real(double value) { return text::shortest(value); }

namespace {

json threshold_json(double t) {
  if (std::isinf(t)) return t > 0 ? "inf" : "-inf";
  return t;
}

}  // namespace

double threshold_from_json(const json& value) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw InvalidInput("threshold must be a number, \"inf\" or \"-inf\"");
}

json to_json(const EvalReport& r) {
  return {{"tp_gt_ratio", r.tp_gt_ratio},
          {"average_precision", r.average_precision},
          {"mean_jaccard", r.mean_jaccard},
          {"ap_mode", to_string(r.ap_mode)},
          {"n_images", r.n_images},
          {"n_gt", r.n_gt},
          {"n_predictions", r.n_predictions},
          {"n_true_positives", r.n_true_positives},
          {"n_pr_points", r.pr_curve.size()},
          {"warnings", r.warnings}};
}

json to_json(const Calibration& c) {
  return {{"threshold", threshold_json(c.threshold)},
          {"precision", c.precision},
          {"recall", c.recall},
          {"f_half", c.f_half},
          {"n_pairs", c.n_pairs}};
}

json to_json(const CountResult& result) {
  json frames = json::array();
  for (const auto& row : result.log) {
    frames.push_back({{"frame", row.frame}, {"detected", row.detected}, {"new", row.new_faces}, {"matched", row.matched}});
  }
  return {{"total", result.total}, {"frames", frames}};
}

json to_json(const BlurStudy& study) {
  return {{"all_faces", to_json(study.all_faces)},
          {"heavy_blur", to_json(study.heavy_blur)},
          {"heavy_blur_empty", study.heavy_blur_empty}};
}

void write_pr_curve_csv(std::ostream& out, std::span<const PRPoint> curve) {
  out << "threshold,precision,recall\n";
  for (const auto& p : curve) {
    out << format_real(p.score_threshold) << ',' << format_real(p.precision) << ',' << format_real(p.recall) << '\n';
  }
}

void write_per_image_csv(std::ostream& out, std::span<const ImageStats> stats) {
  out << "image,n_gt,n_predictions,true_positives,tp_gt,mean_jaccard\n";
  for (const auto& s : stats) {
    out << s.image_id << ',' << s.n_gt << ',' << s.n_predictions << ',' << s.true_positives << ','
        << format_real(s.tp_gt_ratio) << ',' << format_real(s.mean_jaccard) << '\n';
  }
}

void write_resolution_csv(std::ostream& out, std::span<const ResolutionRow> rows) {
  out << "scale,tp_gt,mean_iou,n_detected\n";
  for (const auto& r : rows) {
    out << format_real(r.scale) << ',' << format_real(r.tp_gt) << ',' << format_real(r.mean_iou) << ','
        << r.n_detected << '\n';
  }
}

void write_benchmark_csv(std::ostream& out, std::span<const BenchmarkRow> rows) {
  out << "algorithm,category,tp_gt,wall_time\n";
  for (const auto& r : rows) {
    out << r.algorithm << ',' << r.category << ',' << format_real(r.tp_gt) << ','
        << (r.wall_time_s ? format_real(*r.wall_time_s) : std::string()) << '\n';
  }
}

void write_count_log_csv(std::ostream& out, std::span<const FrameLog> log) {
  out << "frame,detected,new,matched\n";
  for (const auto& row : log) {
    out << row.frame << ',' << row.detected << ',' << row.new_faces << ',' << row.matched << '\n';
  }
}

}  // namespace crowdcount
