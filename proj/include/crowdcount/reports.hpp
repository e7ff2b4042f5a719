#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdcount/counter.hpp"
#include "crowdcount/matchkit.hpp"
#include "crowdcount/metrics.hpp"
#include "crowdcount/studies.hpp"

namespace crowdcount {

// Flat JSON forms of the reports. Infinite thresholds are written as the
// strings "inf" / "-inf".
nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const Calibration& calibration);
nlohmann::json to_json(const CountResult& result);
nlohmann::json to_json(const BlurStudy& study);

double threshold_from_json(const nlohmann::json& value);

void write_pr_curve_csv(std::ostream& out, std::span<const PRPoint> curve);
void write_per_image_csv(std::ostream& out, std::span<const ImageStats> stats);
void write_resolution_csv(std::ostream& out, std::span<const ResolutionRow> rows);
void write_benchmark_csv(std::ostream& out, std::span<const BenchmarkRow> rows);
void write_count_log_csv(std::ostream& out, std::span<const FrameLog> log);

// Shortest decimal text that reads back to the same double.
std::string format_real(double value);

}  // namespace crowdcount
