#include <doctest.h>

#include <random>
#include <sstream>

#include "crowdcount/error.hpp"
#include "crowdcount/studies.hpp"
#include "synthetic.hpp"

using namespace crowdcount;

namespace {

Annotation face(const std::string& image, Box2D box, Blur blur) {
  Annotation a;
  a.image_id = image;
  a.box = box;
  a.blur = blur;
  return a;
}

WiderfaceSet two_images() {
  WiderfaceSet set;
  set.images.push_back({"0--Parade/0_Parade_a.jpg",
                        {face("0--Parade/0_Parade_a.jpg", {0, 0, 10, 10}, Blur::none),
                         face("0--Parade/0_Parade_a.jpg", {50, 0, 10, 10}, Blur::heavy)},
                        0});
  set.images.push_back({"1--Handshaking/1_Handshaking_b.jpg",
                        {face("1--Handshaking/1_Handshaking_b.jpg", {0, 0, 20, 20}, Blur::normal),
                         face("1--Handshaking/1_Handshaking_b.jpg", {100, 100, 20, 20}, Blur::heavy)},
                        0});
  return set;
}

}  // namespace

TEST_CASE("join_detections warns about unmatched ids") {
  const auto set = two_images();
  DetectionMap d;
  d["0--Parade/0_Parade_a.jpg"] = {{{0, 0, 10, 10}, 0.9}};
  d["stray.jpg"] = {};
  std::vector<std::string> warnings;
  const auto images = join_detections(set, d, warnings);
  CHECK(images.size() == 2);
  CHECK(warnings.size() == 2);
  CHECK(overlap_count(set, d) == 1);
}

TEST_CASE("blur stratum without detections") {
  const auto set = two_images();
  DetectionMap d;
  d["0--Parade/0_Parade_a.jpg"] = {{{0, 0, 10, 10}, 0.9}};
  d["1--Handshaking/1_Handshaking_b.jpg"] = {{{0, 0, 20, 20}, 0.8}};
  const auto s = blur_study(set, d, {});
  CHECK(s.heavy_blur.tp_gt_ratio == 0.0);
  CHECK(s.all_faces.tp_gt_ratio == 0.5);
  CHECK_FALSE(s.heavy_blur_empty);
}

TEST_CASE("all faces heavy-blur gives identical reports") {
  auto set = two_images();
  for (auto& img : set.images)
    for (auto& f : img.faces) f.blur = Blur::heavy;
  DetectionMap d;
  d["0--Parade/0_Parade_a.jpg"] = {{{0, 0, 10, 10}, 0.9}, {{49, 0, 10, 10}, 0.4}};
  d["1--Handshaking/1_Handshaking_b.jpg"] = {{{3, 3, 20, 20}, 0.8}};
  const auto s = blur_study(set, d, {});
  CHECK(s.heavy_blur.tp_gt_ratio == s.all_faces.tp_gt_ratio);
  CHECK(s.heavy_blur.average_precision == s.all_faces.average_precision);
  CHECK(s.heavy_blur.mean_jaccard == s.all_faces.mean_jaccard);
  CHECK(s.heavy_blur.pr_curve == s.all_faces.pr_curve);
}

TEST_CASE("empty heavy-blur stratum is flagged") {
  auto set = two_images();
  for (auto& img : set.images)
    for (auto& f : img.faces) f.blur = Blur::none;
  const auto s = blur_study(set, DetectionMap{}, {});
  CHECK(s.heavy_blur_empty);
}

TEST_CASE("blur study equals evaluation of a filtered annotation file") {
  std::mt19937_64 gen(30);
  std::uniform_real_distribution<double> coord(0, 300);
  std::uniform_int_distribution<int> blur(0, 2);
  WiderfaceSet set;
  DetectionMap d;
  for (int i = 0; i < 6; ++i) {
    AnnotatedImage img{"img" + std::to_string(i), {}, 0};
    for (int k = 0; k < 5; ++k)
      img.faces.push_back(face(img.image_id, {coord(gen), coord(gen), 30, 30}, static_cast<Blur>(blur(gen))));
    for (const auto& f : img.faces) {
      d[img.image_id].push_back({{f.box.x + 3, f.box.y - 2, 30, 30}, std::uniform_real_distribution<double>(0, 1)(gen)});
    }
    d[img.image_id].push_back({{coord(gen), coord(gen), 25, 25}, 0.5});
    set.images.push_back(img);
  }
  const auto s = blur_study(set, d, {});

  // filter, write, parse back, evaluate
  WiderfaceSet filtered = set;
  for (auto& img : filtered.images) std::erase_if(img.faces, [](const Annotation& a) { return a.blur != Blur::heavy; });
  std::stringstream file;
  write_widerface(file, filtered);
  const auto reparsed = parse_widerface(file);
  std::vector<std::string> w;
  const auto direct = evaluate(join_detections(reparsed, d, w), {});
  CHECK(s.heavy_blur.tp_gt_ratio == direct.tp_gt_ratio);
  CHECK(s.heavy_blur.average_precision == direct.average_precision);
  CHECK(s.heavy_blur.mean_jaccard == direct.mean_jaccard);
}

TEST_CASE("widerface_category") {
  CHECK(widerface_category("0--Parade/0_Parade_marchingband_1_849.jpg") == "Parade");
  CHECK(widerface_category("5--Car_Accident/5_Car_Accident_Accident_5_98.jpg") == "Car_Accident");
  CHECK(widerface_category("0_Parade_marchingband_1_849.jpg") == "Parade");
}

TEST_CASE("benchmark table") {
  const auto set = two_images();
  std::vector<BenchmarkRun> runs(3);
  runs[0] = {"stubA", "Parade", {{"0--Parade/0_Parade_a.jpg", {{{0, 0, 10, 10}, 0.9}}}}, 1.5};
  runs[1] = {"stubB", "Parade", {{"0--Parade/0_Parade_a.jpg", {{{0, 0, 10, 10}, 0.9}, {{50, 0, 10, 10}, 0.8}}}}, {}};
  runs[2] = {"stubB", "Handshaking", {{"1--Handshaking/1_Handshaking_b.jpg", {}}}, 2.0};
  std::vector<std::string> warnings;
  const auto rows = benchmark_table(set, runs, 0.5, warnings);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].tp_gt == 0.5);
  CHECK(rows[0].wall_time_s == 1.5);
  CHECK(rows[1].tp_gt == 1.0);
  CHECK_FALSE(rows[1].wall_time_s.has_value());
  CHECK(rows[2].tp_gt == 0.0);
  // stubA has no Handshaking run
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("stubA") != std::string::npos);
}

TEST_CASE("resolution study with a recall-halving detector") {
  const auto truth = synthetic::grid_boxes(16, 800, 480);
  REQUIRE(truth.size() == 16);
  WiderfaceSet set;
  AnnotatedImage img{"scene", {}, 0};
  for (const auto& b : truth) img.faces.push_back(face("scene", b, Blur::none));
  set.images.push_back(img);

  synthetic::HalvingDetector detector(truth, 800);
  PyramidConfig identity;
  identity.k_min = identity.k_max = 0;
  const std::vector<double> scales{1.0, 0.5, 0.25};
  const auto rows = resolution_study(set, [](const std::string&) { return ImageRaster(800, 480); }, detector, scales,
                                     identity, 0.5);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].tp_gt == 1.0);
  CHECK(rows[1].tp_gt == 0.5);
  CHECK(rows[2].tp_gt == 0.25);
  CHECK(rows[2].n_detected == 4);
  CHECK_THROWS_AS(resolution_study(set, [](const std::string&) { return ImageRaster(8, 8); }, detector, {}, identity, 0.5),
                  InvalidInput);
}

TEST_CASE("stored resolution study at scale 1 equals plain evaluation") {
  const auto set = two_images();
  DetectionMap d;
  d["0--Parade/0_Parade_a.jpg"] = {{{0, 0, 10, 10}, 0.9}};
  d["1--Handshaking/1_Handshaking_b.jpg"] = {{{1, 0, 20, 20}, 0.8}, {{100, 100, 20, 20}, 0.7}};
  const std::vector<std::pair<double, DetectionMap>> stored{{1.0, d}};
  const auto rows = resolution_study_stored(set, stored, 0.5);
  std::vector<std::string> w;
  const auto report = evaluate(join_detections(set, d, w), {});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].tp_gt == report.tp_gt_ratio);
  CHECK(rows[0].mean_iou == report.mean_jaccard);
}
