#include <doctest.h>

#include <cmath>
#include <random>

#include "crowdcount/error.hpp"
#include "crowdcount/pyramid.hpp"

using namespace crowdcount;

namespace {

// Returns the same boxes at every scale, in that scale's frame.
class FixedBackend final : public DetectorBackend {
public:
  explicit FixedBackend(std::vector<ScoredBox> boxes) : boxes_(std::move(boxes)) {}
  BackendInfo info() const override { return {"fixed", "1"}; }
  std::vector<ScoredBox> detect(const ImageRaster&, double scale) override {
    seen_scales.push_back(scale);
    return boxes_;
  }
  std::vector<double> seen_scales;

private:
  std::vector<ScoredBox> boxes_;
};

class FailingBackend final : public DetectorBackend {
public:
  BackendInfo info() const override { return {"flaky", "0.1"}; }
  std::vector<ScoredBox> detect(const ImageRaster&, double scale) override {
    if (scale > 1.0) throw std::runtime_error("out of memory");
    return {{{1, 1, 2, 2}, 0.5}};
  }
};

PyramidConfig scales_between(int lo, int hi) {
  PyramidConfig c;
  c.k_min = lo;
  c.k_max = hi;
  return c;
}

}  // namespace

TEST_CASE("build_scales examples") {
  auto c = scales_between(-2, 1);
  c.max_pixels = 1e7;
  CHECK(build_scales(1000, 800, c) == std::vector<double>{0.25, 0.5, 1.0, 2.0});
  c.max_pixels = 1.3e7;
  CHECK(build_scales(4000, 3000, c) == std::vector<double>{0.25, 0.5, 1.0});
  CHECK(build_scales(640, 480, scales_between(0, 0)) == std::vector<double>{1.0});
}

TEST_CASE("build_scales yields increasing exact powers of two") {
  auto c = scales_between(-6, 4);
  c.max_pixels = 5e6;
  const auto scales = build_scales(1024, 768, c);
  for (std::size_t i = 0; i < scales.size(); ++i) {
    int e = 0;
    CHECK(std::frexp(scales[i], &e) == 0.5);
    if (i > 0) CHECK(scales[i] > scales[i - 1]);
  }
}

TEST_CASE("build_scales errors") {
  auto c = scales_between(0, 1);
  c.max_pixels = 10;
  CHECK_THROWS_AS(build_scales(100, 100, c), InvalidInput);
  CHECK_THROWS_AS(build_scales(100, 100, scales_between(2, 1)), InvalidInput);
}

TEST_CASE("single-scale pyramid reduces to NMS of the backend output") {
  const std::vector<ScoredBox> raw{{{10, 10, 20, 20}, 0.9}, {{11, 11, 20, 20}, 0.8}, {{60, 60, 10, 10}, 0.7}};
  FixedBackend backend(raw);
  auto c = scales_between(0, 0);
  const ImageRaster img(100, 100);
  CHECK(detect_multiscale(img, backend, c) == nms(raw, c.nms_threshold));
  c.nms_threshold = 1.0;
  CHECK(detect_multiscale(img, backend, c) == raw);
}

TEST_CASE("detections are mapped back from every scale") {
  FixedBackend backend({{{10, 10, 20, 20}, 0.9}});
  const auto c = scales_between(0, 1);
  const ImageRaster img(100, 100);
  const auto out = detect_multiscale(img, backend, c);
  CHECK(backend.seen_scales == std::vector<double>{1.0, 2.0});
  REQUIRE(out.size() == 2);  // iou 100 / 400 = 0.25 survives 0.3
  CHECK(out[0].box == Box2D{10, 10, 20, 20});
  CHECK(out[1].box == Box2D{5, 5, 10, 10});
}

TEST_CASE("empty backend output gives no detections") {
  FixedBackend backend({});
  CHECK(detect_multiscale(ImageRaster(64, 64), backend, PyramidConfig{}).empty());
}

TEST_CASE("boxes are clamped to the image and collapsed ones dropped") {
  FixedBackend backend({{{-10, 90, 30, 30}, 0.9}, {{150, 150, 10, 10}, 0.8}});
  const auto out = detect_multiscale(ImageRaster(100, 100), backend, scales_between(0, 0));
  REQUIRE(out.size() == 1);
  CHECK(out[0].box == Box2D{0, 90, 20, 10});
}

TEST_CASE("backend failure names the scale and drops partial results") {
  FailingBackend backend;
  try {
    detect_multiscale(ImageRaster(50, 50), backend, scales_between(0, 1));
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    const std::string what = e.what();
    CHECK(what.find("scale 2") != std::string::npos);
    CHECK(what.find("flaky") != std::string::npos);
    CHECK(what.find("out of memory") != std::string::npos);
  }
}
