// Parallel kernels against their serial references.
#include <benchmark/benchmark.h>

#include <random>

#include "crowdcount/matchkit.hpp"
#include "crowdcount/metrics.hpp"
#include "crowdcount/reference.hpp"

using namespace crowdcount;

namespace {

std::vector<ImageEval> eval_set(std::size_t images) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> pos(0, 1800), jitter(-4, 4), unit(0, 1);
  std::vector<ImageEval> out;
  for (std::size_t i = 0; i < images; ++i) {
    ImageEval e{"img" + std::to_string(i), {}, {}};
    for (int k = 0; k < 60; ++k) {
      const Box2D g{pos(gen), pos(gen), 30, 30};
      e.ground_truth.push_back(g);
      if (unit(gen) < 0.8) e.predictions.push_back({{g.x + jitter(gen), g.y + jitter(gen), 30, 30}, unit(gen)});
    }
    for (int k = 0; k < 20; ++k) e.predictions.push_back({{pos(gen), pos(gen), 25, 25}, unit(gen)});
    out.push_back(std::move(e));
  }
  return out;
}

void BM_evaluate(benchmark::State& state) {
  const auto images = eval_set(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(images, {}));
}

void BM_evaluate_serial(benchmark::State& state) {
  const auto images = eval_set(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::evaluate(images, {}));
}

ImageRaster noise_image(std::size_t w, std::size_t h) {
  std::mt19937_64 gen(2);
  std::vector<std::uint8_t> data(w * h * 3);
  for (auto& b : data) b = static_cast<std::uint8_t>(gen());
  return ImageRaster(w, h, std::move(data));
}

void BM_resize(benchmark::State& state) {
  const auto img = noise_image(1920, 1080);
  for (auto _ : state) benchmark::DoNotOptimize(resize(img, 0.5 * static_cast<double>(state.range(0)), Interpolation::bilinear));
}

void BM_resize_serial(benchmark::State& state) {
  const auto img = noise_image(1920, 1080);
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::resize(img, 0.5 * static_cast<double>(state.range(0)), Interpolation::bilinear));
}

std::vector<FaceInstance> frame_faces(std::size_t n) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal(0, 1);
  std::vector<FaceInstance> faces;
  for (std::size_t i = 0; i < n; ++i) {
    FaceInstance f;
    f.face_id = std::to_string(i);
    f.box = {40.0 * static_cast<double>(i), 100, 40, 40};
    for (auto& v : f.embedding.values) v = normal(gen);
    faces.push_back(f);
  }
  return faces;
}

void BM_train_face_models(benchmark::State& state) {
  const auto faces = frame_faces(static_cast<std::size_t>(state.range(0)));
  JitterPositiveSource source;
  for (auto _ : state) benchmark::DoNotOptimize(train_face_models(faces, {}, {}, {}, source));
}

void BM_train_face_models_serial(benchmark::State& state) {
  const auto faces = frame_faces(static_cast<std::size_t>(state.range(0)));
  JitterPositiveSource source;
  for (auto _ : state) benchmark::DoNotOptimize(reference::train_face_models(faces, {}, {}, {}, source));
}

}  // namespace

BENCHMARK(BM_evaluate)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_evaluate_serial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_resize)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_resize_serial)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_train_face_models)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_train_face_models_serial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
