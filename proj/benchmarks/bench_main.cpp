// Microbenchmarks for the kernels the pipeline spends its time in: the
// GEMM variants at real layer shapes, Im2Col lowering, normalization plus
// encoding, and the rotation-sweep matcher.

#include <benchmark/benchmark.h>

#include <vector>

#include "iris/accel.hpp"
#include "iris/codec.hpp"
#include "iris/contour.hpp"
#include "iris/ops.hpp"
#include "iris/rng.hpp"
#include "iris/tensor.hpp"

namespace {

iris::Matrix random_matrix(int r, int c, uint64_t seed) {
  iris::Rng rng(seed);
  iris::Matrix m(r, c);
  for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
  return m;
}

iris::QMatrix random_qmatrix(int r, int c, int fl, uint64_t seed) {
  iris::Rng rng(seed);
  iris::QMatrix m(r, c, fl);
  for (int8_t& v : m.data) v = static_cast<int8_t>(rng.uniform_int(-8, 8));
  return m;
}

// The first and widest lowered layers of the full-resolution network.
constexpr int kShapes[2][3] = {{16, 9, 76800}, {32, 144, 19200}};

void BM_GemmRef(benchmark::State& state) {
  const auto& s = kShapes[state.range(0)];
  const iris::Matrix a = random_matrix(s[0], s[1], 1);
  const iris::Matrix b = random_matrix(s[1], s[2], 2);
  for (auto _ : state) benchmark::DoNotOptimize(iris::gemm_ref(a, b));
  state.SetItemsProcessed(state.iterations() * int64_t{s[0]} * s[1] * s[2]);
}
BENCHMARK(BM_GemmRef)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GemmRefQ(benchmark::State& state) {
  const auto& s = kShapes[state.range(0)];
  const iris::QMatrix a = random_qmatrix(s[0], s[1], 6, 1);
  const iris::QMatrix b = random_qmatrix(s[1], s[2], 6, 2);
  const std::vector<int32_t> bias(s[0], 128);
  for (auto _ : state)
    benchmark::DoNotOptimize(iris::gemm_ref_q_bias(a, b, bias, 6));
  state.SetItemsProcessed(state.iterations() * int64_t{s[0]} * s[1] * s[2]);
}
BENCHMARK(BM_GemmRefQ)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_AccelGemmQ(benchmark::State& state) {
  const auto& s = kShapes[state.range(0)];
  const iris::QMatrix a = random_qmatrix(s[0], s[1], 6, 1);
  const iris::QMatrix b = random_qmatrix(s[1], s[2], 6, 2);
  const std::vector<int32_t> bias(s[0], 128);
  for (auto _ : state)
    benchmark::DoNotOptimize(iris::accel_gemm_q(a, b, bias, 6));
  state.SetItemsProcessed(state.iterations() * int64_t{s[0]} * s[1] * s[2]);
}
BENCHMARK(BM_AccelGemmQ)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Im2col(benchmark::State& state) {
  iris::Rng rng(3);
  iris::Tensor x(16, 120, 160);
  for (double& v : x.data) v = rng.uniform(0.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(iris::im2col(x, 3, 1, 1));
}
BENCHMARK(BM_Im2col)->Unit(benchmark::kMillisecond);

void BM_RubberSheetEncode(benchmark::State& state) {
  iris::Rng rng(4);
  iris::Tensor img(1, 128, 128);
  for (double& v : img.data) v = rng.uniform(0.0, 1.0);
  iris::BinaryMask seg(128, 128);
  for (auto& v : seg.data) v = 1;
  iris::EyeGeometry geo;
  geo.iris_cx = geo.iris_cy = geo.pupil_cx = geo.pupil_cy = 64.0;
  geo.iris_r = 40.0;
  geo.pupil_r = 15.0;
  for (auto _ : state) {
    const iris::NormalizedGrid grid = iris::rubber_sheet(img, geo, seg);
    benchmark::DoNotOptimize(iris::encode(grid));
  }
}
BENCHMARK(BM_RubberSheetEncode)->Unit(benchmark::kMicrosecond);

void BM_MatchMinHd(benchmark::State& state) {
  iris::Rng rng(5);
  iris::IrisCode a, b;
  for (int i = 0; i < iris::IrisCode::kBits; ++i) {
    a.code[i] = rng.uniform(0.0, 1.0) < 0.5;
    a.mask[i] = rng.uniform(0.0, 1.0) < 0.8;
    b.code[i] = rng.uniform(0.0, 1.0) < 0.5;
    b.mask[i] = rng.uniform(0.0, 1.0) < 0.8;
  }
  for (auto _ : state) benchmark::DoNotOptimize(iris::match_min_hd(a, b));
  state.SetItemsProcessed(state.iterations() * 25);
}
BENCHMARK(BM_MatchMinHd)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
