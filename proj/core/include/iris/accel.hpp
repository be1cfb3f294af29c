#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iris/dfp.hpp"
#include "iris/tensor.hpp"

namespace iris {

// Tiled GEMM geometry: per tile A is m x k, B is k x n, C is m x n, and one
// column step feeds k products through the adder tree.
struct TileConfig {
  int m = 8;
  int k = 9;
  int n = 224;
};

struct TileCounts {
  uint64_t tiles = 0;
  uint64_t dma_fills = 0;    // buffer-row loads, m + k per tile
  uint64_t write_backs = 0;  // one C flush per (row block, column block)
  uint64_t est_cycles = 0;   // m * n column steps per tile
};

TileCounts tile_schedule(int m, int k, int n, const TileConfig& cfg = {});

struct AccelGemmStats {
  TileCounts counts;
  uint64_t c_saturations = 0;  // 16-bit accumulator clips (int8 path)
};

// Integer datapath: int8 operands, int16 products summed exactly by the
// tree, then accumulated into a saturating int16 C buffer. The per-row bias
// (at fl = a.fl + b.fl) is preloaded into C through the same saturation.
// Output is int8 at out_fl. Matches gemm_ref_q_bias exactly whenever no C
// entry saturates along the way.
QMatrix accel_gemm_q(const QMatrix& a, const QMatrix& b,
                     const std::vector<int32_t>& bias, int out_fl,
                     AccelGemmStats* stats = nullptr,
                     const TileConfig& cfg = {});

// Float datapath: float32 products, a fixed-shape float32 adder tree and a
// float32 C buffer. Deterministic, but rounded differently from the
// double-precision reference GEMM.
Matrix accel_gemm_f(const Matrix& a, const Matrix& b,
                    const std::vector<double>& bias,
                    AccelGemmStats* stats = nullptr,
                    const TileConfig& cfg = {});

struct LayerSchedule {
  int layer = 0;
  std::string kind;  // "conv" or "tconv"
  int m = 0;
  int k = 0;
  int n = 0;
  TileCounts counts;
  uint64_t c_saturations = 0;
};

struct ScheduleReport {
  std::vector<LayerSchedule> layers;
  TileCounts totals;
  uint64_t c_saturations = 0;
};

// Quantized inference with every lowered GEMM routed through the integer
// accelerator model. Bit-identical to quantized_infer whenever the report
// shows zero C-buffer saturations.
BinaryMask run_network_on_accel(const QuantizedNetwork& qnet,
                                const Tensor& image,
                                ScheduleReport* report = nullptr);

// Float inference on the accelerator model: GEMMs run through the float32
// datapath, everything else matches infer(). Masks agree with infer() on
// pixels whose argmax is not within float rounding of a tie.
BinaryMask run_network_on_accel(const Network& net, const Tensor& image,
                                ScheduleReport* report = nullptr);

}  // namespace iris
