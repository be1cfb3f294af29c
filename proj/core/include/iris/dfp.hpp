#pragma once

#include <cstdint>
#include <vector>

#include "iris/network.hpp"
#include "iris/tensor.hpp"

namespace iris {

// Per-layer 8-bit dynamic fixed point configuration. A stored value v
// represents v * 2^-fl; fl is chosen per tensor, so each layer carries one
// fractional length for its weights and one for each activation it touches.
struct DfpParams {
  int w_bw = 8;
  int a_bw = 8;
  int w_fl = 0;   // weights
  int a_in = 0;   // input activations, equals a_out of the producing layer
  int a_out = 0;  // output activations (after relu and shortcut add)
};

// Largest fl such that max_abs fits in `bw` signed bits, i.e.
// max_abs <= (2^(bw-1) - 1) * 2^-fl. An all-zero tensor has no constraint;
// the search is capped at bw - 1 + 16.
int choose_fl(double max_abs, int bw = 8);

// Runs float inference over the calibration images and picks fls from the
// observed per-layer maxima. The image layer fl is fixed by the [0,1] pixel
// range, not by the calibration set. Softmax rows are left at defaults.
std::vector<DfpParams> profile_activations(const Network& net,
                                           const std::vector<Tensor>& calib);

struct QuantizedNetwork {
  ArchSpec spec;
  std::vector<LayerSpec> layers;
  std::vector<DfpParams> params;  // one per layer
  std::vector<QMatrix> weights;   // int8 at w_fl; empty for softmax
  // Biases are widened to 32 bits at fl = w_fl + a_in so they can join the
  // accumulator without a shift.
  std::vector<std::vector<int32_t>> biases;

  bool is_custom() const { return spec.groups.empty(); }
};

QuantizedNetwork quantize_network(const Network& net,
                                  const std::vector<DfpParams>& params);

// One lowered integer GEMM per layer. Implementations must produce int8
// outputs at out_fl from int64-accumulated int16 products (or a documented
// approximation of that, like the 16-bit accelerator buffer). `bias` holds
// one entry per row of `a` at fl = a.fl + b.fl.
class QGemmEngine {
 public:
  virtual ~QGemmEngine() = default;
  virtual QMatrix gemm(int layer, const QMatrix& a, const QMatrix& b,
                       const std::vector<int32_t>& bias, int out_fl) = 0;
};

// Bit-exact reference engine built on gemm_ref_q_bias.
class RefQGemmEngine : public QGemmEngine {
 public:
  QMatrix gemm(int layer, const QMatrix& a, const QMatrix& b,
               const std::vector<int32_t>& bias, int out_fl) override;
};

struct QuantStats {
  uint64_t int_macs = 0;     // int16 multiplies feeding accumulators
  uint64_t requants = 0;     // values shifted+saturated back to 8 bits
  uint64_t shortcut_adds = 0;
};

// Integer-only forward pass: everything between the input quantization and
// the final argmax is int8/int32 arithmetic routed through `engine`.
// Returns the 2-channel integer logits at params.back-1 a_out.
QTensor quantized_forward(const QuantizedNetwork& qnet, const Tensor& prepared,
                          QGemmEngine& engine, QuantStats* stats = nullptr);

// Full pipeline: prepare, quantize input, integer forward, argmax, crop, and
// upscale back to image dimensions. Ties go to background, matching infer().
BinaryMask quantized_infer(const QuantizedNetwork& qnet, const Tensor& image,
                           QuantStats* stats = nullptr);

// argmax over the two logit planes; both share one fl so the comparison is
// exact. Exposed for the accelerator runner.
BinaryMask logits_argmax(const QTensor& logits);

}  // namespace iris
