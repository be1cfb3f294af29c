#pragma once

#include <string>
#include <vector>

#include "iris/arch.hpp"
#include "iris/tensor.hpp"

namespace iris {

// A realized network: layer plan plus parameters.
//
// Weight layout per layer kind (row-major):
//  Conv   M x K with M = out_channels, K = in_channels*k*k; applied as
//         out = W * im2col(x) + bias.
//  Tconv  M x K with M = out_channels*k*k, K = in_channels; applied as
//         out = col2im(W * flatten(x)) + bias.
struct Network {
  ArchSpec spec;                 // family parameters; groups empty => custom
  std::vector<LayerSpec> layers;
  std::vector<Matrix> weights;   // empty matrix for softmax
  std::vector<std::vector<double>> biases;

  bool is_custom() const { return spec.groups.empty(); }
};

// Realizes an ArchSpec with zero-valued parameters.
Network build_network(const ArchSpec& spec);

// Uniform fan-in initialization, U(-sqrt(6/fan_in), +sqrt(6/fan_in)),
// biases 0; deterministic in the seed.
void init_weights(Network& net, uint64_t seed);

// Per-layer activations kept for backpropagation.
struct ForwardTrace {
  Tensor input;               // tensor fed to layer 0
  std::vector<Tensor> pre;    // pre-activation (after bias, before ReLU/skip)
  std::vector<Tensor> post;   // output as consumed downstream
  Tensor probs;               // softmax output
};

// Runs all layers on a prepared input (already scaled and padded).
// Shortcut edges add the source layer's consumed output to this layer's
// activated output.  Returns softmax probabilities; fills trace if given.
Tensor forward(const Network& net, const Tensor& input,
               ForwardTrace* trace = nullptr);

// The product of all convolution strides: input extents must be divisible
// by this for shortcut shapes to line up (16 for catalog networks).
int stride_divisor(const std::vector<LayerSpec>& layers);
int stride_divisor(const Network& net);

// Prepares a [0,1] grayscale image for a network: nearest-neighbour
// downscale by `scale`, then zero padding at right/bottom up to `divisor`.
Tensor prepare_input(double scale, int divisor, const Tensor& image,
                     int* scaled_h = nullptr, int* scaled_w = nullptr);
Tensor prepare_input(const Network& net, const Tensor& image,
                     int* scaled_h = nullptr, int* scaled_w = nullptr);

// Crops the padded region away and nearest-upscales back to image dims.
BinaryMask finalize_mask(const BinaryMask& padded, int scaled_h, int scaled_w,
                         int out_h, int out_w);

// Full inference: prepare, forward, per-pixel argmax (ties resolve to
// background), crop the padding, nearest upscale back to image dims.
BinaryMask infer(const Network& net, const Tensor& image);

// Batch-normalization statistics for one convolution output channel set.
struct BnParams {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> mean;
  std::vector<double> var;
};

// Folds y = gamma*(conv(x)-mean)/sqrt(var+eps)+beta into the convolution's
// weights and bias.  Valid for Conv layers (per-output-channel rows).
void fold_bn(Matrix& weight, std::vector<double>& bias, const BnParams& bn,
             double eps = 1e-5);

}  // namespace iris
