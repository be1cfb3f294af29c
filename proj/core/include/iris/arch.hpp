#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace iris {

// Family description of an encoder-decoder segmentation network.
//
//  scale   input downscaling factor applied before the network (1, 0.5, 0.25)
//  n       base feature width N (4, 6, 8, 12 or 16)
//  groups  layer-group sequence, e.g. {0,1,2,3,4,3,2,1,0}; must be a
//          palindrome that rises strictly to a single bottleneck group 4.
struct ArchSpec {
  double scale = 1.0;
  int n = 8;
  std::vector<int> groups;
};

enum class LayerKind : uint8_t { Conv = 0, Tconv = 1, Softmax = 2 };

// One realized layer.  skip_from, where set, names the earlier layer whose
// output is element-wise added to this layer's activated output.
struct LayerSpec {
  LayerKind kind = LayerKind::Conv;
  int kernel = 0;
  int stride = 1;
  int padding = 0;
  int in_channels = 0;
  int out_channels = 0;
  bool relu = false;
  int skip_from = -1;  // -1: no shortcut
};

// "0-1-2-3-4-3-2-1-0" <-> {0,1,2,3,4,3,2,1,0}
std::vector<int> parse_groups(const std::string& s);
std::string format_groups(const std::vector<int>& groups);

// Throws ErrorKind::Validation when any ArchSpec invariant is broken.
void validate_arch(const ArchSpec& spec);

// Expands an ArchSpec into the concrete layer list (convolutions, shortcut
// wiring, final softmax).  The realization downsamples by a total factor of
// 16: groups 1..3 contribute stride-2 convolutions and the group-4
// convolution absorbs the remainder when intermediate groups are absent.
// Decoder transposed convolutions mirror the encoder strides with kernel
// stride+2 and padding 1, so each upsampling is an exact multiple.
std::vector<LayerSpec> plan_layers(const ArchSpec& spec);

// Named presets of the architecture catalog ("fcn0" .. "fcn19").
std::optional<ArchSpec> preset_arch(const std::string& name);
std::vector<std::string> preset_names();

// Number of multiply-accumulates expressed as 2 FLOPs each, summed over
// every CONV/TCONV GEMM at the scaled input dims, plus one FLOP per
// element-wise shortcut addition.  Bias adds, ReLU and softmax are excluded.
// CONV GEMM dims: M=out_c, K=in_c*k*k, N=out_h*out_w.
// TCONV GEMM dims: M=out_c*k*k, K=in_c, N=in_h*in_w.
uint64_t count_flops(const ArchSpec& spec, int input_h, int input_w);

// FLOPs of a single layer given its input extent; helper for count_flops.
uint64_t layer_flops(const LayerSpec& layer, int in_h, int in_w);

}  // namespace iris
