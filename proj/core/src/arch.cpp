#include "iris/arch.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "iris/errors.hpp"
#include "iris/ops.hpp"

namespace iris {

std::vector<int> parse_groups(const std::string& s) {
  std::vector<int> groups;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, '-')) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
      throw Error(ErrorKind::Validation, "bad group token '" + tok + "'");
    groups.push_back(std::stoi(tok));
  }
  if (groups.empty())
    throw Error(ErrorKind::Validation, "empty group string");
  return groups;
}

std::string format_groups(const std::vector<int>& groups) {
  std::string out;
  for (size_t i = 0; i < groups.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(groups[i]);
  }
  return out;
}

void validate_arch(const ArchSpec& spec) {
  if (spec.scale != 1.0 && spec.scale != 0.5 && spec.scale != 0.25)
    throw Error(ErrorKind::Validation, "scale must be 1, 0.5 or 0.25");
  if (spec.n != 4 && spec.n != 6 && spec.n != 8 && spec.n != 12 &&
      spec.n != 16)
    throw Error(ErrorKind::Validation, "n must be one of 4, 6, 8, 12, 16");
  const auto& g = spec.groups;
  if (g.size() < 3 || g.size() % 2 == 0)
    throw Error(ErrorKind::Validation,
                "group list must have odd length >= 3");
  if (std::count(g.begin(), g.end(), 4) != 1)
    throw Error(ErrorKind::Validation, "exactly one bottleneck group 4");
  const size_t mid = g.size() / 2;
  if (g[mid] != 4)
    throw Error(ErrorKind::Validation, "group list must be a palindrome");
  for (size_t i = 0; i < mid; ++i) {
    if (g[i] != g[g.size() - 1 - i])
      throw Error(ErrorKind::Validation, "group list must be a palindrome");
    if (g[i] >= g[i + 1])
      throw Error(ErrorKind::Validation,
                  "encoder groups must strictly increase");
  }
  if (g.front() != 0)
    throw Error(ErrorKind::Validation, "group list must start at group 0");
  for (int v : g)
    if (v < 0 || v > 4)
      throw Error(ErrorKind::Validation, "group numbers must be in 0..4");
}

std::vector<LayerSpec> plan_layers(const ArchSpec& spec) {
  validate_arch(spec);
  const auto& g = spec.groups;
  const int ib = static_cast<int>(g.size()) / 2;  // bottleneck position
  const int n = spec.n;
  // Encoder strided groups number ib; the first ib-1 use stride 2 and the
  // group-4 convolution covers the rest of the fixed /16 reduction.
  const int s4 = 1 << (5 - ib);

  std::vector<LayerSpec> layers;
  std::vector<int> skip_source(5, -1);  // per group: layer index to add from

  auto push = [&](LayerSpec l) {
    layers.push_back(l);
    return static_cast<int>(layers.size()) - 1;
  };

  // Encoder.  Group 0 is a single stride-1 convolution.
  int in_c = 1;
  skip_source[0] =
      push({LayerKind::Conv, 3, 1, 1, in_c, n, true, -1});
  in_c = n;
  for (int i = 1; i <= ib; ++i) {
    const int group = g[i];
    const int stride = (group == 4) ? s4 : 2;
    push({LayerKind::Conv, 3, stride, 1, in_c, 2 * n, true, -1});
    in_c = 2 * n;
    const int out2 = (group == 4) ? 4 * n : 2 * n;
    skip_source[group] =
        push({LayerKind::Conv, 3, 1, 1, in_c, out2, true, -1});
    in_c = out2;
  }

  // Decoder.  Each group opens with a transposed convolution that mirrors
  // the matching encoder reduction and receives that group's shortcut.
  for (size_t j = ib + 1; j < g.size(); ++j) {
    const int group = g[j];
    const int up = (j == static_cast<size_t>(ib) + 1) ? s4 : 2;
    const int out_t = (group == 0) ? n : 2 * n;
    push({LayerKind::Tconv, up + 2, up, 1, in_c, out_t, true,
          skip_source[group]});
    in_c = out_t;
    if (group == 0) {
      push({LayerKind::Conv, 1, 1, 0, in_c, 2, false, -1});
      in_c = 2;
    } else {
      push({LayerKind::Conv, 3, 1, 1, in_c, 2 * n, true, -1});
      in_c = 2 * n;
    }
  }

  push({LayerKind::Softmax, 0, 1, 0, 2, 2, false, -1});
  return layers;
}

std::optional<ArchSpec> preset_arch(const std::string& name) {
  static const std::map<std::string, ArchSpec> presets = {
      {"fcn0", {1.0, 12, {0, 1, 2, 3, 4, 3, 2, 1, 0}}},
      {"fcn1", {1.0, 8, {0, 1, 2, 3, 4, 3, 2, 1, 0}}},
      {"fcn2", {1.0, 12, {0, 1, 2, 4, 2, 1, 0}}},
      {"fcn3", {1.0, 4, {0, 1, 2, 3, 4, 3, 2, 1, 0}}},
      {"fcn4", {0.5, 8, {0, 1, 2, 4, 2, 1, 0}}},
      {"fcn5", {0.5, 4, {0, 1, 2, 4, 2, 1, 0}}},
      {"fcn6", {1.0, 4, {0, 1, 2, 4, 2, 1, 0}}},
      {"fcn7", {0.25, 4, {0, 1, 4, 1, 0}}},
      {"fcn8", {0.25, 4, {0, 4, 0}}},
      {"fcn9", {1.0, 16, {0, 1, 2, 3, 4, 3, 2, 1, 0}}},
      {"fcn10", {1.0, 8, {0, 1, 2, 3, 4, 3, 2, 1, 0}}},
      {"fcn11", {1.0, 6, {0, 1, 2, 3, 4, 3, 2, 1, 0}}},
      {"fcn12", {1.0, 4, {0, 1, 2, 3, 4, 3, 2, 1, 0}}},
      {"fcn13", {1.0, 4, {0, 1, 2, 4, 2, 1, 0}}},
      {"fcn14", {0.5, 8, {0, 1, 2, 4, 2, 1, 0}}},
      {"fcn15", {0.5, 4, {0, 1, 2, 4, 2, 1, 0}}},
      {"fcn16", {0.25, 8, {0, 1, 4, 1, 0}}},
      {"fcn17", {0.25, 4, {0, 1, 4, 1, 0}}},
      {"fcn18", {0.25, 8, {0, 4, 0}}},
      {"fcn19", {0.25, 4, {0, 4, 0}}},
  };
  auto it = presets.find(name);
  if (it == presets.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (int i = 0; i <= 19; ++i) names.push_back("fcn" + std::to_string(i));
  return names;
}

uint64_t layer_flops(const LayerSpec& layer, int in_h, int in_w) {
  if (layer.kind == LayerKind::Softmax) return 0;
  const uint64_t k2 =
      static_cast<uint64_t>(layer.kernel) * layer.kernel;
  if (layer.kind == LayerKind::Conv) {
    const uint64_t out_h =
        conv_out_extent(in_h, layer.kernel, layer.stride, layer.padding);
    const uint64_t out_w =
        conv_out_extent(in_w, layer.kernel, layer.stride, layer.padding);
    // M=out_c, K=in_c*k*k, N=out_h*out_w
    return 2ull * layer.out_channels * layer.in_channels * k2 * out_h * out_w;
  }
  // Transposed convolution runs its GEMM over the input extent:
  // M=out_c*k*k, K=in_c, N=in_h*in_w.
  return 2ull * layer.out_channels * k2 * layer.in_channels *
         static_cast<uint64_t>(in_h) * in_w;
}

uint64_t count_flops(const ArchSpec& spec, int input_h, int input_w) {
  const auto layers = plan_layers(spec);
  int h = static_cast<int>(std::llround(spec.scale * input_h));
  int w = static_cast<int>(std::llround(spec.scale * input_w));
  uint64_t total = 0;
  // A transposed convolution mirrors its shortcut partner, so its output
  // takes the partner's extent. On extents the strides divide exactly this
  // equals in*stride; otherwise it matches what inference executes after
  // padding, minus the padding itself.
  std::vector<std::pair<int, int>> post_dims(layers.size(), {0, 0});
  for (size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.kind == LayerKind::Softmax) continue;
    total += layer_flops(l, h, w);
    if (l.kind == LayerKind::Conv) {
      h = conv_out_extent(h, l.kernel, l.stride, l.padding);
      w = conv_out_extent(w, l.kernel, l.stride, l.padding);
    } else if (l.skip_from >= 0) {
      h = post_dims[l.skip_from].first;
      w = post_dims[l.skip_from].second;
    } else {
      h *= l.stride;
      w *= l.stride;
    }
    post_dims[i] = {h, w};
    if (l.skip_from >= 0)
      total += static_cast<uint64_t>(l.out_channels) * h * w;
  }
  return total;
}

}  // namespace iris
