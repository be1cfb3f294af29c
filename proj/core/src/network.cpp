#include "iris/network.hpp"

#include <cmath>

#include "iris/errors.hpp"
#include "iris/ops.hpp"
#include "iris/rng.hpp"

namespace iris {

namespace {

void weight_dims(const LayerSpec& l, int& rows, int& cols) {
  if (l.kind == LayerKind::Conv) {
    rows = l.out_channels;
    cols = l.in_channels * l.kernel * l.kernel;
  } else if (l.kind == LayerKind::Tconv) {
    rows = l.out_channels * l.kernel * l.kernel;
    cols = l.in_channels;
  } else {
    rows = cols = 0;
  }
}

}  // namespace

Network build_network(const ArchSpec& spec) {
  Network net;
  net.spec = spec;
  net.layers = plan_layers(spec);
  for (const auto& l : net.layers) {
    int r, c;
    weight_dims(l, r, c);
    net.weights.emplace_back(r, c);
    net.biases.emplace_back(
        l.kind == LayerKind::Softmax ? 0 : l.out_channels, 0.0);
  }
  return net;
}

void init_weights(Network& net, uint64_t seed) {
  Rng rng(seed);
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    if (l.kind == LayerKind::Softmax) continue;
    // Fan-in of one output element.
    const int fan_in = (l.kind == LayerKind::Conv)
                           ? l.in_channels * l.kernel * l.kernel
                           : l.in_channels;
    const double bound = std::sqrt(6.0 / fan_in);
    for (double& w : net.weights[i].data) w = rng.uniform(-bound, bound);
    for (double& b : net.biases[i]) b = 0.0;
  }
}

Tensor forward(const Network& net, const Tensor& input, ForwardTrace* trace) {
  if (net.layers.empty() || net.layers.back().kind != LayerKind::Softmax)
    throw Error(ErrorKind::Validation, "network must end in softmax");
  if (input.channels != net.layers.front().in_channels)
    throw Error(ErrorKind::Dimension, "input channel mismatch");

  if (trace) {
    trace->input = input;
    trace->pre.assign(net.layers.size(), Tensor());
    trace->post.assign(net.layers.size(), Tensor());
  }

  std::vector<Tensor> post(net.layers.size());
  const Tensor* x = &input;
  Tensor logits;
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    if (l.kind == LayerKind::Softmax) {
      logits = *x;
      break;
    }
    Tensor raw;
    if (l.kind == LayerKind::Conv) {
      const Matrix cols = im2col(*x, l.kernel, l.stride, l.padding);
      const Matrix prod = gemm_ref(net.weights[i], cols);
      const int oh = conv_out_extent(x->height, l.kernel, l.stride, l.padding);
      const int ow = conv_out_extent(x->width, l.kernel, l.stride, l.padding);
      raw = Tensor(l.out_channels, oh, ow);
      raw.data = prod.data;  // rows are channels, columns pixels
    } else {
      Matrix flat(l.in_channels, x->height * x->width);
      flat.data = x->data;
      const Matrix cols = gemm_ref(net.weights[i], flat);
      raw = col2im(cols, l.out_channels, x->height * l.stride,
                   x->width * l.stride, l.kernel, l.stride, l.padding);
    }
    const size_t plane = static_cast<size_t>(raw.height) * raw.width;
    for (int c = 0; c < l.out_channels; ++c)
      for (size_t p = 0; p < plane; ++p)
        raw.data[c * plane + p] += net.biases[i][c];
    if (trace) trace->pre[i] = raw;

    Tensor out = raw;
    if (l.relu) relu_inplace(out);
    if (l.skip_from >= 0) {
      const Tensor& other = post[l.skip_from];
      if (other.channels != out.channels || other.height != out.height ||
          other.width != out.width)
        throw Error(ErrorKind::Dimension, "shortcut shape mismatch");
      for (size_t p = 0; p < out.data.size(); ++p)
        out.data[p] += other.data[p];
    }
    post[i] = std::move(out);
    if (trace) trace->post[i] = post[i];
    x = &post[i];
  }

  Tensor probs = softmax2(logits);
  if (trace) trace->probs = probs;
  return probs;
}

int stride_divisor(const std::vector<LayerSpec>& layers) {
  int div = 1;
  for (const auto& l : layers)
    if (l.kind == LayerKind::Conv) div *= l.stride;
  return div;
}

int stride_divisor(const Network& net) { return stride_divisor(net.layers); }

Tensor prepare_input(double scale, int divisor, const Tensor& image,
                     int* scaled_h, int* scaled_w) {
  Tensor scaled = (scale != 1.0) ? nearest_resize(image, scale) : image;
  if (scaled_h) *scaled_h = scaled.height;
  if (scaled_w) *scaled_w = scaled.width;
  const int ph = (scaled.height + divisor - 1) / divisor * divisor;
  const int pw = (scaled.width + divisor - 1) / divisor * divisor;
  if (ph == scaled.height && pw == scaled.width) return scaled;
  Tensor padded(scaled.channels, ph, pw);
  for (int c = 0; c < scaled.channels; ++c)
    for (int y = 0; y < scaled.height; ++y)
      for (int x = 0; x < scaled.width; ++x)
        padded.at(c, y, x) = scaled.at(c, y, x);
  return padded;
}

Tensor prepare_input(const Network& net, const Tensor& image, int* scaled_h,
                     int* scaled_w) {
  return prepare_input(net.spec.scale, stride_divisor(net), image, scaled_h,
                       scaled_w);
}

BinaryMask finalize_mask(const BinaryMask& padded, int scaled_h, int scaled_w,
                         int out_h, int out_w) {
  BinaryMask scaled(scaled_h, scaled_w);
  for (int y = 0; y < scaled_h; ++y)
    for (int x = 0; x < scaled_w; ++x) scaled.at(y, x) = padded.at(y, x);
  if (scaled.height == out_h && scaled.width == out_w) return scaled;
  return nearest_resize_to(scaled, out_h, out_w);
}

BinaryMask infer(const Network& net, const Tensor& image) {
  int sh = 0, sw = 0;
  const Tensor input = prepare_input(net, image, &sh, &sw);
  const Tensor probs = forward(net, input);
  const size_t plane = static_cast<size_t>(probs.height) * probs.width;
  BinaryMask padded(probs.height, probs.width);
  for (int y = 0; y < probs.height; ++y)
    for (int x = 0; x < probs.width; ++x) {
      const size_t p = static_cast<size_t>(y) * probs.width + x;
      // Class 1 is iris; a tie stays background.
      padded.at(y, x) = probs.data[plane + p] > probs.data[p] ? 1 : 0;
    }
  return finalize_mask(padded, sh, sw, image.height, image.width);
}

void fold_bn(Matrix& weight, std::vector<double>& bias, const BnParams& bn,
             double eps) {
  const size_t n = bias.size();
  if (bn.gamma.size() != n || bn.beta.size() != n || bn.mean.size() != n ||
      bn.var.size() != n)
    throw Error(ErrorKind::Dimension, "bn parameter length mismatch");
  if (static_cast<size_t>(weight.rows) != n)
    throw Error(ErrorKind::Dimension, "bn rows must match output channels");
  for (size_t c = 0; c < n; ++c) {
    const double s = bn.gamma[c] / std::sqrt(bn.var[c] + eps);
    for (int k = 0; k < weight.cols; ++k)
      weight.at(static_cast<int>(c), k) *= s;
    bias[c] = (bias[c] - bn.mean[c]) * s + bn.beta[c];
  }
}

}  // namespace iris
