#include "iris/dfp.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "iris/errors.hpp"
#include "iris/ops.hpp"

namespace iris {

namespace {

constexpr int kFlSearchSpan = 16;  // extra headroom beyond bw-1

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

int32_t saturate_i32(double v) {
  if (v >= 2147483647.0) return std::numeric_limits<int32_t>::max();
  if (v <= -2147483648.0) return std::numeric_limits<int32_t>::min();
  return static_cast<int32_t>(v);
}

}  // namespace

int choose_fl(double max_abs, int bw) {
  if (bw < 2 || bw > 16)
    throw Error(ErrorKind::Validation, "fixed point width out of range");
  if (!(max_abs >= 0.0) || !std::isfinite(max_abs))
    throw Error(ErrorKind::Validation, "tensor range must be finite");
  const double limit = static_cast<double>((1 << (bw - 1)) - 1);
  // Largest fl whose representable range still covers max_abs. An all-zero
  // tensor hits the cap.
  for (int fl = bw - 1 + kFlSearchSpan; fl >= -kFlSearchSpan; --fl) {
    if (max_abs <= limit * std::ldexp(1.0, -fl)) return fl;
  }
  throw Error(ErrorKind::Validation, "tensor range too wide for fixed point");
}

std::vector<DfpParams> profile_activations(const Network& net,
                                           const std::vector<Tensor>& calib) {
  if (calib.empty())
    throw Error(ErrorKind::Validation, "calibration set is empty");
  const size_t n = net.layers.size();

  std::vector<double> post_max(n, 0.0);
  for (const Tensor& img : calib) {
    const Tensor input = prepare_input(net, img);
    ForwardTrace trace;
    forward(net, input, &trace);
    for (size_t i = 0; i < n; ++i)
      post_max[i] = std::max(post_max[i], max_abs(trace.post[i].data));
  }

  std::vector<DfpParams> params(n);
  for (size_t i = 0; i < n; ++i) {
    if (net.layers[i].kind == LayerKind::Softmax) continue;
    DfpParams& p = params[i];
    p.w_fl = choose_fl(max_abs(net.weights[i].data), p.w_bw);
    // The image layer range is [0,1] by contract, independent of the
    // calibration images.
    p.a_in = (i == 0) ? choose_fl(1.0, p.a_bw) : params[i - 1].a_out;
    p.a_out = choose_fl(post_max[i], p.a_bw);
  }
  return params;
}

QuantizedNetwork quantize_network(const Network& net,
                                  const std::vector<DfpParams>& params) {
  if (params.size() != net.layers.size())
    throw Error(ErrorKind::Dimension, "one DFP descriptor per layer required");
  QuantizedNetwork q;
  q.spec = net.spec;
  q.layers = net.layers;
  q.params = params;
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const Matrix& w = net.weights[i];
    QMatrix qw(w.rows, w.cols, params[i].w_fl);
    for (size_t j = 0; j < w.data.size(); ++j)
      qw.data[j] = quantize_value(w.data[j], params[i].w_fl);
    q.weights.push_back(std::move(qw));

    // Bias joins the GEMM accumulator, so it lives at the product fl.
    const int bias_fl = params[i].w_fl + params[i].a_in;
    std::vector<int32_t> qb(net.biases[i].size());
    for (size_t j = 0; j < qb.size(); ++j)
      qb[j] = saturate_i32(std::round(std::ldexp(net.biases[i][j], bias_fl)));
    q.biases.push_back(std::move(qb));
  }
  return q;
}

QMatrix RefQGemmEngine::gemm(int, const QMatrix& a, const QMatrix& b,
                             const std::vector<int32_t>& bias, int out_fl) {
  return gemm_ref_q_bias(a, b, bias, out_fl);
}

QTensor quantized_forward(const QuantizedNetwork& qnet, const Tensor& prepared,
                          QGemmEngine& engine, QuantStats* stats) {
  const auto& layers = qnet.layers;
  if (layers.empty() || layers.back().kind != LayerKind::Softmax)
    throw Error(ErrorKind::Validation, "network must end in softmax");
  if (prepared.channels != layers.front().in_channels)
    throw Error(ErrorKind::Dimension, "input channel mismatch");

  QTensor qx(prepared.channels, prepared.height, prepared.width,
             qnet.params.front().a_in);
  for (size_t j = 0; j < prepared.data.size(); ++j)
    qx.data[j] = quantize_value(prepared.data[j], qx.fl);

  std::vector<QTensor> post(layers.size());
  const QTensor* x = &qx;
  QTensor logits;
  for (size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.kind == LayerKind::Softmax) {
      logits = *x;
      break;
    }
    const DfpParams& p = qnet.params[i];
    const QMatrix& w = qnet.weights[i];
    QTensor raw;
    if (l.kind == LayerKind::Conv) {
      const QMatrix cols = im2col_q(*x, l.kernel, l.stride, l.padding);
      const QMatrix prod = engine.gemm(static_cast<int>(i), w, cols,
                                       qnet.biases[i], p.a_out);
      const int oh = conv_out_extent(x->height, l.kernel, l.stride, l.padding);
      const int ow = conv_out_extent(x->width, l.kernel, l.stride, l.padding);
      raw = QTensor(l.out_channels, oh, ow, p.a_out);
      raw.data = prod.data;
      if (stats) {
        stats->int_macs += static_cast<uint64_t>(w.rows) * cols.cols * w.cols;
        stats->requants += static_cast<uint64_t>(w.rows) * cols.cols;
      }
    } else {
      // Deconvolution: the GEMM output columns are requantized to a_out
      // before the scatter-add, so the engine sees no bias here; the bias
      // joins the 32-bit scatter accumulator below instead.
      QMatrix flat(l.in_channels, x->height * x->width, x->fl);
      flat.data = x->data;
      const std::vector<int32_t> no_bias(w.rows, 0);
      const QMatrix cols = engine.gemm(static_cast<int>(i), w, flat, no_bias,
                                       p.a_out);

      const int oh = x->height * l.stride;
      const int ow = x->width * l.stride;
      // Shift the stored bias from w_fl + a_in down to the output fl.
      std::vector<int32_t> bias_out(qnet.biases[i].size());
      for (size_t c = 0; c < bias_out.size(); ++c)
        bias_out[c] = static_cast<int32_t>(round_shift(
            qnet.biases[i][c], p.w_fl + p.a_in - p.a_out));

      raw = QTensor(l.out_channels, oh, ow, p.a_out);
      std::vector<int32_t> acc(raw.data.size(), 0);
      const int k = l.kernel;
      for (int c = 0; c < l.out_channels; ++c) {
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            const int row = (c * k + ky) * k + kx;
            for (int iy = 0; iy < x->height; ++iy) {
              const int ty = iy * l.stride - l.padding + ky;
              if (ty < 0 || ty >= oh) continue;
              for (int ix = 0; ix < x->width; ++ix) {
                const int tx = ix * l.stride - l.padding + kx;
                if (tx < 0 || tx >= ow) continue;
                acc[(static_cast<size_t>(c) * oh + ty) * ow + tx] +=
                    cols.at(row, iy * x->width + ix);
              }
            }
          }
        }
      }
      const size_t plane = static_cast<size_t>(oh) * ow;
      for (int c = 0; c < l.out_channels; ++c)
        for (size_t px = 0; px < plane; ++px) {
          const size_t j = c * plane + px;
          raw.data[j] = saturate_i8(acc[j] + bias_out[c]);
        }
      if (stats) {
        stats->int_macs += static_cast<uint64_t>(w.rows) * flat.cols * w.cols;
        stats->requants +=
            static_cast<uint64_t>(w.rows) * flat.cols + raw.data.size();
      }
    }

    if (l.relu) relu_inplace(raw);
    if (l.skip_from >= 0) {
      const QTensor& other = post[l.skip_from];
      if (other.channels != raw.channels || other.height != raw.height ||
          other.width != raw.width)
        throw Error(ErrorKind::Dimension, "shortcut shape mismatch");
      // Operands are aligned to the coarser (smaller) fl with a plain
      // arithmetic shift; profiling guarantees the sum fl is the coarser
      // one because both addends are non-negative after ReLU.
      const int diff = other.fl - raw.fl;
      for (size_t j = 0; j < raw.data.size(); ++j) {
        int v = other.data[j];
        v = diff >= 0 ? (v >> diff) : (v << -diff);
        raw.data[j] = saturate_i8(static_cast<int64_t>(raw.data[j]) + v);
      }
      if (stats) stats->shortcut_adds += raw.data.size();
    }
    post[i] = std::move(raw);
    x = &post[i];
  }
  return logits;
}

BinaryMask logits_argmax(const QTensor& logits) {
  if (logits.channels != 2)
    throw Error(ErrorKind::Dimension, "expected two logit planes");
  const size_t plane = static_cast<size_t>(logits.height) * logits.width;
  BinaryMask mask(logits.height, logits.width);
  for (size_t p = 0; p < plane; ++p)
    mask.data[p] = logits.data[plane + p] > logits.data[p] ? 1 : 0;
  return mask;
}

BinaryMask quantized_infer(const QuantizedNetwork& qnet, const Tensor& image,
                           QuantStats* stats) {
  int sh = 0, sw = 0;
  const Tensor prepared = prepare_input(
      qnet.spec.scale, stride_divisor(qnet.layers), image, &sh, &sw);
  RefQGemmEngine engine;
  const QTensor logits = quantized_forward(qnet, prepared, engine, stats);
  return finalize_mask(logits_argmax(logits), sh, sw, image.height,
                       image.width);
}

}  // namespace iris
