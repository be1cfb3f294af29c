#include "iris/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iris/errors.hpp"
#include "iris/ops.hpp"
#include "iris/rng.hpp"

namespace iris {

namespace {

constexpr double kProbEps = 1e-7;

// out = a * b^T
Matrix gemm_abt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols)
    throw Error(ErrorKind::Dimension, "gemm_abt dims");
  Matrix out(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.rows; ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.cols; ++k) acc += a.at(i, k) * b.at(j, k);
      out.at(i, j) = acc;
    }
  return out;
}

// out = a^T * b
Matrix gemm_atb(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows)
    throw Error(ErrorKind::Dimension, "gemm_atb dims");
  Matrix out(a.cols, b.cols);
  for (int i = 0; i < a.cols; ++i)
    for (int j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.rows; ++k) acc += a.at(k, i) * b.at(k, j);
      out.at(i, j) = acc;
    }
  return out;
}

Matrix tensor_as_matrix(const Tensor& t) {
  Matrix m(t.channels, t.height * t.width);
  m.data = t.data;
  return m;
}

}  // namespace

double compute_alpha(const std::vector<BinaryMask>& masks) {
  if (masks.empty())
    throw Error(ErrorKind::Validation, "compute_alpha needs masks");
  size_t iris = 0, total = 0;
  for (const auto& m : masks) {
    iris += m.count();
    total += m.data.size();
  }
  if (total == 0)
    throw Error(ErrorKind::Validation, "compute_alpha on empty masks");
  return static_cast<double>(iris) / static_cast<double>(total);
}

double weighted_bce_loss(const Tensor& probs, const BinaryMask& gt,
                         double alpha) {
  if (probs.height != gt.height || probs.width != gt.width)
    throw Error(ErrorKind::Dimension, "loss dims mismatch");
  const size_t plane = static_cast<size_t>(probs.height) * probs.width;
  const size_t iris_plane = (probs.channels - 1) * plane;
  double sum = 0.0;
  for (size_t p = 0; p < plane; ++p) {
    const double pc =
        std::clamp(probs.data[iris_plane + p], kProbEps, 1.0 - kProbEps);
    if (gt.data[p])
      sum += (1.0 - alpha) * std::log(pc);
    else
      sum += alpha * std::log(1.0 - pc);
  }
  return -sum / static_cast<double>(plane);
}

Gradients make_zero_gradients(const Network& net) {
  Gradients g;
  for (size_t i = 0; i < net.layers.size(); ++i) {
    g.dw.emplace_back(net.weights[i].rows, net.weights[i].cols);
    g.db.emplace_back(net.biases[i].size(), 0.0);
  }
  return g;
}

void accumulate(Gradients& into, const Gradients& g) {
  for (size_t i = 0; i < into.dw.size(); ++i) {
    for (size_t k = 0; k < into.dw[i].data.size(); ++k)
      into.dw[i].data[k] += g.dw[i].data[k];
    for (size_t k = 0; k < into.db[i].size(); ++k)
      into.db[i][k] += g.db[i][k];
  }
}

void scale(Gradients& g, double s) {
  for (auto& m : g.dw)
    for (double& v : m.data) v *= s;
  for (auto& b : g.db)
    for (double& v : b) v *= s;
}

Gradients backward(const Network& net, const ForwardTrace& trace,
                   const BinaryMask& gt, double alpha) {
  const int n_layers = static_cast<int>(net.layers.size());
  if (n_layers < 2 || net.layers.back().kind != LayerKind::Softmax)
    throw Error(ErrorKind::Validation, "backward expects softmax tail");

  Gradients grads = make_zero_gradients(net);

  // d(loss)/d(logits) through softmax and the clamped cross entropy.  For a
  // clamped pixel the loss is locally constant, so its gradient is zero.
  const Tensor& probs = trace.probs;
  const size_t plane = static_cast<size_t>(probs.height) * probs.width;
  if (gt.height != probs.height || gt.width != probs.width)
    throw Error(ErrorKind::Dimension, "backward gt dims mismatch");
  const double inv_n = 1.0 / static_cast<double>(plane);
  Tensor d_logits(2, probs.height, probs.width);
  for (size_t p = 0; p < plane; ++p) {
    const double pi = probs.data[plane + p];
    double dldp = 0.0;
    if (pi > kProbEps && pi < 1.0 - kProbEps) {
      if (gt.data[p])
        dldp = -inv_n * (1.0 - alpha) / pi;
      else
        dldp = inv_n * alpha / (1.0 - pi);
    }
    const double dpdz = pi * (1.0 - pi);  // d p / d z1 = -d p / d z0
    d_logits.data[plane + p] = dldp * dpdz;
    d_logits.data[p] = -dldp * dpdz;
  }

  // Gradient w.r.t. each layer's consumed output.
  std::vector<Tensor> d_post(n_layers);
  d_post[n_layers - 2] = d_logits;

  for (int i = n_layers - 2; i >= 0; --i) {
    const auto& l = net.layers[i];
    Tensor g = std::move(d_post[i]);
    if (g.data.empty()) continue;  // unused layer output

    // The shortcut add passes the gradient to both addends unchanged.
    if (l.skip_from >= 0) {
      Tensor& other = d_post[l.skip_from];
      if (other.data.empty()) {
        other = g;
      } else {
        for (size_t p = 0; p < g.data.size(); ++p) other.data[p] += g.data[p];
      }
    }

    if (l.relu) {
      const Tensor& pre = trace.pre[i];
      for (size_t p = 0; p < g.data.size(); ++p)
        if (pre.data[p] <= 0.0) g.data[p] = 0.0;
    }

    const size_t out_plane = static_cast<size_t>(g.height) * g.width;
    for (int c = 0; c < l.out_channels; ++c) {
      double acc = 0.0;
      for (size_t p = 0; p < out_plane; ++p) acc += g.data[c * out_plane + p];
      grads.db[i][c] = acc;
    }

    const Tensor& input =
        (i == 0) ? trace.input : trace.post[static_cast<size_t>(i) - 1];
    Tensor d_input;
    if (l.kind == LayerKind::Conv) {
      const Matrix cols = im2col(input, l.kernel, l.stride, l.padding);
      const Matrix g_mat = tensor_as_matrix(g);
      const Matrix dw = gemm_abt(g_mat, cols);
      grads.dw[i].data = dw.data;
      const Matrix d_cols = gemm_atb(net.weights[i], g_mat);
      d_input = col2im(d_cols, input.channels, input.height, input.width,
                       l.kernel, l.stride, l.padding);
    } else {
      // forward: cols = W*flat(x); out = col2im(cols).  The adjoint of
      // col2im is im2col over the output gradient.
      const Matrix d_cols = im2col(g, l.kernel, l.stride, l.padding);
      const Matrix flat = tensor_as_matrix(input);
      const Matrix dw = gemm_abt(d_cols, flat);
      grads.dw[i].data = dw.data;
      const Matrix d_flat = gemm_atb(net.weights[i], d_cols);
      d_input = Tensor(input.channels, input.height, input.width);
      d_input.data = d_flat.data;
    }

    if (i > 0) {
      Tensor& prev = d_post[i - 1];
      if (prev.data.empty()) {
        prev = std::move(d_input);
      } else {
        for (size_t p = 0; p < d_input.data.size(); ++p)
          prev.data[p] += d_input.data[p];
      }
    }
  }
  return grads;
}

void sgd_momentum_step(std::vector<double>& w, std::vector<double>& v,
                       const std::vector<double>& g, double lr,
                       double momentum) {
  if (w.size() != v.size() || w.size() != g.size())
    throw Error(ErrorKind::Dimension, "sgd step size mismatch");
  for (size_t i = 0; i < w.size(); ++i) {
    v[i] = momentum * v[i] - lr * g[i];
    w[i] += v[i];
  }
}

TrainResult train(Network& net, const std::vector<TrainSample>& samples,
                  const TrainConfig& cfg) {
  if (samples.empty())
    throw Error(ErrorKind::Validation, "train needs samples");
  if (cfg.epochs < 1 || cfg.batch < 1 || cfg.lr <= 0.0)
    throw Error(ErrorKind::Validation, "bad train config");

  // Inputs prepared once: scaled, padded, with masks brought along.
  std::vector<Tensor> inputs;
  std::vector<BinaryMask> targets;
  for (const auto& s : samples) {
    int sh = 0, sw = 0;
    Tensor in = prepare_input(net, s.image, &sh, &sw);
    BinaryMask gt = nearest_resize_to(s.gt, sh, sw);
    if (in.height != sh || in.width != sw) {
      BinaryMask padded(in.height, in.width);
      for (int y = 0; y < sh; ++y)
        for (int x = 0; x < sw; ++x) padded.at(y, x) = gt.at(y, x);
      gt = std::move(padded);
    }
    inputs.push_back(std::move(in));
    targets.push_back(std::move(gt));
  }

  TrainResult result;
  if (cfg.alpha_mode == "auto") {
    result.alpha = compute_alpha(targets);
  } else {
    try {
      result.alpha = std::stod(cfg.alpha_mode);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Validation,
                  "alpha_mode must be 'auto' or a number");
    }
    if (result.alpha < 0.0 || result.alpha > 1.0)
      throw Error(ErrorKind::Validation, "alpha must be in [0,1]");
  }

  if (cfg.init) init_weights(net, cfg.seed);

  std::vector<std::vector<double>> vel_w, vel_b;
  for (size_t i = 0; i < net.layers.size(); ++i) {
    vel_w.emplace_back(net.weights[i].data.size(), 0.0);
    vel_b.emplace_back(net.biases[i].size(), 0.0);
  }

  std::vector<Matrix> best_w = net.weights;
  std::vector<std::vector<double>> best_b = net.biases;
  double best_loss = std::numeric_limits<double>::infinity();

  std::vector<size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with a per-epoch derived stream.
    Rng rng(Rng::mix(cfg.seed, static_cast<uint64_t>(epoch) + 1));
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1],
                order[static_cast<size_t>(rng.uniform_int(0, i - 1))]);

    double epoch_loss = 0.0;
    size_t done = 0;
    while (done < order.size()) {
      const size_t take = std::min<size_t>(cfg.batch, order.size() - done);
      Gradients acc = make_zero_gradients(net);
      for (size_t b = 0; b < take; ++b) {
        const size_t idx = order[done + b];
        ForwardTrace trace;
        forward(net, inputs[idx], &trace);
        epoch_loss +=
            weighted_bce_loss(trace.probs, targets[idx], result.alpha);
        Gradients g = backward(net, trace, targets[idx], result.alpha);
        accumulate(acc, g);
      }
      scale(acc, 1.0 / static_cast<double>(take));
      for (size_t i = 0; i < net.layers.size(); ++i) {
        if (net.layers[i].kind == LayerKind::Softmax) continue;
        sgd_momentum_step(net.weights[i].data, vel_w[i], acc.dw[i].data,
                          cfg.lr, cfg.momentum);
        sgd_momentum_step(net.biases[i], vel_b[i], acc.db[i], cfg.lr,
                          cfg.momentum);
      }
      done += take;
    }
    epoch_loss /= static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss))
      throw Error(ErrorKind::Training,
                  "loss diverged at epoch " + std::to_string(epoch));
    result.epoch_loss.push_back(epoch_loss);
    if (epoch_loss < best_loss) {
      best_loss = epoch_loss;
      best_w = net.weights;
      best_b = net.biases;
      result.best_epoch = epoch;
    }
  }

  net.weights = std::move(best_w);
  net.biases = std::move(best_b);
  return result;
}

}  // namespace iris
