#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iris/network.hpp"
#include "iris/tensor.hpp"

namespace iris {

// Class-balance weight: fraction of iris pixels over all pixels of the
// supplied masks.  Weights the background term of the loss; iris term gets
// 1-alpha.
double compute_alpha(const std::vector<BinaryMask>& masks);

// Mean weighted binary cross entropy over all pixels:
//   L = -1/(c*r) * sum[(1-a)*y*log p + a*(1-y)*log(1-p)]
// p is the iris probability (last channel of probs), clamped to
// [eps, 1-eps] with eps = 1e-7.
double weighted_bce_loss(const Tensor& probs, const BinaryMask& gt,
                         double alpha);

// Parameter gradients for one sample.
struct Gradients {
  std::vector<Matrix> dw;
  std::vector<std::vector<double>> db;
};

Gradients make_zero_gradients(const Network& net);
void accumulate(Gradients& into, const Gradients& g);
void scale(Gradients& g, double s);

// Backpropagates the weighted BCE loss through softmax, shortcut adds,
// ReLU and the conv/tconv GEMMs.  trace must come from forward() on the
// same network and input; gt must match the trace's spatial dims.
Gradients backward(const Network& net, const ForwardTrace& trace,
                   const BinaryMask& gt, double alpha);

// v <- momentum*v - lr*g;  w <- w + v
void sgd_momentum_step(std::vector<double>& w, std::vector<double>& v,
                       const std::vector<double>& g, double lr,
                       double momentum);

struct TrainConfig {
  double lr = 0.1;
  double momentum = 0.9;
  int epochs = 50;
  int batch = 4;
  uint64_t seed = 1;
  std::string alpha_mode = "auto";  // "auto" or a fixed value, e.g. "0.25"
  bool init = true;  // seed-initialize weights before the first epoch
};

struct TrainSample {
  Tensor image;    // 1 x H x W, values in [0,1]
  BinaryMask gt;   // H x W
};

struct TrainResult {
  std::vector<double> epoch_loss;
  int best_epoch = -1;   // epoch whose weights the network now carries
  double alpha = 0.0;
};

// Mini-batch SGD with momentum.  Deterministic in cfg.seed: weight init,
// per-epoch shuffling and batch order all derive from it.  Throws
// ErrorKind::Training with the epoch index if the loss turns non-finite.
// On return the network holds the weights of the best-loss epoch.
TrainResult train(Network& net, const std::vector<TrainSample>& samples,
                  const TrainConfig& cfg);

}  // namespace iris
