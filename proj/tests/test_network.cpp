#include <doctest.h>

#include <cmath>
#include <vector>

#include "iris/errors.hpp"
#include "iris/network.hpp"
#include "iris/ops.hpp"
#include "iris/rng.hpp"
#include "test_util.hpp"

using namespace iris;

namespace {

Network tiny_net() {
  // Minimal two-class head on a single 3x3 convolution plus softmax; built
  // by hand so every weight is known.
  Network net;
  net.layers = {
      {LayerKind::Conv, 3, 1, 1, 1, 2, false, -1},
      {LayerKind::Softmax, 0, 1, 0, 2, 2, false, -1},
  };
  net.weights.emplace_back(2, 9);
  net.weights.emplace_back();
  net.biases = {{0.0, 0.0}, {}};
  return net;
}

}  // namespace

TEST_CASE("build_network allocates weight shapes per layer kind") {
  const Network net = build_network({1.0, 8, {0, 1, 4, 1, 0}});
  REQUIRE(net.layers.size() == net.weights.size());
  REQUIRE(net.layers.size() == net.biases.size());
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    const auto& w = net.weights[i];
    if (l.kind == LayerKind::Conv) {
      CHECK(w.rows == l.out_channels);
      CHECK(w.cols == l.in_channels * l.kernel * l.kernel);
      CHECK(static_cast<int>(net.biases[i].size()) == l.out_channels);
    } else if (l.kind == LayerKind::Tconv) {
      CHECK(w.rows == l.out_channels * l.kernel * l.kernel);
      CHECK(w.cols == l.in_channels);
      CHECK(static_cast<int>(net.biases[i].size()) == l.out_channels);
    } else {
      CHECK(w.data.empty());
    }
    for (double v : w.data) CHECK(v == 0.0);
  }
}

TEST_CASE("init_weights is deterministic in the seed and bounded by fan-in") {
  Network a = build_network({1.0, 4, {0, 4, 0}});
  Network b = build_network({1.0, 4, {0, 4, 0}});
  init_weights(a, 42);
  init_weights(b, 42);
  for (size_t i = 0; i < a.weights.size(); ++i)
    CHECK(a.weights[i].data == b.weights[i].data);
  Network c = build_network({1.0, 4, {0, 4, 0}});
  init_weights(c, 43);
  bool any_diff = false;
  for (size_t i = 0; i < a.weights.size(); ++i)
    if (a.weights[i].data != c.weights[i].data) any_diff = true;
  CHECK(any_diff);
  for (size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].kind == LayerKind::Softmax) continue;
    const int fan_in = a.layers[i].kind == LayerKind::Conv
                           ? a.layers[i].in_channels * a.layers[i].kernel *
                                 a.layers[i].kernel
                           : a.layers[i].in_channels;
    const double bound = std::sqrt(6.0 / fan_in);
    for (double v : a.weights[i].data) {
      CHECK(v <= bound);
      CHECK(v >= -bound);
    }
    for (double v : a.biases[i]) CHECK(v == 0.0);
  }
}

TEST_CASE("forward of a hand-built conv+softmax matches pencil and paper") {
  Network net = tiny_net();
  // Channel 0 filter: all zeros. Channel 1 filter: center tap 1.
  net.weights[0].at(1, 4) = 1.0;
  net.biases[0] = {0.0, -1.0};
  Tensor x(1, 2, 2);
  x.data = {2.0, 0.0, 0.0, 2.0};
  ForwardTrace tr;
  const Tensor p = forward(net, x, &tr);
  REQUIRE(p.channels == 2);
  // Logits channel 1 at (0,0): 2 - 1 = 1, channel 0: 0 -> sigmoid(1).
  const double want = 1.0 / (1.0 + std::exp(-1.0));
  CHECK(p.at(1, 0, 0) == doctest::Approx(want).epsilon(1e-12));
  CHECK(p.at(0, 0, 0) == doctest::Approx(1.0 - want).epsilon(1e-12));
  // At (0,1) the logit is 0 - 1 = -1.
  CHECK(p.at(1, 0, 1) == doctest::Approx(1.0 - want).epsilon(1e-12));
  REQUIRE(tr.pre.size() == 2);
  CHECK(tr.pre[0].at(1, 0, 0) == 1.0);
  CHECK(tr.post[0].data == tr.pre[0].data);  // no ReLU on this layer
  CHECK(tr.probs.data == p.data);
  CHECK(tr.input.data == x.data);
}

TEST_CASE("forward applies ReLU before the shortcut addition") {
  // conv(identity, relu) -> conv(negate, relu, skip from layer 0):
  // post1 = relu(-x) + post0. With x = [1,-2]: post0 = [1,0],
  // pre1 = [-1,0], relu -> [0,0], sum -> [1,0].
  Network net;
  net.layers = {
      {LayerKind::Conv, 1, 1, 0, 1, 1, true, -1},
      {LayerKind::Conv, 1, 1, 0, 1, 1, true, 0},
      {LayerKind::Conv, 1, 1, 0, 1, 2, false, -1},
      {LayerKind::Softmax, 0, 1, 0, 2, 2, false, -1},
  };
  net.weights = {Matrix(1, 1), Matrix(1, 1), Matrix(2, 1), Matrix()};
  net.weights[0].at(0, 0) = 1.0;
  net.weights[1].at(0, 0) = -1.0;
  net.weights[2].at(0, 0) = 0.0;
  net.weights[2].at(1, 0) = 1.0;
  net.biases = {{0.0}, {0.0}, {0.0, 0.0}, {}};
  Tensor x(1, 1, 2);
  x.data = {1.0, -2.0};
  ForwardTrace tr;
  forward(net, x, &tr);
  CHECK(tr.post[0].data == std::vector<double>{1.0, 0.0});
  CHECK(tr.pre[1].data == std::vector<double>{-1.0, 0.0});
  // ReLU-then-add: relu([-1,0]) + [1,0]. Add-then-ReLU would give [0,0].
  CHECK(tr.post[1].data == std::vector<double>{1.0, 0.0});
}

TEST_CASE("forward rejects shortcut shape mismatches and bad tails") {
  Network net = tiny_net();
  net.layers[0].skip_from = 0;  // self-reference: shapes cannot match
  Tensor x(1, 4, 4);
  CHECK_THROWS_AS(forward(net, x), Error);
  Network no_tail = tiny_net();
  no_tail.layers.pop_back();
  no_tail.weights.pop_back();
  no_tail.biases.pop_back();
  CHECK_THROWS_AS(forward(no_tail, x), Error);
}

TEST_CASE("stride_divisor multiplies conv strides") {
  CHECK(stride_divisor(build_network({1.0, 8, {0, 4, 0}})) == 16);
  CHECK(stride_divisor(build_network({1.0, 8, {0, 1, 2, 3, 4, 3, 2, 1, 0}})) ==
        16);
  CHECK(stride_divisor(tiny_net()) == 1);
}

TEST_CASE("prepare_input scales then pads to the divisor") {
  Tensor img(1, 30, 25);
  for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = 0.5;
  int sh = 0, sw = 0;
  const Tensor in = prepare_input(1.0, 16, img, &sh, &sw);
  CHECK(sh == 30);
  CHECK(sw == 25);
  CHECK(in.height == 32);
  CHECK(in.width == 32);
  CHECK(in.at(0, 29, 24) == 0.5);
  CHECK(in.at(0, 30, 0) == 0.0);  // padded rows are zero
  CHECK(in.at(0, 0, 25) == 0.0);  // padded cols are zero

  const Tensor half = prepare_input(0.5, 16, img, &sh, &sw);
  CHECK(sh == 15);
  CHECK(sw == 13);  // round(0.5 * 25), half away from zero
  CHECK(half.height == 16);
  CHECK(half.width == 16);
}

TEST_CASE("finalize_mask crops padding and restores image dims") {
  BinaryMask padded(8, 8);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) padded.at(y, x) = 1;
  // Scaled content occupied 4x4 of the 8x8 padded plane; restore to 8x8
  // original dims: every pixel maps back inside the content block.
  const BinaryMask m = finalize_mask(padded, 4, 4, 8, 8);
  REQUIRE(m.height == 8);
  REQUIRE(m.width == 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) CHECK(m.at(y, x) == 1);
}

TEST_CASE("infer breaks probability ties toward background") {
  Network net = tiny_net();  // all-zero weights: logits equal everywhere
  Tensor x(1, 16, 16);
  for (double& v : x.data) v = 0.3;
  const BinaryMask m = infer(net, x);
  REQUIRE(m.height == 16);
  for (uint8_t v : m.data) CHECK(v == 0);
  // Bias the foreground channel: now everything is iris.
  net.biases[0][1] = 1.0;
  const BinaryMask m2 = infer(net, x);
  for (uint8_t v : m2.data) CHECK(v == 1);
}

TEST_CASE("infer matches forward+argmax on a random network") {
  Network net = build_network({1.0, 4, {0, 4, 0}});
  init_weights(net, 7);
  Rng rng(8);
  const Tensor img = testutil::random_tensor(1, 32, 32, rng, 0, 1);
  const BinaryMask m = infer(net, img);
  const Tensor p = forward(net, prepare_input(net, img));
  const size_t plane = static_cast<size_t>(p.height) * p.width;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      const size_t i = static_cast<size_t>(y) * p.width + x;
      const int want = p.data[plane + i] > p.data[i] ? 1 : 0;
      CHECK(m.at(y, x) == want);
    }
}

TEST_CASE("fold_bn reproduces explicit normalization to float accuracy") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    Network net = tiny_net();
    init_weights(net, 100 + trial);
    for (double& b : net.biases[0]) b = rng.uniform(-1, 1);
    BnParams bn;
    for (int c = 0; c < 2; ++c) {
      bn.gamma.push_back(rng.uniform(0.2, 2.0));
      bn.beta.push_back(rng.uniform(-1, 1));
      bn.mean.push_back(rng.uniform(-1, 1));
      bn.var.push_back(rng.uniform(1e-3, 10.0));
    }
    const Tensor x = testutil::random_tensor(1, 5, 5, rng);
    // Reference: run the unfolded conv, then normalize explicitly.
    ForwardTrace tr;
    forward(net, x, &tr);
    const Tensor& raw = tr.pre[0];
    Network folded = net;
    fold_bn(folded.weights[0], folded.biases[0], bn);
    ForwardTrace tf;
    forward(folded, x, &tf);
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < 25; ++i) {
        const double want = bn.gamma[c] *
                                (raw.data[c * 25 + i] - bn.mean[c]) /
                                std::sqrt(bn.var[c] + 1e-5) +
                            bn.beta[c];
        CHECK(tf.pre[0].data[c * 25 + i] ==
              doctest::Approx(want).epsilon(1e-12));
      }
  }
}
