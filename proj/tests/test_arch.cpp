#include <doctest.h>

#include <cstdint>
#include <vector>

#include "iris/arch.hpp"
#include "iris/errors.hpp"

using namespace iris;

TEST_CASE("group strings round-trip and reject junk") {
  CHECK(parse_groups("0-1-2-3-4-3-2-1-0") ==
        std::vector<int>{0, 1, 2, 3, 4, 3, 2, 1, 0});
  CHECK(format_groups({0, 4, 0}) == "0-4-0");
  CHECK(format_groups(parse_groups("0-1-4-1-0")) == "0-1-4-1-0");
  CHECK_THROWS_AS(parse_groups(""), Error);
  CHECK_THROWS_AS(parse_groups("0--4"), Error);
  CHECK_THROWS_AS(parse_groups("0-x-0"), Error);
}

TEST_CASE("validate_arch enforces the family invariants") {
  auto ok = [](double s, int n, std::vector<int> g) {
    validate_arch({s, n, std::move(g)});
  };
  auto bad = [](double s, int n, std::vector<int> g) {
    CHECK_THROWS_AS(validate_arch({s, n, std::move(g)}), Error);
  };
  ok(1.0, 8, {0, 1, 2, 3, 4, 3, 2, 1, 0});
  ok(0.5, 4, {0, 1, 2, 4, 2, 1, 0});
  ok(0.25, 16, {0, 4, 0});
  bad(0.75, 8, {0, 4, 0});          // scale off-catalog
  bad(1.0, 5, {0, 4, 0});           // width off-catalog
  bad(1.0, 8, {0, 4});              // even length
  bad(1.0, 8, {4});                 // too short
  bad(1.0, 8, {0, 1, 4, 2, 0});     // not a palindrome
  bad(1.0, 8, {0, 4, 4, 4, 0});     // several bottlenecks
  bad(1.0, 8, {1, 2, 4, 2, 1});     // must start at group 0
  bad(1.0, 8, {0, 2, 1, 4, 1, 2, 0});  // encoder not increasing
  bad(1.0, 8, {0, 0, 4, 0, 0});     // repeated group
}

TEST_CASE("plan_layers realizes the documented layer counts") {
  CHECK(plan_layers({1.0, 8, {0, 1, 2, 3, 4, 3, 2, 1, 0}}).size() == 18);
  CHECK(plan_layers({1.0, 8, {0, 1, 2, 4, 2, 1, 0}}).size() == 14);
  CHECK(plan_layers({1.0, 8, {0, 1, 4, 1, 0}}).size() == 10);
  CHECK(plan_layers({1.0, 8, {0, 4, 0}}).size() == 6);
}

TEST_CASE("every realization downsamples by exactly 16") {
  for (const auto& name : preset_names()) {
    const auto spec = preset_arch(name);
    REQUIRE(spec.has_value());
    int prod = 1;
    for (const auto& l : plan_layers(*spec))
      if (l.kind == LayerKind::Conv) prod *= l.stride;
    CHECK(prod == 16);
  }
}

TEST_CASE("shallower nets take larger bottleneck strides") {
  auto bottleneck_stride = [](std::vector<int> g) {
    int best = 1;
    for (const auto& l : plan_layers({1.0, 8, std::move(g)}))
      if (l.kind == LayerKind::Conv && l.stride > best) best = l.stride;
    return best;
  };
  CHECK(bottleneck_stride({0, 1, 2, 3, 4, 3, 2, 1, 0}) == 2);
  CHECK(bottleneck_stride({0, 1, 2, 4, 2, 1, 0}) == 4);
  CHECK(bottleneck_stride({0, 1, 4, 1, 0}) == 8);
  CHECK(bottleneck_stride({0, 4, 0}) == 16);
}

TEST_CASE("transposed convolutions mirror strides with kernel stride+2") {
  for (const auto& name : preset_names()) {
    const auto layers = plan_layers(*preset_arch(name));
    for (const auto& l : layers) {
      if (l.kind != LayerKind::Tconv) continue;
      CHECK(l.kernel == l.stride + 2);
      CHECK(l.padding == 1);
      // Each upsampling receives a shortcut whose channel count matches.
      REQUIRE(l.skip_from >= 0);
      REQUIRE(l.skip_from < static_cast<int>(layers.size()));
      CHECK(layers[l.skip_from].out_channels == l.out_channels);
    }
  }
}

TEST_CASE("channel plan: first layer 1->n, last conv 1x1 to 2, softmax tail") {
  const auto layers = plan_layers({1.0, 12, {0, 1, 2, 3, 4, 3, 2, 1, 0}});
  CHECK(layers.front().in_channels == 1);
  CHECK(layers.front().out_channels == 12);
  const auto& last_conv = layers[layers.size() - 2];
  CHECK(last_conv.kind == LayerKind::Conv);
  CHECK(last_conv.kernel == 1);
  CHECK(last_conv.out_channels == 2);
  CHECK(last_conv.relu == false);
  CHECK(layers.back().kind == LayerKind::Softmax);
  // Bottleneck widens to 4n.
  int widest = 0;
  for (const auto& l : layers) widest = std::max(widest, l.out_channels);
  CHECK(widest == 48);
  // Channel chain is consistent.
  int c = 1;
  for (const auto& l : layers) {
    if (l.kind == LayerKind::Softmax) break;
    CHECK(l.in_channels == c);
    c = l.out_channels;
  }
}

TEST_CASE("layer_flops hand case: 1x1 convolution") {
  LayerSpec l{LayerKind::Conv, 1, 1, 0, 1, 2, false, -1};
  // 2 * out_c * in_c * k^2 * out_h * out_w = 2*2*1*1*400
  CHECK(layer_flops(l, 20, 20) == 1600);
  LayerSpec sm{LayerKind::Softmax, 0, 1, 0, 2, 2, false, -1};
  CHECK(layer_flops(sm, 20, 20) == 0);
}

TEST_CASE("count_flops agrees with a hand-summed shallow network") {
  // {0,4,0} with n=4 at 64x64: strides divide the extent exactly, so each
  // term can be written out longhand.
  const ArchSpec spec{1.0, 4, {0, 4, 0}};
  const uint64_t conv0 = 2ull * 4 * 1 * 9 * 64 * 64;    // 294912
  const uint64_t conv1 = 2ull * 8 * 4 * 9 * 4 * 4;      // stride 16 -> 4x4
  const uint64_t conv2 = 2ull * 16 * 8 * 9 * 4 * 4;
  const uint64_t tconv = 2ull * 4 * 18 * 18 * 16 * 4 * 4;
  const uint64_t skip = 4ull * 64 * 64;
  const uint64_t head = 2ull * 2 * 4 * 1 * 64 * 64;
  CHECK(count_flops(spec, 64, 64) ==
        conv0 + conv1 + conv2 + tconv + skip + head);
  CHECK(count_flops(spec, 64, 64) == 1086464);
}

TEST_CASE("count_flops grows with width, depth and input area") {
  const std::vector<int> deep{0, 1, 2, 3, 4, 3, 2, 1, 0};
  CHECK(count_flops({1.0, 16, deep}, 240, 320) >
        count_flops({1.0, 8, deep}, 240, 320));
  CHECK(count_flops({1.0, 8, deep}, 240, 320) >
        count_flops({0.5, 8, deep}, 240, 320));
  CHECK(count_flops({1.0, 8, deep}, 480, 640) >
        count_flops({1.0, 8, deep}, 240, 320));
  CHECK(count_flops({1.0, 8, deep}, 240, 320) >
        count_flops({1.0, 8, {0, 1, 2, 4, 2, 1, 0}}, 240, 320));
}

TEST_CASE("catalog FLOP totals are frozen") {
  // Regression pins at 320x240 (and 320x280 for the widest net); these are
  // the values the rest of the tooling reports.
  auto flops = [](const char* name, int h, int w) {
    return count_flops(*preset_arch(name), h, w);
  };
  CHECK(flops("fcn0", 280, 320) == 1183702080ull);
  CHECK(flops("fcn9", 240, 320) == 1793011200ull);
  CHECK(flops("fcn10", 240, 320) == 455520000ull);
  CHECK(flops("fcn11", 240, 320) == 258955200ull);
  CHECK(flops("fcn12", 240, 320) == 117513600ull);
  CHECK(flops("fcn13", 240, 320) == 112435200ull);
  CHECK(flops("fcn14", 240, 320) == 109059840ull);
  CHECK(flops("fcn15", 240, 320) == 28172160ull);
  CHECK(flops("fcn16", 240, 320) == 21966080ull);
  // The catalog tail is strictly cheaper step by step.
  const char* order[] = {"fcn9", "fcn10", "fcn11", "fcn12",
                         "fcn13", "fcn14", "fcn15", "fcn16"};
  for (int i = 0; i + 1 < 8; ++i)
    CHECK(flops(order[i], 240, 320) > flops(order[i + 1], 240, 320));
}

TEST_CASE("preset catalog lists twenty entries and rejects unknowns") {
  CHECK(preset_names().size() == 20);
  CHECK(!preset_arch("fcn20").has_value());
  CHECK(!preset_arch("resnet").has_value());
  const auto f0 = preset_arch("fcn0");
  REQUIRE(f0.has_value());
  CHECK(f0->scale == 1.0);
  CHECK(f0->n == 12);
}
