#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "iris/dfp.hpp"
#include "iris/errors.hpp"
#include "iris/image.hpp"
#include "iris/io.hpp"
#include "iris/keyval.hpp"
#include "iris/network.hpp"
#include "iris/rng.hpp"
#include "test_util.hpp"

using namespace iris;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("irisrec-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("pgm round-trip is byte-identical") {
  TempDir tmp;
  Image img(5, 7);
  Rng rng(111);
  for (auto& p : img.pixels) p = static_cast<uint8_t>(rng.uniform_int(0, 255));
  const std::string p1 = tmp.file("a.pgm"), p2 = tmp.file("b.pgm");
  write_pgm(img, p1);
  const Image back = read_pgm(p1);
  CHECK(back.height == 5);
  CHECK(back.width == 7);
  CHECK(back.pixels == img.pixels);
  write_pgm(back, p2);
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("pgm reader accepts comments and rejects other formats") {
  TempDir tmp;
  const std::string path = tmp.file("c.pgm");
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# a comment\n2 2\n255\n";
    out.write("\x01\x02\x03\x04", 4);
  }
  const Image img = read_pgm(path);
  CHECK(img.at(0, 0) == 1);
  CHECK(img.at(1, 1) == 4);
  {
    std::ofstream out(path, std::ios::binary);
    out << "P6\n2 2\n255\n";
    out.write("\x01\x02\x03\x04", 4);
  }
  CHECK_THROWS_AS(read_pgm(path), Error);
  CHECK_THROWS_AS(read_pgm(tmp.file("missing.pgm")), Error);
}

TEST_CASE("image/tensor/mask conversions") {
  Image img(1, 3);
  img.pixels = {0, 128, 255};
  const Tensor t = image_to_tensor(img);
  CHECK(t.data[0] == 0.0);
  CHECK(t.data[1] == doctest::Approx(128.0 / 255.0));
  CHECK(t.data[2] == 1.0);
  const BinaryMask m = image_to_mask(img);
  CHECK(m.data == std::vector<uint8_t>{0, 1, 1});
  const Image back = mask_to_image(m);
  CHECK(back.pixels == std::vector<uint8_t>{0, 255, 255});
  const Image ti = tensor_to_image(t);
  CHECK(ti.pixels == img.pixels);
}

TEST_CASE("float network weights round-trip through the file format") {
  TempDir tmp;
  Network net = build_network({0.5, 8, {0, 1, 4, 1, 0}});
  init_weights(net, 7);
  // float32 storage: snap parameters to float before comparing.
  for (auto& w : net.weights)
    for (double& v : w.data) v = static_cast<float>(v);
  const std::string path = tmp.file("w.fcnw");
  write_network(net, path);
  CHECK(!is_quantized_weights(path));
  const Network back = read_network(path);
  CHECK(back.spec.scale == net.spec.scale);
  CHECK(back.spec.n == net.spec.n);
  CHECK(back.spec.groups == net.spec.groups);
  REQUIRE(back.layers.size() == net.layers.size());
  for (size_t i = 0; i < net.layers.size(); ++i) {
    CHECK(back.layers[i].kind == net.layers[i].kind);
    CHECK(back.layers[i].kernel == net.layers[i].kernel);
    CHECK(back.layers[i].stride == net.layers[i].stride);
    CHECK(back.layers[i].skip_from == net.layers[i].skip_from);
    CHECK(back.weights[i].data == net.weights[i].data);
    CHECK(back.biases[i] == net.biases[i]);
  }
  // Write-read-write is byte-stable.
  const std::string path2 = tmp.file("w2.fcnw");
  write_network(back, path2);
  CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("quantized network weights round-trip exactly") {
  TempDir tmp;
  Rng rng(112);
  Network net = build_network({1.0, 4, {0, 4, 0}});
  init_weights(net, 9);
  std::vector<Tensor> calib;
  for (int i = 0; i < 2; ++i)
    calib.push_back(testutil::random_tensor(1, 32, 32, rng, 0, 1));
  const QuantizedNetwork qnet =
      quantize_network(net, profile_activations(net, calib));
  const std::string path = tmp.file("w.fcnq");
  write_qnetwork(qnet, path);
  CHECK(is_quantized_weights(path));
  const QuantizedNetwork back = read_qnetwork(path);
  CHECK(back.spec.groups == qnet.spec.groups);
  REQUIRE(back.layers.size() == qnet.layers.size());
  for (size_t i = 0; i < qnet.layers.size(); ++i) {
    CHECK(back.params[i].w_fl == qnet.params[i].w_fl);
    CHECK(back.params[i].a_in == qnet.params[i].a_in);
    CHECK(back.params[i].a_out == qnet.params[i].a_out);
    CHECK(back.weights[i].data == qnet.weights[i].data);
    CHECK(back.weights[i].fl == qnet.weights[i].fl);
    CHECK(back.biases[i] == qnet.biases[i]);
  }
  // The two container formats refuse each other.
  CHECK_THROWS_AS(read_network(path), Error);
  const std::string fpath = tmp.file("f.fcnw");
  write_network(net, fpath);
  CHECK_THROWS_AS(read_qnetwork(fpath), Error);
}

TEST_CASE("iris codes round-trip with bit packing") {
  TempDir tmp;
  Rng rng(113);
  IrisCode code;
  for (int t = 0; t < IrisCode::kBits; ++t) {
    code.code[t] = rng.uniform(0, 1) < 0.5;
    code.mask[t] = rng.uniform(0, 1) < 0.8;
  }
  const std::string path = tmp.file("c.ircd");
  write_code(code, path);
  const IrisCode back = read_code(path);
  CHECK(back.code == code.code);
  CHECK(back.mask == code.mask);
  // Packed: 4 + 4 + 4 + 4 bytes header, then 2 * kBits/8 payload.
  CHECK(fs::file_size(path) == 16 + 2 * IrisCode::kBits / 8);
  CHECK_THROWS_AS(read_code(tmp.file("missing.ircd")), Error);
}

TEST_CASE("geometry json round-trips including the fallback flag") {
  EyeGeometry g;
  g.iris_cx = 63.25;
  g.iris_cy = 70.5;
  g.iris_r = 38.0;
  g.pupil_cx = 62.0;
  g.pupil_cy = 69.75;
  g.pupil_r = 11.5;
  g.pupil_fallback = true;
  const EyeGeometry back = geometry_from_json(geometry_to_json(g));
  CHECK(back.iris_cx == g.iris_cx);
  CHECK(back.iris_cy == g.iris_cy);
  CHECK(back.iris_r == g.iris_r);
  CHECK(back.pupil_cx == g.pupil_cx);
  CHECK(back.pupil_cy == g.pupil_cy);
  CHECK(back.pupil_r == g.pupil_r);
  CHECK(back.pupil_fallback == true);
  TempDir tmp;
  const std::string path = tmp.file("g.json");
  write_geometry(g, path);
  const EyeGeometry fromfile = read_geometry(path);
  CHECK(fromfile.iris_r == g.iris_r);
  CHECK(fromfile.pupil_fallback == g.pupil_fallback);
  CHECK_THROWS_AS(geometry_from_json("{not json"), Error);
}

TEST_CASE("score csv round-trips hd values exactly") {
  TempDir tmp;
  ScoreSet set;
  Rng rng(114);
  for (int i = 0; i < 40; ++i) {
    PairScore p;
    p.probe_id = "p" + std::to_string(i);
    p.gallery_id = "g" + std::to_string(i);
    p.genuine = i % 3 == 0;
    p.hd = rng.uniform(0, 1);
    p.rotation = rng.uniform_int(-12, 12);
    set.scores.push_back(p);
  }
  set.incomparable = 5;
  const std::string path = tmp.file("scores.csv");
  write_scores(set, path);
  const ScoreSet back = read_scores(path);
  REQUIRE(back.scores.size() == set.scores.size());
  for (size_t i = 0; i < set.scores.size(); ++i) {
    CHECK(back.scores[i].probe_id == set.scores[i].probe_id);
    CHECK(back.scores[i].gallery_id == set.scores[i].gallery_id);
    CHECK(back.scores[i].genuine == set.scores[i].genuine);
    CHECK(back.scores[i].hd == set.scores[i].hd);  // exact, not approximate
    CHECK(back.scores[i].rotation == set.scores[i].rotation);
  }
}

TEST_CASE("roc csv has the documented header and one line per point") {
  TempDir tmp;
  std::vector<RocPoint> curve = {{0.1, 0.0, 0.5}, {0.3, 0.25, 0.0}};
  const std::string path = tmp.file("roc.csv");
  write_roc(curve, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "threshold,far,frr");
  int lines = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++lines;
  CHECK(lines == 2);
}

TEST_CASE("keyval parsing: comments, blanks, trimming, typo guard") {
  const KeyVal kv = parse_keyval(
      "# header comment\n"
      "\n"
      "lr = 0.05\n"
      "epochs=25\n"
      "  alpha =  auto  \n"
      "name = two words\n",
      "test");
  CHECK(kv.at("lr") == "0.05");
  CHECK(kv.at("epochs") == "25");
  CHECK(kv.at("alpha") == "auto");
  CHECK(kv.at("name") == "two words");
  CHECK(kv_double(kv, "lr", 0.1) == 0.05);
  CHECK(kv_int(kv, "epochs", 50) == 25);
  CHECK(kv_int(kv, "absent", 50) == 50);
  CHECK(kv_u64(kv, "epochs", 0) == 25);
  CHECK(kv_string(kv, "alpha", "x") == "auto");
  CHECK_THROWS_AS(parse_keyval("novalue\n", "test"), Error);
  CHECK_THROWS_AS(kv_double(kv, "name", 0.0), Error);
  CHECK_THROWS_AS(check_keys(kv, {"lr", "epochs", "alpha"}, "test"), Error);
  check_keys(kv, {"lr", "epochs", "alpha", "name"}, "test");
}

TEST_CASE("metrics and schedule json parse and carry the documented keys") {
  MetricSummary m;
  m.images = 3;
  m.p_mean = 0.95;
  const auto mj = nlohmann::json::parse(metrics_to_json(m));
  CHECK(mj.at("images").get<int>() == 3);
  CHECK(mj.at("precision").at("mean").get<double>() == 0.95);
  CHECK(mj.contains("e1"));
  CHECK(mj.contains("e2"));
  ScheduleReport r;
  LayerSchedule l;
  l.layer = 1;
  l.kind = "conv";
  l.m = 8;
  l.k = 9;
  l.n = 224;
  l.counts = tile_schedule(8, 9, 224);
  r.layers.push_back(l);
  r.totals = l.counts;
  const auto rj = nlohmann::json::parse(schedule_to_json(r));
  CHECK(rj.at("totals").at("tiles").get<uint64_t>() == 1);
  CHECK(rj.at("layers").size() == 1);
  CHECK(rj.at("layers")[0].at("kind").get<std::string>() == "conv");
}
