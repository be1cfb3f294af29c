// Drives the installed irisrec binary end to end through a shell, checking
// exit codes, the one-line JSON reports, and the artifacts each stage leaves
// behind.  The pipeline test trains a small net on synthetic data, so it
// runs in seconds rather than minutes.

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "iris/arch.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("irisrec_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CmdResult {
  int status = -1;
  std::string out;
  std::string err;
};

// Runs the CLI with the given argument string, capturing both streams.
CmdResult run(const std::string& args, const fs::path& dir) {
  const fs::path out_f = dir / "cmd_stdout.txt";
  const fs::path err_f = dir / "cmd_stderr.txt";
  std::string cmd = std::string("\"") + IRISREC_BIN + "\" " + args + " > " +
                    out_f.string() + " 2> " + err_f.string();
  const int rc = std::system(cmd.c_str());
  CmdResult r;
  REQUIRE(rc != -1);
  if (WIFEXITED(rc)) r.status = WEXITSTATUS(rc);
  r.out = slurp(out_f);
  r.err = slurp(err_f);
  return r;
}

json run_json(const std::string& args, const fs::path& dir) {
  const CmdResult r = run(args, dir);
  CAPTURE(args);
  CAPTURE(r.err);
  REQUIRE(r.status == 0);
  return json::parse(r.out);
}

struct ScoreRow {
  std::string probe, gallery, label;
  double hd = 0.0;
  int rotation = 0;
};

std::vector<ScoreRow> parse_scores(const fs::path& csv) {
  std::ifstream in(csv);
  REQUIRE(in.good());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "probe_id,gallery_id,label,hd,rotation");
  std::vector<ScoreRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    ScoreRow row;
    std::string hd_s, rot_s;
    REQUIRE(std::getline(ls, row.probe, ','));
    REQUIRE(std::getline(ls, row.gallery, ','));
    REQUIRE(std::getline(ls, row.label, ','));
    REQUIRE(std::getline(ls, hd_s, ','));
    REQUIRE(std::getline(ls, rot_s, ','));
    row.hd = std::stod(hd_s);
    row.rotation = std::stoi(rot_s);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("cli: train, segment, fit, encode, match, eval round trip") {
  TempDir tmp;
  const std::string d = tmp.path.string();
  const std::vector<std::string> stems = {"id001_s01", "id001_s02",
                                          "id002_s01"};

  const json synth =
      run_json("synth --out " + d + "/ds --identities 3 --samples 3", tmp.path);
  CHECK(synth.at("images").get<int>() == 9);
  for (const auto& s : stems) {
    CHECK(fs::exists(tmp.path / "ds/images" / (s + ".pgm")));
    CHECK(fs::exists(tmp.path / "ds/masks" / (s + ".pgm")));
    CHECK(fs::exists(tmp.path / "ds/geometry" / (s + ".json")));
  }

  {
    std::ofstream cfg(tmp.path / "train.cfg");
    cfg << "lr = 0.25\nepochs = 30\nbatch = 4\nseed = 7\n";
  }
  const json train = run_json(
      "train --arch 0-1-2-4-2-1-0 --scale 0.5 --n 8 --data " + d +
          "/ds --config " + d + "/train.cfg --out " + d + "/w.fcnw",
      tmp.path);
  CHECK(train.at("samples").get<int>() == 9);
  CHECK(train.at("epochs").get<int>() == 30);
  // A net this small separates the synthetic renders comfortably within 30
  // epochs; a loss this low is what makes the match stage meaningful below.
  CHECK(train.at("best_loss").get<double>() < 0.2);

  fs::create_directories(tmp.path / "codes");
  for (const auto& s : stems) {
    const json seg = run_json("segment --weights " + d + "/w.fcnw --in " + d +
                                  "/ds/images/" + s + ".pgm --out " + d +
                                  "/seg_" + s + ".pgm",
                              tmp.path);
    CHECK(seg.at("quantized").get<bool>() == false);
    CHECK(seg.at("iris_pixels").get<int>() > 1000);

    const json fit = run_json("fit --mask " + d + "/seg_" + s +
                                  ".pgm --out " + d + "/geo_" + s + ".json",
                              tmp.path);
    CHECK(fit.at("pupil_fallback").get<bool>() == false);
    CHECK(fit.at("iris_r").get<double>() > fit.at("pupil_r").get<double>());

    const json enc = run_json(
        "encode --image " + d + "/ds/images/" + s + ".pgm --mask " + d +
            "/seg_" + s + ".pgm --geometry " + d + "/geo_" + s +
            ".json --out " + d + "/codes/" + s + ".ircd",
        tmp.path);
    CHECK(enc.at("total_bits").get<int>() == 4096);
    CHECK(enc.at("mask_bits").get<int>() > 1000);
  }

  const json match = run_json(
      "match --gallery " + d + "/codes --out " + d + "/scores.csv", tmp.path);
  CHECK(match.at("pairs").get<int>() == 3);
  CHECK(match.at("incomparable").get<int>() == 0);

  const auto rows = parse_scores(tmp.path / "scores.csv");
  REQUIRE(rows.size() == 3);
  double genuine_hd = -1.0;
  double min_impostor = 2.0;
  int genuine_count = 0;
  for (const auto& row : rows) {
    if (row.label == "genuine") {
      ++genuine_count;
      genuine_hd = row.hd;
    } else {
      CHECK(row.label == "impostor");
      min_impostor = std::min(min_impostor, row.hd);
    }
    CHECK(std::abs(row.rotation) <= 12);
  }
  CHECK(genuine_count == 1);
  CHECK(genuine_hd < 0.25);
  CHECK(genuine_hd < min_impostor);

  const json ev = run_json("eval --scores " + d + "/scores.csv --roc " + d +
                               "/roc.csv",
                           tmp.path);
  CHECK(ev.at("pairs").get<int>() == 3);
  CHECK(ev.at("eer").get<double>() == 0.0);
  {
    std::ifstream roc(tmp.path / "roc.csv");
    std::string header;
    REQUIRE(std::getline(roc, header));
    CHECK(header == "threshold,far,frr");
  }

  // Segmentation-quality evaluation against the rendered ground truth.
  fs::create_directories(tmp.path / "pred");
  for (const auto& s : stems)
    fs::copy_file(tmp.path / ("seg_" + s + ".pgm"),
                  tmp.path / "pred" / (s + ".pgm"));
  const json met = run_json("eval --pred " + d + "/pred --gt " + d +
                                "/ds/masks --out " + d + "/metrics.json",
                            tmp.path);
  CHECK(met.at("images").get<int>() == 3);
  CHECK(met.at("f").at("mean").get<double>() > 0.8);
  const json met_file = json::parse(slurp(tmp.path / "metrics.json"));
  CHECK(met_file == met);

  // Post-training quantization and the fixed-point inference paths.
  {
    std::ofstream cfg(tmp.path / "q.cfg");
    cfg << "count = 4\nseed = 1\n";
  }
  const json quant = run_json("quantize --weights " + d + "/w.fcnw --calib " +
                                  d + "/ds --config " + d + "/q.cfg --out " +
                                  d + "/w.fcnq",
                              tmp.path);
  CHECK(quant.at("calib_images").get<int>() == 4);
  REQUIRE(quant.at("layers").is_array());
  // Activation scales must chain: each layer consumes the previous output.
  const auto& layers = quant.at("layers");
  for (size_t i = 1; i + 1 < layers.size(); ++i)
    CHECK(layers[i].at("a_in").get<int>() ==
          layers[i - 1].at("a_out").get<int>());

  const json qseg = run_json("segment --weights " + d + "/w.fcnq --in " + d +
                                 "/ds/images/id001_s01.pgm --out " + d +
                                 "/qseg.pgm",
                             tmp.path);
  CHECK(qseg.at("quantized").get<bool>() == true);

  const json aref = run_json("accel --weights " + d + "/w.fcnq --in " + d +
                                 "/ds/images/id001_s01.pgm --backend ref "
                                 "--out " +
                                 d + "/aref.pgm",
                             tmp.path);
  CHECK(aref.at("backend").get<std::string>() == "ref");
  const json aacc = run_json("accel --weights " + d + "/w.fcnq --in " + d +
                                 "/ds/images/id001_s01.pgm --backend accel "
                                 "--out " +
                                 d + "/aacc.pgm --report " + d + "/rep.json",
                             tmp.path);
  CHECK(aacc.at("backend").get<std::string>() == "accel");
  CHECK(aacc.at("tiles").get<int>() > 0);

  // The reference engine and the tiled model run the same integer math, and
  // the ref backend shares inference code with segment.
  CHECK(slurp(tmp.path / "qseg.pgm") == slurp(tmp.path / "aref.pgm"));
  CHECK(slurp(tmp.path / "aref.pgm") == slurp(tmp.path / "aacc.pgm"));

  const json rep = json::parse(slurp(tmp.path / "rep.json"));
  uint64_t tiles_sum = 0, cycles_sum = 0;
  for (const auto& layer : rep.at("layers")) {
    const std::string kind = layer.at("kind").get<std::string>();
    CHECK((kind == "conv" || kind == "tconv"));
    tiles_sum += layer.at("tiles").get<uint64_t>();
    cycles_sum += layer.at("est_cycles").get<uint64_t>();
  }
  CHECK(rep.at("totals").at("tiles").get<uint64_t>() == tiles_sum);
  CHECK(rep.at("totals").at("est_cycles").get<uint64_t>() == cycles_sum);
  CHECK(aacc.at("tiles").get<uint64_t>() == tiles_sum);

  // Float weights through the accel float path agree with plain segment.
  const json afl = run_json("accel --weights " + d + "/w.fcnw --in " + d +
                                "/ds/images/id001_s01.pgm --backend accel "
                                "--out " +
                                d + "/afl.pgm",
                            tmp.path);
  CHECK(afl.at("quantized").get<bool>() == false);
  CHECK(afl.at("iris_pixels") ==
        run_json("segment --weights " + d + "/w.fcnw --in " + d +
                     "/ds/images/id001_s01.pgm --out " + d + "/fseg.pgm",
                 tmp.path)
            .at("iris_pixels"));
}

TEST_CASE("cli: flops reporting matches the library count") {
  TempDir tmp;

  const json preset = run_json("flops --arch fcn14", tmp.path);
  const auto spec = iris::preset_arch("fcn14");
  REQUIRE(spec.has_value());
  CHECK(preset.at("width").get<int>() == 320);
  CHECK(preset.at("height").get<int>() == 240);
  CHECK(preset.at("flops").get<uint64_t>() == iris::count_flops(*spec, 240, 320));
  CHECK(preset.at("gflops").get<double>() ==
        doctest::Approx(preset.at("flops").get<double>() / 1e9));

  // Raw group string plus explicit scale/n/dims takes the same code path.
  const json raw = run_json(
      "flops --arch 0-1-2-4-2-1-0 --scale 0.5 --n 8 --dims 128x128", tmp.path);
  iris::ArchSpec manual{0.5, 8, iris::parse_groups("0-1-2-4-2-1-0")};
  CHECK(raw.at("flops").get<uint64_t>() == iris::count_flops(manual, 128, 128));
  CHECK(raw.at("width").get<int>() == 128);

  // fcn14 is that same family; at 320x240 both spell the same number.
  CHECK(preset.at("flops").get<uint64_t>() ==
        iris::count_flops(manual, 240, 320));
}

TEST_CASE("cli: exit codes and structured error reporting") {
  TempDir tmp;
  const std::string d = tmp.path.string();

  CHECK(run("", tmp.path).status == 1);
  CHECK(run("--help", tmp.path).status == 0);
  CHECK(run("segment --help", tmp.path).status == 0);

  // Missing input file: bad data, stderr carries a one-line JSON report.
  const CmdResult bad_w =
      run("segment --weights " + d + "/missing.fcnw --in " + d +
              "/x.pgm --out " + d + "/y.pgm",
          tmp.path);
  CHECK(bad_w.status == 2);
  CHECK(json::parse(bad_w.err).at("error").get<std::string>() == "io");

  // Invalid architecture string: validation failure, still bad data.
  const CmdResult bad_arch = run("flops --arch 0-3-4", tmp.path);
  CHECK(bad_arch.status == 2);
  CHECK(json::parse(bad_arch.err).at("error").get<std::string>() ==
        "validation");

  const CmdResult bad_data = run(
      "train --arch fcn19 --data " + d + "/nope --out " + d + "/w.fcnw",
      tmp.path);
  CHECK(bad_data.status == 2);
  CHECK(json::parse(bad_data.err).at("error").get<std::string>() == "io");

  // A mask with no foreground is a pipeline failure, not bad data.
  {
    std::ofstream pgm(tmp.path / "black.pgm", std::ios::binary);
    pgm << "P5\n128 128\n255\n" << std::string(128 * 128, '\0');
  }
  const CmdResult no_iris =
      run("fit --mask " + d + "/black.pgm --out " + d + "/g.json", tmp.path);
  CHECK(no_iris.status == 3);
  CHECK(json::parse(no_iris.err).at("error").get<std::string>() ==
        "no_iris_found");
}
