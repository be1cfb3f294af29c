// irisrec: segmentation, contour fitting, normalization, encoding and
// matching as one binary. Every subcommand reads/writes the documented
// file formats; stdout carries a one-line JSON summary, stderr a one-line
// JSON error. Exit codes: 0 ok, 1 usage, 2 bad data, 3 pipeline failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "iris/accel.hpp"
#include "iris/arch.hpp"
#include "iris/codec.hpp"
#include "iris/contour.hpp"
#include "iris/dataset.hpp"
#include "iris/dfp.hpp"
#include "iris/errors.hpp"
#include "iris/image.hpp"
#include "iris/io.hpp"
#include "iris/keyval.hpp"
#include "iris/metrics.hpp"
#include "iris/network.hpp"
#include "iris/rng.hpp"
#include "iris/synth.hpp"
#include "iris/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void emit(const json& j) { std::cout << j.dump() << "\n"; }

int env_threads() {
  const char* v = std::getenv("IRISREC_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (!end || *end != '\0' || n < 1 || n > 1024)
    throw iris::Error(iris::ErrorKind::Validation,
                      "IRISREC_THREADS must be an integer in [1, 1024]");
  return static_cast<int>(n);
}

// --arch accepts a preset name (fcn0..fcn19) or a group string like
// 0-1-2-4-2-1-0; explicit --scale/--n override the preset's values.
iris::ArchSpec resolve_arch(const std::string& arch,
                            const std::optional<double>& scale,
                            const std::optional<int>& n) {
  iris::ArchSpec spec;
  if (auto preset = iris::preset_arch(arch)) {
    spec = *preset;
  } else {
    spec.groups = iris::parse_groups(arch);
    spec.scale = 1.0;
    spec.n = 8;
  }
  if (scale) spec.scale = *scale;
  if (n) spec.n = *n;
  iris::validate_arch(spec);
  return spec;
}

iris::KeyVal load_config(const std::string& path,
                         const std::set<std::string>& allowed) {
  if (path.empty()) return {};
  iris::KeyVal kv = iris::read_keyval(path);
  iris::check_keys(kv, allowed, path);
  return kv;
}

std::string stem_of(const std::string& path) {
  return fs::path(path).stem().string();
}

std::vector<std::string> list_files(const std::string& dir,
                                    const std::string& ext) {
  if (!fs::is_directory(dir))
    throw iris::Error(iris::ErrorKind::Io, "not a directory: " + dir);
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext)
      out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string arch;
  std::optional<double> scale;
  std::optional<int> n;
  std::string data;
  std::string config;
  std::string out;
};

void run_train(const TrainArgs& a) {
  const iris::ArchSpec spec = resolve_arch(a.arch, a.scale, a.n);
  const iris::KeyVal kv = load_config(
      a.config, {"lr", "momentum", "epochs", "batch", "seed", "alpha"});
  iris::TrainConfig cfg;
  cfg.lr = iris::kv_double(kv, "lr", cfg.lr);
  cfg.momentum = iris::kv_double(kv, "momentum", cfg.momentum);
  cfg.epochs = iris::kv_int(kv, "epochs", cfg.epochs);
  cfg.batch = iris::kv_int(kv, "batch", cfg.batch);
  cfg.seed = iris::kv_u64(kv, "seed", cfg.seed);
  cfg.alpha_mode = iris::kv_string(kv, "alpha", cfg.alpha_mode);

  const auto items = iris::scan_dataset(a.data, true);
  const auto samples = iris::load_samples(items);
  iris::Network net = iris::build_network(spec);
  const iris::TrainResult res = iris::train(net, samples, cfg);
  iris::write_network(net, a.out);

  emit(json{{"samples", samples.size()},
            {"epochs", res.epoch_loss.size()},
            {"best_epoch", res.best_epoch},
            {"best_loss", res.epoch_loss.at(res.best_epoch)},
            {"alpha", res.alpha},
            {"out", a.out}});
}

// -------------------------------------------------------------- segment

struct SegmentArgs {
  std::string weights;
  std::string in;
  std::string out;
};

void run_segment(const SegmentArgs& a) {
  const iris::Tensor t = iris::image_to_tensor(iris::read_pgm(a.in));
  iris::BinaryMask mask;
  bool quantized = false;
  if (iris::is_quantized_weights(a.weights)) {
    quantized = true;
    mask = iris::quantized_infer(iris::read_qnetwork(a.weights), t);
  } else {
    mask = iris::infer(iris::read_network(a.weights), t);
  }
  iris::write_pgm(iris::mask_to_image(mask), a.out);
  emit(json{{"quantized", quantized},
            {"iris_pixels", mask.count()},
            {"out", a.out}});
}

// ------------------------------------------------------------- quantize

struct QuantizeArgs {
  std::string weights;
  std::string calib;
  std::string config;
  std::optional<int> count;
  std::optional<uint64_t> seed;
  std::string out;
};

void run_quantize(const QuantizeArgs& a) {
  const iris::KeyVal kv = load_config(a.config, {"count", "seed"});
  const int count = a.count ? *a.count : iris::kv_int(kv, "count", 16);
  const uint64_t seed = a.seed ? *a.seed : iris::kv_u64(kv, "seed", 1);
  if (count < 1)
    throw iris::Error(iris::ErrorKind::Validation,
                      "calibration count must be positive");

  iris::Network net = iris::read_network(a.weights);
  auto items = iris::scan_dataset(a.calib, false);
  if (items.empty())
    throw iris::Error(iris::ErrorKind::Validation,
                      "calibration directory holds no images");

  // Seeded choice of calibration images: Fisher-Yates, then a prefix.
  iris::Rng rng(seed);
  for (size_t i = items.size(); i > 1; --i)
    std::swap(items[i - 1], items[rng.uniform_int(0, static_cast<int>(i) - 1)]);
  items.resize(std::min<size_t>(items.size(), static_cast<size_t>(count)));

  std::vector<iris::Tensor> calib;
  for (const auto& it : items)
    calib.push_back(iris::image_to_tensor(iris::read_pgm(it.image_path)));

  const auto params = iris::profile_activations(net, calib);
  const iris::QuantizedNetwork qnet = iris::quantize_network(net, params);
  iris::write_qnetwork(qnet, a.out);

  json layers = json::array();
  for (size_t i = 0; i < params.size(); ++i)
    layers.push_back(json{{"layer", i},
                          {"w_fl", params[i].w_fl},
                          {"a_in", params[i].a_in},
                          {"a_out", params[i].a_out}});
  emit(json{{"calib_images", calib.size()}, {"layers", layers},
            {"out", a.out}});
}

// ------------------------------------------------------------------ fit

struct FitArgs {
  std::string mask;
  std::string config;
  std::string out;
};

void run_fit(const FitArgs& a) {
  const iris::KeyVal kv = load_config(
      a.config,
      {"iris_r_lo", "iris_r_hi", "iris_roi_frac", "pupil_r_lo", "pupil_r_hi",
       "pupil_roi_frac", "pupil_fallback_ratio", "inner_margin"});
  iris::FitConfig cfg;
  cfg.iris_r_lo = iris::kv_double(kv, "iris_r_lo", cfg.iris_r_lo);
  cfg.iris_r_hi = iris::kv_double(kv, "iris_r_hi", cfg.iris_r_hi);
  cfg.iris_roi_frac = iris::kv_double(kv, "iris_roi_frac", cfg.iris_roi_frac);
  cfg.pupil_r_lo = iris::kv_double(kv, "pupil_r_lo", cfg.pupil_r_lo);
  cfg.pupil_r_hi = iris::kv_double(kv, "pupil_r_hi", cfg.pupil_r_hi);
  cfg.pupil_roi_frac =
      iris::kv_double(kv, "pupil_roi_frac", cfg.pupil_roi_frac);
  cfg.pupil_fallback_ratio =
      iris::kv_double(kv, "pupil_fallback_ratio", cfg.pupil_fallback_ratio);
  cfg.inner_margin = iris::kv_double(kv, "inner_margin", cfg.inner_margin);

  const iris::BinaryMask mask = iris::image_to_mask(iris::read_pgm(a.mask));
  const iris::EyeGeometry g = iris::fit_contours(mask, cfg);
  iris::write_geometry(g, a.out);
  emit(json{{"iris_r", g.iris_r},
            {"pupil_r", g.pupil_r},
            {"pupil_fallback", g.pupil_fallback},
            {"out", a.out}});
}

// --------------------------------------------------------------- encode

struct EncodeArgs {
  std::string image;
  std::string mask;
  std::string geometry;
  std::string config;
  std::string out;
};

void run_encode(const EncodeArgs& a) {
  const iris::KeyVal kv =
      load_config(a.config, {"lambda0", "sigma_over_f", "mag_threshold"});
  iris::GaborParams params;
  params.lambda0 = iris::kv_double(kv, "lambda0", params.lambda0);
  params.sigma_over_f =
      iris::kv_double(kv, "sigma_over_f", params.sigma_over_f);
  params.mag_threshold =
      iris::kv_double(kv, "mag_threshold", params.mag_threshold);

  const iris::Tensor t = iris::image_to_tensor(iris::read_pgm(a.image));
  const iris::BinaryMask m = iris::image_to_mask(iris::read_pgm(a.mask));
  const iris::EyeGeometry g = iris::read_geometry(a.geometry);
  const iris::NormalizedGrid grid = iris::rubber_sheet(t, g, m);
  const iris::IrisCode code = iris::encode(grid, params);
  iris::write_code(code, a.out);

  int mask_bits = 0;
  for (uint8_t b : code.mask) mask_bits += b;
  emit(json{{"mask_bits", mask_bits},
            {"total_bits", iris::IrisCode::kBits},
            {"out", a.out}});
}

// ---------------------------------------------------------------- match

struct MatchArgs {
  std::string probe;
  std::string gallery;
  std::string out;
};

std::vector<iris::GalleryEntry> load_gallery(const std::string& dir) {
  std::vector<iris::GalleryEntry> gallery;
  for (const auto& path : list_files(dir, ".ircd")) {
    iris::GalleryEntry e;
    e.label = stem_of(path);
    e.identity = iris::identity_of(e.label);
    e.code = iris::read_code(path);
    gallery.push_back(std::move(e));
  }
  if (gallery.empty())
    throw iris::Error(iris::ErrorKind::Validation,
                      "gallery holds no .ircd files");
  return gallery;
}

void run_match(const MatchArgs& a) {
  const auto gallery = load_gallery(a.gallery);
  iris::ScoreSet set;
  if (a.probe.empty()) {
    set = iris::all_pairs(gallery, env_threads());
  } else {
    const iris::IrisCode probe = iris::read_code(a.probe);
    const std::string probe_label = stem_of(a.probe);
    const std::string probe_identity = iris::identity_of(probe_label);
    for (const auto& e : gallery) {
      iris::PairScore ps;
      ps.probe_id = probe_label;
      ps.gallery_id = e.label;
      ps.genuine = probe_identity == e.identity;
      try {
        const iris::MatchResult m = iris::match_min_hd(probe, e.code);
        ps.hd = m.hd;
        ps.rotation = m.rotation;
      } catch (const iris::Error& err) {
        if (err.kind() != iris::ErrorKind::Incomparable) throw;
        ++set.incomparable;
        continue;
      }
      set.scores.push_back(std::move(ps));
    }
  }
  iris::write_scores(set, a.out);
  emit(json{{"pairs", set.scores.size()},
            {"incomparable", set.incomparable},
            {"out", a.out}});
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string out;
  std::string scores;
  std::string roc;
};

void run_eval(const EvalArgs& a) {
  if (!a.scores.empty()) {
    const iris::ScoreSet set = iris::read_scores(a.scores);
    if (!a.roc.empty()) iris::write_roc(iris::roc(set), a.roc);
    emit(json{{"pairs", set.scores.size()},
              {"incomparable", set.incomparable},
              {"eer", iris::eer(set)}});
    return;
  }
  if (a.pred.empty() || a.gt.empty() || a.out.empty())
    throw iris::Error(iris::ErrorKind::Validation,
                      "eval needs --scores or all of --pred/--gt/--out");

  std::vector<iris::SegScores> per_image;
  std::vector<double> per_e1;
  for (const auto& path : list_files(a.pred, ".pgm")) {
    const fs::path gt_path = fs::path(a.gt) / fs::path(path).filename();
    if (!fs::exists(gt_path))
      throw iris::Error(iris::ErrorKind::Validation,
                        "no ground truth for " + path);
    const iris::BinaryMask pred = iris::image_to_mask(iris::read_pgm(path));
    const iris::BinaryMask gt =
        iris::image_to_mask(iris::read_pgm(gt_path.string()));
    per_image.push_back(iris::seg_metrics(pred, gt));
    per_e1.push_back(iris::e1(pred, gt));
  }
  if (per_image.empty())
    throw iris::Error(iris::ErrorKind::Validation,
                      "prediction directory holds no .pgm masks");
  const iris::MetricSummary summary =
      iris::summarize_metrics(per_image, per_e1);
  const std::string text = iris::metrics_to_json(summary);
  std::ofstream f(a.out, std::ios::binary);
  if (!f) throw iris::Error(iris::ErrorKind::Io, "cannot write " + a.out);
  f << text;
  std::cout << text;
}

// ---------------------------------------------------------------- flops

struct FlopsArgs {
  std::string arch;
  std::optional<double> scale;
  std::optional<int> n;
  std::string dims = "320x240";
};

void run_flops(const FlopsArgs& a) {
  const iris::ArchSpec spec = resolve_arch(a.arch, a.scale, a.n);
  const size_t x = a.dims.find('x');
  int w = 0, h = 0;
  if (x != std::string::npos) {
    try {
      w = std::stoi(a.dims.substr(0, x));
      h = std::stoi(a.dims.substr(x + 1));
    } catch (const std::exception&) {
      w = h = 0;
    }
  }
  if (w <= 0 || h <= 0)
    throw iris::Error(iris::ErrorKind::Validation,
                      "--dims must look like 320x240");
  const uint64_t flops = iris::count_flops(spec, h, w);
  emit(json{{"arch", iris::format_groups(spec.groups)},
            {"scale", spec.scale},
            {"n", spec.n},
            {"width", w},
            {"height", h},
            {"flops", flops},
            {"gflops", static_cast<double>(flops) * 1e-9}});
}

// ---------------------------------------------------------------- accel

struct AccelArgs {
  std::string weights;
  std::string in;
  std::string report;
  std::string backend = "accel";
  std::string out;
};

void run_accel(const AccelArgs& a) {
  if (a.backend != "ref" && a.backend != "accel")
    throw iris::Error(iris::ErrorKind::Validation,
                      "--backend must be ref or accel");
  if (!a.report.empty() && a.backend != "accel")
    throw iris::Error(iris::ErrorKind::Validation,
                      "--report needs --backend accel");

  const iris::Tensor t = iris::image_to_tensor(iris::read_pgm(a.in));
  iris::ScheduleReport report;
  iris::ScheduleReport* rp = a.backend == "accel" ? &report : nullptr;
  iris::BinaryMask mask;
  bool quantized = false;
  if (iris::is_quantized_weights(a.weights)) {
    quantized = true;
    const iris::QuantizedNetwork qnet = iris::read_qnetwork(a.weights);
    mask = a.backend == "accel" ? iris::run_network_on_accel(qnet, t, rp)
                                : iris::quantized_infer(qnet, t);
  } else {
    const iris::Network net = iris::read_network(a.weights);
    mask = a.backend == "accel" ? iris::run_network_on_accel(net, t, rp)
                                : iris::infer(net, t);
  }
  if (!a.report.empty()) {
    std::ofstream f(a.report, std::ios::binary);
    if (!f)
      throw iris::Error(iris::ErrorKind::Io, "cannot write " + a.report);
    f << iris::schedule_to_json(report);
  }
  if (!a.out.empty()) iris::write_pgm(iris::mask_to_image(mask), a.out);

  json j{{"backend", a.backend},
         {"quantized", quantized},
         {"iris_pixels", mask.count()}};
  if (a.backend == "accel") {
    j["tiles"] = report.totals.tiles;
    j["est_cycles"] = report.totals.est_cycles;
    j["c_saturations"] = report.c_saturations;
  }
  emit(j);
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string spec;
  std::string out;
  std::optional<int> identities;
  std::optional<int> samples;
};

void run_synth(const SynthArgs& a) {
  const iris::KeyVal kv = load_config(
      a.spec, {"height", "width", "seed", "iris_r_lo", "iris_r_hi",
               "pupil_ratio_lo", "pupil_ratio_hi", "center_jitter", "octaves",
               "occlusion", "noise", "rotation_jitter", "identities",
               "samples"});
  iris::SyntheticEyeSpec spec;
  spec.height = iris::kv_int(kv, "height", spec.height);
  spec.width = iris::kv_int(kv, "width", spec.width);
  spec.seed = iris::kv_u64(kv, "seed", spec.seed);
  spec.iris_r_lo = iris::kv_double(kv, "iris_r_lo", spec.iris_r_lo);
  spec.iris_r_hi = iris::kv_double(kv, "iris_r_hi", spec.iris_r_hi);
  spec.pupil_ratio_lo =
      iris::kv_double(kv, "pupil_ratio_lo", spec.pupil_ratio_lo);
  spec.pupil_ratio_hi =
      iris::kv_double(kv, "pupil_ratio_hi", spec.pupil_ratio_hi);
  spec.center_jitter = iris::kv_double(kv, "center_jitter", spec.center_jitter);
  spec.octaves = iris::kv_int(kv, "octaves", spec.octaves);
  spec.occlusion = iris::kv_double(kv, "occlusion", spec.occlusion);
  spec.noise = iris::kv_double(kv, "noise", spec.noise);
  spec.rotation_jitter =
      iris::kv_double(kv, "rotation_jitter", spec.rotation_jitter);
  const int identities =
      a.identities ? *a.identities : iris::kv_int(kv, "identities", 10);
  const int samples = a.samples ? *a.samples : iris::kv_int(kv, "samples", 5);
  if (identities < 1 || samples < 1)
    throw iris::Error(iris::ErrorKind::Validation,
                      "identities and samples must be positive");
  iris::validate_synth_spec(spec);

  fs::create_directories(fs::path(a.out) / "images");
  fs::create_directories(fs::path(a.out) / "masks");
  fs::create_directories(fs::path(a.out) / "geometry");
  for (int id = 1; id <= identities; ++id)
    for (int s = 1; s <= samples; ++s) {
      char stem[32];
      std::snprintf(stem, sizeof stem, "id%03d_s%02d", id, s);
      const iris::SyntheticSample eye = iris::synth_eye(spec, id, s);
      iris::write_pgm(eye.image,
                      (fs::path(a.out) / "images" / (std::string(stem) + ".pgm"))
                          .string());
      iris::write_pgm(eye.mask,
                      (fs::path(a.out) / "masks" / (std::string(stem) + ".pgm"))
                          .string());
      iris::write_geometry(
          eye.geometry,
          (fs::path(a.out) / "geometry" / (std::string(stem) + ".json"))
              .string());
    }
  emit(json{{"identities", identities},
            {"samples", samples},
            {"images", identities * samples},
            {"dir", a.out}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iris segmentation and recognition pipeline"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd =
      app.add_subcommand("train", "train a segmentation network");
  train_cmd->add_option("--arch", train_args.arch,
                        "preset (fcn0..fcn19) or group string like 0-1-2-4-2-1-0")
      ->required();
  train_cmd->add_option("--scale", train_args.scale, "input scale override");
  train_cmd->add_option("--n", train_args.n, "channel base override");
  train_cmd->add_option("--data", train_args.data,
                        "dataset root with images/ and masks/")
      ->required();
  train_cmd->add_option("--config", train_args.config,
                        "key=value file: lr momentum epochs batch seed alpha");
  train_cmd->add_option("--out", train_args.out, "output .fcnw path")
      ->required();
  train_cmd->callback([&] { run_train(train_args); });

  SegmentArgs seg_args;
  auto* seg_cmd = app.add_subcommand("segment", "segment one image");
  seg_cmd->add_option("--weights", seg_args.weights, ".fcnw or .fcnq weights")
      ->required();
  seg_cmd->add_option("--in", seg_args.in, "input PGM image")->required();
  seg_cmd->add_option("--out", seg_args.out, "output PGM mask")->required();
  seg_cmd->callback([&] { run_segment(seg_args); });

  QuantizeArgs quant_args;
  auto* quant_cmd =
      app.add_subcommand("quantize", "convert weights to 8-bit fixed point");
  quant_cmd->add_option("--weights", quant_args.weights, "input .fcnw")
      ->required();
  quant_cmd->add_option("--calib", quant_args.calib,
                        "dataset root with calibration images/")
      ->required();
  quant_cmd->add_option("--config", quant_args.config,
                        "key=value file: count seed");
  quant_cmd->add_option("--count", quant_args.count,
                        "calibration image count (default 16)");
  quant_cmd->add_option("--seed", quant_args.seed,
                        "calibration sampling seed (default 1)");
  quant_cmd->add_option("--out", quant_args.out, "output .fcnq path")
      ->required();
  quant_cmd->callback([&] { run_quantize(quant_args); });

  FitArgs fit_args;
  auto* fit_cmd =
      app.add_subcommand("fit", "fit iris and pupil circles to a mask");
  fit_cmd->add_option("--mask", fit_args.mask, "segmentation mask PGM")
      ->required();
  fit_cmd->add_option("--config", fit_args.config,
                      "key=value file with search windows");
  fit_cmd->add_option("--out", fit_args.out, "output geometry JSON")
      ->required();
  fit_cmd->callback([&] { run_fit(fit_args); });

  EncodeArgs enc_args;
  auto* enc_cmd = app.add_subcommand(
      "encode", "normalize and encode an iris as a binary code");
  enc_cmd->add_option("--image", enc_args.image, "eye image PGM")->required();
  enc_cmd->add_option("--mask", enc_args.mask, "segmentation mask PGM")
      ->required();
  enc_cmd->add_option("--geometry", enc_args.geometry, "geometry JSON")
      ->required();
  enc_cmd->add_option("--config", enc_args.config,
                      "key=value file: lambda0 sigma_over_f mag_threshold");
  enc_cmd->add_option("--out", enc_args.out, "output .ircd path")->required();
  enc_cmd->callback([&] { run_encode(enc_args); });

  MatchArgs match_args;
  auto* match_cmd = app.add_subcommand(
      "match", "score codes: probe vs gallery, or gallery all-pairs");
  match_cmd->add_option("--probe", match_args.probe,
                        "probe .ircd (omit for all-pairs)");
  match_cmd->add_option("--gallery", match_args.gallery,
                        "directory of .ircd files")
      ->required();
  match_cmd->add_option("--out", match_args.out, "output scores CSV")
      ->required();
  match_cmd->callback([&] { run_match(match_args); });

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand(
      "eval", "segmentation metrics over directories, or EER from scores");
  eval_cmd->add_option("--pred", eval_args.pred, "predicted mask directory");
  eval_cmd->add_option("--gt", eval_args.gt, "ground-truth mask directory");
  eval_cmd->add_option("--out", eval_args.out, "output metrics JSON");
  eval_cmd->add_option("--scores", eval_args.scores, "scores CSV from match");
  eval_cmd->add_option("--roc", eval_args.roc, "optional ROC CSV output");
  eval_cmd->callback([&] { run_eval(eval_args); });

  FlopsArgs flops_args;
  auto* flops_cmd =
      app.add_subcommand("flops", "count forward-pass FLOPs for an arch");
  flops_cmd->add_option("--arch", flops_args.arch, "preset or group string")
      ->required();
  flops_cmd->add_option("--scale", flops_args.scale, "input scale override");
  flops_cmd->add_option("--n", flops_args.n, "channel base override");
  flops_cmd->add_option("--dims", flops_args.dims,
                        "input size as WIDTHxHEIGHT (default 320x240)");
  flops_cmd->callback([&] { run_flops(flops_args); });

  AccelArgs accel_args;
  auto* accel_cmd = app.add_subcommand(
      "accel", "run inference through the accelerator model");
  accel_cmd->add_option("--weights", accel_args.weights,
                        ".fcnq (integer datapath) or .fcnw (float datapath)")
      ->required();
  accel_cmd->add_option("--in", accel_args.in, "input PGM image")->required();
  accel_cmd->add_option("--report", accel_args.report,
                        "schedule report JSON output");
  accel_cmd->add_option("--backend", accel_args.backend,
                        "ref or accel (default accel)");
  accel_cmd->add_option("--out", accel_args.out, "optional output PGM mask");
  accel_cmd->callback([&] { run_accel(accel_args); });

  SynthArgs synth_args;
  auto* synth_cmd =
      app.add_subcommand("synth", "render a synthetic eye dataset");
  synth_cmd->add_option("--spec", synth_args.spec,
                        "key=value spec file (defaults apply when omitted)");
  synth_cmd->add_option("--out", synth_args.out, "output dataset root")
      ->required();
  synth_cmd->add_option("--identities", synth_args.identities,
                        "identity count (default 10)");
  synth_cmd->add_option("--samples", synth_args.samples,
                        "samples per identity (default 5)");
  synth_cmd->callback([&] { run_synth(synth_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const iris::Error& e) {
    std::cerr << json{{"error", e.kind_name()}, {"message", e.what()}}.dump()
              << "\n";
    return e.is_pipeline_failure() ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Internal"}, {"message", e.what()}}.dump()
              << "\n";
    return 2;
  }
  return 0;
}
