#include "iris/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "iris/errors.hpp"

namespace iris {

namespace {

// Little-endian primitive framing. The host is assumed little-endian
// (checked once); this keeps the readers/writers trivial memcpys.
void check_endianness() {
  static const bool little = [] {
    const uint32_t probe = 1;
    uint8_t first;
    std::memcpy(&first, &probe, 1);
    return first == 1;
  }();
  if (!little)
    throw Error(ErrorKind::Io, "big-endian hosts are not supported");
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error(ErrorKind::Io, "truncated file: " + path);
  return v;
}

void put_str(std::ostream& out, const std::string& s) {
  put<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_str(std::istream& in, const std::string& path) {
  const uint32_t n = get<uint32_t>(in, path);
  if (n > (1u << 20)) throw Error(ErrorKind::Io, "oversized string: " + path);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw Error(ErrorKind::Io, "truncated file: " + path);
  return s;
}

void put_magic(std::ostream& out, const char m[5]) { out.write(m, 4); }

void expect_magic(std::istream& in, const char m[5], const std::string& path) {
  char buf[4];
  in.read(buf, 4);
  if (!in || std::memcmp(buf, m, 4) != 0)
    throw Error(ErrorKind::Io, std::string("bad magic, expected ") + m +
                                   ": " + path);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for write");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return in;
}

void put_layer_spec(std::ostream& out, const LayerSpec& l) {
  put<uint8_t>(out, static_cast<uint8_t>(l.kind));
  put<int32_t>(out, l.kernel);
  put<int32_t>(out, l.stride);
  put<int32_t>(out, l.padding);
  put<int32_t>(out, l.in_channels);
  put<int32_t>(out, l.out_channels);
  put<uint8_t>(out, l.relu ? 1 : 0);
  put<int32_t>(out, l.skip_from);
}

LayerSpec get_layer_spec(std::istream& in, const std::string& path) {
  LayerSpec l;
  const uint8_t kind = get<uint8_t>(in, path);
  if (kind > 2) throw Error(ErrorKind::Io, "bad layer kind: " + path);
  l.kind = static_cast<LayerKind>(kind);
  l.kernel = get<int32_t>(in, path);
  l.stride = get<int32_t>(in, path);
  l.padding = get<int32_t>(in, path);
  l.in_channels = get<int32_t>(in, path);
  l.out_channels = get<int32_t>(in, path);
  l.relu = get<uint8_t>(in, path) != 0;
  l.skip_from = get<int32_t>(in, path);
  return l;
}

// Common FCNW/FCNQ preamble: arch string, n, scale, layer count.
template <typename Net>
void put_header(std::ostream& out, const Net& net) {
  put_str(out, format_groups(net.spec.groups));
  put<uint32_t>(out, static_cast<uint32_t>(net.spec.n));
  put<double>(out, net.spec.scale);
  put<uint32_t>(out, static_cast<uint32_t>(net.layers.size()));
}

ArchSpec get_header(std::istream& in, const std::string& path,
                    uint32_t* layer_count) {
  ArchSpec spec;
  const std::string groups = get_str(in, path);
  spec.groups = parse_groups(groups);
  spec.n = static_cast<int>(get<uint32_t>(in, path));
  spec.scale = get<double>(in, path);
  *layer_count = get<uint32_t>(in, path);
  validate_arch(spec);
  return spec;
}

void check_layers_match(const std::vector<LayerSpec>& stored,
                        const std::vector<LayerSpec>& derived,
                        const std::string& path) {
  if (stored.size() != derived.size())
    throw Error(ErrorKind::Io, "layer list disagrees with arch: " + path);
  for (size_t i = 0; i < stored.size(); ++i) {
    const LayerSpec &a = stored[i], &b = derived[i];
    if (a.kind != b.kind || a.kernel != b.kernel || a.stride != b.stride ||
        a.padding != b.padding || a.in_channels != b.in_channels ||
        a.out_channels != b.out_channels || a.relu != b.relu ||
        a.skip_from != b.skip_from)
      throw Error(ErrorKind::Io, "layer list disagrees with arch: " + path);
  }
}

constexpr uint32_t kVersion = 1;

}  // namespace

void write_network(const Network& net, const std::string& path) {
  check_endianness();
  if (net.is_custom())
    throw Error(ErrorKind::Validation,
                "only catalog-style networks are serializable");
  auto out = open_out(path);
  put_magic(out, "FCNW");
  put<uint32_t>(out, kVersion);
  put_header(out, net);
  for (size_t i = 0; i < net.layers.size(); ++i) {
    put_layer_spec(out, net.layers[i]);
    put<uint64_t>(out, net.weights[i].data.size());
    for (double w : net.weights[i].data)
      put<float>(out, static_cast<float>(w));
    put<uint64_t>(out, net.biases[i].size());
    for (double b : net.biases[i]) put<float>(out, static_cast<float>(b));
  }
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path);
}

Network read_network(const std::string& path) {
  check_endianness();
  auto in = open_in(path);
  expect_magic(in, "FCNW", path);
  if (get<uint32_t>(in, path) != kVersion)
    throw Error(ErrorKind::Io, "unsupported version: " + path);
  uint32_t layer_count = 0;
  const ArchSpec spec = get_header(in, path, &layer_count);
  Network net = build_network(spec);
  if (net.layers.size() != layer_count)
    throw Error(ErrorKind::Io, "layer count disagrees with arch: " + path);
  std::vector<LayerSpec> stored;
  for (uint32_t i = 0; i < layer_count; ++i) {
    stored.push_back(get_layer_spec(in, path));
    const uint64_t wn = get<uint64_t>(in, path);
    if (wn != net.weights[i].data.size())
      throw Error(ErrorKind::Io, "weight block size mismatch: " + path);
    for (uint64_t j = 0; j < wn; ++j)
      net.weights[i].data[j] = get<float>(in, path);
    const uint64_t bn = get<uint64_t>(in, path);
    if (bn != net.biases[i].size())
      throw Error(ErrorKind::Io, "bias block size mismatch: " + path);
    for (uint64_t j = 0; j < bn; ++j)
      net.biases[i][j] = get<float>(in, path);
  }
  check_layers_match(stored, net.layers, path);
  return net;
}

void write_qnetwork(const QuantizedNetwork& qnet, const std::string& path) {
  check_endianness();
  if (qnet.is_custom())
    throw Error(ErrorKind::Validation,
                "only catalog-style networks are serializable");
  auto out = open_out(path);
  put_magic(out, "FCNQ");
  put<uint32_t>(out, kVersion);
  put_header(out, qnet);
  for (size_t i = 0; i < qnet.layers.size(); ++i) {
    put_layer_spec(out, qnet.layers[i]);
    const DfpParams& p = qnet.params[i];
    put<int32_t>(out, p.w_bw);
    put<int32_t>(out, p.a_bw);
    put<int32_t>(out, p.w_fl);
    put<int32_t>(out, p.a_in);
    put<int32_t>(out, p.a_out);
    put<uint64_t>(out, qnet.weights[i].data.size());
    out.write(reinterpret_cast<const char*>(qnet.weights[i].data.data()),
              static_cast<std::streamsize>(qnet.weights[i].data.size()));
    put<uint64_t>(out, qnet.biases[i].size());
    for (int32_t b : qnet.biases[i]) put<int32_t>(out, b);
  }
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path);
}

QuantizedNetwork read_qnetwork(const std::string& path) {
  check_endianness();
  auto in = open_in(path);
  expect_magic(in, "FCNQ", path);
  if (get<uint32_t>(in, path) != kVersion)
    throw Error(ErrorKind::Io, "unsupported version: " + path);
  uint32_t layer_count = 0;
  QuantizedNetwork qnet;
  qnet.spec = get_header(in, path, &layer_count);
  qnet.layers = plan_layers(qnet.spec);
  if (qnet.layers.size() != layer_count)
    throw Error(ErrorKind::Io, "layer count disagrees with arch: " + path);
  const Network shape = build_network(qnet.spec);
  std::vector<LayerSpec> stored;
  for (uint32_t i = 0; i < layer_count; ++i) {
    stored.push_back(get_layer_spec(in, path));
    DfpParams p;
    p.w_bw = get<int32_t>(in, path);
    p.a_bw = get<int32_t>(in, path);
    p.w_fl = get<int32_t>(in, path);
    p.a_in = get<int32_t>(in, path);
    p.a_out = get<int32_t>(in, path);
    qnet.params.push_back(p);
    const uint64_t wn = get<uint64_t>(in, path);
    if (wn != shape.weights[i].data.size())
      throw Error(ErrorKind::Io, "weight block size mismatch: " + path);
    QMatrix qw(shape.weights[i].rows, shape.weights[i].cols, p.w_fl);
    in.read(reinterpret_cast<char*>(qw.data.data()),
            static_cast<std::streamsize>(wn));
    if (!in) throw Error(ErrorKind::Io, "truncated file: " + path);
    qnet.weights.push_back(std::move(qw));
    const uint64_t bn = get<uint64_t>(in, path);
    if (bn != shape.biases[i].size())
      throw Error(ErrorKind::Io, "bias block size mismatch: " + path);
    std::vector<int32_t> qb(bn);
    for (uint64_t j = 0; j < bn; ++j) qb[j] = get<int32_t>(in, path);
    qnet.biases.push_back(std::move(qb));
  }
  check_layers_match(stored, qnet.layers, path);
  return qnet;
}

bool is_quantized_weights(const std::string& path) {
  auto in = open_in(path);
  char buf[4];
  in.read(buf, 4);
  if (!in) throw Error(ErrorKind::Io, "truncated file: " + path);
  if (std::memcmp(buf, "FCNQ", 4) == 0) return true;
  if (std::memcmp(buf, "FCNW", 4) == 0) return false;
  throw Error(ErrorKind::Io, "not a weights file: " + path);
}

namespace {

std::vector<uint8_t> pack_bits(const std::vector<uint8_t>& bits) {
  std::vector<uint8_t> bytes((bits.size() + 7) / 8, 0);
  for (size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) bytes[i / 8] |= static_cast<uint8_t>(1u << (i % 8));
  return bytes;
}

std::vector<uint8_t> unpack_bits(const std::vector<uint8_t>& bytes,
                                 size_t nbits) {
  std::vector<uint8_t> bits(nbits, 0);
  for (size_t i = 0; i < nbits; ++i)
    bits[i] = (bytes[i / 8] >> (i % 8)) & 1u;
  return bits;
}

}  // namespace

void write_code(const IrisCode& code, const std::string& path) {
  check_endianness();
  auto out = open_out(path);
  put_magic(out, "IRCD");
  put<uint32_t>(out, kVersion);
  put<uint32_t>(out, IrisCode::kRows);
  put<uint32_t>(out, IrisCode::kBitsPerRow);
  const auto cb = pack_bits(code.code);
  const auto mb = pack_bits(code.mask);
  out.write(reinterpret_cast<const char*>(cb.data()),
            static_cast<std::streamsize>(cb.size()));
  out.write(reinterpret_cast<const char*>(mb.data()),
            static_cast<std::streamsize>(mb.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path);
}

IrisCode read_code(const std::string& path) {
  check_endianness();
  auto in = open_in(path);
  expect_magic(in, "IRCD", path);
  if (get<uint32_t>(in, path) != kVersion)
    throw Error(ErrorKind::Io, "unsupported version: " + path);
  if (get<uint32_t>(in, path) != IrisCode::kRows ||
      get<uint32_t>(in, path) != IrisCode::kBitsPerRow)
    throw Error(ErrorKind::Io, "unexpected code dims: " + path);
  std::vector<uint8_t> cb(IrisCode::kBits / 8), mb(IrisCode::kBits / 8);
  in.read(reinterpret_cast<char*>(cb.data()),
          static_cast<std::streamsize>(cb.size()));
  in.read(reinterpret_cast<char*>(mb.data()),
          static_cast<std::streamsize>(mb.size()));
  if (!in) throw Error(ErrorKind::Io, "truncated file: " + path);
  IrisCode code;
  code.code = unpack_bits(cb, IrisCode::kBits);
  code.mask = unpack_bits(mb, IrisCode::kBits);
  return code;
}

std::string geometry_to_json(const EyeGeometry& g) {
  nlohmann::json j;
  j["iris"] = {{"cx", g.iris_cx}, {"cy", g.iris_cy}, {"r", g.iris_r}};
  j["pupil"] = {{"cx", g.pupil_cx}, {"cy", g.pupil_cy}, {"r", g.pupil_r}};
  j["pupil_fallback"] = g.pupil_fallback;
  return j.dump(2) + "\n";
}

EyeGeometry geometry_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EyeGeometry g;
    g.iris_cx = j.at("iris").at("cx").get<double>();
    g.iris_cy = j.at("iris").at("cy").get<double>();
    g.iris_r = j.at("iris").at("r").get<double>();
    g.pupil_cx = j.at("pupil").at("cx").get<double>();
    g.pupil_cy = j.at("pupil").at("cy").get<double>();
    g.pupil_r = j.at("pupil").at("r").get<double>();
    g.pupil_fallback = j.at("pupil_fallback").get<bool>();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, std::string("bad geometry json: ") + e.what());
  }
}

void write_geometry(const EyeGeometry& g, const std::string& path) {
  auto out = open_out(path);
  out << geometry_to_json(g);
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path);
}

EyeGeometry read_geometry(const std::string& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return geometry_from_json(ss.str());
}

namespace {

std::string format_hd(double hd) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", hd);
  return buf;
}

}  // namespace

void write_scores(const ScoreSet& set, const std::string& path) {
  auto out = open_out(path);
  out << "probe_id,gallery_id,label,hd,rotation\n";
  for (const auto& s : set.scores)
    out << s.probe_id << "," << s.gallery_id << ","
        << (s.genuine ? "genuine" : "impostor") << "," << format_hd(s.hd)
        << "," << s.rotation << "\n";
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path);
}

ScoreSet read_scores(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "probe_id,gallery_id,label,hd,rotation")
    throw Error(ErrorKind::Io, "bad scores header: " + path);
  ScoreSet set;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    PairScore s;
    std::string label, hd, rot;
    if (!std::getline(ls, s.probe_id, ',') ||
        !std::getline(ls, s.gallery_id, ',') ||
        !std::getline(ls, label, ',') || !std::getline(ls, hd, ',') ||
        !std::getline(ls, rot))
      throw Error(ErrorKind::Io, "bad scores row: " + path);
    if (label != "genuine" && label != "impostor")
      throw Error(ErrorKind::Io, "bad label '" + label + "': " + path);
    s.genuine = label == "genuine";
    try {
      s.hd = std::stod(hd);
      s.rotation = std::stoi(rot);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Io, "bad scores row: " + path);
    }
    set.scores.push_back(std::move(s));
  }
  return set;
}

void write_roc(const std::vector<RocPoint>& curve, const std::string& path) {
  auto out = open_out(path);
  out << "threshold,far,frr\n";
  for (const auto& p : curve)
    out << format_hd(p.threshold) << "," << format_hd(p.far) << ","
        << format_hd(p.frr) << "\n";
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path);
}

std::string metrics_to_json(const MetricSummary& m) {
  nlohmann::json j;
  j["images"] = m.images;
  j["degenerate"] = m.degenerate;
  j["precision"] = {{"mean", m.p_mean}, {"std", m.p_std}};
  j["recall"] = {{"mean", m.r_mean}, {"std", m.r_std}};
  j["f"] = {{"mean", m.f_mean}, {"std", m.f_std}};
  j["e1"] = m.e1_mean;
  j["e2"] = m.e2_mean;
  return j.dump(2) + "\n";
}

std::string schedule_to_json(const ScheduleReport& r) {
  nlohmann::json j;
  j["layers"] = nlohmann::json::array();
  for (const auto& l : r.layers) {
    j["layers"].push_back({{"layer", l.layer},
                           {"kind", l.kind},
                           {"m", l.m},
                           {"k", l.k},
                           {"n", l.n},
                           {"tiles", l.counts.tiles},
                           {"dma_fills", l.counts.dma_fills},
                           {"write_backs", l.counts.write_backs},
                           {"est_cycles", l.counts.est_cycles},
                           {"c_saturations", l.c_saturations}});
  }
  j["totals"] = {{"tiles", r.totals.tiles},
                 {"dma_fills", r.totals.dma_fills},
                 {"write_backs", r.totals.write_backs},
                 {"est_cycles", r.totals.est_cycles}};
  j["c_saturations"] = r.c_saturations;
  return j.dump(2) + "\n";
}

}  // namespace iris
