#pragma once

#include <string>
#include <vector>

#include "iris/accel.hpp"
#include "iris/codec.hpp"
#include "iris/contour.hpp"
#include "iris/dfp.hpp"
#include "iris/metrics.hpp"
#include "iris/network.hpp"

namespace iris {

// All binary formats are little-endian and byte-exact; layouts are
// documented in the README. Float weights are stored as float32 (training
// arithmetic is double; files round).

// "FCNW": float weights. Layout:
//   magic[4] version:u32 arch:str n:u32 scale:f64 layers:u32
//   per layer: kind:u8 kernel,stride,padding,in_c,out_c:i32 relu:u8
//              skip_from:i32 wcount:u64 w:f32[] bcount:u64 b:f32[]
// (str = u32 length + bytes)
void write_network(const Network& net, const std::string& path);
Network read_network(const std::string& path);

// "FCNQ": quantized weights. Same frame, plus per layer the five DFP
// fields (i32 each) before the blocks; weights i8, biases i32.
void write_qnetwork(const QuantizedNetwork& qnet, const std::string& path);
QuantizedNetwork read_qnetwork(const std::string& path);

// Peeks at the magic: "FCNW" -> false, "FCNQ" -> true.
bool is_quantized_weights(const std::string& path);

// "IRCD": magic[4] version:u32 rows:u32 bits:u32, then code and mask as
// packed bits, LSB first within each byte, row-major.
void write_code(const IrisCode& code, const std::string& path);
IrisCode read_code(const std::string& path);

std::string geometry_to_json(const EyeGeometry& g);
EyeGeometry geometry_from_json(const std::string& text);
void write_geometry(const EyeGeometry& g, const std::string& path);
EyeGeometry read_geometry(const std::string& path);

// scores.csv: header probe_id,gallery_id,label,hd,rotation; hd printed
// with enough digits to round-trip exactly.
void write_scores(const ScoreSet& set, const std::string& path);
ScoreSet read_scores(const std::string& path);

// roc.csv: header threshold,far,frr.
void write_roc(const std::vector<RocPoint>& curve, const std::string& path);

std::string metrics_to_json(const MetricSummary& m);
std::string schedule_to_json(const ScheduleReport& r);

}  // namespace iris
