#pragma once

#include <string>
#include <vector>

#include "iris/codec.hpp"
#include "iris/tensor.hpp"

namespace iris {

// Per-image segmentation scores. tp/fp/tn/fn are fractions of all pixels.
struct SegScores {
  double p = 0.0;
  double r = 0.0;
  double f = 0.0;
  double tp = 0.0;
  double fp = 0.0;
  double tn = 0.0;
  double fn = 0.0;
  bool degenerate = false;  // no iris in either mask; p = r = 1 by fiat
};

SegScores seg_metrics(const BinaryMask& pred, const BinaryMask& gt);

// Fraction of pixels where the masks disagree.
double e1(const BinaryMask& pred, const BinaryMask& gt);

// Class-balanced error from the two per-image rates.
double e2(double fp_rate, double fn_rate);

struct MetricSummary {
  int images = 0;
  int degenerate = 0;
  double p_mean = 0.0, p_std = 0.0;
  double r_mean = 0.0, r_std = 0.0;
  double f_mean = 0.0, f_std = 0.0;
  double e1_mean = 0.0;
  double e2_mean = 0.0;
};

// Dataset aggregation: plain means of per-image values (population std).
MetricSummary summarize_metrics(const std::vector<SegScores>& per_image,
                                const std::vector<double>& per_image_e1);

struct GalleryEntry {
  std::string identity;
  std::string label;  // unique sample name, e.g. the file stem
  IrisCode code;
};

struct PairScore {
  std::string probe_id;    // label of the lexicographically first sample
  std::string gallery_id;  // label of the second
  bool genuine = false;
  double hd = 1.0;
  int rotation = 0;
};

struct ScoreSet {
  std::vector<PairScore> scores;
  int incomparable = 0;  // pairs dropped for lack of jointly valid bits
};

// Every unordered pair, matched with the rotation sweep; genuine means the
// identities agree. Incomparable pairs are counted and excluded.
ScoreSet all_pairs(const std::vector<GalleryEntry>& gallery, int threads = 1);

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;  // impostor hd <= threshold
  double frr = 0.0;  // genuine hd > threshold
};

// One point per distinct observed score, ascending.
std::vector<RocPoint> roc(const ScoreSet& scores);

// Crossing of FAR and FRR, linearly interpolated between the bracketing
// thresholds (the sweep conceptually starts at FAR 0, FRR 1).
double eer(const ScoreSet& scores);

}  // namespace iris
