#include "iris/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <optional>
#include <thread>

#include "iris/errors.hpp"

namespace iris {

namespace {

void check_dims(const BinaryMask& a, const BinaryMask& b) {
  if (a.height != b.height || a.width != b.width)
    throw Error(ErrorKind::Dimension, "mask dims differ");
}

void mean_std(const std::vector<double>& v, double* mean, double* sd) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - m) * (x - m);
  var /= static_cast<double>(v.size());
  *mean = m;
  *sd = std::sqrt(var);
}

}  // namespace

SegScores seg_metrics(const BinaryMask& pred, const BinaryMask& gt) {
  check_dims(pred, gt);
  uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (size_t i = 0; i < pred.data.size(); ++i) {
    const bool p = pred.data[i] != 0, g = gt.data[i] != 0;
    tp += p && g;
    fp += p && !g;
    tn += !p && !g;
    fn += !p && g;
  }
  const double total = static_cast<double>(pred.data.size());
  SegScores s;
  s.tp = tp / total;
  s.fp = fp / total;
  s.tn = tn / total;
  s.fn = fn / total;
  if (tp + fp + fn == 0) {
    // Nothing predicted and nothing to find: vacuously correct.
    s.p = s.r = s.f = 1.0;
    s.degenerate = true;
    return s;
  }
  s.p = (tp + fp > 0) ? static_cast<double>(tp) / (tp + fp) : 0.0;
  s.r = (tp + fn > 0) ? static_cast<double>(tp) / (tp + fn) : 0.0;
  s.f = (s.p + s.r > 0) ? 2.0 * s.p * s.r / (s.p + s.r) : 0.0;
  return s;
}

double e1(const BinaryMask& pred, const BinaryMask& gt) {
  check_dims(pred, gt);
  uint64_t diff = 0;
  for (size_t i = 0; i < pred.data.size(); ++i)
    diff += (pred.data[i] != 0) != (gt.data[i] != 0);
  return static_cast<double>(diff) / static_cast<double>(pred.data.size());
}

double e2(double fp_rate, double fn_rate) {
  return 0.5 * (fp_rate + fn_rate);
}

MetricSummary summarize_metrics(const std::vector<SegScores>& per_image,
                                const std::vector<double>& per_image_e1) {
  if (per_image.empty() || per_image_e1.size() != per_image.size())
    throw Error(ErrorKind::Validation, "empty or mismatched metric lists");
  MetricSummary m;
  m.images = static_cast<int>(per_image.size());
  std::vector<double> ps, rs, fs;
  double e2_sum = 0.0, e1_sum = 0.0;
  for (const auto& s : per_image) {
    ps.push_back(s.p);
    rs.push_back(s.r);
    fs.push_back(s.f);
    e2_sum += e2(s.fp, s.fn);
    m.degenerate += s.degenerate;
  }
  for (double v : per_image_e1) e1_sum += v;
  mean_std(ps, &m.p_mean, &m.p_std);
  mean_std(rs, &m.r_mean, &m.r_std);
  mean_std(fs, &m.f_mean, &m.f_std);
  m.e1_mean = e1_sum / m.images;
  m.e2_mean = e2_sum / m.images;
  return m;
}

ScoreSet all_pairs(const std::vector<GalleryEntry>& gallery, int threads) {
  if (gallery.size() < 2)
    throw Error(ErrorKind::Validation, "need at least two codes");
  if (threads < 1)
    throw Error(ErrorKind::Validation, "thread count must be positive");

  std::vector<std::pair<size_t, size_t>> pairs;
  for (size_t i = 0; i < gallery.size(); ++i)
    for (size_t j = i + 1; j < gallery.size(); ++j) pairs.emplace_back(i, j);

  // Workers fill a slot per pair; output order stays the sequential one
  // regardless of scheduling.
  std::vector<std::optional<PairScore>> slots(pairs.size());
  std::vector<uint8_t> incomparable(pairs.size(), 0);
  std::atomic<size_t> cursor{0};
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto worker = [&]() {
    for (;;) {
      const size_t idx = cursor.fetch_add(1);
      if (idx >= pairs.size()) break;
      const auto [i, j] = pairs[idx];
      try {
        PairScore ps;
        ps.probe_id = gallery[i].label;
        ps.gallery_id = gallery[j].label;
        ps.genuine = gallery[i].identity == gallery[j].identity;
        const MatchResult m = match_min_hd(gallery[i].code, gallery[j].code);
        ps.hd = m.hd;
        ps.rotation = m.rotation;
        slots[idx] = std::move(ps);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::Incomparable) {
          incomparable[idx] = 1;
        } else {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  ScoreSet set;
  for (size_t idx = 0; idx < pairs.size(); ++idx) {
    if (incomparable[idx]) {
      ++set.incomparable;
    } else if (slots[idx]) {
      set.scores.push_back(std::move(*slots[idx]));
    }
  }
  return set;
}

namespace {

void split_scores(const ScoreSet& set, std::vector<double>* genuine,
                  std::vector<double>* impostor) {
  for (const auto& s : set.scores)
    (s.genuine ? genuine : impostor)->push_back(s.hd);
  if (genuine->empty() || impostor->empty())
    throw Error(ErrorKind::Validation,
                "need both genuine and impostor scores");
  std::sort(genuine->begin(), genuine->end());
  std::sort(impostor->begin(), impostor->end());
}

}  // namespace

std::vector<RocPoint> roc(const ScoreSet& set) {
  std::vector<double> gen, imp;
  split_scores(set, &gen, &imp);
  std::vector<double> thresholds;
  thresholds.reserve(gen.size() + imp.size());
  thresholds.insert(thresholds.end(), gen.begin(), gen.end());
  thresholds.insert(thresholds.end(), imp.begin(), imp.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  std::vector<RocPoint> curve;
  curve.reserve(thresholds.size());
  for (double t : thresholds) {
    RocPoint pt;
    pt.threshold = t;
    const auto imp_le =
        std::upper_bound(imp.begin(), imp.end(), t) - imp.begin();
    const auto gen_gt =
        gen.end() - std::upper_bound(gen.begin(), gen.end(), t);
    pt.far = static_cast<double>(imp_le) / imp.size();
    pt.frr = static_cast<double>(gen_gt) / gen.size();
    curve.push_back(pt);
  }
  return curve;
}

double eer(const ScoreSet& set) {
  const std::vector<RocPoint> curve = roc(set);
  // Walk until FAR catches up with FRR; interpolate across the bracket.
  double far0 = 0.0, frr0 = 1.0;
  for (const RocPoint& pt : curve) {
    if (pt.far >= pt.frr) {
      const double d0 = far0 - frr0;          // < 0
      const double d1 = pt.far - pt.frr;      // >= 0
      if (d1 == d0) return pt.far;
      const double w = -d0 / (d1 - d0);
      return far0 + w * (pt.far - far0);
    }
    far0 = pt.far;
    frr0 = pt.frr;
  }
  // FAR never reaches FRR within the sweep; the curve ends at FAR 1.
  return 1.0;
}

}  // namespace iris
