#include "iris/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "iris/errors.hpp"

namespace iris {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_gabor(const GaborParams& p) {
  if (p.lambda0 < 2.0)
    throw Error(ErrorKind::Validation, "wavelength below two samples");
  if (!(p.sigma_over_f > 0.0) || !(p.sigma_over_f < 1.0))
    throw Error(ErrorKind::Validation, "sigma/f ratio must be in (0,1)");
}

}  // namespace

NormalizedGrid rubber_sheet(const Tensor& image, const EyeGeometry& g,
                            const BinaryMask& seg_mask) {
  if (image.channels != 1)
    throw Error(ErrorKind::Dimension, "expected single-channel image");
  if (seg_mask.height != image.height || seg_mask.width != image.width)
    throw Error(ErrorKind::Dimension, "mask dims differ from image");
  if (!(g.iris_r > 0.0) || !(g.pupil_r > 0.0))
    throw Error(ErrorKind::Geometry, "circle radii must be positive");
  // Strict containment keeps every ray from pupil rim to iris rim nonempty.
  const double center_gap = std::hypot(g.pupil_cx - g.iris_cx,
                                       g.pupil_cy - g.iris_cy);
  if (center_gap + g.pupil_r >= g.iris_r)
    throw Error(ErrorKind::Geometry, "pupil circle not inside iris circle");
  if (g.iris_cx + g.iris_r < 0 || g.iris_cx - g.iris_r > image.width - 1 ||
      g.iris_cy + g.iris_r < 0 || g.iris_cy - g.iris_r > image.height - 1)
    throw Error(ErrorKind::Geometry, "iris circle outside the image");

  NormalizedGrid grid;
  for (int j = 0; j < NormalizedGrid::kAngular; ++j) {
    const double theta = kTwoPi * j / NormalizedGrid::kAngular;
    const double ct = std::cos(theta), st = std::sin(theta);
    const double px = g.pupil_cx + g.pupil_r * ct;
    const double py = g.pupil_cy + g.pupil_r * st;
    const double ix = g.iris_cx + g.iris_r * ct;
    const double iy = g.iris_cy + g.iris_r * st;
    for (int i = 0; i < NormalizedGrid::kRadial; ++i) {
      const double rho = (i + 0.5) / NormalizedGrid::kRadial;
      const double sx = (1.0 - rho) * px + rho * ix;
      const double sy = (1.0 - rho) * py + rho * iy;

      const bool in_bounds = sx >= 0.0 && sx <= image.width - 1.0 &&
                             sy >= 0.0 && sy <= image.height - 1.0;
      const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0,
                                image.width - 1);
      const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0,
                                image.height - 1);
      const int x1 = std::min(x0 + 1, image.width - 1);
      const int y1 = std::min(y0 + 1, image.height - 1);
      const double fx = std::clamp(sx - x0, 0.0, 1.0);
      const double fy = std::clamp(sy - y0, 0.0, 1.0);
      const double v00 = image.at(0, y0, x0), v01 = image.at(0, y0, x1);
      const double v10 = image.at(0, y1, x0), v11 = image.at(0, y1, x1);
      grid.value(i, j) = (1 - fy) * ((1 - fx) * v00 + fx * v01) +
                         fy * ((1 - fx) * v10 + fx * v11);

      const int mx = std::clamp(static_cast<int>(std::lround(sx)), 0,
                                image.width - 1);
      const int my = std::clamp(static_cast<int>(std::lround(sy)), 0,
                                image.height - 1);
      grid.validity(i, j) = (in_bounds && seg_mask.at(my, mx)) ? 1 : 0;
    }
  }
  return grid;
}

std::vector<std::complex<double>> log_gabor_row(const std::vector<double>& row,
                                                const GaborParams& params) {
  check_gabor(params);
  const int n = NormalizedGrid::kAngular;
  if (static_cast<int>(row.size()) != n)
    throw Error(ErrorKind::Dimension, "row length must match the grid");

  // Forward DFT (the row is short enough that the naive transform is fine
  // and keeps the arithmetic easy to audit).
  std::vector<std::complex<double>> spec(n);
  for (int k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (int t = 0; t < n; ++t)
      acc += row[t] * std::polar(1.0, -kTwoPi * k * t / n);
    spec[k] = acc;
  }

  // Single-sided log-Gabor transfer; DC and negative frequencies are
  // removed so the inverse transform is the analytic response.
  const double f0 = 1.0 / params.lambda0;
  const double denom = 2.0 * std::pow(std::log(params.sigma_over_f), 2);
  std::vector<double> gain(n, 0.0);
  for (int k = 1; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) / n;
    gain[k] = std::exp(-std::pow(std::log(f / f0), 2) / denom);
  }

  std::vector<std::complex<double>> out(n);
  for (int t = 0; t < n; ++t) {
    std::complex<double> acc = 0.0;
    for (int k = 1; k <= n / 2; ++k)
      acc += spec[k] * gain[k] * std::polar(1.0, kTwoPi * k * t / n);
    out[t] = acc / static_cast<double>(n);
  }
  return out;
}

IrisCode encode(const NormalizedGrid& grid, const GaborParams& params) {
  check_gabor(params);
  IrisCode code;
  std::vector<double> row(NormalizedGrid::kAngular);
  for (int i = 0; i < NormalizedGrid::kRadial; ++i) {
    for (int j = 0; j < NormalizedGrid::kAngular; ++j)
      row[j] = grid.value(i, j);
    const auto coef = log_gabor_row(row, params);
    for (int j = 0; j < NormalizedGrid::kAngular; ++j) {
      code.code_bit(i, 2 * j) = coef[j].real() >= 0.0 ? 1 : 0;
      code.code_bit(i, 2 * j + 1) = coef[j].imag() >= 0.0 ? 1 : 0;
      const uint8_t ok =
          grid.validity(i, j) && std::abs(coef[j]) >= params.mag_threshold
              ? 1
              : 0;
      code.mask_bit(i, 2 * j) = ok;
      code.mask_bit(i, 2 * j + 1) = ok;
    }
  }
  return code;
}

double hamming(const IrisCode& a, const IrisCode& b) {
  uint64_t num = 0, den = 0;
  for (int t = 0; t < IrisCode::kBits; ++t) {
    if (a.mask[t] && b.mask[t]) {
      ++den;
      num += a.code[t] != b.code[t];
    }
  }
  if (den == 0)
    throw Error(ErrorKind::Incomparable, "no jointly valid bits");
  return static_cast<double>(num) / static_cast<double>(den);
}

IrisCode rotate_code(const IrisCode& c, int samples) {
  const int n = NormalizedGrid::kAngular;
  const int s = ((samples % n) + n) % n;
  IrisCode out;
  for (int i = 0; i < IrisCode::kRows; ++i)
    for (int j = 0; j < n; ++j) {
      const int src = (j - s + n) % n;
      out.code_bit(i, 2 * j) = c.code_bit(i, 2 * src);
      out.code_bit(i, 2 * j + 1) = c.code_bit(i, 2 * src + 1);
      out.mask_bit(i, 2 * j) = c.mask_bit(i, 2 * src);
      out.mask_bit(i, 2 * j + 1) = c.mask_bit(i, 2 * src + 1);
    }
  return out;
}

MatchResult match_min_hd(const IrisCode& a, const IrisCode& b) {
  // 12 samples * 2.8125 degrees = 33.75, the widest sweep within 35.
  constexpr int kMaxShift = 12;
  MatchResult best;
  bool found = false;
  for (int mag = 0; mag <= kMaxShift; ++mag) {
    for (const int s : {-mag, mag}) {
      if (mag == 0 && s == 0 && found) continue;  // visit 0 once
      double hd;
      try {
        hd = hamming(rotate_code(a, s), b);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Incomparable) throw;
        continue;
      }
      // Strictly-less keeps the earliest rotation on ties: smallest
      // magnitude, negative before positive.
      if (!found || hd < best.hd) {
        best.hd = hd;
        best.rotation = s;
        found = true;
      }
    }
  }
  if (!found)
    throw Error(ErrorKind::Incomparable, "no rotation had comparable bits");
  return best;
}

}  // namespace iris
