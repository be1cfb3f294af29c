#include "iris/contour.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "iris/errors.hpp"

namespace iris {

namespace {

// Midpoint circle offsets, deduplicated. Radius 0 degenerates to the
// center itself.
std::vector<std::pair<int, int>> circle_offsets(int r) {
  std::vector<std::pair<int, int>> pts;
  if (r <= 0) {
    pts.emplace_back(0, 0);
    return pts;
  }
  int x = r, y = 0, err = 1 - r;
  while (x >= y) {
    pts.emplace_back(x, y);
    pts.emplace_back(y, x);
    pts.emplace_back(-x, y);
    pts.emplace_back(-y, x);
    pts.emplace_back(x, -y);
    pts.emplace_back(y, -x);
    pts.emplace_back(-x, -y);
    pts.emplace_back(-y, -x);
    ++y;
    if (err < 0) {
      err += 2 * y + 1;
    } else {
      --x;
      err += 2 * (y - x) + 1;
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

Blob largest_component(const BinaryMask& mask) {
  const int h = mask.height, w = mask.width;
  std::vector<int32_t> label(static_cast<size_t>(h) * w, -1);
  int best_label = -1, best_count = 0;
  std::vector<std::pair<int, int>> stack;
  int next = 0;
  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      if (!mask.at(sy, sx) || label[static_cast<size_t>(sy) * w + sx] >= 0)
        continue;
      const int cur = next++;
      int count = 0;
      stack.clear();
      stack.emplace_back(sy, sx);
      label[static_cast<size_t>(sy) * w + sx] = cur;
      while (!stack.empty()) {
        const auto [y, x] = stack.back();
        stack.pop_back();
        ++count;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = y + dy, nx = x + dx;
            if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
            size_t idx = static_cast<size_t>(ny) * w + nx;
            if (!mask.data[idx] || label[idx] >= 0) continue;
            label[idx] = cur;
            stack.emplace_back(ny, nx);
          }
      }
      // Row-major scan keeps ties deterministic: first component wins.
      if (count > best_count) {
        best_count = count;
        best_label = cur;
      }
    }
  }
  if (best_label < 0)
    throw Error(ErrorKind::NoIrisFound, "mask has no foreground pixels");

  Blob blob;
  blob.pixel_count = best_count;
  blob.mask = BinaryMask(h, w);
  double sx = 0.0, sy = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (label[static_cast<size_t>(y) * w + x] == best_label) {
        blob.mask.at(y, x) = 1;
        sx += x;
        sy += y;
      }
  blob.cx = sx / best_count;
  blob.cy = sy / best_count;

  // Normalized central second moments; each pixel is a unit square, hence
  // the 1/12 variance of its own extent.
  double mxx = 0.0, myy = 0.0, mxy = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (blob.mask.at(y, x)) {
        const double dx = x - blob.cx, dy = y - blob.cy;
        mxx += dx * dx;
        myy += dy * dy;
        mxy += dx * dy;
      }
  mxx = mxx / best_count + 1.0 / 12.0;
  myy = myy / best_count + 1.0 / 12.0;
  mxy /= best_count;
  const double common = std::sqrt((mxx - myy) * (mxx - myy) + 4 * mxy * mxy);
  // Equivalent ellipse: axis length 4*sqrt(eigenvalue).
  blob.major_axis = 4.0 * std::sqrt((mxx + myy + common) / 2.0);
  blob.minor_axis = 4.0 * std::sqrt(std::max(0.0, (mxx + myy - common) / 2.0));
  return blob;
}

void rough_iris(const Blob& blob, double* cx, double* cy, double* radius) {
  if (blob.pixel_count <= 0)
    throw Error(ErrorKind::NoIrisFound, "empty blob");
  if (cx) *cx = blob.cx;
  if (cy) *cy = blob.cy;
  if (radius) *radius = (blob.major_axis + blob.minor_axis) / 4.0;
}

BinaryMask boundary_pixels(const BinaryMask& mask) {
  BinaryMask out(mask.height, mask.width);
  const auto bg = [&](int y, int x) {
    return y < 0 || y >= mask.height || x < 0 || x >= mask.width ||
           !mask.at(y, x);
  };
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(y, x) && (bg(y - 1, x) || bg(y + 1, x) || bg(y, x - 1) ||
                            bg(y, x + 1)))
        out.at(y, x) = 1;
  return out;
}

ChtResult cht(const BinaryMask& edges, const RadiusRange& radii,
              const Roi& roi) {
  if (radii.lo > radii.hi || radii.lo < 1)
    throw Error(ErrorKind::Validation, "radius range is empty");
  if (roi.x0 > roi.x1 || roi.y0 > roi.y1 || roi.x0 < 0 || roi.y0 < 0 ||
      roi.x1 >= edges.width || roi.y1 >= edges.height)
    throw Error(ErrorKind::Validation, "center roi outside the image");

  std::vector<std::pair<int, int>> edge_pts;
  for (int y = 0; y < edges.height; ++y)
    for (int x = 0; x < edges.width; ++x)
      if (edges.at(y, x)) edge_pts.emplace_back(y, x);
  if (edge_pts.empty())
    throw Error(ErrorKind::NoCircleFound, "edge map is empty");

  const int rw = roi.x1 - roi.x0 + 1;
  const int rh = roi.y1 - roi.y0 + 1;
  std::vector<uint32_t> acc(static_cast<size_t>(rh) * rw);
  ChtResult best;
  for (int r = radii.lo; r <= radii.hi; ++r) {
    std::fill(acc.begin(), acc.end(), 0u);
    const auto offs = circle_offsets(r);
    for (const auto& [ey, ex] : edge_pts)
      for (const auto& [ox, oy] : offs) {
        const int cx = ex + ox, cy = ey + oy;
        if (cx < roi.x0 || cx > roi.x1 || cy < roi.y0 || cy > roi.y1)
          continue;
        ++acc[static_cast<size_t>(cy - roi.y0) * rw + (cx - roi.x0)];
      }
    // Strictly-greater keeps the smallest radius, then row-major center.
    for (int y = 0; y < rh; ++y)
      for (int x = 0; x < rw; ++x) {
        const uint32_t v = acc[static_cast<size_t>(y) * rw + x];
        if (v > best.votes) {
          best.votes = v;
          best.cx = roi.x0 + x;
          best.cy = roi.y0 + y;
          best.r = r;
        }
      }
  }
  if (best.votes == 0)
    throw Error(ErrorKind::NoCircleFound, "no circle received any votes");
  return best;
}

EyeGeometry fit_contours(const BinaryMask& mask, const FitConfig& cfg) {
  const Blob blob = largest_component(mask);
  double rcx, rcy, rough_r;
  rough_iris(blob, &rcx, &rcy, &rough_r);

  const BinaryMask edges = boundary_pixels(blob.mask);

  const auto clamp_int = [](double v, int lo, int hi) {
    return std::clamp(static_cast<int>(std::lround(v)), lo, hi);
  };

  RadiusRange irr;
  irr.lo = std::max(1, static_cast<int>(std::lround(cfg.iris_r_lo * rough_r)));
  irr.hi = std::max(irr.lo,
                    static_cast<int>(std::lround(cfg.iris_r_hi * rough_r)));
  Roi iroi;
  iroi.x0 = clamp_int(rcx - cfg.iris_roi_frac * mask.width, 0, mask.width - 1);
  iroi.x1 = clamp_int(rcx + cfg.iris_roi_frac * mask.width, 0, mask.width - 1);
  iroi.y0 =
      clamp_int(rcy - cfg.iris_roi_frac * mask.height, 0, mask.height - 1);
  iroi.y1 =
      clamp_int(rcy + cfg.iris_roi_frac * mask.height, 0, mask.height - 1);

  const ChtResult ic = cht(edges, irr, iroi);

  EyeGeometry g;
  g.iris_cx = ic.cx;
  g.iris_cy = ic.cy;
  g.iris_r = ic.r;

  // Pupil boundary pixels are the part of the mask rim well inside the
  // fitted outer circle.
  BinaryMask inner(mask.height, mask.width);
  int inner_count = 0;
  const double inner_limit = (1.0 - cfg.inner_margin) * g.iris_r;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (edges.at(y, x)) {
        const double d = std::hypot(x - g.iris_cx, y - g.iris_cy);
        if (d < inner_limit) {
          inner.at(y, x) = 1;
          ++inner_count;
        }
      }

  const auto fallback = [&] {
    g.pupil_cx = g.iris_cx;
    g.pupil_cy = g.iris_cy;
    g.pupil_r = cfg.pupil_fallback_ratio * g.iris_r;
    g.pupil_fallback = true;
  };

  if (inner_count == 0) {
    fallback();
    return g;
  }
  RadiusRange prr;
  prr.lo = std::max(1, static_cast<int>(std::lround(cfg.pupil_r_lo * g.iris_r)));
  prr.hi = std::max(prr.lo,
                    static_cast<int>(std::lround(cfg.pupil_r_hi * g.iris_r)));
  Roi proi;
  proi.x0 = clamp_int(g.iris_cx - cfg.pupil_roi_frac * g.iris_r, 0,
                      mask.width - 1);
  proi.x1 = clamp_int(g.iris_cx + cfg.pupil_roi_frac * g.iris_r, 0,
                      mask.width - 1);
  proi.y0 = clamp_int(g.iris_cy - cfg.pupil_roi_frac * g.iris_r, 0,
                      mask.height - 1);
  proi.y1 = clamp_int(g.iris_cy + cfg.pupil_roi_frac * g.iris_r, 0,
                      mask.height - 1);
  try {
    const ChtResult pc = cht(inner, prr, proi);
    g.pupil_cx = pc.cx;
    g.pupil_cy = pc.cy;
    g.pupil_r = pc.r;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoCircleFound) throw;
    fallback();
  }
  return g;
}

}  // namespace iris
