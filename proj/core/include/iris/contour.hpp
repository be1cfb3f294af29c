#pragma once

#include <cstdint>

#include "iris/tensor.hpp"

namespace iris {

// Largest connected foreground region plus its moment statistics.
struct Blob {
  int pixel_count = 0;
  double cx = 0.0;  // centroid, sub-pixel, x right / y down
  double cy = 0.0;
  double major_axis = 0.0;  // equivalent-ellipse axis lengths, pixels
  double minor_axis = 0.0;
  BinaryMask mask;  // the component itself, same dims as the input
};

// 8-connected component of maximal pixel count (first in row-major scan on
// ties). Axis lengths come from the normalized second central moments with
// the +1/12 per-pixel correction, so a filled disk of radius R reports
// major = minor = 2R (up to discretization).
Blob largest_component(const BinaryMask& mask);

// Circle estimate from blob moments: the mean axis length is a diameter,
// so the radius halves it again.
void rough_iris(const Blob& blob, double* cx, double* cy, double* radius);

struct RadiusRange {
  int lo = 0;  // inclusive, pixels
  int hi = 0;
};

struct Roi {  // inclusive center search box
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

struct ChtResult {
  int cx = 0;
  int cy = 0;
  int r = 0;
  uint64_t votes = 0;
};

// Circular Hough transform: every edge pixel votes for all centers in the
// roi at each candidate radius (Bresenham-rasterized circles, exact at
// small radii). Global maximum wins; ties resolve to the smallest radius,
// then row-major center order, so the result does not depend on edge
// enumeration order.
ChtResult cht(const BinaryMask& edges, const RadiusRange& radii,
              const Roi& roi);

// Boundary pixels: foreground with at least one background 4-neighbour
// (outside the image counts as background).
BinaryMask boundary_pixels(const BinaryMask& mask);

struct EyeGeometry {
  double iris_cx = 0.0;
  double iris_cy = 0.0;
  double iris_r = 0.0;
  double pupil_cx = 0.0;
  double pupil_cy = 0.0;
  double pupil_r = 0.0;
  bool pupil_fallback = false;  // pupil search failed, concentric default
};

// Windows the mask segmentation leaves open; defaults here, overridable
// from a config file.
struct FitConfig {
  double iris_r_lo = 0.85;  // CHT radius window around the rough estimate
  double iris_r_hi = 1.15;
  double iris_roi_frac = 0.10;   // center box, fraction of image dims
  double pupil_r_lo = 0.10;      // pupil radius bounds, fraction of iris r
  double pupil_r_hi = 0.80;
  double pupil_roi_frac = 0.25;  // center box, fraction of iris r
  double pupil_fallback_ratio = 0.30;
  double inner_margin = 0.10;  // boundary closer than (1-margin)*r is inner
};

// Full routine: largest component, rough moment estimate, CHT refinement of
// the outer circle on the mask boundary, then a pupil CHT restricted to the
// inner boundary pixels. A failed pupil search falls back to a concentric
// circle at pupil_fallback_ratio * r with the flag set.
EyeGeometry fit_contours(const BinaryMask& mask, const FitConfig& cfg = {});

}  // namespace iris
