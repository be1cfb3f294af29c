#pragma once

#include <cmath>
#include <vector>

#include "iris/rng.hpp"
#include "iris/tensor.hpp"

namespace testutil {

inline iris::Tensor random_tensor(int c, int h, int w, iris::Rng& rng,
                                  double lo = -1.0, double hi = 1.0) {
  iris::Tensor t(c, h, w);
  for (double& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

inline iris::Matrix random_matrix(int r, int c, iris::Rng& rng,
                                  double lo = -1.0, double hi = 1.0) {
  iris::Matrix m(r, c);
  for (double& v : m.data) v = rng.uniform(lo, hi);
  return m;
}

inline iris::QMatrix random_qmatrix(int r, int c, int fl, iris::Rng& rng,
                                    int lo = -128, int hi = 127) {
  iris::QMatrix m(r, c, fl);
  for (int8_t& v : m.data)
    v = static_cast<int8_t>(rng.uniform_int(lo, hi));
  return m;
}

// Filled disk on pixel centers: set(y,x) iff hypot(x-cx, y-cy) < r.
inline iris::BinaryMask disk_mask(int h, int w, double cx, double cy,
                                  double r) {
  iris::BinaryMask m(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      m.at(y, x) = std::hypot(x - cx, y - cy) < r ? 1 : 0;
  return m;
}

// Annulus: rp <= dist < ri.
inline iris::BinaryMask annulus_mask(int h, int w, double cx, double cy,
                                     double rp, double ri) {
  iris::BinaryMask m(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double d = std::hypot(x - cx, y - cy);
      m.at(y, x) = (d >= rp && d < ri) ? 1 : 0;
    }
  return m;
}

}  // namespace testutil
