#pragma once

#include <cstdint>

#include "iris/contour.hpp"
#include "iris/image.hpp"

namespace iris {

// Procedural eye renderer used for desk-scale training and evaluation.
// Texture is a function of identity; geometry, rotation and noise vary per
// instance. Everything derives from (seed, identity, instance), so repeated
// renders are byte-identical.
struct SyntheticEyeSpec {
  int height = 128;
  int width = 128;
  uint64_t seed = 1;

  double iris_r_lo = 0.30;  // iris radius, fraction of min(height, width)
  double iris_r_hi = 0.38;
  double pupil_ratio_lo = 0.25;  // pupil radius / iris radius
  double pupil_ratio_hi = 0.45;
  double center_jitter = 0.05;  // center offset, fraction of min dim

  int octaves = 3;                // angular texture octaves per identity
  double occlusion = 0.15;        // fraction of the circle under the eyelid
  double noise = 0.02;            // additive uniform pixel noise amplitude
  double rotation_jitter = 0.10;  // per-instance texture rotation, radians
};

struct SyntheticSample {
  Image image;
  Image mask;  // exact ground truth: iris annulus minus the eyelid band
  EyeGeometry geometry;
};

void validate_synth_spec(const SyntheticEyeSpec& spec);

SyntheticSample synth_eye(const SyntheticEyeSpec& spec, int identity,
                          int instance);

}  // namespace iris
