#include "iris/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "iris/errors.hpp"
#include "iris/rng.hpp"

namespace iris {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Stream tags keep identity-level and instance-level draws independent.
constexpr uint64_t kIdentityStream = 0x69646e74;
constexpr uint64_t kInstanceStream = 0x696e7374;

struct TextureOctave {
  int k = 0;          // angular frequency, cycles per revolution
  double phase = 0.0;
  double swirl = 0.0;  // radial phase drift of the angular wave
  int m = 0;           // radial envelope frequency
  double rphase = 0.0;
  double weight = 0.0;
};

// Identity-determined texture; instances of one identity share it exactly.
std::vector<TextureOctave> identity_texture(const SyntheticEyeSpec& spec,
                                            int identity) {
  Rng rng(Rng::mix(Rng::mix(spec.seed, kIdentityStream),
                   static_cast<uint64_t>(identity)));
  std::vector<TextureOctave> octs;
  std::vector<int> used;
  for (int o = 0; o < spec.octaves; ++o) {
    TextureOctave t;
    // Distinct frequencies per identity: one rotation cannot align every
    // octave of two different identities at once.
    do {
      t.k = static_cast<int>(rng.uniform_int(3, 16));
    } while (std::find(used.begin(), used.end(), t.k) != used.end() &&
             used.size() < 14);
    used.push_back(t.k);
    t.phase = rng.uniform(0.0, kTwoPi);
    t.swirl = rng.uniform(-2.0, 2.0);
    t.m = static_cast<int>(rng.uniform_int(1, 4));
    t.rphase = rng.uniform(0.0, kTwoPi);
    t.weight = 1.0 / (1.0 + o);
    octs.push_back(t);
  }
  return octs;
}

double texture_value(const std::vector<TextureOctave>& octs, double rho,
                     double theta) {
  double v = 0.0, wsum = 0.0;
  for (const auto& t : octs) {
    const double envelope =
        0.6 + 0.4 * std::cos(t.m * std::numbers::pi * rho + t.rphase);
    v += t.weight * envelope * std::cos(t.k * theta + t.phase + t.swirl * rho);
    wsum += t.weight;
  }
  return v / wsum;  // in [-1, 1]
}

}  // namespace

void validate_synth_spec(const SyntheticEyeSpec& spec) {
  if (spec.height < 32 || spec.width < 32)
    throw Error(ErrorKind::Validation, "image dims must be at least 32");
  if (!(spec.iris_r_lo > 0.0) || spec.iris_r_lo > spec.iris_r_hi ||
      spec.iris_r_hi > 0.48)
    throw Error(ErrorKind::Validation, "iris radius range invalid");
  if (spec.pupil_ratio_lo < 0.1 || spec.pupil_ratio_lo > spec.pupil_ratio_hi ||
      spec.pupil_ratio_hi > 0.8)
    throw Error(ErrorKind::Validation,
                "pupil ratio must stay within [0.1, 0.8] of the iris radius");
  if (spec.center_jitter < 0.0 || spec.center_jitter > 0.1)
    throw Error(ErrorKind::Validation, "center jitter out of range");
  if (spec.octaves < 1 || spec.octaves > 8)
    throw Error(ErrorKind::Validation, "octaves out of range");
  if (spec.occlusion < 0.0 || spec.occlusion > 0.45)
    throw Error(ErrorKind::Validation, "occlusion fraction out of range");
  if (spec.noise < 0.0 || spec.noise > 0.2)
    throw Error(ErrorKind::Validation, "noise amplitude out of range");
  if (spec.rotation_jitter < 0.0 || spec.rotation_jitter > 0.5)
    throw Error(ErrorKind::Validation, "rotation jitter out of range");
}

SyntheticSample synth_eye(const SyntheticEyeSpec& spec, int identity,
                          int instance) {
  validate_synth_spec(spec);
  const auto octs = identity_texture(spec, identity);
  Rng rng(Rng::mix(Rng::mix(Rng::mix(spec.seed, kInstanceStream),
                            static_cast<uint64_t>(identity)),
                   static_cast<uint64_t>(instance)));

  const double min_dim = std::min(spec.height, spec.width);
  const double iris_r = rng.uniform(spec.iris_r_lo, spec.iris_r_hi) * min_dim;
  const double pupil_r =
      rng.uniform(spec.pupil_ratio_lo, spec.pupil_ratio_hi) * iris_r;
  const double cx = spec.width / 2.0 +
                    rng.uniform(-1.0, 1.0) * spec.center_jitter * min_dim;
  const double cy = spec.height / 2.0 +
                    rng.uniform(-1.0, 1.0) * spec.center_jitter * min_dim;
  const double rot =
      rng.uniform(-spec.rotation_jitter, spec.rotation_jitter);

  // Everything above the lid line is eyelid; the line is placed so the
  // requested fraction of the circle is covered.
  const double y_lid = cy - iris_r * std::cos(std::numbers::pi * spec.occlusion);

  SyntheticSample s;
  s.image = Image(spec.height, spec.width);
  s.mask = Image(spec.height, spec.width);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const double d = std::hypot(x - cx, y - cy);
      double v;
      bool iris_pixel = false;
      if (y < y_lid) {
        v = 0.85 - 0.05 * (y_lid - y) / spec.height;
      } else if (d < pupil_r) {
        v = 0.06;
      } else if (d < iris_r) {
        const double theta = std::atan2(y - cy, x - cx) + rot;
        const double rho = (d - pupil_r) / (iris_r - pupil_r);
        v = 0.55 + 0.20 * texture_value(octs, rho, theta);
        iris_pixel = true;
      } else {
        v = 0.92;
      }
      v += rng.uniform(-spec.noise, spec.noise);
      s.image.at(y, x) =
          static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
      s.mask.at(y, x) = iris_pixel ? 255 : 0;
    }
  }

  s.geometry.iris_cx = cx;
  s.geometry.iris_cy = cy;
  s.geometry.iris_r = iris_r;
  s.geometry.pupil_cx = cx;
  s.geometry.pupil_cy = cy;
  s.geometry.pupil_r = pupil_r;
  s.geometry.pupil_fallback = false;
  return s;
}

}  // namespace iris
