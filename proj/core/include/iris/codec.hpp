#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "iris/contour.hpp"
#include "iris/tensor.hpp"

namespace iris {

// Pseudo-polar resampling grid between the pupil and limbic circles.
struct NormalizedGrid {
  static constexpr int kRadial = 16;
  static constexpr int kAngular = 128;
  // Row-major [radial][angular]; values in [0,1].
  std::vector<double> values = std::vector<double>(kRadial * kAngular, 0.0);
  // 0 where the source point fell outside the image or segmentation mask.
  std::vector<uint8_t> valid = std::vector<uint8_t>(kRadial * kAngular, 0);

  double& value(int i, int j) { return values[i * kAngular + j]; }
  double value(int i, int j) const { return values[i * kAngular + j]; }
  uint8_t& validity(int i, int j) { return valid[i * kAngular + j]; }
  uint8_t validity(int i, int j) const { return valid[i * kAngular + j]; }
};

struct GaborParams {
  double lambda0 = 18.0;      // center wavelength, angular samples
  double sigma_over_f = 0.5;  // bandwidth ratio
  double mag_threshold = 1e-6;  // below this, phase bits are unreliable
};

// Phase code: 2 bits per grid sample (sign of real and imaginary part), so
// each of the 16 rows carries 256 code bits plus 256 mask bits. Stored one
// bit per byte; the file format packs them.
struct IrisCode {
  static constexpr int kRows = NormalizedGrid::kRadial;
  static constexpr int kBitsPerRow = 2 * NormalizedGrid::kAngular;
  static constexpr int kBits = kRows * kBitsPerRow;

  std::vector<uint8_t> code = std::vector<uint8_t>(kBits, 0);
  std::vector<uint8_t> mask = std::vector<uint8_t>(kBits, 0);

  uint8_t& code_bit(int row, int bit) { return code[row * kBitsPerRow + bit]; }
  uint8_t code_bit(int row, int bit) const {
    return code[row * kBitsPerRow + bit];
  }
  uint8_t& mask_bit(int row, int bit) { return mask[row * kBitsPerRow + bit]; }
  uint8_t mask_bit(int row, int bit) const {
    return mask[row * kBitsPerRow + bit];
  }
};

// Daugman rubber sheet: sample (i,j) sits at radial fraction (i+0.5)/16
// between the (possibly non-concentric) pupil and iris boundary points at
// angle 2*pi*j/128, bilinearly interpolated. The pupil circle must lie
// strictly inside the iris circle.
NormalizedGrid rubber_sheet(const Tensor& image, const EyeGeometry& geometry,
                            const BinaryMask& seg_mask);

// Circular frequency-domain filtering of one angular row:
// G(f) = exp(-log(f/f0)^2 / (2 log(sigma_over_f)^2)) with G(0) = 0 and only
// positive frequencies retained, so the output is the complex analytic
// response.
std::vector<std::complex<double>> log_gabor_row(
    const std::vector<double>& row, const GaborParams& params = {});

IrisCode encode(const NormalizedGrid& grid, const GaborParams& params = {});

// Normalized Hamming distance over jointly-valid bits:
// || (codeI xor codeS) and maskI and maskS || / || maskI and maskS ||.
double hamming(const IrisCode& a, const IrisCode& b);

// Circular rotation by whole angular samples; the two phase bits of a
// sample travel together.
IrisCode rotate_code(const IrisCode& c, int samples);

struct MatchResult {
  double hd = 1.0;
  int rotation = 0;  // samples applied to the first code at the minimum
};

// Minimum Hamming distance over rotations of +-12 samples (2.8125 degrees
// each, staying within +-35 degrees). Ties keep the smallest |rotation|,
// negative first.
MatchResult match_min_hd(const IrisCode& a, const IrisCode& b);

}  // namespace iris
