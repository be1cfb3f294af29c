#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iris/tensor.hpp"

namespace iris {

// 8-bit grayscale raster, row-major.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> pixels;

  Image() = default;
  Image(int h, int w)
      : height(h), width(w),
        pixels(static_cast<size_t>(h) * static_cast<size_t>(w), 0) {}
  uint8_t& at(int y, int x) {
    return pixels[static_cast<size_t>(y) * width + x];
  }
  uint8_t at(int y, int x) const {
    return pixels[static_cast<size_t>(y) * width + x];
  }
};

// Binary PGM (P5), maxval <= 255. Header comments are accepted on read;
// writes always emit "P5\n<w> <h>\n255\n" + raw bytes, so write/read/write
// round-trips are byte-identical.
Image read_pgm(const std::string& path);
void write_pgm(const Image& img, const std::string& path);

Tensor image_to_tensor(const Image& img);       // pixel / 255.0
BinaryMask image_to_mask(const Image& img);     // nonzero means iris
Image mask_to_image(const BinaryMask& mask);    // 1 -> 255
Image tensor_to_image(const Tensor& t);         // clamp [0,1], *255 rounded

}  // namespace iris
