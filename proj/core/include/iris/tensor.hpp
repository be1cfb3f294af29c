#pragma once

#include <cstdint>
#include <vector>

#include "iris/errors.hpp"

namespace iris {

// Feature map in channel-major (c, h, w) order, row-major within a channel.
// Real-valued maps are stored in double precision; weight files narrow to
// 32-bit floats on disk.
struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int c, int h, int w)
      : channels(c), height(h), width(w),
        data(static_cast<size_t>(c) * h * w, 0.0) {
    if (c < 0 || h < 0 || w < 0)
      throw Error(ErrorKind::Dimension, "negative tensor dims");
  }

  size_t size() const { return data.size(); }
  double& at(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
};

// Dynamic fixed point feature map: 8-bit two's complement integers with a
// shared fractional length; real value = q * 2^-fl.  fl may be negative.
struct QTensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  int fl = 0;
  std::vector<int8_t> data;

  QTensor() = default;
  QTensor(int c, int h, int w, int fl_)
      : channels(c), height(h), width(w), fl(fl_),
        data(static_cast<size_t>(c) * h * w, 0) {
    if (c < 0 || h < 0 || w < 0)
      throw Error(ErrorKind::Dimension, "negative tensor dims");
  }

  size_t size() const { return data.size(); }
  int8_t& at(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  int8_t at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
};

// Dense row-major matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {
    if (r < 0 || c < 0)
      throw Error(ErrorKind::Dimension, "negative matrix dims");
  }

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }
};

// Row-major int8 matrix in dynamic fixed point.
struct QMatrix {
  int rows = 0;
  int cols = 0;
  int fl = 0;
  std::vector<int8_t> data;

  QMatrix() = default;
  QMatrix(int r, int c, int fl_)
      : rows(r), cols(c), fl(fl_), data(static_cast<size_t>(r) * c, 0) {
    if (r < 0 || c < 0)
      throw Error(ErrorKind::Dimension, "negative matrix dims");
  }

  int8_t& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  int8_t at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }
};

// Binary segmentation mask; 1 = iris, 0 = background.
struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> data;

  BinaryMask() = default;
  BinaryMask(int h, int w)
      : height(h), width(w), data(static_cast<size_t>(h) * w, 0) {}

  uint8_t& at(int y, int x) {
    return data[static_cast<size_t>(y) * width + x];
  }
  uint8_t at(int y, int x) const {
    return data[static_cast<size_t>(y) * width + x];
  }
  size_t count() const {
    size_t n = 0;
    for (uint8_t v : data) n += (v != 0);
    return n;
  }
};

}  // namespace iris
