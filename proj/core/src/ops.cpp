#include "iris/ops.hpp"

#include <algorithm>
#include <cmath>

namespace iris {

int conv_out_extent(int in, int kernel, int stride, int padding) {
  int span = in + 2 * padding - kernel;
  if (span < 0 || stride <= 0)
    throw Error(ErrorKind::Dimension, "convolution window exceeds input");
  return span / stride + 1;
}

namespace {

// Shared patch-walk for the real and quantized im2col variants.
template <typename In, typename Out>
void lower_patches(const In& in, Out& out, int kernel, int stride,
                   int padding) {
  const int out_h = conv_out_extent(in.height, kernel, stride, padding);
  const int out_w = conv_out_extent(in.width, kernel, stride, padding);
  for (int c = 0; c < in.channels; ++c) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const int row = (c * kernel + ky) * kernel + kx;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - padding + ky;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - padding + kx;
            const int col = oy * out_w + ox;
            if (iy >= 0 && iy < in.height && ix >= 0 && ix < in.width)
              out.at(row, col) = in.at(c, iy, ix);
            // else: leave the zero fill in place
          }
        }
      }
    }
  }
}

}  // namespace

Matrix im2col(const Tensor& in, int kernel, int stride, int padding) {
  const int out_h = conv_out_extent(in.height, kernel, stride, padding);
  const int out_w = conv_out_extent(in.width, kernel, stride, padding);
  Matrix out(in.channels * kernel * kernel, out_h * out_w);
  lower_patches(in, out, kernel, stride, padding);
  return out;
}

QMatrix im2col_q(const QTensor& in, int kernel, int stride, int padding) {
  const int out_h = conv_out_extent(in.height, kernel, stride, padding);
  const int out_w = conv_out_extent(in.width, kernel, stride, padding);
  QMatrix out(in.channels * kernel * kernel, out_h * out_w, in.fl);
  lower_patches(in, out, kernel, stride, padding);
  return out;
}

Tensor col2im(const Matrix& cols, int channels, int height, int width,
              int kernel, int stride, int padding) {
  const int out_h = conv_out_extent(height, kernel, stride, padding);
  const int out_w = conv_out_extent(width, kernel, stride, padding);
  if (cols.rows != channels * kernel * kernel ||
      cols.cols != out_h * out_w)
    throw Error(ErrorKind::Dimension, "col2im shape mismatch");
  Tensor out(channels, height, width);
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const int row = (c * kernel + ky) * kernel + kx;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - padding + ky;
          if (iy < 0 || iy >= height) continue;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - padding + kx;
            if (ix < 0 || ix >= width) continue;
            out.at(c, iy, ix) += cols.at(row, oy * out_w + ox);
          }
        }
      }
    }
  }
  return out;
}

Matrix gemm_ref(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    throw Error(ErrorKind::Dimension, "gemm_ref inner dims differ");
  Matrix out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.cols; ++k)
        acc += a.at(i, k) * b.at(k, j);
      out.at(i, j) = acc;
    }
  }
  return out;
}

int8_t saturate_i8(int64_t v) {
  return static_cast<int8_t>(std::clamp<int64_t>(v, -128, 127));
}

int16_t saturate_i16(int64_t v) {
  return static_cast<int16_t>(std::clamp<int64_t>(v, -32768, 32767));
}

int64_t round_shift(int64_t v, int shift) {
  if (shift <= 0) return v << (-shift);
  const int64_t half = int64_t{1} << (shift - 1);
  if (v >= 0) return (v + half) >> shift;
  return -((-v + half) >> shift);
}

QMatrix gemm_ref_q(const QMatrix& a, const QMatrix& b, int out_fl) {
  return gemm_ref_q_bias(a, b, std::vector<int32_t>(a.rows, 0), out_fl);
}

QMatrix gemm_ref_q_bias(const QMatrix& a, const QMatrix& b,
                        const std::vector<int32_t>& bias, int out_fl) {
  if (a.cols != b.rows)
    throw Error(ErrorKind::Dimension, "gemm_ref_q inner dims differ");
  if (static_cast<int>(bias.size()) != a.rows)
    throw Error(ErrorKind::Dimension, "gemm_ref_q bias length mismatch");
  const int shift = a.fl + b.fl - out_fl;
  QMatrix out(a.rows, b.cols, out_fl);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < b.cols; ++j) {
      int64_t acc = bias[i];
      for (int k = 0; k < a.cols; ++k) {
        // Each product of two int8 values fits in 16 bits.
        const int16_t prod =
            static_cast<int16_t>(static_cast<int16_t>(a.at(i, k)) *
                                 static_cast<int16_t>(b.at(k, j)));
        acc += prod;
      }
      out.at(i, j) = saturate_i8(round_shift(acc, shift));
    }
  }
  return out;
}

void relu_inplace(Tensor& t) {
  for (double& v : t.data) v = v > 0.0 ? v : 0.0;
}

void relu_inplace(QTensor& t) {
  for (int8_t& v : t.data) v = v > 0 ? v : int8_t{0};
}

Tensor softmax2(const Tensor& logits) {
  if (logits.channels != 2)
    throw Error(ErrorKind::Dimension, "softmax2 expects 2 channels");
  Tensor out(2, logits.height, logits.width);
  const size_t plane = static_cast<size_t>(logits.height) * logits.width;
  for (size_t p = 0; p < plane; ++p) {
    const double z0 = logits.data[p];
    const double z1 = logits.data[plane + p];
    const double m = std::max(z0, z1);
    const double e0 = std::exp(z0 - m);
    const double e1 = std::exp(z1 - m);
    const double sum = e0 + e1;
    out.data[p] = e0 / sum;
    out.data[plane + p] = e1 / sum;
  }
  return out;
}

Tensor nearest_resize(const Tensor& in, double scale) {
  if (scale <= 0.0)
    throw Error(ErrorKind::Validation, "nearest_resize scale must be > 0");
  const int out_h = static_cast<int>(std::llround(scale * in.height));
  const int out_w = static_cast<int>(std::llround(scale * in.width));
  if (out_h <= 0 || out_w <= 0)
    throw Error(ErrorKind::Dimension, "nearest_resize output is empty");
  Tensor out(in.channels, out_h, out_w);
  for (int c = 0; c < in.channels; ++c) {
    for (int y = 0; y < out_h; ++y) {
      const int sy = std::min(in.height - 1,
                              static_cast<int>(std::floor(y / scale)));
      for (int x = 0; x < out_w; ++x) {
        const int sx = std::min(in.width - 1,
                                static_cast<int>(std::floor(x / scale)));
        out.at(c, y, x) = in.at(c, sy, sx);
      }
    }
  }
  return out;
}

BinaryMask nearest_resize_to(const BinaryMask& in, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0 || in.height <= 0 || in.width <= 0)
    throw Error(ErrorKind::Dimension, "nearest_resize_to empty extent");
  BinaryMask out(out_h, out_w);
  for (int y = 0; y < out_h; ++y) {
    const int sy = std::min<int>(
        in.height - 1,
        static_cast<int>((static_cast<int64_t>(y) * in.height) / out_h));
    for (int x = 0; x < out_w; ++x) {
      const int sx = std::min<int>(
          in.width - 1,
          static_cast<int>((static_cast<int64_t>(x) * in.width) / out_w));
      out.at(y, x) = in.at(sy, sx);
    }
  }
  return out;
}

int8_t quantize_value(double v, int fl) {
  const double scaled = std::ldexp(v, fl);  // v * 2^fl, exact scaling
  const double rounded = std::round(scaled);  // half away from zero
  if (rounded > 127.0) return 127;
  if (rounded < -128.0) return -128;
  return static_cast<int8_t>(rounded);
}

double dequantize_value(int8_t q, int fl) {
  return std::ldexp(static_cast<double>(q), -fl);
}

}  // namespace iris
