#pragma once

#include <cstdint>

#include "iris/tensor.hpp"

namespace iris {

// Output spatial extent of a convolution along one axis.
int conv_out_extent(int in, int kernel, int stride, int padding);

// Lowers convolution input into a (C*k*k) x (out_h*out_w) patch matrix.
// Row index = c*k*k + ky*k + kx; column index = oy*out_w + ox.  Out-of-bounds
// taps read as zero.
Matrix im2col(const Tensor& in, int kernel, int stride, int padding);
QMatrix im2col_q(const QTensor& in, int kernel, int stride, int padding);

// Exact adjoint of im2col: scatter-adds patch columns back into a
// (channels, height, width) tensor.
Tensor col2im(const Matrix& cols, int channels, int height, int width,
              int kernel, int stride, int padding);

// Reference GEMM, out = a * b.  Plain triple loop with the k-loop innermost;
// no blocking or reassociation, so results are bit-stable across runs.
Matrix gemm_ref(const Matrix& a, const Matrix& b);

// Saturating arithmetic helpers shared by the quantized path and the
// accelerator model.
int8_t saturate_i8(int64_t v);
int16_t saturate_i16(int64_t v);

// Shift v right by `shift` bits rounding half away from zero; negative
// shift is an exact left shift.
int64_t round_shift(int64_t v, int shift);

// Quantized reference GEMM.  Products of int8 operands fit 16 bits and are
// accumulated exactly in a wide integer; the accumulator is then rescaled
// from fl (a.fl + b.fl) to out_fl with round-half-away-from-zero and
// saturated to [-128, 127].
QMatrix gemm_ref_q(const QMatrix& a, const QMatrix& b, int out_fl);

// gemm_ref_q with a per-row bias added in the accumulator domain; the bias
// carries fractional length a.fl + b.fl.
QMatrix gemm_ref_q_bias(const QMatrix& a, const QMatrix& b,
                        const std::vector<int32_t>& bias, int out_fl);

// Element-wise max(0, x).
void relu_inplace(Tensor& t);
void relu_inplace(QTensor& t);

// Softmax across exactly two channels, per pixel.
Tensor softmax2(const Tensor& logits);

// Nearest-neighbour resize by a scale factor: output extent is
// round(scale * extent) and source index floor(dest / scale), clamped.
Tensor nearest_resize(const Tensor& in, double scale);
// Same mapping expressed against explicit output dims.
BinaryMask nearest_resize_to(const BinaryMask& in, int out_h, int out_w);

// Dynamic fixed point scalar conversions.
int8_t quantize_value(double v, int fl);     // round half away, saturate
double dequantize_value(int8_t q, int fl);   // exact: q * 2^-fl

}  // namespace iris
