#include "iris/accel.hpp"

#include <algorithm>

#include "iris/errors.hpp"
#include "iris/network.hpp"
#include "iris/ops.hpp"

namespace iris {

namespace {

uint64_t ceil_div(int v, int d) {
  return (static_cast<uint64_t>(v) + d - 1) / d;
}

void check_tile_config(const TileConfig& cfg) {
  if (cfg.m <= 0 || cfg.k <= 0 || cfg.n <= 0)
    throw Error(ErrorKind::Validation, "tile extents must be positive");
}

}  // namespace

TileCounts tile_schedule(int m, int k, int n, const TileConfig& cfg) {
  check_tile_config(cfg);
  if (m <= 0 || k <= 0 || n <= 0)
    throw Error(ErrorKind::Dimension, "gemm extents must be positive");
  const uint64_t mt = ceil_div(m, cfg.m);
  const uint64_t kt = ceil_div(k, cfg.k);
  const uint64_t nt = ceil_div(n, cfg.n);
  TileCounts c;
  c.tiles = mt * kt * nt;
  c.dma_fills = c.tiles * (cfg.m + cfg.k);
  c.write_backs = mt * nt;
  c.est_cycles = c.tiles * static_cast<uint64_t>(cfg.m) * cfg.n;
  return c;
}

QMatrix accel_gemm_q(const QMatrix& a, const QMatrix& b,
                     const std::vector<int32_t>& bias, int out_fl,
                     AccelGemmStats* stats, const TileConfig& cfg) {
  check_tile_config(cfg);
  if (a.cols != b.rows)
    throw Error(ErrorKind::Dimension, "gemm inner dims differ");
  if (bias.size() != static_cast<size_t>(a.rows))
    throw Error(ErrorKind::Dimension, "one bias per output row required");

  QMatrix out(a.rows, b.cols, out_fl);
  const int shift = a.fl + b.fl - out_fl;
  const int mt = static_cast<int>(ceil_div(a.rows, cfg.m));
  const int kt = static_cast<int>(ceil_div(a.cols, cfg.k));
  const int nt = static_cast<int>(ceil_div(b.cols, cfg.n));
  uint64_t clips = 0;

  std::vector<int16_t> cbuf(static_cast<size_t>(cfg.m) * cfg.n);
  for (int bi = 0; bi < mt; ++bi) {
    const int rows_here = std::min(cfg.m, a.rows - bi * cfg.m);
    for (int ci = 0; ci < nt; ++ci) {
      const int cols_here = std::min(cfg.n, b.cols - ci * cfg.n);
      // Bias is preloaded through the same 16-bit saturation the
      // accumulator uses; padded lanes stay zero.
      for (int r = 0; r < rows_here; ++r) {
        const int32_t v = bias[bi * cfg.m + r];
        const int16_t s = saturate_i16(v);
        if (s != v) clips += cols_here;
        for (int c = 0; c < cols_here; ++c) cbuf[r * cfg.n + c] = s;
      }
      for (int ki = 0; ki < kt; ++ki) {
        const int k_here = std::min(cfg.k, a.cols - ki * cfg.k);
        for (int r = 0; r < rows_here; ++r) {
          const int row = bi * cfg.m + r;
          for (int c = 0; c < cols_here; ++c) {
            const int col = ci * cfg.n + c;
            // int16 products summed exactly: |tree| <= 9 * 128 * 128.
            int32_t tree = 0;
            for (int t = 0; t < k_here; ++t) {
              const int kk = ki * cfg.k + t;
              tree += static_cast<int32_t>(a.at(row, kk)) * b.at(kk, col);
            }
            const int32_t sum = cbuf[r * cfg.n + c] + tree;
            const int16_t sat = saturate_i16(sum);
            if (sat != sum) ++clips;
            cbuf[r * cfg.n + c] = sat;
          }
        }
      }
      for (int r = 0; r < rows_here; ++r)
        for (int c = 0; c < cols_here; ++c)
          out.at(bi * cfg.m + r, ci * cfg.n + c) =
              saturate_i8(round_shift(cbuf[r * cfg.n + c], shift));
    }
  }

  if (stats) {
    stats->counts = tile_schedule(a.rows, a.cols, b.cols, cfg);
    stats->c_saturations = clips;
  }
  return out;
}

Matrix accel_gemm_f(const Matrix& a, const Matrix& b,
                    const std::vector<double>& bias, AccelGemmStats* stats,
                    const TileConfig& cfg) {
  check_tile_config(cfg);
  if (a.cols != b.rows)
    throw Error(ErrorKind::Dimension, "gemm inner dims differ");
  if (bias.size() != static_cast<size_t>(a.rows))
    throw Error(ErrorKind::Dimension, "one bias per output row required");

  Matrix out(a.rows, b.cols);
  const int mt = static_cast<int>(ceil_div(a.rows, cfg.m));
  const int kt = static_cast<int>(ceil_div(a.cols, cfg.k));
  const int nt = static_cast<int>(ceil_div(b.cols, cfg.n));

  std::vector<float> cbuf(static_cast<size_t>(cfg.m) * cfg.n);
  std::vector<float> prods(cfg.k);
  for (int bi = 0; bi < mt; ++bi) {
    const int rows_here = std::min(cfg.m, a.rows - bi * cfg.m);
    for (int ci = 0; ci < nt; ++ci) {
      const int cols_here = std::min(cfg.n, b.cols - ci * cfg.n);
      for (int r = 0; r < rows_here; ++r)
        for (int c = 0; c < cols_here; ++c)
          cbuf[r * cfg.n + c] = static_cast<float>(bias[bi * cfg.m + r]);
      for (int ki = 0; ki < kt; ++ki) {
        const int k_here = std::min(cfg.k, a.cols - ki * cfg.k);
        for (int r = 0; r < rows_here; ++r) {
          const int row = bi * cfg.m + r;
          for (int c = 0; c < cols_here; ++c) {
            const int col = ci * cfg.n + c;
            std::fill(prods.begin(), prods.end(), 0.0f);
            for (int t = 0; t < k_here; ++t) {
              const int kk = ki * cfg.k + t;
              prods[t] = static_cast<float>(a.at(row, kk)) *
                         static_cast<float>(b.at(kk, col));
            }
            // Fixed tree shape: pairwise over the first eight lanes, the
            // ninth joins at the root. Every add rounds to float32.
            const float s01 = prods[0] + prods[1];
            const float s23 = prods[2] + prods[3];
            const float s45 = prods[4] + prods[5];
            const float s67 = prods[6] + prods[7];
            const float s03 = s01 + s23;
            const float s47 = s45 + s67;
            const float tree = (s03 + s47) + prods[8];
            cbuf[r * cfg.n + c] += tree;
          }
        }
      }
      for (int r = 0; r < rows_here; ++r)
        for (int c = 0; c < cols_here; ++c)
          out.at(bi * cfg.m + r, ci * cfg.n + c) = cbuf[r * cfg.n + c];
    }
  }

  if (stats) {
    stats->counts = tile_schedule(a.rows, a.cols, b.cols, cfg);
    stats->c_saturations = 0;
  }
  return out;
}

namespace {

// Routes every per-layer GEMM through the integer accelerator model and
// accumulates the schedule.
class AccelEngine : public QGemmEngine {
 public:
  AccelEngine(const QuantizedNetwork& qnet, ScheduleReport* report)
      : qnet_(qnet), report_(report) {}

  QMatrix gemm(int layer, const QMatrix& a, const QMatrix& b,
               const std::vector<int32_t>& bias, int out_fl) override {
    AccelGemmStats st;
    QMatrix out = accel_gemm_q(a, b, bias, out_fl, &st);
    if (report_) {
      LayerSchedule ls;
      ls.layer = layer;
      ls.kind =
          qnet_.layers[layer].kind == LayerKind::Tconv ? "tconv" : "conv";
      ls.m = a.rows;
      ls.k = a.cols;
      ls.n = b.cols;
      ls.counts = st.counts;
      ls.c_saturations = st.c_saturations;
      report_->layers.push_back(ls);
      report_->totals.tiles += st.counts.tiles;
      report_->totals.dma_fills += st.counts.dma_fills;
      report_->totals.write_backs += st.counts.write_backs;
      report_->totals.est_cycles += st.counts.est_cycles;
      report_->c_saturations += st.c_saturations;
    }
    return out;
  }

 private:
  const QuantizedNetwork& qnet_;
  ScheduleReport* report_;
};

}  // namespace

BinaryMask run_network_on_accel(const QuantizedNetwork& qnet,
                                const Tensor& image, ScheduleReport* report) {
  int sh = 0, sw = 0;
  const Tensor prepared = prepare_input(
      qnet.spec.scale, stride_divisor(qnet.layers), image, &sh, &sw);
  AccelEngine engine(qnet, report);
  const QTensor logits = quantized_forward(qnet, prepared, engine);
  return finalize_mask(logits_argmax(logits), sh, sw, image.height,
                       image.width);
}

namespace {

void record_layer(ScheduleReport* report, int layer, const LayerSpec& spec,
                  int m, int k, int n, const AccelGemmStats& st) {
  if (!report) return;
  LayerSchedule ls;
  ls.layer = layer;
  ls.kind = spec.kind == LayerKind::Tconv ? "tconv" : "conv";
  ls.m = m;
  ls.k = k;
  ls.n = n;
  ls.counts = st.counts;
  ls.c_saturations = st.c_saturations;
  report->layers.push_back(ls);
  report->totals.tiles += st.counts.tiles;
  report->totals.dma_fills += st.counts.dma_fills;
  report->totals.write_backs += st.counts.write_backs;
  report->totals.est_cycles += st.counts.est_cycles;
  report->c_saturations += st.c_saturations;
}

}  // namespace

BinaryMask run_network_on_accel(const Network& net, const Tensor& image,
                                ScheduleReport* report) {
  if (net.layers.empty() || net.layers.back().kind != LayerKind::Softmax)
    throw Error(ErrorKind::Validation, "network must end in softmax");
  int sh = 0, sw = 0;
  const Tensor input = prepare_input(net, image, &sh, &sw);

  std::vector<Tensor> post(net.layers.size());
  const Tensor* x = &input;
  Tensor logits;
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    if (l.kind == LayerKind::Softmax) {
      logits = *x;
      break;
    }
    AccelGemmStats st;
    Tensor raw;
    if (l.kind == LayerKind::Conv) {
      const Matrix cols = im2col(*x, l.kernel, l.stride, l.padding);
      const Matrix prod =
          accel_gemm_f(net.weights[i], cols, net.biases[i], &st);
      raw = Tensor(l.out_channels,
                   conv_out_extent(x->height, l.kernel, l.stride, l.padding),
                   conv_out_extent(x->width, l.kernel, l.stride, l.padding));
      raw.data = prod.data;
      record_layer(report, static_cast<int>(i), l, prod.rows, cols.rows,
                   prod.cols, st);
    } else {
      Matrix flat(l.in_channels, x->height * x->width);
      flat.data = x->data;
      const std::vector<double> no_bias(net.weights[i].rows, 0.0);
      const Matrix cols = accel_gemm_f(net.weights[i], flat, no_bias, &st);
      raw = col2im(cols, l.out_channels, x->height * l.stride,
                   x->width * l.stride, l.kernel, l.stride, l.padding);
      // Bias joins after the scatter-add, once per output pixel.
      const size_t plane = static_cast<size_t>(raw.height) * raw.width;
      for (int c = 0; c < l.out_channels; ++c)
        for (size_t p = 0; p < plane; ++p)
          raw.data[c * plane + p] += net.biases[i][c];
      record_layer(report, static_cast<int>(i), l, cols.rows, flat.rows,
                   cols.cols, st);
    }
    if (l.relu) relu_inplace(raw);
    if (l.skip_from >= 0) {
      const Tensor& other = post[l.skip_from];
      if (other.channels != raw.channels || other.height != raw.height ||
          other.width != raw.width)
        throw Error(ErrorKind::Dimension, "shortcut shape mismatch");
      for (size_t p = 0; p < raw.data.size(); ++p)
        raw.data[p] += other.data[p];
    }
    post[i] = std::move(raw);
    x = &post[i];
  }

  const size_t plane = static_cast<size_t>(logits.height) * logits.width;
  BinaryMask padded(logits.height, logits.width);
  for (size_t p = 0; p < plane; ++p)
    padded.data[p] = logits.data[plane + p] > logits.data[p] ? 1 : 0;
  return finalize_mask(padded, sh, sw, image.height, image.width);
}

}  // namespace iris
