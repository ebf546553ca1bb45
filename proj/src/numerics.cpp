#include "sat/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace sat {

namespace {

// GELU tanh approximation constants.
constexpr double kGeluAlpha = 0.7978845608028653559;  // sqrt(2/pi)
constexpr double kGeluCubic = 0.044715;

uint64_t matmul_flops(const Matrix& a, int64_t out_cols) {
  return 2ull * static_cast<uint64_t>(a.rows) * static_cast<uint64_t>(a.cols) *
         static_cast<uint64_t>(out_cols);
}

}  // namespace

void matmul_into(const Matrix& a, const Matrix& b, Matrix& out, FlopsCounter* fc, FlopCat cat) {
  SAT_REQUIRE(a.cols == b.rows,
          "matmul: inner dimensions differ (" + shape_str(a) + " vs " + shape_str(b) + ")");
  out.reset(a.rows, b.cols);
  const int64_t m = a.rows, k = a.cols, n = b.cols;
  // Four k-steps per pass cut the out-row traffic; the per-element add
  // order stays fixed, so results do not depend on the thread count.
#pragma omp parallel for schedule(static) if (m * k * n > 16384)
  for (int64_t i = 0; i < m; ++i) {
    double* out_row = out.row(i);
    const double* a_row = a.row(i);
    int64_t p = 0;
    for (; p + 4 <= k; p += 4) {
      const double a0 = a_row[p], a1 = a_row[p + 1], a2 = a_row[p + 2], a3 = a_row[p + 3];
      const double* b0 = b.row(p);
      const double* b1 = b.row(p + 1);
      const double* b2 = b.row(p + 2);
      const double* b3 = b.row(p + 3);
      for (int64_t j = 0; j < n; ++j)
        out_row[j] += a0 * b0[j] + a1 * b1[j] + a2 * b2[j] + a3 * b3[j];
    }
    for (; p < k; ++p) {
      const double apv = a_row[p];
      const double* b_row = b.row(p);
      for (int64_t j = 0; j < n; ++j) out_row[j] += apv * b_row[j];
    }
  }
  if (fc) fc->add(cat, matmul_flops(a, n));
}

Matrix matmul(const Matrix& a, const Matrix& b, FlopsCounter* fc, FlopCat cat) {
  Matrix out;
  matmul_into(a, b, out, fc, cat);
  return out;
}

void matmul_nt_into(const Matrix& a, const Matrix& b, Matrix& out, FlopsCounter* fc, FlopCat cat) {
  SAT_REQUIRE(a.cols == b.cols,
          "matmul_nt: inner dimensions differ (" + shape_str(a) + " vs " + shape_str(b) + ")");
  // Row-by-row dot products are latency-bound; transposing the (small)
  // right operand and reusing the blocked kernel is several times faster.
  const Matrix bt = transpose(b);
  matmul_into(a, bt, out, fc, cat);
}

Matrix matmul_nt(const Matrix& a, const Matrix& b, FlopsCounter* fc, FlopCat cat) {
  Matrix out;
  matmul_nt_into(a, b, out, fc, cat);
  return out;
}

void matmul_tn_into(const Matrix& a, const Matrix& b, Matrix& out, FlopsCounter* fc, FlopCat cat) {
  SAT_REQUIRE(a.rows == b.rows,
          "matmul_tn: inner dimensions differ (" + shape_str(a) + " vs " + shape_str(b) + ")");
  out.reset(a.cols, b.cols);
  const int64_t m = a.cols, k = a.rows, n = b.cols;
  // Tiles of output rows let each pass over b serve 16 rows; within a tile
  // the reads a(p, i..i+15) sit on one or two cache lines. The k order per
  // element stays ascending, so tiling never changes results.
  constexpr int64_t kTile = 16;
#pragma omp parallel for schedule(static) if (m * k * n > 16384)
  for (int64_t i0 = 0; i0 < m; i0 += kTile) {
    const int64_t i1 = std::min(i0 + kTile, m);
    int64_t p = 0;
    for (; p + 4 <= k; p += 4) {
      const double* a0 = a.row(p);
      const double* a1 = a.row(p + 1);
      const double* a2 = a.row(p + 2);
      const double* a3 = a.row(p + 3);
      const double* b0 = b.row(p);
      const double* b1 = b.row(p + 1);
      const double* b2 = b.row(p + 2);
      const double* b3 = b.row(p + 3);
      for (int64_t i = i0; i < i1; ++i) {
        double* out_row = out.row(i);
        for (int64_t j = 0; j < n; ++j)
          out_row[j] += a0[i] * b0[j] + a1[i] * b1[j] + a2[i] * b2[j] + a3[i] * b3[j];
      }
    }
    for (; p < k; ++p) {
      const double* a_row = a.row(p);
      const double* b_row = b.row(p);
      for (int64_t i = i0; i < i1; ++i) {
        const double api = a_row[i];
        double* out_row = out.row(i);
        for (int64_t j = 0; j < n; ++j) out_row[j] += api * b_row[j];
      }
    }
  }
  if (fc) fc->add(cat, 2ull * static_cast<uint64_t>(m) * static_cast<uint64_t>(k) * static_cast<uint64_t>(n));
}

Matrix matmul_tn(const Matrix& a, const Matrix& b, FlopsCounter* fc, FlopCat cat) {
  Matrix out;
  matmul_tn_into(a, b, out, fc, cat);
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols, a.rows);
  for (int64_t i = 0; i < a.rows; ++i)
    for (int64_t j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
  return out;
}

Matrix softmax_rows(const Matrix& a, double scale) {
  Matrix out(a.rows, a.cols);
#pragma omp parallel for schedule(static) if (a.rows * a.cols > 16384)
  for (int64_t i = 0; i < a.rows; ++i) {
    const double* in = a.row(i);
    double* o = out.row(i);
    double mx = -HUGE_VAL;
    for (int64_t j = 0; j < a.cols; ++j) mx = std::max(mx, scale * in[j]);
    double sum = 0.0;
    for (int64_t j = 0; j < a.cols; ++j) {
      o[j] = std::exp(scale * in[j] - mx);
      sum += o[j];
    }
    const double inv = 1.0 / sum;
    for (int64_t j = 0; j < a.cols; ++j) o[j] *= inv;
  }
  return out;
}

Matrix softmax_rows_backward(const Matrix& y, const Matrix& dy) {
  SAT_REQUIRE(y.same_shape(dy), "softmax_rows_backward: shape mismatch");
  Matrix ds(y.rows, y.cols);
#pragma omp parallel for schedule(static) if (y.rows * y.cols > 16384)
  for (int64_t i = 0; i < y.rows; ++i) {
    const double* yr = y.row(i);
    const double* dyr = dy.row(i);
    double dot = 0.0;
    for (int64_t j = 0; j < y.cols; ++j) dot += yr[j] * dyr[j];
    double* o = ds.row(i);
    for (int64_t j = 0; j < y.cols; ++j) o[j] = yr[j] * (dyr[j] - dot);
  }
  return ds;
}

Matrix gelu(const Matrix& x) {
  Matrix out(x.rows, x.cols);
  const int64_t n = x.size();
#pragma omp parallel for schedule(static) if (n > 16384)
  for (int64_t i = 0; i < n; ++i) {
    const double v = x.data[static_cast<size_t>(i)];
    const double u = kGeluAlpha * (v + kGeluCubic * v * v * v);
    out.data[static_cast<size_t>(i)] = 0.5 * v * (1.0 + std::tanh(u));
  }
  return out;
}

Matrix gelu_backward(const Matrix& x, const Matrix& dy) {
  SAT_REQUIRE(x.same_shape(dy), "gelu_backward: shape mismatch");
  Matrix dx(x.rows, x.cols);
  const int64_t n = x.size();
#pragma omp parallel for schedule(static) if (n > 16384)
  for (int64_t i = 0; i < n; ++i) {
    const double v = x.data[static_cast<size_t>(i)];
    const double u = kGeluAlpha * (v + kGeluCubic * v * v * v);
    const double t = std::tanh(u);
    const double du = kGeluAlpha * (1.0 + 3.0 * kGeluCubic * v * v);
    const double grad = 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * du;
    dx.data[static_cast<size_t>(i)] = dy.data[static_cast<size_t>(i)] * grad;
  }
  return dx;
}

Matrix gelu_with_cache(const Matrix& x, Matrix& tanh_cache) {
  Matrix out(x.rows, x.cols);
  tanh_cache.reset(x.rows, x.cols);
  const int64_t n = x.size();
#pragma omp parallel for schedule(static) if (n > 16384)
  for (int64_t i = 0; i < n; ++i) {
    const double v = x.data[static_cast<size_t>(i)];
    const double u = kGeluAlpha * (v + kGeluCubic * v * v * v);
    const double t = std::tanh(u);
    tanh_cache.data[static_cast<size_t>(i)] = t;
    out.data[static_cast<size_t>(i)] = 0.5 * v * (1.0 + t);
  }
  return out;
}

Matrix gelu_backward_cached(const Matrix& x, const Matrix& tanh_cache, const Matrix& dy) {
  SAT_REQUIRE(x.same_shape(dy) && x.same_shape(tanh_cache), "gelu_backward_cached: shape mismatch");
  Matrix dx(x.rows, x.cols);
  const int64_t n = x.size();
#pragma omp parallel for schedule(static) if (n > 16384)
  for (int64_t i = 0; i < n; ++i) {
    const double v = x.data[static_cast<size_t>(i)];
    const double t = tanh_cache.data[static_cast<size_t>(i)];
    const double du = kGeluAlpha * (1.0 + 3.0 * kGeluCubic * v * v);
    const double grad = 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * du;
    dx.data[static_cast<size_t>(i)] = dy.data[static_cast<size_t>(i)] * grad;
  }
  return dx;
}

Matrix add(const Matrix& a, const Matrix& b) {
  SAT_REQUIRE(a.same_shape(b), "add: shape mismatch");
  Matrix out(a.rows, a.cols);
  for (int64_t i = 0; i < a.size(); ++i)
    out.data[static_cast<size_t>(i)] = a.data[static_cast<size_t>(i)] + b.data[static_cast<size_t>(i)];
  return out;
}

void add_inplace(Matrix& a, const Matrix& b) {
  SAT_REQUIRE(a.same_shape(b), "add_inplace: shape mismatch");
  for (int64_t i = 0; i < a.size(); ++i) a.data[static_cast<size_t>(i)] += b.data[static_cast<size_t>(i)];
}

Matrix mul(const Matrix& a, const Matrix& b) {
  SAT_REQUIRE(a.same_shape(b), "mul: shape mismatch");
  Matrix out(a.rows, a.cols);
  for (int64_t i = 0; i < a.size(); ++i)
    out.data[static_cast<size_t>(i)] = a.data[static_cast<size_t>(i)] * b.data[static_cast<size_t>(i)];
  return out;
}

Matrix layer_norm(const Matrix& x, const Matrix& gain) {
  SAT_REQUIRE(gain.rows == 1 && gain.cols == x.cols,
          "layer_norm: gain must be 1x" + std::to_string(x.cols));
  Matrix out(x.rows, x.cols);
  const int64_t c = x.cols;
#pragma omp parallel for schedule(static) if (x.rows * x.cols > 16384)
  for (int64_t i = 0; i < x.rows; ++i) {
    const double* in = x.row(i);
    double* o = out.row(i);
    double mean = 0.0;
    for (int64_t j = 0; j < c; ++j) mean += in[j];
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (int64_t j = 0; j < c; ++j) {
      const double d = in[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(c);
    const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
    for (int64_t j = 0; j < c; ++j) o[j] = gain.data[static_cast<size_t>(j)] * (in[j] - mean) * inv_std;
  }
  return out;
}

LayerNormGrads layer_norm_backward(const Matrix& x, const Matrix& gain, const Matrix& dy) {
  SAT_REQUIRE(x.same_shape(dy), "layer_norm_backward: shape mismatch");
  SAT_REQUIRE(gain.rows == 1 && gain.cols == x.cols, "layer_norm_backward: bad gain shape");
  LayerNormGrads g;
  g.dx = Matrix(x.rows, x.cols);
  g.dgain = Matrix(1, x.cols);
  const int64_t c = x.cols;
  // dgain accumulates across rows; keep it serial for a fixed reduction order.
  for (int64_t i = 0; i < x.rows; ++i) {
    const double* in = x.row(i);
    const double* dyr = dy.row(i);
    double* dxr = g.dx.row(i);
    double mean = 0.0;
    for (int64_t j = 0; j < c; ++j) mean += in[j];
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (int64_t j = 0; j < c; ++j) {
      const double d = in[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(c);
    const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);

    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
    for (int64_t j = 0; j < c; ++j) {
      const double xhat = (in[j] - mean) * inv_std;
      const double dxhat = dyr[j] * gain.data[static_cast<size_t>(j)];
      g.dgain.data[static_cast<size_t>(j)] += dyr[j] * xhat;
      mean_dxhat += dxhat;
      mean_dxhat_xhat += dxhat * xhat;
    }
    mean_dxhat /= static_cast<double>(c);
    mean_dxhat_xhat /= static_cast<double>(c);
    for (int64_t j = 0; j < c; ++j) {
      const double xhat = (in[j] - mean) * inv_std;
      const double dxhat = dyr[j] * gain.data[static_cast<size_t>(j)];
      dxr[j] = inv_std * (dxhat - mean_dxhat - xhat * mean_dxhat_xhat);
    }
  }
  return g;
}

CrossEntropyResult cross_entropy(const Matrix& logits, std::span<const int32_t> targets) {
  SAT_REQUIRE(static_cast<int64_t>(targets.size()) == logits.rows,
          "cross_entropy: one target per row required");
  for (int32_t t : targets)
    SAT_REQUIRE_DATA(t >= 0 && t < logits.cols, "cross_entropy: target index out of range");
  CrossEntropyResult res;
  res.dlogits = Matrix(logits.rows, logits.cols);
  const double inv_n = 1.0 / static_cast<double>(logits.rows);
  const int64_t c = logits.cols;
  std::vector<double> row_loss(static_cast<size_t>(logits.rows));
#pragma omp parallel for schedule(static) if (logits.rows * logits.cols > 16384)
  for (int64_t i = 0; i < logits.rows; ++i) {
    const double* in = logits.row(i);
    double* dl = res.dlogits.row(i);
    double mx = -HUGE_VAL;
    for (int64_t j = 0; j < c; ++j) mx = std::max(mx, in[j]);
    double sum = 0.0;
    for (int64_t j = 0; j < c; ++j) sum += std::exp(in[j] - mx);
    const double lse = mx + std::log(sum);
    row_loss[static_cast<size_t>(i)] = lse - in[targets[static_cast<size_t>(i)]];
    for (int64_t j = 0; j < c; ++j) dl[j] = std::exp(in[j] - lse) * inv_n;
    dl[targets[static_cast<size_t>(i)]] -= inv_n;
  }
  double loss = 0.0;
  for (double l : row_loss) loss += l;  // serial: fixed reduction order
  res.loss = loss * inv_n;
  return res;
}

std::vector<double> row_mean(const Matrix& a) {
  SAT_REQUIRE(a.rows >= 1, "row_mean: empty matrix");
  std::vector<double> mean(static_cast<size_t>(a.cols), 0.0);
  for (int64_t i = 0; i < a.rows; ++i) {
    const double* r = a.row(i);
    for (int64_t j = 0; j < a.cols; ++j) mean[static_cast<size_t>(j)] += r[j];
  }
  const double inv = 1.0 / static_cast<double>(a.rows);
  for (double& v : mean) v *= inv;
  return mean;
}

std::vector<double> column_l2_norms(const Matrix& a) {
  std::vector<double> sq(static_cast<size_t>(a.cols), 0.0);
  for (int64_t i = 0; i < a.rows; ++i) {
    const double* r = a.row(i);
    for (int64_t j = 0; j < a.cols; ++j) sq[static_cast<size_t>(j)] += r[j] * r[j];
  }
  for (double& v : sq) v = std::sqrt(v);
  return sq;
}

Matrix gather_columns(const Matrix& a, std::span<const int32_t> idx) {
  for (int32_t j : idx) SAT_REQUIRE(j >= 0 && j < a.cols, "gather_columns: index out of range");
  Matrix out(a.rows, static_cast<int64_t>(idx.size()));
  for (int64_t i = 0; i < a.rows; ++i) {
    const double* r = a.row(i);
    double* o = out.row(i);
    for (size_t j = 0; j < idx.size(); ++j) o[j] = r[idx[j]];
  }
  return out;
}

Matrix gather_rows(const Matrix& a, std::span<const int32_t> idx) {
  for (int32_t i : idx) SAT_REQUIRE(i >= 0 && i < a.rows, "gather_rows: index out of range");
  Matrix out(static_cast<int64_t>(idx.size()), a.cols);
  for (size_t i = 0; i < idx.size(); ++i) {
    const double* r = a.row(idx[i]);
    std::copy(r, r + a.cols, out.row(static_cast<int64_t>(i)));
  }
  return out;
}

void scatter_add_columns(Matrix& dst, std::span<const int32_t> idx, const Matrix& src) {
  SAT_REQUIRE(src.rows == dst.rows && src.cols == static_cast<int64_t>(idx.size()),
          "scatter_add_columns: shape mismatch");
  for (int32_t j : idx) SAT_REQUIRE(j >= 0 && j < dst.cols, "scatter_add_columns: index out of range");
  for (int64_t i = 0; i < dst.rows; ++i) {
    double* d = dst.row(i);
    const double* s = src.row(i);
    for (size_t j = 0; j < idx.size(); ++j) d[idx[j]] += s[j];
  }
}

void scatter_add_rows(Matrix& dst, std::span<const int32_t> idx, const Matrix& src) {
  SAT_REQUIRE(src.cols == dst.cols && src.rows == static_cast<int64_t>(idx.size()),
          "scatter_add_rows: shape mismatch");
  for (int32_t i : idx) SAT_REQUIRE(i >= 0 && i < dst.rows, "scatter_add_rows: index out of range");
  for (size_t i = 0; i < idx.size(); ++i) {
    double* d = dst.row(idx[i]);
    const double* s = src.row(static_cast<int64_t>(i));
    for (int64_t j = 0; j < dst.cols; ++j) d[j] += s[j];
  }
}

namespace ref {

Matrix matmul(const Matrix& a, const Matrix& b) {
  SAT_REQUIRE(a.cols == b.rows, "ref::matmul: inner dimensions differ");
  Matrix out(a.rows, b.cols);
  for (int64_t i = 0; i < a.rows; ++i)
    for (int64_t j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (int64_t k = 0; k < a.cols; ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  SAT_REQUIRE(a.cols == b.cols, "ref::matmul_nt: inner dimensions differ");
  Matrix out(a.rows, b.rows);
  for (int64_t i = 0; i < a.rows; ++i)
    for (int64_t j = 0; j < b.rows; ++j) {
      double s = 0.0;
      for (int64_t k = 0; k < a.cols; ++k) s += a(i, k) * b(j, k);
      out(i, j) = s;
    }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  SAT_REQUIRE(a.rows == b.rows, "ref::matmul_tn: inner dimensions differ");
  Matrix out(a.cols, b.cols);
  for (int64_t i = 0; i < a.cols; ++i)
    for (int64_t j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (int64_t k = 0; k < a.rows; ++k) s += a(k, i) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

Matrix softmax_rows(const Matrix& a, double scale) {
  Matrix out(a.rows, a.cols);
  for (int64_t i = 0; i < a.rows; ++i) {
    double mx = -HUGE_VAL;
    for (int64_t j = 0; j < a.cols; ++j) mx = std::max(mx, scale * a(i, j));
    double sum = 0.0;
    for (int64_t j = 0; j < a.cols; ++j) {
      out(i, j) = std::exp(scale * a(i, j) - mx);
      sum += out(i, j);
    }
    for (int64_t j = 0; j < a.cols; ++j) out(i, j) /= sum;
  }
  return out;
}

Matrix gelu(const Matrix& x) {
  Matrix out(x.rows, x.cols);
  for (int64_t i = 0; i < x.size(); ++i) {
    const double v = x.data[static_cast<size_t>(i)];
    const double u = kGeluAlpha * (v + kGeluCubic * v * v * v);
    out.data[static_cast<size_t>(i)] = 0.5 * v * (1.0 + std::tanh(u));
  }
  return out;
}

Matrix layer_norm(const Matrix& x, const Matrix& gain) {
  Matrix out(x.rows, x.cols);
  for (int64_t i = 0; i < x.rows; ++i) {
    double mean = 0.0;
    for (int64_t j = 0; j < x.cols; ++j) mean += x(i, j);
    mean /= static_cast<double>(x.cols);
    double var = 0.0;
    for (int64_t j = 0; j < x.cols; ++j) var += (x(i, j) - mean) * (x(i, j) - mean);
    var /= static_cast<double>(x.cols);
    const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
    for (int64_t j = 0; j < x.cols; ++j) out(i, j) = gain(0, j) * (x(i, j) - mean) * inv_std;
  }
  return out;
}

}  // namespace ref

}  // namespace sat
