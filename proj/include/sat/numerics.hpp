#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sat/flops.hpp"
#include "sat/matrix.hpp"

// Dense kernels with explicit forward/backward. Parallel loops partition
// output elements only, so the per-element accumulation order is fixed and
// results are bit-identical for any worker count. sat::ref holds the serial
// reference implementations the tests and the benchmark compare against.

namespace sat {

// ---- matrix products -------------------------------------------------

/// out = a * b. Counts 2*m*k*n into `cat` when a counter is attached.
void matmul_into(const Matrix& a, const Matrix& b, Matrix& out,
                 FlopsCounter* fc = nullptr, FlopCat cat = FlopCat::kOther);
Matrix matmul(const Matrix& a, const Matrix& b, FlopsCounter* fc = nullptr,
              FlopCat cat = FlopCat::kOther);

/// out = a * b^T.
void matmul_nt_into(const Matrix& a, const Matrix& b, Matrix& out,
                    FlopsCounter* fc = nullptr, FlopCat cat = FlopCat::kOther);
Matrix matmul_nt(const Matrix& a, const Matrix& b, FlopsCounter* fc = nullptr,
                 FlopCat cat = FlopCat::kOther);

/// out = a^T * b.
void matmul_tn_into(const Matrix& a, const Matrix& b, Matrix& out,
                    FlopsCounter* fc = nullptr, FlopCat cat = FlopCat::kOther);
Matrix matmul_tn(const Matrix& a, const Matrix& b, FlopsCounter* fc = nullptr,
                 FlopCat cat = FlopCat::kOther);

Matrix transpose(const Matrix& a);

// ---- row-wise softmax -------------------------------------------------

/// Row-wise softmax of (scale * a), stabilized by row-max subtraction.
/// Every output row sums to 1 within 1e-12.
Matrix softmax_rows(const Matrix& a, double scale = 1.0);

/// Gradient through softmax: given y = softmax_rows(s) and dL/dy, returns
/// dL/ds (before any scale factor).
Matrix softmax_rows_backward(const Matrix& y, const Matrix& dy);

// ---- elementwise -----------------------------------------------------

/// Tanh-approximation GELU, elementwise.
Matrix gelu(const Matrix& x);
/// dL/dx given the pre-activation x and dL/dy.
Matrix gelu_backward(const Matrix& x, const Matrix& dy);
/// Forward that also emits tanh(u); the cached backward then skips the
/// second tanh evaluation and produces bit-identical gradients.
Matrix gelu_with_cache(const Matrix& x, Matrix& tanh_cache);
Matrix gelu_backward_cached(const Matrix& x, const Matrix& tanh_cache, const Matrix& dy);

Matrix add(const Matrix& a, const Matrix& b);
void add_inplace(Matrix& a, const Matrix& b);
Matrix mul(const Matrix& a, const Matrix& b);

// ---- normalization ----------------------------------------------------

inline constexpr double kLayerNormEps = 1e-5;

/// Per-row normalization with learned gain (1 x cols), no bias.
Matrix layer_norm(const Matrix& x, const Matrix& gain);

struct LayerNormGrads {
  Matrix dx;
  Matrix dgain;  // 1 x cols
};
LayerNormGrads layer_norm_backward(const Matrix& x, const Matrix& gain, const Matrix& dy);

// ---- loss --------------------------------------------------------------

struct CrossEntropyResult {
  double loss = 0.0;
  Matrix dlogits;  // gradient of the mean loss; every row sums to 0
};

/// Mean negative log-softmax of the target entry of each row.
CrossEntropyResult cross_entropy(const Matrix& logits, std::span<const int32_t> targets);

// ---- reductions --------------------------------------------------------

/// Average of the rows: vector of length cols.
std::vector<double> row_mean(const Matrix& a);
/// L2 norm of each column: vector of length cols.
std::vector<double> column_l2_norms(const Matrix& a);

// ---- gather / scatter ---------------------------------------------------

/// Copy of the named columns, in index order. Indices must be in range.
Matrix gather_columns(const Matrix& a, std::span<const int32_t> idx);
Matrix gather_rows(const Matrix& a, std::span<const int32_t> idx);
/// Inverse of the gathers for gradient routing: dst[:, idx[j]] += src[:, j].
void scatter_add_columns(Matrix& dst, std::span<const int32_t> idx, const Matrix& src);
void scatter_add_rows(Matrix& dst, std::span<const int32_t> idx, const Matrix& src);

// ---- serial reference ----------------------------------------------------

namespace ref {

/// Naive triple-loop product, serial. Oracle for the parallel kernel.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix softmax_rows(const Matrix& a, double scale = 1.0);
Matrix gelu(const Matrix& x);
Matrix layer_norm(const Matrix& x, const Matrix& gain);

}  // namespace ref

}  // namespace sat
