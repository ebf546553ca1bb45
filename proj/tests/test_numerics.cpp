#include <doctest.h>

#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sat/numerics.hpp"
#include "test_helpers.hpp"

using namespace sat;
using sat_test::bit_equal;
using sat_test::check_gradient;
using sat_test::max_abs_diff;
using sat_test::random_matrix;

TEST_SUITE_BEGIN("numerics");

TEST_CASE("matmul identity and hand cases") {
  const Matrix id = Matrix::from_rows({{1, 0}, {0, 1}});
  const Matrix b = Matrix::from_rows({{5, 6}, {7, 8}});
  CHECK(bit_equal(matmul(id, b), b));

  const Matrix a = Matrix::from_rows({{1, 2}});
  const Matrix v = Matrix::from_rows({{3}, {4}});
  const Matrix p = matmul(a, v);
  CHECK(p.rows == 1);
  CHECK(p.cols == 1);
  CHECK(p(0, 0) == 11.0);
}

TEST_CASE("matmul matches the triple-loop oracle") {
  Rng rng(7);
  const Matrix a = random_matrix(4, 3, rng);
  const Matrix b = random_matrix(3, 2, rng);
  CHECK(max_abs_diff(matmul(a, b), ref::matmul(a, b)) <= 1e-15);

  const Matrix c = random_matrix(9, 17, rng);
  const Matrix d = random_matrix(17, 5, rng);
  CHECK(max_abs_diff(matmul(c, d), ref::matmul(c, d)) <= 1e-12);
}

TEST_CASE("matmul transposed variants match references") {
  Rng rng(8);
  const Matrix a = random_matrix(6, 4, rng);
  const Matrix b = random_matrix(9, 4, rng);
  CHECK(max_abs_diff(matmul_nt(a, b), ref::matmul_nt(a, b)) <= 1e-13);
  const Matrix c = random_matrix(6, 9, rng);
  CHECK(max_abs_diff(matmul_tn(a, c), ref::matmul_tn(a, c)) <= 1e-13);
  // nt/tn agree with explicit transposes (to rounding; the kernels may
  // contract multiply-adds differently)
  CHECK(max_abs_diff(matmul_nt(a, b), matmul(a, transpose(b))) <= 1e-13);
  CHECK(max_abs_diff(matmul_tn(a, c), matmul(transpose(a), c)) <= 1e-13);
}

TEST_CASE("matmul rejects mismatched shapes") {
  const Matrix a(2, 3), b(4, 2);
  CHECK_THROWS_AS((void)matmul(a, b), ConfigError);
  CHECK_THROWS_AS((void)matmul_nt(a, Matrix(4, 2)), ConfigError);
  CHECK_THROWS_AS((void)matmul_tn(a, Matrix(4, 3)), ConfigError);
}

TEST_CASE("matmul is bit-deterministic across worker counts") {
  Rng rng(11);
  // Big enough to trip the parallel branch.
  const Matrix a = random_matrix(80, 96, rng);
  const Matrix b = random_matrix(96, 64, rng);
#ifdef _OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const Matrix c1 = matmul(a, b);
  omp_set_num_threads(3);
  const Matrix c3 = matmul(a, b);
  omp_set_num_threads(saved);
  CHECK(bit_equal(c1, c3));
#else
  CHECK(bit_equal(matmul(a, b), matmul(a, b)));
#endif
  // Repeated calls are bit-identical either way.
  CHECK(bit_equal(matmul(a, b), matmul(a, b)));
}

TEST_CASE("matmul records FLOPs when a counter is attached") {
  Rng rng(3);
  const Matrix a = random_matrix(4, 3, rng);
  const Matrix b = random_matrix(3, 5, rng);
  FlopsCounter fc;
  (void)matmul(a, b, &fc, FlopCat::kMlp);
  CHECK(fc.of(FlopCat::kMlp) == 2ull * 4 * 3 * 5);
  CHECK(fc.total() == 2ull * 4 * 3 * 5);
}

TEST_CASE("softmax_rows examples") {
  const Matrix z = softmax_rows(Matrix::from_rows({{0, 0}}));
  CHECK(z(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(z(0, 1) == doctest::Approx(0.5).epsilon(1e-15));

  // Stabilization must not overflow.
  const Matrix big = softmax_rows(Matrix::from_rows({{1000, 1000}}));
  CHECK(big(0, 0) == doctest::Approx(0.5).epsilon(1e-15));

  // Frozen extended-precision values for softmax([1,2,3]).
  const Matrix s = softmax_rows(Matrix::from_rows({{1, 2, 3}}));
  CHECK(std::abs(s(0, 0) - 0.090030573170380458) < 1e-15);
  CHECK(std::abs(s(0, 1) - 0.24472847105479765) < 1e-15);
  CHECK(std::abs(s(0, 2) - 0.66524095577482189) < 1e-15);
}

TEST_CASE("softmax_rows rows sum to one") {
  Rng rng(13);
  const Matrix a = random_matrix(20, 11, rng, 4.0);
  const Matrix s = softmax_rows(a, 0.37);
  for (int64_t i = 0; i < s.rows; ++i) {
    double sum = 0.0;
    for (int64_t j = 0; j < s.cols; ++j) sum += s(i, j);
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
  CHECK(max_abs_diff(s, ref::softmax_rows(a, 0.37)) <= 1e-15);
}

TEST_CASE("gelu values") {
  Matrix x = Matrix::from_rows({{0.0, 1.0, 0.5, -1.0, 2.0, -0.25, 30.0}});
  const Matrix y = gelu(x);
  CHECK(y(0, 0) == 0.0);
  // Frozen values from the tanh-approximation formula in extended precision.
  CHECK(std::abs(y(0, 1) - 0.8411919906082767) < 1e-15);
  CHECK(std::abs(y(0, 2) - 0.34571400982514392) < 1e-15);
  CHECK(std::abs(y(0, 3) - (-0.15880800939172330)) < 1e-15);
  CHECK(std::abs(y(0, 4) - 1.9545976940877750) < 1e-14);
  CHECK(std::abs(y(0, 5) - (-0.10032464929831500)) < 1e-15);
  // Large positive input approaches the identity.
  CHECK(y(0, 6) == doctest::Approx(30.0).epsilon(1e-12));
}

TEST_CASE("gelu backward matches finite differences") {
  Rng rng(17);
  Matrix x = random_matrix(5, 7, rng);
  const Matrix dy = random_matrix(5, 7, rng);
  const Matrix dx = gelu_backward(x, dy);
  check_gradient(x, dx, [&] {
    const Matrix y = gelu(x);
    double s = 0.0;
    for (int64_t i = 0; i < y.size(); ++i)
      s += y.data[static_cast<size_t>(i)] * dy.data[static_cast<size_t>(i)];
    return s;
  });
}

TEST_CASE("matmul backward products match finite differences") {
  Rng rng(19);
  Matrix a = random_matrix(5, 7, rng);
  Matrix b = random_matrix(7, 4, rng);
  const Matrix r = random_matrix(5, 4, rng);
  auto loss = [&] {
    const Matrix c = matmul(a, b);
    double s = 0.0;
    for (int64_t i = 0; i < c.size(); ++i)
      s += c.data[static_cast<size_t>(i)] * r.data[static_cast<size_t>(i)];
    return s;
  };
  check_gradient(a, matmul_nt(r, b), loss);
  check_gradient(b, matmul_tn(a, r), loss);
}

TEST_CASE("softmax backward matches finite differences") {
  Rng rng(23);
  Matrix x = random_matrix(5, 7, rng);
  const Matrix dy = random_matrix(5, 7, rng);
  const Matrix y = softmax_rows(x);
  const Matrix dx = softmax_rows_backward(y, dy);
  check_gradient(x, dx, [&] {
    const Matrix s = softmax_rows(x);
    double acc = 0.0;
    for (int64_t i = 0; i < s.size(); ++i)
      acc += s.data[static_cast<size_t>(i)] * dy.data[static_cast<size_t>(i)];
    return acc;
  });
}

TEST_CASE("layer_norm backward matches finite differences") {
  Rng rng(29);
  Matrix x = random_matrix(5, 7, rng);
  Matrix gain = random_matrix(1, 7, rng);
  const Matrix dy = random_matrix(5, 7, rng);
  const LayerNormGrads g = layer_norm_backward(x, gain, dy);
  auto loss = [&] {
    const Matrix y = layer_norm(x, gain);
    double s = 0.0;
    for (int64_t i = 0; i < y.size(); ++i)
      s += y.data[static_cast<size_t>(i)] * dy.data[static_cast<size_t>(i)];
    return s;
  };
  check_gradient(x, g.dx, loss);
  check_gradient(gain, g.dgain, loss);
  CHECK(max_abs_diff(layer_norm(x, gain), ref::layer_norm(x, gain)) <= 1e-15);
}

TEST_CASE("cross_entropy trivial and frozen cases") {
  // Uniform logits over V classes: loss = ln V.
  Matrix uniform(3, 5);
  const std::vector<int32_t> targets{0, 3, 4};
  const CrossEntropyResult r = cross_entropy(uniform, targets);
  CHECK(std::abs(r.loss - 1.6094379124341003) < 1e-15);

  // One-hot-correct huge logit drives the loss to zero.
  Matrix hot(1, 4);
  hot(0, 2) = 1000.0;
  const CrossEntropyResult r2 = cross_entropy(hot, std::vector<int32_t>{2});
  CHECK(r2.loss < 1e-12);

  Matrix bad(1, 4);
  CHECK_THROWS_AS((void)cross_entropy(bad, std::vector<int32_t>{4}), DataError);
  CHECK_THROWS_AS((void)cross_entropy(bad, std::vector<int32_t>{-1}), DataError);
}

TEST_CASE("cross_entropy matches an extended-precision oracle") {
  Rng rng(31);
  Matrix logits = random_matrix(3, 5, rng, 2.0);
  const std::vector<int32_t> targets{2, 0, 4};
  const CrossEntropyResult r = cross_entropy(logits, targets);

  long double acc = 0.0L;
  for (int64_t i = 0; i < 3; ++i) {
    long double mx = logits(i, 0);
    for (int64_t j = 1; j < 5; ++j) mx = std::max<long double>(mx, logits(i, j));
    long double sum = 0.0L;
    for (int64_t j = 0; j < 5; ++j) sum += expl(static_cast<long double>(logits(i, j)) - mx);
    acc += mx + logl(sum) - static_cast<long double>(logits(i, targets[static_cast<size_t>(i)]));
  }
  const double expected = static_cast<double>(acc / 3.0L);
  CHECK(std::abs(r.loss - expected) < 1e-12);

  // Gradient rows sum to zero and match finite differences.
  for (int64_t i = 0; i < 3; ++i) {
    double s = 0.0;
    for (int64_t j = 0; j < 5; ++j) s += r.dlogits(i, j);
    CHECK(std::abs(s) < 1e-12);
  }
  check_gradient(logits, r.dlogits, [&] { return cross_entropy(logits, targets).loss; });
}

TEST_CASE("reductions") {
  const Matrix z = Matrix::from_rows({{1, 2}, {3, 4}});
  const auto mean = row_mean(z);
  CHECK(mean[0] == 2.0);
  CHECK(mean[1] == 3.0);
  const auto norms = column_l2_norms(Matrix::from_rows({{1, 0}, {3, 0}}));
  CHECK(norms[0] == doctest::Approx(std::sqrt(10.0)).epsilon(1e-15));
  CHECK(norms[1] == 0.0);
}

TEST_CASE("gather then scatter_add reproduces the sliced matrix") {
  Rng rng(37);
  const Matrix w = random_matrix(6, 9, rng);
  const std::vector<int32_t> cols{1, 4, 7};

  const Matrix gathered = gather_columns(w, cols);
  Matrix back(6, 9);
  scatter_add_columns(back, cols, gathered);
  for (int64_t i = 0; i < w.rows; ++i)
    for (int64_t j = 0; j < w.cols; ++j) {
      const bool selected = std::find(cols.begin(), cols.end(), j) != cols.end();
      CHECK(back(i, j) == (selected ? w(i, j) : 0.0));
    }

  const std::vector<int32_t> rows{0, 2, 5};
  const Matrix gr = gather_rows(w, rows);
  Matrix back_r(6, 9);
  scatter_add_rows(back_r, rows, gr);
  for (int64_t i = 0; i < w.rows; ++i)
    for (int64_t j = 0; j < w.cols; ++j) {
      const bool selected = std::find(rows.begin(), rows.end(), i) != rows.end();
      CHECK(back_r(i, j) == (selected ? w(i, j) : 0.0));
    }

  CHECK_THROWS_AS((void)gather_columns(w, std::vector<int32_t>{9}), ConfigError);
  CHECK_THROWS_AS((void)gather_rows(w, std::vector<int32_t>{-1}), ConfigError);
}

TEST_SUITE_END();
