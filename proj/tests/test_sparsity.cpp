#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "sat/sparsity.hpp"
#include "test_helpers.hpp"

using namespace sat;
using sat_test::random_matrix;

TEST_SUITE_BEGIN("sparsity");

TEST_CASE("metric scores: hand-evaluated cases") {
  // Magnitude of column [3,4] is 5.
  const Matrix w = Matrix::from_rows({{3, 1}, {4, 5}});
  const Matrix z = Matrix::from_rows({{1, 2}, {3, 4}});
  const auto mag = score_columns(ImportanceMetric::kMagnitude, w, z);
  CHECK(mag[0] == doctest::Approx(5.0).epsilon(1e-15));

  // Maxip: Z=[[1,2],[3,4]], v=[1,-1] -> row mean [2,3], score 2-3 = -1.
  const Matrix wv = Matrix::from_rows({{1}, {-1}});
  const auto maxip = score_columns(ImportanceMetric::kMaxip, wv, z);
  CHECK(maxip[0] == doctest::Approx(-1.0).epsilon(1e-15));

  // Wanda: Z=[[1,0],[3,0]], v=[1,5] -> column norms [sqrt(10), 0], score sqrt(10).
  const Matrix zw = Matrix::from_rows({{1, 0}, {3, 0}});
  const Matrix wvw = Matrix::from_rows({{1}, {5}});
  const auto wanda = score_columns(ImportanceMetric::kWanda, wvw, zw);
  CHECK(wanda[0] == doctest::Approx(std::sqrt(10.0)).epsilon(1e-15));

  // Uniform ignores the values entirely.
  const auto uni = score_columns(ImportanceMetric::kUniform, w, z);
  CHECK(uni == std::vector<double>{1.0, 1.0});

  CHECK_THROWS_AS(
      (void)score_columns(ImportanceMetric::kWanda, Matrix(3, 2), Matrix(4, 4)), ConfigError);
}

TEST_CASE("wanda and maxip are linear in the column") {
  Rng rng(5);
  const Matrix z = random_matrix(6, 4, rng);
  Matrix w = random_matrix(4, 3, rng);
  Matrix w2 = w;
  const double alpha = -2.75;
  for (double& v : w2.data) v *= alpha;
  for (ImportanceMetric m : {ImportanceMetric::kWanda, ImportanceMetric::kMaxip}) {
    const auto s1 = score_columns(m, w, z);
    const auto s2 = score_columns(m, w2, z);
    for (size_t j = 0; j < s1.size(); ++j)
      CHECK(s2[j] == doctest::Approx(alpha * s1[j]).epsilon(1e-12));
  }
}

TEST_CASE("head aggregation") {
  // Constant scores give every head the same value.
  const std::vector<double> c(8, 0.7);
  const auto heads = aggregate_head_scores(c, c, c, 4, 2);
  for (double v : heads) CHECK(v == doctest::Approx(0.7).epsilon(1e-15));

  // h=2, d_k=2: sQ=[1,1,0,0], sK=sV=0 -> head scores [1/3, 0].
  const std::vector<double> sq{1, 1, 0, 0}, zero{0, 0, 0, 0};
  const auto hs = aggregate_head_scores(sq, zero, zero, 2, 2);
  CHECK(hs[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(hs[1] == 0.0);

  // Permuting heads permutes head scores identically.
  const std::vector<double> a{1, 2, 3, 4}, b{5, 6, 7, 8}, v{9, 10, 11, 12};
  const std::vector<double> ap{3, 4, 1, 2}, bp{7, 8, 5, 6}, vp{11, 12, 9, 10};
  const auto orig = aggregate_head_scores(a, b, v, 2, 2);
  const auto perm = aggregate_head_scores(ap, bp, vp, 2, 2);
  CHECK(orig[0] == perm[1]);
  CHECK(orig[1] == perm[0]);

  CHECK_THROWS_AS((void)aggregate_head_scores(sq, zero, std::vector<double>{0.0}, 2, 2),
                  ConfigError);
}

TEST_CASE("select_topk") {
  const std::vector<double> s{0.1, 0.9, 0.5};
  CHECK(select_topk(s, 2) == std::vector<int32_t>{1, 2});
  // Ties break towards the lower index.
  const std::vector<double> eq{3.0, 3.0, 3.0};
  CHECK(select_topk(eq, 2) == std::vector<int32_t>{0, 1});
  CHECK_THROWS_AS((void)select_topk(s, 0), ConfigError);
  CHECK_THROWS_AS((void)select_topk(s, 4), ConfigError);
}

TEST_CASE("select_topk matches a full-sort oracle on 1000 scores") {
  Rng rng(41);
  std::vector<double> scores(1000);
  for (double& v : scores) v = rng.normal();
  const auto got = select_topk(scores, 37);

  // Oracle: sort score copies descending, cut at k, recover indices.
  std::vector<std::pair<double, int32_t>> pairs;
  for (size_t i = 0; i < scores.size(); ++i)
    pairs.emplace_back(scores[i], static_cast<int32_t>(i));
  std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  std::vector<int32_t> expect;
  for (int i = 0; i < 37; ++i) expect.push_back(pairs[static_cast<size_t>(i)].second);
  std::sort(expect.begin(), expect.end());
  CHECK(got == expect);
}

TEST_CASE("topk is scale-invariant, both selectors are shift-invariant") {
  Rng rng(43);
  std::vector<double> scores(32);
  for (double& v : scores) v = rng.normal();
  std::vector<double> scaled = scores, shifted = scores;
  for (double& v : scaled) v *= 17.5;
  for (double& v : shifted) v += 123.25;
  CHECK(select_topk(scores, 10) == select_topk(scaled, 10));
  CHECK(select_topk(scores, 10) == select_topk(shifted, 10));
  // Sampling with the same rng stream: an added constant cancels in the keys'
  // ranking, so the draw is identical (softmax shift-invariance).
  Rng r1(99), r2(99);
  CHECK(select_sampling(scores, 10, 0.05, r1) == select_sampling(shifted, 10, 0.05, r2));
}

TEST_CASE("select_sampling basics") {
  const std::vector<double> s{0.5, -0.25, 4.0};
  Rng rng(1);
  CHECK(select_sampling(s, 3, 0.05, rng) == std::vector<int32_t>{0, 1, 2});  // k = length
  CHECK_THROWS_AS((void)select_sampling(s, 0, 0.05, rng), ConfigError);
  CHECK_THROWS_AS((void)select_sampling(s, 2, 0.0, rng), ConfigError);
  CHECK_THROWS_AS((void)select_sampling(s, 2, -1.0, rng), ConfigError);
  // Deterministic given the rng state.
  Rng a(7), b(7);
  CHECK(select_sampling(s, 2, 0.05, a) == select_sampling(s, 2, 0.05, b));
}

TEST_CASE("sampling frequencies: uniform scores, 20k draws") {
  const std::vector<double> scores(8, 1.0);
  Rng rng(2024);
  const int trials = 20000;
  std::vector<int64_t> hits(8, 0);
  for (int t = 0; t < trials; ++t) {
    const auto sel = select_sampling(scores, 4, 0.05, rng);
    std::set<int32_t> uniq(sel.begin(), sel.end());
    REQUIRE(uniq.size() == 4);  // never a duplicate
    for (int32_t i : sel) hits[static_cast<size_t>(i)]++;
  }
  // Marginal selection probability is 1/2; allow 4 binomial sigma.
  const double sigma = std::sqrt(0.25 / trials);
  for (int64_t h : hits) {
    const double freq = static_cast<double>(h) / trials;
    CHECK(std::abs(freq - 0.5) < 4.0 * sigma);
  }
}

TEST_CASE("sampling at vanishing temperature matches topk") {
  Rng score_rng(77);
  std::vector<double> scores(12);
  for (double& v : scores) v = score_rng.normal();
  const auto top = select_topk(scores, 5);
  Rng rng(31337);
  int agree = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t)
    if (select_sampling(scores, 5, 1e-9, rng) == top) ++agree;
  CHECK(agree == trials);
}

TEST_CASE("build_plan from a trace") {
  const ModelConfig cfg{8, 4, 2, 11, 16};
  Rng rng(5);
  TransformerParams params = TransformerParams::init(cfg, rng);

  // A synthetic trace carrying known layer inputs is enough for planning.
  ForwardTrace trace;
  trace.layers.resize(2);
  for (auto& lt : trace.layers) {
    lt.attn_input_normed = random_matrix(6, 8, rng);
    lt.mlp_input_normed = random_matrix(6, 8, rng);
  }

  SUBCASE("r = 0 selects everything for any metric") {
    for (ImportanceMetric m : {ImportanceMetric::kUniform, ImportanceMetric::kMagnitude,
                               ImportanceMetric::kWanda, ImportanceMetric::kMaxip}) {
      Rng r(3);
      const SparsityPlan plan = build_plan(params, trace, m, SelectionStrategy::topk(), 0.0, r);
      CHECK(plan.is_full(cfg));
    }
  }

  SUBCASE("uniform + topk at r=0.5 keeps the lowest-indexed heads") {
    Rng r(3);
    const SparsityPlan plan =
        build_plan(params, trace, ImportanceMetric::kUniform, SelectionStrategy::topk(), 0.5, r);
    for (const auto& lp : plan.layers) {
      CHECK(lp.head_indices == std::vector<int32_t>{0, 1});
      CHECK(static_cast<int64_t>(lp.channel_indices.size()) == 16);
      for (int32_t i = 0; i < 16; ++i) CHECK(lp.channel_indices[static_cast<size_t>(i)] == i);
    }
  }

  SUBCASE("plan sizes follow the floor formulas for every metric and strategy") {
    for (double rate : {0.1, 0.3, 0.5, 0.7}) {
      for (ImportanceMetric m : {ImportanceMetric::kUniform, ImportanceMetric::kWanda}) {
        for (auto strat : {SelectionStrategy::topk(), SelectionStrategy::sampling(0.05)}) {
          Rng r(11);
          const SparsityPlan plan = build_plan(params, trace, m, strat, rate, r);
          for (const auto& lp : plan.layers) {
            CHECK(static_cast<int64_t>(lp.head_indices.size()) ==
                  static_cast<int64_t>(std::floor(4 * (1 - rate))));
            CHECK(static_cast<int64_t>(lp.channel_indices.size()) ==
                  static_cast<int64_t>(std::floor(32 * (1 - rate))));
            CHECK(std::is_sorted(lp.head_indices.begin(), lp.head_indices.end()));
            CHECK(std::is_sorted(lp.channel_indices.begin(), lp.channel_indices.end()));
          }
        }
      }
    }
  }

  SUBCASE("rates that floor to zero are rejected") {
    Rng r(3);
    CHECK_THROWS_AS((void)build_plan(params, trace, ImportanceMetric::kUniform,
                                     SelectionStrategy::topk(), 0.97, r),
                    ConfigError);
  }
}

TEST_CASE("maxip + topk on a hand-built one-layer model") {
  // d=4, h=2, d_k=2. Weight columns are unit vectors so each column score is
  // one coordinate of the input mean; Z has mean row [4, -2, 1, 0].
  const ModelConfig cfg{4, 2, 1, 5, 8};
  TransformerParams params = TransformerParams::zeros(cfg);
  LayerParams& lp = params.layers[0];
  // wq columns pick coordinates 0,1 (head 0) and 2,3 (head 1).
  lp.wq(0, 0) = 1.0;
  lp.wq(1, 1) = 1.0;
  lp.wq(2, 2) = 1.0;
  lp.wq(3, 3) = 1.0;
  // wk, wv: same layout.
  lp.wk = lp.wq;
  lp.wv = lp.wq;

  ForwardTrace trace;
  trace.layers.resize(1);
  trace.layers[0].attn_input_normed = Matrix::from_rows({{3, -1, 1, 0}, {5, -3, 1, 0}});
  trace.layers[0].mlp_input_normed = Matrix::from_rows({{1, 0, 0, 0}, {1, 0, 0, 0}});
  // w_up columns: column j has a single 1 in row 0 scaled by (j % 3); the
  // maxip score of column j is then mean-row . column = (j % 3) * 1.
  for (int64_t j = 0; j < cfg.mlp_dim(); ++j) lp.w_up(0, j) = static_cast<double>(j % 3);

  // Head scores: head0 = mean(4, -2) = 1 over Q,K,V -> 1; head1 = mean(1, 0)
  // = 0.5 -> 0.5. Top-1 must pick head 0.
  Rng rng(1);
  const SparsityPlan plan = build_plan(params, trace, ImportanceMetric::kMaxip,
                                       SelectionStrategy::topk(), 0.5, rng);
  CHECK(plan.layers[0].head_indices == std::vector<int32_t>{0});
  // Channel scores cycle 0,1,2,...: the top 8 of 16 are the five columns
  // scoring 2 plus the three lowest-indexed columns scoring 1.
  CHECK(plan.layers[0].channel_indices == std::vector<int32_t>{1, 2, 4, 5, 7, 8, 11, 14});
}

TEST_SUITE_END();
