#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "flatsat/instances.hpp"
#include "flatsat/randomturan.hpp"
#include "oracle.hpp"

using namespace flatsat;

namespace {

Rational R(long long a, long long b) { return Rational(a, b); }

std::vector<oracle::Vec> vecs(const PointSet& x) {
  std::vector<oracle::Vec> v;
  for (std::size_t i = 0; i < x.size(); ++i) v.emplace_back(x[i].begin(), x[i].end());
  return v;
}

// Largest general-position subset by scanning every subset (|X| <= 18).
std::size_t brute_alpha(const PointSet& x) {
  auto v = vecs(x);
  const std::size_t n = v.size();
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::size_t c = static_cast<std::size_t>(__builtin_popcount(mask));
    if (c <= best) continue;
    std::vector<oracle::Vec> pts;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1u) pts.push_back(v[i]);
    if (oracle::igp(pts, x.dim(), x.field().q())) best = c;
  }
  return best;
}

bool witness_igp(const PointSet& x, const IndexSet& w) {
  auto v = vecs(x);
  std::vector<oracle::Vec> pts;
  for (auto i : w) pts.push_back(v[i]);
  return oracle::igp(pts, x.dim(), x.field().q());
}

}  // namespace

TEST(PRandomSubset, Extremes) {
  EXPECT_EQ(p_random_subset(5, 2, Rational(0), 3).size(), 0u);
  EXPECT_EQ(p_random_subset(5, 2, Rational(1), 3).size(), 25u);
  EXPECT_EQ(p_random_subset(3, 3, Rational(1), 9).size(), 27u);
}

TEST(PRandomSubset, BinomialMean) {
  double sum = 0;
  const int seeds = 1000;
  for (int s = 0; s < seeds; ++s) sum += double(p_random_subset(3, 2, R(1, 2), static_cast<std::uint64_t>(s)).size());
  double mean = sum / seeds;
  double sigma = std::sqrt(9 * 0.25 / seeds);
  EXPECT_NEAR(mean, 4.5, 3 * sigma);
}

TEST(PRandomSubset, DeterministicAndKeyed) {
  Space sp(make_field(7), 2);
  auto a = p_random_subset(sp, R(1, 3), 11, 2, 5);
  auto b = p_random_subset(sp, R(1, 3), 11, 2, 5);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.rank(i), b.rank(i));
  auto c = p_random_subset(sp, R(1, 3), 11, 2, 6);
  bool differ = c.size() != a.size();
  for (std::size_t i = 0; !differ && i < a.size(); ++i) differ = a.rank(i) != c.rank(i);
  EXPECT_TRUE(differ);
}

TEST(PRandomSubset, Budget) {
  Space sp(make_field(5), 3);
  EXPECT_THROW(p_random_subset(sp, R(1, 2), 1, 0, 0, 100), Error);
}

TEST(MomentCurve, QFiveDTwo) {
  auto m = moment_curve(5, 2);
  ASSERT_EQ(m.size(), 5u);
  std::vector<std::vector<Elem>> want{{0, 0}, {1, 1}, {2, 4}, {3, 4}, {4, 1}};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(std::vector<Elem>(m[i].begin(), m[i].end()), want[i]);
}

TEST(MomentCurve, GeneralPositionAgainstRankOracle) {
  for (std::uint32_t q : {5u, 7u, 11u})
    for (int d : {2, 3, 4}) {
      if (d >= static_cast<int>(q)) continue;
      auto m = moment_curve(q, d);
      EXPECT_EQ(m.size(), q);
      EXPECT_TRUE(witness_igp(m, m.all_indices())) << q << "," << d;
      EXPECT_TRUE(is_igp(m, m.all_indices())) << q << "," << d;
    }
}

TEST(MaxGeneralPosition, SmallPlanes) {
  for (std::uint32_t q : {2u, 3u}) {
    auto x = PointSet::full_space(Space(make_field(q), 2));
    auto r = exact_general_position(x);
    EXPECT_EQ(r.value, 4u) << q;
    EXPECT_TRUE(r.optimal);
    EXPECT_EQ(r.value, brute_alpha(x));
    EXPECT_TRUE(witness_igp(x, r.witness));
  }
}

TEST(MaxGeneralPosition, MomentCurveIsWholeSet) {
  auto m = moment_curve(7, 3);
  auto r = exact_general_position(m);
  EXPECT_EQ(r.value, 7u);
}

TEST(MaxGeneralPosition, MatchesExhaustiveOnRandomSets) {
  struct Case {
    std::uint32_t q;
    int d;
    std::size_t n;
  };
  for (Case c : {Case{5, 2, 14}, Case{7, 2, 16}, Case{3, 3, 14}, Case{5, 3, 16}}) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      auto x = random_subset_of_size(c.q, c.d, c.n, seed);
      auto ex = exact_general_position(x);
      auto gr = greedy_general_position(x);
      ASSERT_TRUE(ex.optimal);
      EXPECT_EQ(ex.value, brute_alpha(x)) << c.q << "," << c.d << " seed " << seed;
      EXPECT_LE(gr.value, ex.value);
      EXPECT_TRUE(witness_igp(x, ex.witness));
      EXPECT_TRUE(witness_igp(x, gr.witness));
      // no point extends the exact witness
      for (Index i = 0; i < x.size(); ++i) {
        if (std::binary_search(ex.witness.begin(), ex.witness.end(), i)) continue;
        IndexSet w = ex.witness;
        w.insert(std::lower_bound(w.begin(), w.end(), i), i);
        EXPECT_FALSE(witness_igp(x, w));
      }
    }
  }
}

TEST(MaxGeneralPosition, FullSpaceBoundDq) {
  for (std::uint32_t q : {2u, 3u, 5u}) {
    auto x = PointSet::full_space(Space(make_field(q), 2));
    auto r = exact_general_position(x);
    ASSERT_TRUE(r.optimal);
    EXPECT_LE(r.value, 2u * q);
    EXPECT_GE(r.value, q);
  }
  auto x = PointSet::full_space(Space(make_field(2), 3));
  auto r = exact_general_position(x);
  ASSERT_TRUE(r.optimal);
  EXPECT_LE(r.value, 6u);
}

TEST(MaxGeneralPosition, BudgetAndModes) {
  auto x = PointSet::full_space(Space(make_field(7), 2));
  EXPECT_THROW(exact_general_position(x, 10, false), Error);
  auto partial = exact_general_position(x, 10, true);
  EXPECT_FALSE(partial.optimal);
  EXPECT_EQ(partial.mode, "bnb-partial");
  EXPECT_TRUE(witness_igp(x, partial.witness));
  EXPECT_THROW(max_general_position(x, SolverMode::Both), Error);
  EXPECT_EQ(max_general_position(x, SolverMode::Greedy).mode, "greedy");
  EXPECT_EQ(parse_solver_mode("exact"), SolverMode::Exact);
  EXPECT_EQ(parse_solver_mode("auto"), SolverMode::Auto);
  EXPECT_THROW(parse_solver_mode("fastest"), Error);
}

TEST(CountIgp, Examples) {
  EXPECT_EQ(count_igp_ksets(3, 2, 3), BigInt(72));
  EXPECT_EQ(count_igp_ksets(2, 2, 3), BigInt(4));
  EXPECT_EQ(count_igp_ksets(5, 2, 1), BigInt(25));
  EXPECT_EQ(count_igp_ksets(3, 3, 1), BigInt(27));
  EXPECT_EQ(count_igp_ksets(3, 2, 0), BigInt(1));
  EXPECT_EQ(count_igp_ksets(3, 2, 5), BigInt(0));
}

TEST(CountIgp, AgreesWithOracle) {
  struct Case {
    std::uint32_t q;
    int d, k;
  };
  for (Case c : {Case{5, 2, 3}, Case{5, 2, 4}, Case{3, 3, 4}, Case{3, 3, 5}}) {
    auto x = PointSet::full_space(Space(make_field(c.q), c.d));
    auto v = vecs(x);
    long long n = 0;
    oracle::subsets_of_size(v.size(), static_cast<std::size_t>(c.k), [&](const std::vector<std::size_t>& s) {
      n += oracle::igp(oracle::pick(v, s), c.d, c.q);
    });
    EXPECT_EQ(count_igp_ksets(c.q, c.d, c.k), BigInt(n)) << c.q << "," << c.d << "," << c.k;
  }
}

TEST(CountIgp, Errors) {
  EXPECT_THROW(count_igp_ksets(5, 3, 6, 1000), Error);
  EXPECT_THROW(count_igp_ksets(5, 2, -1), Error);
}

TEST(AutoGrid, Shape) {
  auto g = auto_grid(11, 2, 20);
  ASSERT_EQ(g.size(), 20u);
  EXPECT_EQ(g.front(), Rational(0));
  EXPECT_EQ(g.back(), Rational(1));
  for (std::size_t t = 1; t < g.size(); ++t) EXPECT_LT(g[t - 1], g[t]);
  EXPECT_NE(std::find(g.begin(), g.end(), lower_boundary(11, 2)), g.end());
  EXPECT_NE(std::find(g.begin(), g.end(), upper_boundary(11, 2)), g.end());
  EXPECT_EQ(lower_boundary(11, 2), R(std::llround(std::pow(11.0, -1.5) * 1e6), 1000000));
  EXPECT_EQ(upper_boundary(11, 2), R(std::llround(std::pow(11.0, -0.5) * 1e6), 1000000));
}

TEST(AlphaSweep, ZeroAndOne) {
  SweepConfig cfg;
  cfg.q = 3;
  cfg.d = 2;
  cfg.grid = {Rational(0), Rational(1)};
  cfg.trials = 3;
  cfg.seed = 4;
  cfg.mode = SolverMode::Exact;
  auto rows = alpha_sweep(cfg);
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) {
    EXPECT_LE(r.alpha, r.sample_size);
    if (r.p == 0) { EXPECT_EQ(r.alpha, 0u); }
    if (r.p == 1) { EXPECT_EQ(r.alpha, 4u); }
    EXPECT_EQ(r.mode, "exact");
    EXPECT_EQ(r.millis, 0);
  }
  auto sum = sweep_summary(rows);
  ASSERT_EQ(sum.size(), 2u);
  EXPECT_EQ(sum[0].median_alpha, 0);
  EXPECT_EQ(sum[1].median_alpha, 4);
  EXPECT_EQ(sum[1].exact_rows, 3u);
}

TEST(AlphaSweep, BothModesAndSummary) {
  SweepConfig cfg;
  cfg.q = 5;
  cfg.d = 2;
  cfg.grid = {R(1, 5), R(1, 2)};
  cfg.trials = 4;
  cfg.seed = 1;
  cfg.mode = SolverMode::Both;
  auto rows = alpha_sweep(cfg);
  ASSERT_EQ(rows.size(), 16u);
  for (std::size_t t = 0; t < rows.size(); t += 2) {
    EXPECT_EQ(rows[t].mode, "exact");
    EXPECT_EQ(rows[t + 1].mode, "greedy");
    EXPECT_LE(rows[t + 1].alpha, rows[t].alpha);
    EXPECT_EQ(rows[t].sample_size, rows[t + 1].sample_size);
  }
  auto sum = sweep_summary(rows);
  ASSERT_EQ(sum.size(), 2u);
  EXPECT_EQ(sum[0].rows, 4u);
  EXPECT_EQ(median({3, 1, 2}), 2);
  EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
}

TEST(AlphaSweep, DeterministicAcrossThreads) {
  SweepConfig cfg;
  cfg.q = 7;
  cfg.d = 2;
  cfg.grid = auto_grid(7, 2, 8);
  cfg.trials = 5;
  cfg.seed = 7;
  setenv(kThreadsEnv, "1", 1);
  auto a = alpha_sweep(cfg);
  setenv(kThreadsEnv, "4", 1);
  auto b = alpha_sweep(cfg);
  unsetenv(kThreadsEnv);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(a[t].sample_size, b[t].sample_size);
    EXPECT_EQ(a[t].alpha, b[t].alpha);
    EXPECT_EQ(a[t].mode, b[t].mode);
  }
}

TEST(AlphaSweep, ConfigErrors) {
  SweepConfig cfg;
  cfg.q = 5;
  cfg.d = 2;
  EXPECT_THROW(alpha_sweep(cfg), Error);
  cfg.grid = {R(1, 2), R(1, 3)};
  EXPECT_THROW(alpha_sweep(cfg), Error);
  cfg.grid = {R(3, 2)};
  EXPECT_THROW(alpha_sweep(cfg), Error);
  cfg.grid = {R(1, 2)};
  cfg.trials = 0;
  EXPECT_THROW(alpha_sweep(cfg), Error);
}
