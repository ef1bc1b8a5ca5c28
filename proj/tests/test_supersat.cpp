#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "flatsat/instances.hpp"
#include "flatsat/randomturan.hpp"
#include "flatsat/supersat.hpp"
#include "oracle.hpp"

using namespace flatsat;

namespace {

Rational R(long long a, long long b) { return Rational(a, b); }

std::vector<IndexSet> brute_coplanar(const PointSet& x) {
  std::vector<oracle::Vec> v;
  for (std::size_t i = 0; i < x.size(); ++i) v.emplace_back(x[i].begin(), x[i].end());
  std::vector<IndexSet> out;
  oracle::subsets_of_size(x.size(), static_cast<std::size_t>(x.dim()) + 1, [&](const std::vector<std::size_t>& s) {
    if (oracle::coplanar(oracle::pick(v, s), x.field().q())) out.emplace_back(s.begin(), s.end());
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t brute_codegree(const CoplanarFamily& s, int j) {
  std::uint64_t best = 0;
  for_each_combination(s.ground_size, static_cast<std::size_t>(j), [&](std::span<const std::size_t> c) {
    std::uint64_t cnt = 0;
    for (const auto& m : s.members)
      cnt += std::all_of(c.begin(), c.end(), [&](std::size_t v) { return std::binary_search(m.begin(), m.end(), static_cast<Index>(v)); });
    best = std::max(best, cnt);
    return true;
  });
  return best;
}

PointSet parallel_lines_f11() {
  Space sp(make_field(11), 2);
  std::vector<Point> v;
  for (Elem y = 0; y < 8; ++y)
    for (Elem t = 0; t < 11; ++t) v.push_back({t, y});
  return PointSet::from_points(sp, v);
}

EpsilonParams with_hierarchy(Rational eps, std::vector<Rational> h, int d) {
  EpsilonParams p;
  p.eps = eps;
  p.hierarchy = Hierarchy::unflatten(h, d);
  return p;
}

// Lines-union instance over F_7^3 whose planted lines are full, with its good 3-sets.
struct LowInstance {
  PointSet x;
  std::vector<GoodSet> goods;
};

const LowInstance& low_instance() {
  static const LowInstance inst = [] {
    LowInstance li{lines_union_instance({7, 3, 103, 2, 2, 7, 7, 28, 1}), {}};
    BalanceCache cache(li.x, R(1, 2));
    for_each_combination(li.x.size(), 3, [&](std::span<const std::size_t> c) {
      IndexSet J(c.begin(), c.end());
      if (!affinely_independent(li.x, J)) return true;
      if (auto g = is_good_set(li.x, J, 1, cache)) li.goods.push_back(*g);
      return true;
    });
    return li;
  }();
  return inst;
}

// Good sets whose transversal lines hold 7 points, so every substitution graph exists.
std::vector<GoodSet> full_line_goods(const LowInstance& li, std::size_t limit) {
  std::vector<GoodSet> out;
  for (const auto& g : li.goods) {
    bool full = true;
    for_each_transversal(g.partition, [&](std::span<const Index> I) {
      full &= count_in_flat(li.x, span(li.x, IndexSet(I.begin(), I.end()))) >= 7;
      return full;
    });
    if (full) out.push_back(g);
    if (out.size() >= limit) break;
  }
  return out;
}

}  // namespace

TEST(AllCoplanar, SmallSpaces) {
  EXPECT_TRUE(all_coplanar_dsets(PointSet::full_space(Space(make_field(2), 2))).sets.empty());
  auto f3 = all_coplanar_dsets(PointSet::full_space(Space(make_field(3), 2)));
  EXPECT_EQ(f3.sets.size(), 12u);
  EXPECT_TRUE(f3.exact);
  PointSet f23 = PointSet::full_space(Space(make_field(2), 3));
  EXPECT_EQ(all_coplanar_dsets(f23).sets, brute_coplanar(f23));
  EXPECT_EQ(brute_coplanar(f23).size(), 14u);  // 14 planes of AG(3,2), one 4-set each
}

TEST(AllCoplanar, MatchesBruteForceOnRandomSets) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    PointSet x = random_subset_of_size(5, 3, 18, seed);
    EXPECT_EQ(all_coplanar_dsets(x).sets, brute_coplanar(x)) << seed;
    PointSet y = random_subset_of_size(7, 2, 20, seed);
    EXPECT_EQ(all_coplanar_dsets(y).sets, brute_coplanar(y)) << seed;
  }
}

TEST(AllCoplanar, SamplesOverBudget) {
  PointSet x = PointSet::full_space(Space(make_field(5), 2));
  Budget b;
  b.enumeration = 100;
  auto s = all_coplanar_dsets(x, b, 4);
  EXPECT_FALSE(s.exact);
  auto exact = brute_coplanar(x);
  for (const auto& m : s.sets) EXPECT_TRUE(std::binary_search(exact.begin(), exact.end(), m));
  EXPECT_GT(s.estimated_total, 0.0);
}

TEST(ConstructStructure, BernoulliRetention) {
  PointSet x = PointSet::full_space(Space(make_field(5), 2));
  CoplanarSetList empty;
  EXPECT_TRUE(construct_structure(x, empty, 1).members.empty());

  auto all = all_coplanar_dsets(x);
  CoplanarSetList c;
  c.sets.assign(all.sets.begin(), all.sets.begin() + 100);
  double sum = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) sum += static_cast<double>(construct_structure(x, c, seed).members.size());
  double mean = sum / 200, sigma = std::sqrt(100 * 0.2 * 0.8 / 200);
  EXPECT_NEAR(mean, 20.0, 3 * sigma);

  auto a = construct_structure(x, c, 77), b = construct_structure(x, c, 77);
  EXPECT_EQ(a.members, b.members);
  for (const auto& m : a.members) EXPECT_TRUE(std::binary_search(c.sets.begin(), c.sets.end(), m));
  ConstructStats st;
  construct_structure(x, c, 1, &st);
  EXPECT_DOUBLE_EQ(st.expected_size, 20.0);
}

TEST(ConstructHigh, ParallelLines) {
  PointSet x = parallel_lines_f11();
  auto params = with_hierarchy(R(19, 20), {R(34, 100), R(36, 100), R(40, 100), R(45, 100), R(50, 100)}, 2);
  auto o = classify(x, params);
  ASSERT_EQ(o.tag, CaseTag::BalancedHigh);
  ConstructStats st;
  auto fam = construct_high(x, o.i, o.j, params.eps, o.balanced_sets, 5, Budget{}, &st);
  ASSERT_FALSE(fam.members.empty());
  for (const auto& m : fam.members) {
    EXPECT_TRUE(is_coplanar_kset(x, m));
    EXPECT_TRUE(is_critical_coplanar(x, m));  // d = 2: the member is I + u itself
  }
  // exact expectation: a triple arises once per pair of it in the family, each
  // with p = eps n / (q c) for its line of c points
  std::map<IndexSet, std::pair<int, double>> mult;
  std::uint64_t candidates = 0;
  for (const auto& I : o.balanced_sets) {
    auto line = members_in_flat(x, span(x, I));
    double p = to_double(params.eps * Rational(88) / Rational(BigInt(11 * line.size())));
    for (auto u : line) {
      if (u == I[0] || u == I[1]) continue;
      IndexSet t{I[0], I[1], u};
      std::sort(t.begin(), t.end());
      mult[t] = {mult[t].first + 1, p};
      ++candidates;
    }
  }
  double e = 0;
  for (auto& [t, kp] : mult) e += 1 - std::pow(1 - kp.second, kp.first);
  EXPECT_NEAR(st.expected_size, e, 1e-6 * e);
  EXPECT_EQ(st.candidates, candidates);
  EXPECT_EQ(candidates, 8u * 55 * 9 + 121u * 28 * 6);  // rows of 11, other lines of 8

  EXPECT_TRUE(construct_high(x, 1, 1, params.eps, {}, 5).members.empty());
  EXPECT_THROW(construct_high(x, 1, 2, params.eps, o.balanced_sets, 5), Error);
}

TEST(ConstructHigh, ProbabilityOverflow) {
  Space sp(make_field(11), 2);
  PointSet x = random_subset_of_size(11, 2, 60, 2);
  IndexSet I{0, 1};
  ASSERT_LE(count_in_flat(x, span(x, I)), 4u);
  try {
    construct_high(x, 1, 1, R(9, 10), {I}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ProbabilityOverflow);
  }
}

TEST(SubstitutionPlan, FlatsAndPool) {
  const auto& li = low_instance();
  const PointSet& x = li.x;
  auto goods = full_line_goods(li, 40);
  ASSERT_FALSE(goods.empty());
  std::size_t checked = 0;
  for (const auto& g : goods) {
    // u on the line through two points a, c of J; I = {a, b} shares only a with U
    for (const auto& [a, b, c] : {std::array<Index, 3>{g.J[0], g.J[1], g.J[2]}, std::array<Index, 3>{g.J[1], g.J[2], g.J[0]}}) {
      IndexSet U{a, c}, I{a, b};
      for (auto u : members_in_flat(x, span(x, U))) {
        if (u == a || u == c) continue;
        auto plan = substitution_plan(x, g.J, I, U, u, a);
        EXPECT_LE(plan.flats.size(), 5u);
        AffineFlat fi = span(x, I);
        for (const auto& f : plan.flats) {
          EXPECT_LE(f.dim(), 0);
          EXPECT_TRUE(flat_subset(x.space(), f, fi));
        }
        for (auto v : plan.pool) {
          IndexSet J2 = detail::replace(g.J, a, v);
          auto supp = support(x, x[u], J2);
          std::sort(supp.begin(), supp.end());
          IndexSet want{b, c, v};
          std::sort(want.begin(), want.end());
          EXPECT_EQ(supp, want);
          EXPECT_EQ(span(x, J2), span(x, g.J));
          ++checked;
        }
      }
    }
  }
  EXPECT_GT(checked, 0u);
  const auto& g = goods.front();
  try {
    substitution_plan(x, g.J, IndexSet{g.J[0], g.J[1]}, g.J, g.J[0], g.J[0]);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PreconditionViolated);
  }
}

TEST(SupportEnlargingMap, OutputsSatisfyA1A2) {
  const auto& li = low_instance();
  const PointSet& x = li.x;
  auto goods = full_line_goods(li, 60);
  auto gamma = build_gamma_map(x, goods, R(1, 2));
  EXPECT_FALSE(gamma.graphs.empty());
  std::map<int, std::size_t> cases;
  for (const auto& g : goods)
    for (auto u : low_pool(x, g)) {
      MapResult r;
      try {
        r = support_enlarging_map(x, u, g, gamma);
      } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SubstitutionStuck);
        continue;
      }
      auto c = check_map_output(x, u, g, r);
      EXPECT_TRUE(c.a1 && c.a2);
      EXPECT_LE(r.rounds, g.j + 1);
      if (support(x, x[u], g.J).size() == g.J.size()) { EXPECT_EQ(r.g, g.J); }
      ++cases[r.path_case];
    }
  EXPECT_GT(cases[0], 0u);
  EXPECT_GT(cases[2], 0u);
}

TEST(ConstructLow, SparseBalancedLowInstance) {
  PointSet x = random_subset_of_size(7, 3, 40, 1);
  auto params = with_hierarchy(R(11, 20), {R(43, 100), R(44, 100), R(45, 100), R(46, 100), R(47, 100), R(48, 100), R(49, 100)}, 3);
  auto r = construct(x, params, 3);
  ASSERT_EQ(r.outcome.tag, CaseTag::BalancedLow);
  ASSERT_FALSE(r.family.members.empty());
  for (const auto& m : r.family.members) {
    EXPECT_TRUE(is_coplanar_kset(x, m));
    EXPECT_TRUE(is_critical_coplanar(x, m));  // j + 2 = d + 1: the member is g_u(J) + u
  }
  EXPECT_TRUE(r.stats.expectation_exact);
  EXPECT_GT(r.stats.expected_size, 0.0);
  EXPECT_TRUE(construct_low(x, 1, 2, params.eps, {}, 1).members.empty());
  EXPECT_THROW(construct_low(x, 2, 2, params.eps, r.outcome.good_sets, 1), Error);
}

TEST(ConstructLow, FullLineInstanceExercisesPathWalk) {
  const auto& li = low_instance();
  auto goods = full_line_goods(li, 200);
  ConstructStats st;
  auto fam = construct_low(li.x, 1, 2, R(1, 2), goods, 9, Budget{}, &st);
  for (const auto& m : fam.members) ASSERT_TRUE(is_coplanar_kset(li.x, m));
  EXPECT_GT(st.map_cases["path_walk"], 0u);
  EXPECT_GE(st.max_preimage, 1u);
  EXPECT_EQ(st.aux_graph_violations, 0u);
}

TEST(Construct, Dispatch) {
  PointSet f3 = PointSet::full_space(Space(make_field(3), 2));
  auto r = construct(f3, EpsilonParams{}, 1);
  EXPECT_EQ(r.outcome.tag, CaseTag::Structure);
  auto all = brute_coplanar(f3);
  for (const auto& m : r.family.members) EXPECT_TRUE(std::binary_search(all.begin(), all.end(), m));
  EXPECT_EQ(construct(f3, EpsilonParams{}, 1).family.members, r.family.members);

  auto mc = construct(moment_curve(7, 3), EpsilonParams{}, 1);
  EXPECT_EQ(mc.outcome.tag, CaseTag::NoCaseFound);
  EXPECT_TRUE(mc.family.members.empty());
  EXPECT_FALSE(mc.stats.log.empty());
}

TEST(Codegree, Examples) {
  CoplanarFamily all{7, 2, 0, {}};
  for_each_combination(7, 3, [&](std::span<const std::size_t> c) {
    all.members.emplace_back(c.begin(), c.end());
    return true;
  });
  for (int j = 1; j <= 3; ++j) EXPECT_EQ(BigInt(codegree(all, j)), binomial(7 - j, 3 - j));
  CoplanarFamily one{7, 2, 0, {{1, 3, 5}}};
  for (int j = 1; j <= 3; ++j) EXPECT_EQ(codegree(one, j), 1u);
  EXPECT_THROW(codegree(one, 0), Error);
  EXPECT_THROW(codegree(one, 4), Error);
}

TEST(Codegree, MatchesBruteForce) {
  PointSet x = random_subset_of_size(5, 3, 20, 8);
  auto c = all_coplanar_dsets(x);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto fam = construct_structure(x, c, seed);
    for (int j = 1; j <= 4; ++j) EXPECT_EQ(codegree(fam, j), brute_codegree(fam, j)) << j;
  }
}

TEST(VerifyBounds, Constants) {
  CoplanarFamily empty{10, 2, 0, {}};
  auto b = verify_bounds(empty, 5, 2);
  EXPECT_EQ(b.c1, 0.0);
  for (int j = 1; j <= 3; ++j) EXPECT_EQ(b.c2[j], 0.0);
  EXPECT_FALSE(b.c1_pass);

  PointSet f3 = PointSet::full_space(Space(make_field(3), 2));
  auto r = construct(f3, EpsilonParams{}, 1);
  auto v1 = verify_bounds(r.family, 3, 2), v2 = verify_bounds(construct(f3, EpsilonParams{}, 1).family, 3, 2);
  EXPECT_EQ(v1.c1, v2.c1);
  EXPECT_DOUBLE_EQ(v1.c1, double(r.family.members.size()) * 3 / 729.0);
  EXPECT_EQ(v1.delta[3], r.family.members.empty() ? 0u : 1u);
  EXPECT_DOUBLE_EQ(v1.c2[2], double(v1.delta[2]) / 9.0 * std::pow(3.0, 0.5));
}
