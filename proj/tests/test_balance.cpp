#include <gtest/gtest.h>

#include "flatsat/balance.hpp"
#include "flatsat/instances.hpp"
#include "oracle.hpp"

using namespace flatsat;

namespace {

oracle::Vec vec(PointRef p) { return oracle::Vec(p.begin(), p.end()); }

// Largest |X cap F'| over every s-flat F' of F, by listing all point subsets of F.
std::size_t brute_max_subflat(const Space& sp, const AffineFlat& f, int s, const PointSet& x) {
  std::vector<oracle::Vec> fpts, xin;
  for_each_flat_point(sp, f, [&](PointRef p) { fpts.push_back(vec(p)); });
  for (std::size_t i = 0; i < x.size(); ++i)
    if (f.contains(sp.field(), x[i])) xin.push_back(vec(x[i]));
  const long long q = sp.q();
  if (s == f.dim()) return xin.size();
  std::size_t best = 0;
  oracle::subsets_of_size(fpts.size(), static_cast<std::size_t>(s) + 1, [&](const std::vector<std::size_t>& c) {
    auto basis = oracle::pick(fpts, c);
    if (oracle::affine_dim(basis, q) != s) return;
    std::size_t cnt = 0;
    for (const auto& p : xin) cnt += oracle::in_span(basis, p, q);
    best = std::max(best, cnt);
  });
  return best;
}

bool heavy_from(std::size_t best, std::size_t total, int dim_f, int s, const Rational& eps) {
  return Rational(BigInt(best)) >= pow(eps, static_cast<unsigned>(dim_f - s)) * Rational(BigInt(total));
}

// Same maximum over s-flats spanned by subsets of X, which suffices for the whole space.
std::size_t max_spanned_subflat(const PointSet& x, int s) {
  std::vector<oracle::Vec> v;
  for (std::size_t i = 0; i < x.size(); ++i) v.push_back(vec(x[i]));
  const long long q = x.field().q();
  if (oracle::affine_dim(v, q) <= s) return v.size();
  std::size_t best = 0;
  oracle::subsets_of_size(v.size(), static_cast<std::size_t>(s) + 1, [&](const std::vector<std::size_t>& c) {
    auto basis = oracle::pick(v, c);
    if (oracle::affine_dim(basis, q) != s) return;
    std::size_t cnt = 0;
    for (const auto& p : v) cnt += oracle::in_span(basis, p, q);
    best = std::max(best, cnt);
  });
  return best;
}

PointSet line_plus_point(const Space& sp) {
  std::vector<Point> v;
  for (Elem t = 0; t < 5; ++t) v.push_back({t, 0});
  v.push_back({0, 1});
  return PointSet::from_points(sp, v);
}

}  // namespace

TEST(IsHeavy, Examples) {
  Space sp(make_field(5), 2);
  PointSet x = line_plus_point(sp);
  AffineFlat plane = span(PointSet::full_space(sp));
  EXPECT_TRUE(is_heavy(plane, 2, Rational(1, 2), x).heavy);
  auto r = is_heavy(plane, 1, Rational(1, 2), x);
  EXPECT_TRUE(r.heavy);
  ASSERT_TRUE(r.witness);
  EXPECT_EQ(r.witness_count, 5u);

  Space sp11(make_field(11), 2);
  PointSet y = random_subset_of_size(11, 2, 101, 4);
  EXPECT_FALSE(is_heavy(span(PointSet::full_space(sp11)), 0, Rational(1, 10), y).heavy);
  EXPECT_THROW(is_heavy(plane, 3, Rational(1, 2), x), Error);
}

TEST(IsHeavy, AgreesWithFullFlatEnumeration) {
  for (std::uint32_t q : {3u, 5u, 7u}) {
    Space sp(make_field(q), 3);
    CounterRng rng(q * 77);
    for (int t = 0; t < 12; ++t) {
      PointSet x = t % 2 ? random_subset_of_size(q, 3, 6 + rng.below(3 * q), 100 + t)
                         : lines_union_instance({q, 3, 4 * q + 4, 1, 2, 3, q, 3 * q, 200u + t});
      // a random plane and a random line through two points of X
      AffineFlat plane = span(PointSet::from_points(sp, random_independent(sp, 3, rng)));
      AffineFlat line = span(x, IndexSet{0, 1});
      for (const AffineFlat* f : {&plane, &line})
        for (int s = 0; s <= f->dim(); ++s) {
          std::size_t best = brute_max_subflat(sp, *f, s, x), total = count_in_flat(x, *f);
          for (Rational eps : {Rational(1, 2), Rational(3, 10), Rational(4, 5)}) {
            bool got = is_heavy(*f, s, eps, x).heavy;
            ASSERT_EQ(got, heavy_from(best, total, f->dim(), s, eps)) << "q=" << q << " t=" << t << " s=" << s;
          }
        }
    }
  }
}

TEST(IsHeavy, MonotoneInLevel) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PointSet x = random_subset_of_size(5, 3, 25, seed);
    AffineFlat all = span(PointSet::full_space(x.space()));
    bool prev = false;
    for (int s = 0; s <= 3; ++s) {
      bool h = is_heavy(all, s, Rational(1, 3), x).heavy;
      EXPECT_TRUE(!prev || h) << "seed " << seed << " s " << s;
      prev = h;
    }
  }
}

TEST(IsHeavy, WitnessIsAnSFlatInsideF) {
  Space sp(make_field(5), 3);
  PointSet x = lines_union_instance({});
  AffineFlat all = span(PointSet::full_space(sp));
  for (int s = 0; s <= 3; ++s) {
    auto r = is_heavy(all, s, Rational(1, 2), x);
    if (!r.heavy) continue;
    EXPECT_EQ(r.witness->dim(), s);
    EXPECT_TRUE(flat_subset(sp, *r.witness, all));
    EXPECT_EQ(count_in_flat(x, *r.witness), r.witness_count);
  }
}

TEST(BalanceDim, Examples) {
  Space sp(make_field(5), 2);
  PointSet x = line_plus_point(sp);
  EXPECT_EQ(balance_dim(span(x, IndexSet{0, 1}), Rational(1, 2), x), 1);
  EXPECT_EQ(balance_dim(span(x, IndexSet{1, 5}), Rational(1, 2), x), 0);  // line (1,0)-(0,1) holds 2 points, 1 >= 1
  FlatBuilder b(sp);
  b.add(Point{0, 1});
  b.add(Point{1, 1});
  ASSERT_EQ(count_in_flat(x, b.flat()), 1u);
  EXPECT_EQ(balance_dim(b.flat(), Rational(1, 2), x), 0);
  FlatBuilder none(sp);
  none.add(Point{1, 2});
  none.add(Point{2, 2});  // y = 2 holds nothing
  try {
    balance_dim(none.flat(), Rational(1, 2), x);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::EmptyIntersection);
  }
}

TEST(BalanceDim, MatchesMinimalHeavyLevelOracle) {
  AffineFlat all = span(PointSet::full_space(Space(make_field(5), 3)));
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    PointSet x = seed % 2 ? random_subset_of_size(5, 3, 12, seed) : lines_union_instance({5, 3, 20, 1, 2, 3, 5, 12, seed});
    std::vector<std::size_t> best;
    for (int s = 0; s <= 3; ++s) best.push_back(max_spanned_subflat(x, s));
    for (Rational eps : {Rational(1, 2), Rational(1, 5)}) {
      int want = 3;
      for (int s = 0; s <= 3; ++s)
        if (heavy_from(best[s], x.size(), 3, s, eps)) {
          want = s;
          break;
        }
      EXPECT_EQ(balance_dim(all, eps, x), want) << "seed " << seed;
    }
  }
}

TEST(SjBalanced, WindowEdges) {
  // c^d q^j <= (e n)^d < c^d q^{j+1}, compared in integers.
  auto direct = [](std::size_t c, int s, int j, const Rational& eps, std::size_t n, std::uint32_t q, int d) {
    if (c == 0) return false;
    Rational top = pow(pow(eps, static_cast<unsigned>(d - s)) * Rational(BigInt(n)), static_cast<unsigned>(d));
    Rational cd(pow(BigInt(c), static_cast<unsigned>(d)));
    return cd * Rational(pow(BigInt(q), static_cast<unsigned>(j))) <= top && top < cd * Rational(pow(BigInt(q), static_cast<unsigned>(j + 1)));
  };
  EXPECT_FALSE(in_density_window(0, 1, 0, Rational(1, 2), 49, 7, 3));
  // right-closed: eps^{d-s} n = 8, c = 4, q^j = 8 on d = 3: 4^3 * 8 = 512 = 8^3.
  EXPECT_TRUE(in_density_window(4, 2, 1, Rational(1, 2), 16, 8, 3));
  EXPECT_FALSE(in_density_window(5, 2, 1, Rational(1, 2), 16, 8, 3));
  for (std::size_t c = 0; c <= 60; ++c)
    for (int j = 0; j < 3; ++j)
      for (int s = 0; s <= 2; ++s)
        EXPECT_EQ(in_density_window(c, s, j, Rational(1, 2), 49, 7, 3), direct(c, s, j, Rational(1, 2), 49, 7, 3)) << c << " " << j << " " << s;
}

TEST(SjBalanced, LineOfSixInF7Cubed) {
  Space sp(make_field(7), 3);
  std::vector<Point> v;
  for (Elem t = 0; t < 6; ++t) v.push_back({t, 0, 0});
  CounterRng rng(5);
  PointSet x = PointSet::from_points(sp, v);
  while (x.size() < 49) {
    Point p = random_point(sp, rng);
    if (p[1] == 0 && p[2] == 0) continue;
    if (!x.index_of(p)) x.push_back(p);
  }
  AffineFlat line = span(x, IndexSet{0, 1});
  ASSERT_EQ(count_in_flat(x, line), 6u);
  // eps = 1/2, s = 1: window top (49/4)^3 against 216 * 7^j.
  for (int j = 0; j < 3; ++j) {
    bool window = BigInt(216) * pow(BigInt(7), j) * 64 <= BigInt(49 * 49 * 49) && BigInt(49 * 49 * 49) < BigInt(216) * pow(BigInt(7), j + 1) * 64;
    EXPECT_EQ(is_sj_balanced(line, 1, j, Rational(1, 2), x, 49, 7, 3), window && balance_dim(line, Rational(1, 2), x) == 1) << j;
  }
  EXPECT_TRUE(is_sj_balanced(line, 1, 1, Rational(1, 2), x, 49, 7, 3));
  EXPECT_THROW(is_sj_balanced(line, 1, 3, Rational(1, 2), x, 49, 7, 3), Error);
  EXPECT_THROW(is_sj_balanced(line, 2, 1, Rational(1, 2), x, 49, 7, 3), Error);
}

namespace {

// Lines a-c and b-c hold four points each; 73 filler points stay off their plane.
PointSet good_set_instance(IndexSet& J) {
  Space sp(make_field(7), 3);
  Point a{0, 0, 0}, b{1, 0, 0}, c{0, 1, 0};
  std::vector<Point> v{a, b, c};
  for (Elem t : {2, 3}) v.push_back({0, t, 0});
  for (Elem t : {2, 3}) v.push_back({static_cast<Elem>(7 - t + 1), t, 0});  // on the line b + t (c - b)
  PointSet x = PointSet::from_points(sp, v);
  CounterRng rng(11);
  while (x.size() < 80) {
    Point p = random_point(sp, rng);
    if (p[2] == 0) continue;
    if (!x.index_of(p)) x.push_back(p);
  }
  J = {0, 1, 2};
  return x;
}

}  // namespace

TEST(GoodSet, ThreeLineInstance) {
  IndexSet J;
  PointSet x = good_set_instance(J);
  ASSERT_EQ(count_in_flat(x, span(x, IndexSet{1, 2})), 4u);
  ASSERT_EQ(count_in_flat(x, span(x, IndexSet{0, 2})), 4u);
  const Rational eps(1, 2);
  auto g = is_good_set(x, J, 1, eps);
  ASSERT_TRUE(g);
  ASSERT_EQ(g->partition.size(), 2u);
  EXPECT_EQ(g->partition[0].size(), 2u);
  EXPECT_EQ(g->partition[1].size(), 1u);
  // oracle: the only partitions whose transversals are both 4-point lines put c alone in V_2
  EXPECT_EQ(g->partition[1], IndexSet{2});
  EXPECT_EQ(g->root, x.canonical_order(g->partition[0]).front());
  for (auto u : g->partition[0])
    EXPECT_TRUE(is_sj_balanced(span(x, IndexSet{u, 2}), 1, 2, eps, x, x.size(), 7, 3));
  // ratio bound on every line spanned by a pair avoiding the root
  for (const IndexSet& pair : {IndexSet{0, 1}, IndexSet{0, 2}, IndexSet{1, 2}}) {
    if (std::find(pair.begin(), pair.end(), g->root) != pair.end()) continue;
    EXPECT_TRUE(good_ratio_check(x, *g, span(x, pair), eps));
  }
}

TEST(GoodSet, DensityAndErrors) {
  IndexSet J;
  PointSet x = good_set_instance(J);
  // Shrinking n pushes |X cap F_J| = 7 over n q^{-2/3}: keep only the plane plus 10 points.
  IndexSet keep;
  for (Index i = 0; i < 17; ++i) keep.push_back(i);
  PointSet small = x.subset(keep);
  ASSERT_FALSE(good_density(7, small.size(), 7, 2, 3));
  EXPECT_FALSE(is_good_set(small, J, 1, Rational(1, 2)));

  Space sp(make_field(7), 3);
  PointSet col = PointSet::from_points(sp, {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 1, 0}});
  try {
    is_good_set(col, IndexSet{0, 1, 2}, 1, Rational(1, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotIGP);
  }
  try {
    is_good_set(col, IndexSet{0, 1}, 1, Rational(1, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadSize);
  }
}

TEST(GoodRatio, FlatErrors) {
  IndexSet J;
  PointSet x = good_set_instance(J);
  auto g = is_good_set(x, J, 1, Rational(1, 2));
  ASSERT_TRUE(g);
  // a line through the root
  IndexSet with_root{g->root, g->partition[1][0]};
  EXPECT_THROW(good_ratio_check(x, *g, span(x, with_root), Rational(1, 2)), Error);
  // a line leaving F_J
  EXPECT_THROW(good_ratio_check(x, *g, span(x, IndexSet{2, 10}), Rational(1, 2)), Error);
}
