#include <gtest/gtest.h>

#include "flatsat/instances.hpp"
#include "flatsat/predicates.hpp"

using namespace flatsat;

namespace {

Space plane5() { return Space(make_field(5), 2); }

PointSet pts(const Space& sp, std::vector<Point> v) { return PointSet::from_points(sp, v); }

AffineFlat line(const Space& sp, Point a, Point b) { return span(pts(sp, {a, b})); }

}  // namespace

TEST(Space, RankRoundTrip) {
  Space sp(make_field(7), 3);
  for (std::uint64_t r = 0; r < sp.size(); ++r) EXPECT_EQ(sp.rank(sp.unrank(r)), r);
  EXPECT_EQ(sp.unrank(1), (Point{0, 0, 1}));
}

TEST(PointSet, RejectsDuplicatesAndBadPoints) {
  Space sp = plane5();
  PointSet s(sp);
  s.push_back(Point{1, 2});
  try {
    s.push_back(Point{1, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadPoint);
    EXPECT_NE(std::string(e.what()).find("duplicate point at index 1"), std::string::npos);
  }
  EXPECT_THROW(s.push_back(Point{1, 2, 3}), Error);
  EXPECT_THROW(s.push_back(Point{5, 0}), Error);
  EXPECT_EQ(s.size(), 1u);
}

TEST(Span, Examples) {
  Space sp = plane5();
  AffineFlat p = span(pts(sp, {{2, 3}}));
  EXPECT_EQ(p.dim(), 0);
  EXPECT_EQ(Point(p.base().begin(), p.base().end()), (Point{2, 3}));
  AffineFlat diag = span(pts(sp, {{0, 0}, {1, 1}, {2, 2}}));
  EXPECT_EQ(diag.dim(), 1);
  EXPECT_TRUE(diag.contains(sp.field(), Point{4, 4}));
  EXPECT_EQ(span(pts(sp, {{0, 0}, {1, 0}, {0, 1}})).dim(), 2);
  try {
    span(PointSet(sp));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptySet);
  }
}

TEST(Span, CanonicalFormDoesNotDependOnGenerators) {
  Space sp(make_field(7), 3);
  CounterRng rng(11);
  for (int t = 0; t < 200; ++t) {
    auto base = random_independent(sp, 1 + rng.below(3), rng);
    AffineFlat f = span(PointSet::from_points(sp, base));
    // a second generating set drawn from inside the flat
    FlatBuilder b(sp);
    while (b.dim() < f.dim()) b.add(random_point_in(sp, f, rng));
    AffineFlat g = b.flat();
    EXPECT_EQ(f, g);
    EXPECT_EQ(f.hash(), g.hash());
    for (std::size_t c = 0; c < f.pivots().size(); ++c) EXPECT_EQ(f.base()[f.pivots()[c]], 0u);
  }
}

TEST(FlatContains, Examples) {
  Space sp = plane5();
  AffineFlat diag = line(sp, {0, 0}, {1, 1});
  EXPECT_TRUE(flat_contains(sp, diag, Point{3, 3}));
  EXPECT_FALSE(flat_contains(sp, diag, Point{3, 4}));
  EXPECT_TRUE(flat_contains(sp, span(pts(sp, {{2, 3}})), Point{2, 3}));
  Space other(make_field(7), 2);
  EXPECT_THROW(flat_contains(other, diag, Point{3, 3}), Error);
}

TEST(FlatIntersect, Examples) {
  Space sp = plane5();
  AffineFlat y0 = line(sp, {0, 0}, {1, 0}), x0 = line(sp, {0, 0}, {0, 1}), y1 = line(sp, {0, 1}, {1, 1});
  auto o = flat_intersect(sp, y0, x0);
  ASSERT_TRUE(o);
  EXPECT_EQ(*o, span(pts(sp, {{0, 0}})));
  EXPECT_FALSE(flat_intersect(sp, y0, y1));
  EXPECT_EQ(*flat_intersect(sp, y0, y0), y0);
}

TEST(FlatIntersect, MatchesPointwiseIntersection) {
  Space sp(make_field(5), 3);
  CounterRng rng(3);
  for (int t = 0; t < 300; ++t) {
    FlatBuilder a(sp), b(sp);
    for (std::uint64_t k = 0, m = 1 + rng.below(3); k < m; ++k) a.add(random_point(sp, rng));
    for (std::uint64_t k = 0, m = 1 + rng.below(3); k < m; ++k) b.add(random_point(sp, rng));
    AffineFlat fa = a.flat(), fb = b.flat();
    auto in = flat_intersect(sp, fa, fb);
    std::uint64_t both = 0;
    for (std::uint64_t r = 0; r < sp.size(); ++r) {
      Point p = sp.unrank(r);
      bool inside = fa.contains(sp.field(), p) && fb.contains(sp.field(), p);
      both += inside;
      if (in) { EXPECT_EQ(in->contains(sp.field(), p), inside); }
    }
    if (!in) { EXPECT_EQ(both, 0u); }
  }
}

TEST(PointsInFlat, Examples) {
  Space sp = plane5();
  PointSet all = PointSet::full_space(sp);
  AffineFlat y0 = line(sp, {0, 0}, {1, 0});
  EXPECT_EQ(points_in_flat(y0, all).size(), 5u);
  EXPECT_EQ(points_in_flat(span(all), all).size(), 25u);
  PointSet off = pts(sp, {{0, 1}, {2, 3}});
  EXPECT_EQ(points_in_flat(y0, off).size(), 0u);
}

TEST(FlatSubset, Basic) {
  Space sp(make_field(5), 3);
  PointSet x = pts(sp, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
  AffineFlat plane = span(x);
  IndexSet two{0, 1};
  AffineFlat l = span(x, two);
  EXPECT_TRUE(flat_subset(sp, l, plane));
  EXPECT_FALSE(flat_subset(sp, plane, l));
}
