#pragma once

// Seeded instance generators shared by tests, selftest, and the acceptance run.

#include <set>
#include <vector>

#include "flatsat/predicates.hpp"
#include "flatsat/rng.hpp"

namespace flatsat {

inline Point random_point(const Space& sp, CounterRng& rng) {
  Point p(static_cast<std::size_t>(sp.dim()));
  for (auto& c : p) c = static_cast<Elem>(rng.below(sp.q()));
  return p;
}

inline Point random_point_in(const Space& sp, const AffineFlat& f, CounterRng& rng) {
  const Field& fd = sp.field();
  Point p(f.base().begin(), f.base().end());
  for (int r = 0; r < f.dim(); ++r) {
    Elem t = static_cast<Elem>(rng.below(sp.q()));
    auto row = f.basis_row(r);
    for (int c = 0; c < sp.dim(); ++c) p[c] = fd.add(p[c], fd.mul(t, row[c]));
  }
  return p;
}

// m affinely independent points, m <= d+1.
inline std::vector<Point> random_independent(const Space& sp, std::size_t m, CounterRng& rng) {
  if (m > static_cast<std::size_t>(sp.dim()) + 1) fail(ErrorKind::BadSize, "at most d+1 affinely independent points exist");
  std::vector<Point> pts;
  FlatBuilder b(sp);
  while (pts.size() < m) {
    Point p = random_point(sp, rng);
    if (b.add(p)) pts.push_back(std::move(p));
  }
  return pts;
}

// A line through `c` inside flat `f`, given by a random direction of f.
inline AffineFlat random_line_through(const Space& sp, const AffineFlat& f, PointRef c, CounterRng& rng) {
  for (;;) {
    Point p = random_point_in(sp, f, rng);
    if (std::equal(p.begin(), p.end(), c.begin())) continue;
    FlatBuilder b(sp);
    b.add(c);
    b.add(p);
    return b.flat();
  }
}

struct LinesUnionConfig {
  std::uint32_t q = 5;
  int d = 3;
  std::size_t n = 59;
  int stars = 2;           // centers inside the planted plane
  int lines_per_star = 3;
  std::size_t line_min = 3, line_max = 5;  // points per planted line, center included
  std::size_t plane_cap = 20;              // most points allowed in the planted plane
  std::uint64_t seed = 1;
};

// Stars of lines inside one random plane, then random filler points that keep
// the plane at or below plane_cap.
inline PointSet lines_union_instance(const LinesUnionConfig& cfg) {
  Space sp(make_field(cfg.q), cfg.d);
  if (cfg.n > sp.size()) fail(ErrorKind::BadParams, "n exceeds q^d");
  CounterRng rng(KeyHasher(cfg.seed).mix(0x4c494e45).value());
  AffineFlat plane;
  {
    auto base = random_independent(sp, static_cast<std::size_t>(std::min(cfg.d, 2)) + 1, rng);
    FlatBuilder b(sp);
    for (auto& p : base) b.add(p);
    plane = b.flat();
  }
  std::set<std::uint64_t> ranks;
  std::size_t in_plane = 0;
  auto add = [&](const Point& p) {
    if (ranks.insert(sp.rank(p)).second && plane.contains(sp.field(), p)) ++in_plane;
  };
  for (int s = 0; s < cfg.stars; ++s) {
    Point c = random_point_in(sp, plane, rng);
    add(c);
    std::vector<AffineFlat> used;
    for (int l = 0; l < cfg.lines_per_star; ++l) {
      AffineFlat line = random_line_through(sp, plane, c, rng);
      if (std::find(used.begin(), used.end(), line) != used.end()) {
        --l;
        continue;
      }
      used.push_back(line);
      std::size_t want = cfg.line_min + rng.below(cfg.line_max - cfg.line_min + 1);
      std::set<std::uint64_t> on;
      on.insert(sp.rank(c));
      while (on.size() < std::min<std::size_t>(want, cfg.q)) {
        Point p = random_point_in(sp, line, rng);
        if (on.insert(sp.rank(p)).second) add(p);
      }
    }
  }
  if (in_plane > cfg.plane_cap || ranks.size() > cfg.n) fail(ErrorKind::BadParams, "planted structure exceeds the plane cap or n");
  std::uint64_t guard = 0;
  while (ranks.size() < cfg.n) {
    if (++guard > 100 * sp.size()) fail(ErrorKind::BadParams, "cannot place filler points under the plane cap");
    Point p = random_point(sp, rng);
    if (ranks.count(sp.rank(p))) continue;
    if (plane.contains(sp.field(), p) && in_plane >= cfg.plane_cap) continue;
    add(p);
  }
  PointSet x(sp);
  for (auto r : ranks) x.push_back(sp.unrank(r));
  return x;
}

// Uniform random n-subset of F_q^d in canonical order.
inline PointSet random_subset_of_size(std::uint32_t q, int d, std::size_t n, std::uint64_t seed) {
  Space sp(make_field(q), d);
  if (n > sp.size()) fail(ErrorKind::BadParams, "n exceeds q^d");
  CounterRng rng(KeyHasher(seed).mix(0x52534e).value());
  std::set<std::uint64_t> ranks;
  while (ranks.size() < n) ranks.insert(rng.below(sp.size()));
  PointSet x(sp);
  for (auto r : ranks) x.push_back(sp.unrank(r));
  return x;
}

}  // namespace flatsat
