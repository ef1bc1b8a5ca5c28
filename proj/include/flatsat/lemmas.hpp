#pragma once

// Randomized property suites for the flat, support, enlargement, good-set and
// auxiliary-graph lemmas. Each suite reports its label, trial count and the
// first counterexample found.

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "flatsat/auxgraph.hpp"
#include "flatsat/balance.hpp"
#include "flatsat/instances.hpp"

namespace flatsat::lemmas {

using IgpPredicate = std::function<bool(const PointSet&, std::span<const Index>)>;

// Predicates the suites use for their conclusions; tests swap in faulty ones.
struct Hooks {
  IgpPredicate is_igp = [](const PointSet& x, std::span<const Index> idx) { return flatsat::is_igp(x, idx); };
};

// Hooks whose is_igp answer is flipped on the n-th call (0-based).
inline Hooks flip_igp_call(std::uint64_t n) {
  auto calls = std::make_shared<std::atomic<std::uint64_t>>(0);
  Hooks h;
  h.is_igp = [calls, n](const PointSet& x, std::span<const Index> idx) {
    bool r = flatsat::is_igp(x, idx);
    return calls->fetch_add(1) == n ? !r : r;
  };
  return h;
}

struct SuiteResult {
  std::string label;
  std::uint64_t trials = 0;
  std::uint64_t checks = 0;
  std::uint64_t failures = 0;
  std::string first_failure;
  bool passed() const { return failures == 0 && trials > 0; }
};

namespace detail {

inline std::uint64_t label_key(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
  return h;
}

class Recorder {
 public:
  explicit Recorder(std::string label) { r_.label = std::move(label); }
  void check(bool ok, const std::string& what) {
    ++r_.checks;
    if (!ok) {
      if (r_.failures++ == 0) r_.first_failure = what;
    }
  }
  void trial() { ++r_.trials; }
  std::uint64_t result_trials() const { return r_.trials; }
  SuiteResult result() && { return std::move(r_); }

 private:
  SuiteResult r_;
};

inline Space trial_space(std::uint64_t t) {
  static const std::pair<std::uint32_t, int> spaces[] = {{5, 3}, {7, 3}, {5, 2}};
  auto [q, d] = spaces[t % 3];
  return Space(make_field(q), d);
}

inline std::string show(const PointSet& x, std::span<const Index> idx) {
  std::string s = "{";
  for (auto i : idx) {
    s += "(";
    auto p = x[i];
    for (std::size_t c = 0; c < p.size(); ++c) s += (c ? "," : "") + std::to_string(p[c]);
    s += ")";
  }
  return s + "}";
}

inline IndexSet iota(std::size_t n) {
  IndexSet v(n);
  for (std::size_t t = 0; t < n; ++t) v[t] = static_cast<Index>(t);
  return v;
}

inline IndexSet from_mask(std::uint32_t mask, const IndexSet& base) {
  IndexSet out;
  for (std::size_t t = 0; t < base.size(); ++t)
    if (mask >> t & 1) out.push_back(base[t]);
  return out;
}

// A general-position set of m points; m may exceed d+1.
inline PointSet random_igp(const Space& sp, std::size_t m, CounterRng& rng) {
  for (;;) {
    PointSet x(sp);
    std::uint64_t tries = 0;
    while (x.size() < m && tries++ < 2000) {
      Point p = random_point(sp, rng);
      if (x.index_of(p)) continue;
      x.push_back(p);
      if (!flatsat::is_igp(x)) {
        PointSet y(sp);
        for (std::size_t t = 0; t + 1 < x.size(); ++t) y.push_back(x[t]);
        x = std::move(y);
      }
    }
    if (x.size() == m) return x;
  }
}

// u with support exactly `sub` in the independent set x: a random affine
// combination with nonzero weights on sub.
inline Point combination(const PointSet& x, const IndexSet& sub, CounterRng& rng) {
  const Field& f = x.field();
  const int d = x.dim();
  for (;;) {
    std::vector<Elem> w(sub.size());
    Elem total = 0;
    for (std::size_t t = 0; t + 1 < sub.size(); ++t) {
      w[t] = static_cast<Elem>(1 + rng.below(f.q() - 1));
      total = f.add(total, w[t]);
    }
    w.back() = f.sub(1, total);
    if (w.back() == 0) continue;
    Point u(static_cast<std::size_t>(d), 0);
    for (std::size_t t = 0; t < sub.size(); ++t) {
      auto p = x[sub[t]];
      for (int c = 0; c < d; ++c) u[c] = f.add(u[c], f.mul(w[t], p[c]));
    }
    return u;
  }
}

inline PointSet with_point(const PointSet& x, PointRef u) {
  PointSet y = x;
  y.push_back(u);
  return y;
}

}  // namespace detail

// F1: replacing w by w' in F_X \ F_{X-w} keeps general position and the span.
inline SuiteResult suite_f1(std::uint64_t trials, std::uint64_t seed, const Hooks& hooks = {}) {
  detail::Recorder rec("F1");
  CounterRng rng(KeyHasher(seed).mix(detail::label_key("F1")).value());
  for (std::uint64_t t = 0; t < trials; ++t) {
    Space sp = detail::trial_space(t);
    std::size_t m = 2 + rng.below(static_cast<std::uint64_t>(sp.dim()));
    PointSet x = PointSet::from_points(sp, random_independent(sp, m, rng));
    Index w = static_cast<Index>(rng.below(m));
    AffineFlat fx = span(x);
    IndexSet rest;
    for (Index i = 0; i < m; ++i)
      if (i != w) rest.push_back(i);
    AffineFlat fr = span(x, rest);
    Point wp;
    do wp = random_point_in(sp, fx, rng);
    while (fr.contains(sp.field(), wp));
    PointSet y = x.subset(rest);
    y.push_back(wp);
    rec.trial();
    rec.check(hooks.is_igp(y, detail::iota(y.size())), "replacement set not IGP: " + detail::show(y, detail::iota(y.size())));
    rec.check(span(y) == fx, "replacement changed the span: " + detail::show(y, detail::iota(y.size())));
  }
  return std::move(rec).result();
}

// F2: intersections of flats are flats (checked pointwise against the whole
// space) and drop dimension when neither flat contains the other.
inline SuiteResult suite_f2(std::uint64_t trials, std::uint64_t seed, const Hooks& = {}) {
  detail::Recorder rec("F2");
  CounterRng rng(KeyHasher(seed).mix(detail::label_key("F2")).value());
  for (std::uint64_t t = 0; t < trials; ++t) {
    Space sp = detail::trial_space(t);
    const int d = sp.dim();
    auto f1pts = random_independent(sp, 1 + rng.below(static_cast<std::uint64_t>(d)), rng);
    FlatBuilder b1(sp);
    for (auto& p : f1pts) b1.add(p);
    AffineFlat f1 = b1.flat();
    FlatBuilder b2(sp);
    std::size_t m2 = 1 + rng.below(static_cast<std::uint64_t>(d));
    for (std::size_t k = 0; k < m2; ++k) b2.add(rng.below(2) ? random_point_in(sp, f1, rng) : random_point(sp, rng));
    AffineFlat f2 = b2.flat();
    auto in = flat_intersect(sp, f1, f2);
    std::uint64_t both = 0;
    bool member_ok = true;
    for (std::uint64_t r = 0; r < sp.size(); ++r) {
      Point p = sp.unrank(r);
      bool b = f1.contains(sp.field(), p) && f2.contains(sp.field(), p);
      both += b;
      if (in && in->contains(sp.field(), p) != b) member_ok = false;
    }
    rec.trial();
    if (!in) {
      rec.check(both == 0, "intersection reported empty but flats meet: " + f1.describe() + " / " + f2.describe());
      continue;
    }
    std::uint64_t expect = 1;
    for (int k = 0; k < in->dim(); ++k) expect *= sp.q();
    rec.check(member_ok && both == expect, "intersection is not the flat " + in->describe());
    bool incomparable = !flat_subset(sp, f1, f2) && !flat_subset(sp, f2, f1);
    if (incomparable) rec.check(in->dim() < std::min(f1.dim(), f2.dim()), "dimension did not drop: " + f1.describe() + " / " + f2.describe());
  }
  return std::move(rec).result();
}

// F3: up to d+1 points are in general position exactly when their
// difference vectors are linearly independent.
inline SuiteResult suite_f3(std::uint64_t trials, std::uint64_t seed, const Hooks& hooks = {}) {
  detail::Recorder rec("F3");
  CounterRng rng(KeyHasher(seed).mix(detail::label_key("F3")).value());
  for (std::uint64_t t = 0; t < trials; ++t) {
    Space sp = detail::trial_space(t);
    const int d = sp.dim();
    const Field& f = sp.field();
    std::size_t m = 2 + rng.below(static_cast<std::uint64_t>(d));
    // half the trials use points from a low-dimensional flat
    PointSet x(sp);
    AffineFlat host = span(PointSet::from_points(sp, random_independent(sp, rng.below(2) ? m : m - 1, rng)));
    while (x.size() < m) {
      Point p = random_point_in(sp, host, rng);
      if (!x.index_of(p)) x.push_back(p);
      if (x.size() < m && host.dim() == 0) host = span(PointSet::from_points(sp, random_independent(sp, m, rng)));
    }
    std::vector<std::vector<Elem>> rows;
    for (std::size_t k = 1; k < m; ++k) {
      std::vector<Elem> v(static_cast<std::size_t>(d));
      for (int c = 0; c < d; ++c) v[c] = f.sub(x[k][c], x[0][c]);
      rows.push_back(v);
    }
    auto piv = flatsat::detail::rref(f, rows, d);
    bool independent = piv.size() == m - 1;
    rec.trial();
    rec.check(hooks.is_igp(x, detail::iota(m)) == independent, "IGP disagrees with vector independence: " + detail::show(x, detail::iota(m)));
  }
  return std::move(rec).result();
}

// F4: every nonempty subset of a general-position set is in general position.
inline SuiteResult suite_f4(std::uint64_t trials, std::uint64_t seed, const Hooks& hooks = {}) {
  detail::Recorder rec("F4");
  CounterRng rng(KeyHasher(seed).mix(detail::label_key("F4")).value());
  for (std::uint64_t t = 0; t < trials; ++t) {
    Space sp = detail::trial_space(t);
    std::size_t m = 2 + rng.below(static_cast<std::uint64_t>(sp.dim()) + 1);  // up to d+2
    PointSet x = detail::random_igp(sp, m, rng);
    IndexSet all = detail::iota(m);
    rec.trial();
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
      auto sub = detail::from_mask(mask, all);
      rec.check(hooks.is_igp(x, sub), "subset not IGP: " + detail::show(x, sub));
    }
  }
  return std::move(rec).result();
}

// F5: incomparable subsets of a general-position set of at most d+1 points
// have incomparable spans.
inline SuiteResult suite_f5(std::uint64_t trials, std::uint64_t seed, const Hooks& = {}) {
  detail::Recorder rec("F5");
  CounterRng rng(KeyHasher(seed).mix(detail::label_key("F5")).value());
  for (std::uint64_t t = 0; t < trials; ++t) {
    Space sp = detail::trial_space(t);
    std::size_t m = 2 + rng.below(static_cast<std::uint64_t>(sp.dim()));
    PointSet x = PointSet::from_points(sp, random_independent(sp, m, rng));
    IndexSet all = detail::iota(m);
    std::uint32_t full = (1u << m) - 1, a, b;
    do {
      a = 1 + static_cast<std::uint32_t>(rng.below(full));
      b = 1 + static_cast<std::uint32_t>(rng.below(full));
    } while ((a & b) == a || (a & b) == b);
    auto y = detail::from_mask(a, all), z = detail::from_mask(b, all);
    AffineFlat fy = span(x, y), fz = span(x, z);
    rec.trial();
    rec.check(!flat_subset(sp, fy, fz) && !flat_subset(sp, fz, fy), "comparable spans for " + detail::show(x, y) + " and " + detail::show(x, z));
  }
  return std::move(rec).result();
}

struct SupportTrial {
  PointSet y;
  IndexSet sub;  // planted support
  Point u;
};

inline SupportTrial support_trial(const Space& sp, CounterRng& rng, std::size_t min_sub = 1) {
  std::size_t m = 2 + rng.below(static_cast<std::uint64_t>(sp.dim()));
  PointSet y = PointSet::from_points(sp, random_independent(sp, m, rng));
  IndexSet all = detail::iota(m);
  IndexSet sub;
  do sub = detail::from_mask(1 + static_cast<std::uint32_t>(rng.below((1u << m) - 1)), all);
  while (sub.size() < min_sub);
  Point u = detail::combination(y, sub, rng);
  return {std::move(y), std::move(sub), std::move(u)};
}

// E1: with support X of u in Y, u lies in F_{Y'} exactly when X is inside Y'.
inline SuiteResult suite_e1(std::uint64_t trials, std::uint64_t seed, const Hooks& = {}) {
  detail::Recorder rec("E1");
  CounterRng rng(KeyHasher(seed).mix(detail::label_key("E1")).value());
  for (std::uint64_t t = 0; t < trials; ++t) {
    Space sp = detail::trial_space(t);
    auto tr = support_trial(sp, rng);
    IndexSet all = detail::iota(tr.y.size());
    auto supp = support(tr.y, tr.u, all);
    rec.trial();
    for (std::uint32_t mask = 1; mask < (1u << all.size()); ++mask) {
      auto yp = detail::from_mask(mask, all);
      bool inside = std::includes(yp.begin(), yp.end(), supp.begin(), supp.end());
      rec.check(span(tr.y, yp).contains(sp.field(), tr.u) == inside, "membership disagrees with support containment for " + detail::show(tr.y, yp));
    }
  }
  return std::move(rec).result();
}

// E2: the minimal subsets whose span holds u are unique and equal the support.
inline SuiteResult suite_e2(std::uint64_t trials, std::uint64_t seed, const Hooks& = {}) {
  detail::Recorder rec("E2");
  CounterRng rng(KeyHasher(seed).mix(detail::label_key("E2")).value());
  for (std::uint64_t t = 0; t < trials; ++t) {
    Space sp = detail::trial_space(t);
    auto tr = support_trial(sp, rng);
    const std::size_t m = tr.y.size();
    IndexSet all = detail::iota(m);
    std::vector<std::uint32_t> holds;
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask)
      if (span(tr.y, detail::from_mask(mask, all)).contains(sp.field(), tr.u)) holds.push_back(mask);
    std::vector<std::uint32_t> minimal;
    for (auto a : holds) {
      bool min = true;
      for (auto b : holds)
        if (b != a && (a & b) == b) min = false;
      if (min) minimal.push_back(a);
    }
    rec.trial();
    rec.check(minimal.size() == 1, "support is not unique for u in " + detail::show(tr.y, all));
    if (minimal.size() == 1) rec.check(detail::from_mask(minimal[0], all) == support(tr.y, tr.u, all), "support() differs from the brute-force minimum");
  }
  return std::move(rec).result();
}

// E3: u outside Y with support X gives a critical coplanar set {u} + X.
inline SuiteResult suite_e3(std::uint64_t trials, std::uint64_t seed, const Hooks& hooks = {}) {
  detail::Recorder rec("E3");
  CounterRng rng(KeyHasher(seed).mix(detail::label_key("E3")).value());
  for (std::uint64_t t = 0; t < trials; ++t) {
    Space sp = detail::trial_space(t);
    auto tr = support_trial(sp, rng, 2);
    PointSet z = tr.y.subset(tr.sub);
    z.push_back(tr.u);  // u is new: two nonzero weights keep it off Y
    IndexSet all = detail::iota(z.size());
    rec.trial();
    rec.check(is_coplanar_kset(z, all), "{u} + X is not coplanar: " + detail::show(z, all));
    for (std::size_t drop = 0; drop < z.size(); ++drop) {
      IndexSet sub;
      for (auto i : all)
        if (i != drop) sub.push_back(i);
      rec.check(hooks.is_igp(z, sub), "proper subset not IGP: " + detail::show(z, sub));
    }
  }
  return std::move(rec).result();
}

struct EnlargeTrial {
  PointSet x;  // independent, |x| >= 3
  IndexSet U, Y;
  Index w = 0;
  Point u;
};

inline EnlargeTrial enlarge_trial(const Space& sp, CounterRng& rng) {
  const std::size_t m = 3 + rng.below(static_cast<std::uint64_t>(sp.dim()) - 1);
  PointSet x = PointSet::from_points(sp, random_independent(sp, m, rng));
  IndexSet all = detail::iota(m);
  const std::uint32_t full = (1u << m) - 1;
  IndexSet U;
  std::uint32_t um;
  do {
    um = 1 + static_cast<std::uint32_t>(rng.below(full));
    U = detail::from_mask(um, all);
  } while (U.size() < 2 || um == full);
  Index w = U[rng.below(U.size())];
  IndexSet Y;
  do Y = detail::from_mask(1 + static_cast<std::uint32_t>(rng.below(full)), all);
  while (Y.size() < 2 || !std::binary_search(Y.begin(), Y.end(), w));
  Point u = detail::combination(x, U, rng);
  return {std::move(x), std::move(U), std::move(Y), w, std::move(u)};
}

inline IndexSet minus(const IndexSet& a, std::initializer_list<Index> drop) {
  IndexSet out;
  for (auto v : a)
    if (std::find(drop.begin(), drop.end(), v) == drop.end()) out.push_back(v);
  return out;
}

inline IndexSet unite(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// C1: F_Y cap F_{X-w} = F_{Y-w}, of dimension |Y|-2.
inline SuiteResult suite_c1(std::uint64_t trials, std::uint64_t seed, const Hooks& = {}) {
  detail::Recorder rec("C1");
  CounterRng rng(KeyHasher(seed).mix(detail::label_key("C1")).value());
  for (std::uint64_t t = 0; t < trials; ++t) {
    Space sp = detail::trial_space(t);
    auto tr = enlarge_trial(sp, rng);
    IndexSet all = detail::iota(tr.x.size());
    auto in = flat_intersect(sp, span(tr.x, tr.Y), span(tr.x, minus(all, {tr.w})));
    AffineFlat expect = span(tr.x, minus(tr.Y, {tr.w}));
    rec.trial();
    rec.check(in && *in == expect && in->dim() == static_cast<int>(tr.Y.size()) - 2, "F_Y cap F_{X-w} != F_{Y-w} for Y = " + detail::show(tr.x, tr.Y));
  }
  return std::move(rec).result();
}

// C2: for y in U + Y - w, F_{U+Y+u-{w,y}} meets F_Y in lower dimension.
inline SuiteResult suite_c2(std::uint64_t trials, std::uint64_t seed, const Hooks& = {}) {
  detail::Recorder rec("C2");
  CounterRng rng(KeyHasher(seed).mix(detail::label_key("C2")).value());
  for (std::uint64_t t = 0; t < trials; ++t) {
    Space sp = detail::trial_space(t);
    auto tr = enlarge_trial(sp, rng);
    PointSet z = detail::with_point(tr.x, tr.u);
    const Index ui = static_cast<Index>(tr.x.size());
    AffineFlat fy = span(tr.x, tr.Y);
    IndexSet uy = unite(tr.U, tr.Y);
    rec.trial();
    for (auto y : minus(uy, {tr.w})) {
      IndexSet s = minus(uy, {tr.w, y});
      s.push_back(ui);
      auto in = flat_intersect(sp, span(z, s), fy);
      rec.check(!in || in->dim() < fy.dim(), "intersection keeps dim F_Y for y = " + std::to_string(y));
    }
  }
  return std::move(rec).result();
}

// C3: a replacement w' in F_Y avoiding the C2 flats and F_{X-w} gives u the
// support (U + Y + w') - w in (X - w) + w'.
inline SuiteResult suite_c3(std::uint64_t trials, std::uint64_t seed, const Hooks& = {}) {
  detail::Recorder rec("C3");
  CounterRng rng(KeyHasher(seed).mix(detail::label_key("C3")).value());
  std::uint64_t attempts = 0;
  while (rec.result_trials() < trials && attempts++ < 50 * trials) {
    Space sp = detail::trial_space(attempts);
    auto tr = enlarge_trial(sp, rng);
    const Field& f = sp.field();
    IndexSet all = detail::iota(tr.x.size());
    PointSet z = detail::with_point(tr.x, tr.u);
    const Index ui = static_cast<Index>(tr.x.size());
    AffineFlat fy = span(tr.x, tr.Y);
    IndexSet uy = unite(tr.U, tr.Y);
    std::vector<AffineFlat> avoid{span(tr.x, minus(all, {tr.w}))};
    for (auto y : minus(uy, {tr.w})) {
      IndexSet s = minus(uy, {tr.w, y});
      s.push_back(ui);
      avoid.push_back(span(z, s));
    }
    std::vector<Point> cands;
    for_each_flat_point(sp, fy, [&](PointRef p) {
      for (const auto& g : avoid)
        if (g.contains(f, p)) return;
      cands.emplace_back(p.begin(), p.end());
    });
    if (cands.empty()) continue;
    Point wp = cands[rng.below(cands.size())];
    // (X - w) + w' with w' in the slot of w, so indices line up with X
    PointSet x2(sp);
    for (auto i : all) x2.push_back(i == tr.w ? PointRef(wp) : tr.x[i]);
    const IndexSet& expect = uy;  // slot w now holds w'
    rec.trial();
    IndexSet got = support(x2, tr.u, all);
    rec.check(got == expect, "support after substitution is not (U+Y+w')-w");
  }
  return std::move(rec).result();
}

// key-ob: on good sets J with root y, every (j-1)-flat F in F_J avoiding y has
// |F_J cap X| / |(F_J - F) cap X| <= eps^{-d} q^{1/d}.
inline SuiteResult suite_key_ob(std::uint64_t trials, std::uint64_t seed, const Hooks& = {}) {
  detail::Recorder rec("key-ob");
  const Rational eps(1, 2);
  for (std::uint64_t inst = 0; rec.result_trials() < trials && inst < 200; ++inst) {
    LinesUnionConfig cfg;
    cfg.seed = KeyHasher(seed).mix(detail::label_key("key-ob")).mix(inst).value();
    PointSet x = lines_union_instance(cfg);
    BalanceCache cache(x, eps);
    const Space& sp = x.space();
    // good 3-sets in the planted plane
    for_each_combination(x.size(), 3, [&](std::span<const std::size_t> c) {
      if (rec.result_trials() >= trials) return false;
      IndexSet J{static_cast<Index>(c[0]), static_cast<Index>(c[1]), static_cast<Index>(c[2])};
      if (!affinely_independent(x, J)) return true;
      auto g = is_good_set(x, J, 1, cache);
      if (!g) return true;
      AffineFlat fj = span(x, J);
      std::vector<AffineFlat> lines;
      auto pts = members_in_flat(x, fj);
      std::vector<Point> plane_pts;
      for_each_flat_point(sp, fj, [&](PointRef p) { plane_pts.emplace_back(p.begin(), p.end()); });
      for (std::size_t a = 0; a < plane_pts.size(); ++a)
        for (std::size_t b = a + 1; b < plane_pts.size(); ++b) {
          FlatBuilder fb(sp);
          fb.add(plane_pts[a]);
          fb.add(plane_pts[b]);
          AffineFlat l = fb.flat();
          if (l.contains(sp.field(), x[g->root])) continue;
          if (std::find(lines.begin(), lines.end(), l) == lines.end()) lines.push_back(l);
        }
      for (const auto& l : lines) {
        rec.trial();
        rec.check(good_ratio_check(x, *g, l, eps), "ratio bound fails on " + l.describe());
      }
      return true;
    });
  }
  return std::move(rec).result();
}

// Auxiliary graph bullets on H_F: A-degree 2sd+1 <= 3d^2, B-degree
// <= 6d^2 |A|/|B|, neighborhoods not coverable by 2d (s-1)-flats; plus
// tight-cycle windows and alternating-path shape.
inline SuiteResult suite_aux_graph(std::uint64_t trials, std::uint64_t seed, const Hooks& = {}) {
  detail::Recorder rec("aux-graph");
  CounterRng rng(KeyHasher(seed).mix(detail::label_key("aux-graph")).value());
  const Rational eps(1, 2);
  Space sp(make_field(7), 2);
  for (std::uint64_t t = 0; t < trials; ++t) {
    // a line with 5..7 points plus a few extra points in the plane
    std::size_t on = 5 + rng.below(3);
    std::size_t extra = rng.below(on + 1);
    auto base = random_independent(sp, 2, rng);
    FlatBuilder lb(sp);
    lb.add(base[0]);
    lb.add(base[1]);
    AffineFlat line = lb.flat();
    PointSet x(sp);
    while (x.size() < on) {
      Point p = random_point_in(sp, line, rng);
      if (!x.index_of(p)) x.push_back(p);
    }
    while (x.size() < on + extra) {
      Point p = random_point(sp, rng);
      if (!x.index_of(p) && !line.contains(sp.field(), p)) x.push_back(p);
    }
    const bool whole = t % 2 == 1;  // F = plane with F' = line, or F = F' = line
    AffineFlat f = whole ? span(x) : line;
    if (whole && f.dim() != 2) f = line;
    rec.trial();
    BipartiteIncidence h;
    try {
      h = build_hf(f, line, x, 1, eps);
    } catch (const Error& e) {
      rec.check(false, std::string("build_hf failed: ") + e.what());
      continue;
    }
    auto chk = validate_hf(h, x, 2);
    rec.check(chk.a_degree_ok, "A-side degree bound violated");
    rec.check(chk.b_degree_ok, "B-side degree bound violated");
    rec.check(chk.cover_ok, "a neighborhood is coverable by 2d flats");
    const std::size_t m = h.cycle.size();
    bool windows = true;
    IndexSet win(h.k);
    for (std::size_t s0 = 0; s0 < m; ++s0) {
      for (std::size_t k = 0; k < h.k; ++k) win[k] = h.cycle[(s0 + k) % m];
      windows &= is_support_edge(x, win, 1);
    }
    rec.check(windows, "tight cycle window is not an edge");
    // alternating path from a vertex of B across A and B
    IndexSet a(h.b.begin(), h.b.end() - 1);
    auto path = alternating_ham_path(a, h.b, h.b.back());
    bool shape = path.size() == a.size() + h.b.size() && path.front() == h.b.back();
    for (std::size_t k = 0; k < path.size(); ++k) {
      bool in_b = k % 2 == 0;
      shape &= in_b ? std::find(h.b.begin(), h.b.end(), path[k]) != h.b.end() : std::find(a.begin(), a.end(), path[k]) != a.end();
    }
    rec.check(shape, "alternating path has the wrong shape");
  }
  return std::move(rec).result();
}

struct SuiteSpec {
  std::string label;
  SuiteResult (*run)(std::uint64_t, std::uint64_t, const Hooks&);
};

inline const std::vector<SuiteSpec>& all_suites() {
  static const std::vector<SuiteSpec> v = {
      {"F1", suite_f1},       {"F2", suite_f2}, {"F3", suite_f3}, {"F4", suite_f4}, {"F5", suite_f5},
      {"E1", suite_e1},       {"E2", suite_e2}, {"E3", suite_e3}, {"C1", suite_c1}, {"C2", suite_c2},
      {"C3", suite_c3},       {"key-ob", suite_key_ob},           {"aux-graph", suite_aux_graph},
  };
  return v;
}

inline std::vector<SuiteResult> run_all(std::uint64_t trials, std::uint64_t seed, const Hooks& hooks = {}) {
  std::vector<SuiteResult> out;
  for (const auto& s : all_suites()) out.push_back(s.run(trials, seed, hooks));
  return out;
}

}  // namespace flatsat::lemmas
