#pragma once

// Spans, membership, intersection, general position and minimal support.

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

#include "flatsat/geometry.hpp"

namespace flatsat {

inline void check_flat(const Space& space, const AffineFlat& f) {
  if (f.field_id() != space.field().id()) fail(ErrorKind::MixedFields, "flat belongs to a different field");
  if (f.ambient_dim() != space.dim()) fail(ErrorKind::BadDimension, "flat lives in a different ambient dimension");
}

inline AffineFlat span_of(const Space& space, std::span<const PointRef> pts) {
  if (pts.empty()) fail(ErrorKind::EmptySet, "span of the empty set");
  FlatBuilder b(space);
  for (auto x : pts) {
    space.check_point(x);
    b.add(x);
  }
  return b.flat();
}

inline AffineFlat span(const PointSet& s) {
  if (s.empty()) fail(ErrorKind::EmptySet, "span of the empty set");
  FlatBuilder b(s.space());
  for (std::size_t i = 0; i < s.size(); ++i) b.add(s[i]);
  return b.flat();
}

inline AffineFlat span(const PointSet& x, std::span<const Index> idx) {
  if (idx.empty()) fail(ErrorKind::EmptySet, "span of the empty set");
  FlatBuilder b(x.space());
  for (auto i : idx) b.add(x[i]);
  return b.flat();
}

// Affine dimension of the span of x[idx] (-1 for the empty set).
inline int span_dim(const PointSet& x, std::span<const Index> idx) {
  FlatBuilder b(x.space());
  for (auto i : idx) b.add(x[i]);
  return b.dim();
}

inline bool flat_contains(const Space& space, const AffineFlat& f, PointRef x) {
  check_flat(space, f);
  space.check_point(x);
  return f.contains(space.field(), x);
}

// G is a subflat of F.
inline bool flat_subset(const Space& space, const AffineFlat& g, const AffineFlat& f) {
  if (!f.contains(space.field(), g.base())) return false;
  Point x(space.dim());
  const Field& fd = space.field();
  for (int r = 0; r < g.dim(); ++r) {
    auto row = g.basis_row(r);
    for (int c = 0; c < space.dim(); ++c) x[c] = fd.add(g.base()[c], row[c]);
    if (!f.contains(fd, x)) return false;
  }
  return true;
}

namespace detail {

// Rows [a_0..a_{d-1} | b] with a.x = b describing the flat.
inline std::vector<std::vector<Elem>> flat_equations(const Field& fd, const AffineFlat& f) {
  const int d = f.ambient_dim();
  std::vector<bool> is_pivot(d, false);
  for (int p : f.pivots()) is_pivot[p] = true;
  std::vector<std::vector<Elem>> eqs;
  for (int free = 0; free < d; ++free) {
    if (is_pivot[free]) continue;
    std::vector<Elem> a(d + 1, 0);
    a[free] = 1;
    for (int r = 0; r < f.dim(); ++r) a[f.pivots()[r]] = fd.neg(f.basis_row(r)[free]);
    Elem b = 0;
    for (int c = 0; c < d; ++c) b = fd.add(b, fd.mul(a[c], f.base()[c]));
    a[d] = b;
    eqs.push_back(std::move(a));
  }
  return eqs;
}

// In-place RREF over the first `cols` columns; returns pivot columns.
inline std::vector<int> rref(const Field& fd, std::vector<std::vector<Elem>>& m, int cols) {
  std::vector<int> pivots;
  std::size_t row = 0;
  for (int c = 0; c < cols && row < m.size(); ++c) {
    std::size_t sel = row;
    while (sel < m.size() && m[sel][c] == 0) ++sel;
    if (sel == m.size()) continue;
    std::swap(m[row], m[sel]);
    Elem s = fd.inv(m[row][c]);
    for (auto& v : m[row]) v = fd.mul(v, s);
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == row || m[r][c] == 0) continue;
      Elem e = m[r][c];
      for (std::size_t k = 0; k < m[r].size(); ++k) m[r][k] = fd.sub(m[r][k], fd.mul(e, m[row][k]));
    }
    pivots.push_back(c);
    ++row;
  }
  return pivots;
}

}  // namespace detail

inline std::optional<AffineFlat> flat_intersect(const Space& space, const AffineFlat& f1, const AffineFlat& f2) {
  check_flat(space, f1);
  check_flat(space, f2);
  const Field& fd = space.field();
  const int d = space.dim();
  auto eqs = detail::flat_equations(fd, f1);
  auto e2 = detail::flat_equations(fd, f2);
  eqs.insert(eqs.end(), e2.begin(), e2.end());
  auto piv = detail::rref(fd, eqs, d);
  for (std::size_t r = piv.size(); r < eqs.size(); ++r)
    if (eqs[r][d] != 0) return std::nullopt;
  Point x0(d, 0);
  for (std::size_t r = 0; r < piv.size(); ++r) x0[piv[r]] = eqs[r][d];
  std::vector<bool> is_pivot(d, false);
  for (int p : piv) is_pivot[p] = true;
  FlatBuilder b(space);
  b.add(x0);
  for (int free = 0; free < d; ++free) {
    if (is_pivot[free]) continue;
    Point dir(d, 0);
    dir[free] = 1;
    for (std::size_t r = 0; r < piv.size(); ++r) dir[piv[r]] = fd.neg(eqs[r][free]);
    b.add_direction(dir);
  }
  return b.flat();
}

// All points of a flat, visiting coefficient tuples in order.
template <class Fn>
void for_each_flat_point(const Space& space, const AffineFlat& f, Fn&& fn) {
  const Field& fd = space.field();
  const int k = f.dim(), d = space.dim();
  std::vector<Elem> coef(k, 0);
  Point x(d);
  for (;;) {
    for (int c = 0; c < d; ++c) {
      Elem v = f.base()[c];
      for (int r = 0; r < k; ++r)
        if (coef[r]) v = fd.add(v, fd.mul(coef[r], f.basis_row(r)[c]));
      x[c] = v;
    }
    fn(PointRef(x));
    int r = 0;
    while (r < k && ++coef[r] == fd.q()) coef[r++] = 0;
    if (r == k) break;
  }
}

inline IndexSet members_in_flat(const PointSet& x, const AffineFlat& f) {
  check_flat(x.space(), f);
  IndexSet out;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (f.contains(x.field(), x[i])) out.push_back(static_cast<Index>(i));
  return out;
}

inline PointSet points_in_flat(const AffineFlat& f, const PointSet& x) {
  auto idx = members_in_flat(x, f);
  return x.subset(idx);
}

inline std::size_t count_in_flat(const PointSet& x, const AffineFlat& f) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) n += f.contains(x.field(), x[i]);
  return n;
}

// Affinely independent: every added point increases the span dimension.
inline bool affinely_independent(const PointSet& x, std::span<const Index> idx) {
  FlatBuilder b(x.space());
  for (auto i : idx)
    if (!b.add(x[i])) return false;
  return true;
}

namespace detail {

inline bool all_small_subsets_independent(const PointSet& x, std::span<const Index> idx, std::size_t max_size) {
  // Depth-first over subsets of size <= max_size, sharing prefix spans.
  std::vector<FlatBuilder> stack(max_size + 1, FlatBuilder(x.space()));
  const std::size_t n = idx.size();
  std::vector<std::size_t> pick;
  std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) -> bool {
    if (depth == max_size) return true;
    for (std::size_t t = start; t < n; ++t) {
      stack[depth + 1] = stack[depth];
      if (!stack[depth + 1].add(x[idx[t]])) return false;
      if (!rec(t + 1, depth + 1)) return false;
    }
    return true;
  };
  return rec(0, 0);
}

}  // namespace detail

// General position: no k+2 points in a k-flat for 1 <= k <= d-1.
inline bool is_igp(const PointSet& x, std::span<const Index> idx) {
  const std::size_t m = idx.size();
  const std::size_t d = static_cast<std::size_t>(x.dim());
  if (m <= 2) return m < 2 || idx[0] != idx[1];
  if (m <= d + 1) return affinely_independent(x, idx);
  return detail::all_small_subsets_independent(x, idx, d + 1);
}

inline bool is_igp(const PointSet& s) {
  auto idx = s.all_indices();
  return is_igp(s, idx);
}

// k points whose span has dimension at most k-2.
inline bool is_coplanar_kset(const PointSet& x, std::span<const Index> idx) {
  if (idx.size() < 3) fail(ErrorKind::TooSmall, "coplanarity needs at least 3 points");
  return span_dim(x, idx) <= static_cast<int>(idx.size()) - 2;
}

inline bool is_coplanar_kset(const PointSet& s) {
  auto idx = s.all_indices();
  return is_coplanar_kset(s, idx);
}

// Coplanar, and every proper subset is in general position.
inline bool is_critical_coplanar(const PointSet& x, std::span<const Index> idx) {
  if (idx.size() < 3) fail(ErrorKind::TooSmall, "coplanarity needs at least 3 points");
  if (!is_coplanar_kset(x, idx)) return false;
  IndexSet sub;
  for (std::size_t drop = 0; drop < idx.size(); ++drop) {
    sub.clear();
    for (std::size_t t = 0; t < idx.size(); ++t)
      if (t != drop) sub.push_back(idx[t]);
    if (!is_igp(x, sub)) return false;
  }
  return true;
}

inline bool is_critical_coplanar(const PointSet& s) {
  auto idx = s.all_indices();
  return is_critical_coplanar(s, idx);
}

// Affine coefficients of u over the affinely independent points y
// (sum of coefficients is 1); nullopt if u is outside their span.
inline std::optional<std::vector<Elem>> affine_coordinates(const Space& space, std::span<const PointRef> y, PointRef u) {
  const Field& fd = space.field();
  const int d = space.dim();
  const std::size_t m = y.size();
  if (m == 0) fail(ErrorKind::EmptySet, "empty support candidate");
  // Columns y_t - y_0 for t >= 1, right-hand side u - y_0.
  std::vector<std::vector<Elem>> a(d, std::vector<Elem>(m, 0));
  for (int c = 0; c < d; ++c) {
    for (std::size_t t = 1; t < m; ++t) a[c][t - 1] = fd.sub(y[t][c], y[0][c]);
    a[c][m - 1] = fd.sub(u[c], y[0][c]);
  }
  auto piv = detail::rref(fd, a, static_cast<int>(m) - 1);
  for (std::size_t r = piv.size(); r < a.size(); ++r)
    if (a[r][m - 1] != 0) return std::nullopt;
  if (piv.size() != m - 1) fail(ErrorKind::NotIGP, "points are not affinely independent");
  std::vector<Elem> lam(m, 0);
  Elem rest = 1;
  for (std::size_t r = 0; r < piv.size(); ++r) {
    lam[piv[r] + 1] = a[r][m - 1];
    rest = fd.sub(rest, a[r][m - 1]);
  }
  lam[0] = rest;
  return lam;
}

// Minimal support of u in Y: positions (into idx) with nonzero affine coefficient.
inline IndexSet support(const PointSet& x, PointRef u, std::span<const Index> idx) {
  x.space().check_point(u);
  if (idx.empty()) fail(ErrorKind::EmptySet, "empty support candidate");
  if (!affinely_independent(x, idx)) fail(ErrorKind::NotIGP, "support requires affinely independent points");
  std::vector<PointRef> ys;
  for (auto i : idx) ys.push_back(x[i]);
  auto lam = affine_coordinates(x.space(), ys, u);
  if (!lam) fail(ErrorKind::NotInSpan, "point is not in the span of the candidate set");
  IndexSet out;
  for (std::size_t t = 0; t < idx.size(); ++t)
    if ((*lam)[t] != 0) out.push_back(idx[t]);
  return out;
}

inline PointSet support(PointRef u, const PointSet& y) {
  auto idx = y.all_indices();
  auto s = support(y, u, idx);
  return y.subset(s);
}

// Lexicographic enumeration of r-subsets of [0, n); fn returns false to stop.
template <class Fn>
bool for_each_combination(std::size_t n, std::size_t r, Fn&& fn) {
  if (r > n) return true;
  std::vector<std::size_t> c(r);
  for (std::size_t i = 0; i < r; ++i) c[i] = i;
  for (;;) {
    if (!fn(std::span<const std::size_t>(c))) return false;
    std::size_t i = r;
    while (i > 0 && c[i - 1] == n - r + i - 1) --i;
    if (i == 0) return true;
    ++c[i - 1];
    for (std::size_t j = i; j < r; ++j) c[j] = c[j - 1] + 1;
  }
}

}  // namespace flatsat
