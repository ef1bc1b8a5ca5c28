#pragma once

// Heavy and balanced flats, density windows, and good sets.

#include <algorithm>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "flatsat/census.hpp"
#include "flatsat/rational.hpp"

namespace flatsat {

struct Hierarchy {
  Rational gamma;
  std::vector<Rational> beta;  // beta[j], j = 0..d-1
  std::vector<Rational> eps;   // eps[i - 1], i = 1..d

  const Rational& beta_j(int j) const { return beta.at(static_cast<std::size_t>(j)); }
  const Rational& eps_i(int i) const { return eps.at(static_cast<std::size_t>(i - 1)); }

  // Flattened as (gamma, beta_0..beta_{d-1}, eps_1..eps_d).
  std::vector<Rational> flatten() const {
    std::vector<Rational> out{gamma};
    out.insert(out.end(), beta.begin(), beta.end());
    out.insert(out.end(), eps.begin(), eps.end());
    return out;
  }
  static Hierarchy unflatten(const std::vector<Rational>& v, int d) {
    if (v.size() != static_cast<std::size_t>(2 * d + 1))
      fail(ErrorKind::BadParams, "hierarchy needs " + std::to_string(2 * d + 1) + " values, got " + std::to_string(v.size()));
    Hierarchy h;
    h.gamma = v[0];
    h.beta.assign(v.begin() + 1, v.begin() + 1 + d);
    h.eps.assign(v.begin() + 1 + d, v.end());
    return h;
  }
};

struct EpsilonParams {
  Rational eps = Rational(3, 10);
  Rational C = Rational(1);
  std::optional<Hierarchy> hierarchy;

  void validate(int d) const {
    if (eps <= 0 || eps >= 1) fail(ErrorKind::BadParams, "eps must lie in (0,1), got " + to_string(eps));
    if (C <= 0) fail(ErrorKind::BadParams, "C must be positive");
    if (hierarchy) {
      auto v = hierarchy->flatten();
      if (v.size() != static_cast<std::size_t>(2 * d + 1)) fail(ErrorKind::BadParams, "hierarchy has the wrong length");
      if (v.front() <= 0) fail(ErrorKind::BadParams, "hierarchy values must be positive");
      v.push_back(eps);
      for (std::size_t t = 1; t < v.size(); ++t)
        if (!(v[t - 1] < v[t])) fail(ErrorKind::BadParams, "hierarchy must increase strictly: gamma < beta_0 < ... < eps_d < eps");
    }
  }

  // gamma = eps^{4d}, beta_j = eps^{3d-j}, eps_i = eps^{2d-i} unless supplied.
  Hierarchy resolved(int d) const {
    if (hierarchy) return *hierarchy;
    Hierarchy h;
    h.gamma = pow(eps, static_cast<unsigned>(4 * d));
    for (int j = 0; j < d; ++j) h.beta.push_back(pow(eps, static_cast<unsigned>(3 * d - j)));
    for (int i = 1; i <= d; ++i) h.eps.push_back(pow(eps, static_cast<unsigned>(2 * d - i)));
    return h;
  }
};

// Window index j in [0, d-1] with c in (E n q^{-(j+1)/d}, E n q^{-j/d}], E = eps^{d-s}.
// Compared through d-th powers: q^j (c^d) <= (E n)^d < q^{j+1} (c^d).
inline std::optional<int> density_window(std::size_t c, int s, const Rational& eps, std::size_t n, std::uint32_t q, int d) {
  if (c == 0) return std::nullopt;
  Rational top = pow(pow(eps, static_cast<unsigned>(d - s)) * Rational(BigInt(n)), static_cast<unsigned>(d));
  BigInt cd = pow(BigInt(c), static_cast<unsigned>(d));
  BigInt qj(1);
  for (int j = 0; j < d; ++j) {
    Rational lo = Rational(cd * qj);
    Rational hi = Rational(cd * qj * q);
    if (lo <= top && top < hi) return j;
    qj *= q;
  }
  return std::nullopt;
}

inline bool in_density_window(std::size_t c, int s, int j, const Rational& eps, std::size_t n, std::uint32_t q, int d) {
  auto w = density_window(c, s, eps, n, q, d);
  return w && *w == j;
}

// heavy at level s: m_s >= eps^{dimF - s} * total.
inline bool heavy_inequality(std::size_t m_s, std::size_t total, int dim_f, int s, const Rational& eps) {
  return Rational(BigInt(m_s)) >= pow(eps, static_cast<unsigned>(dim_f - s)) * Rational(BigInt(total));
}

// Smallest s with the heavy inequality, from the profile of max s-subflat counts.
inline int balance_dim_from_profile(const std::vector<std::size_t>& m, const Rational& eps) {
  const int dim_f = static_cast<int>(m.size()) - 1;
  for (int s = 0; s <= dim_f; ++s)
    if (heavy_inequality(m[s], m[dim_f], dim_f, s, eps)) return s;
  return dim_f;
}

struct HeavyResult {
  bool heavy = false;
  std::optional<AffineFlat> witness;
  std::size_t witness_count = 0;
};

namespace detail {

// Extend g by directions of f until it has dimension s.
inline AffineFlat extend_within(const Space& space, const AffineFlat& g, const AffineFlat& f, int s) {
  FlatBuilder b(space);
  b.assign(g);
  for (int r = 0; r < f.dim() && b.dim() < s; ++r) b.add_direction(f.basis_row(r));
  return b.flat();
}

}  // namespace detail

inline HeavyResult is_heavy(const AffineFlat& f, int s, const Rational& eps, const PointSet& x) {
  check_flat(x.space(), f);
  if (s < 0 || s > f.dim()) fail(ErrorKind::BadDimension, "heaviness level outside 0..dim(F)");
  auto idx = members_in_flat(x, f);
  HeavyResult res;
  if (idx.empty()) {
    // 0 >= eps^k * 0: any s-subflat is a witness.
    FlatBuilder b(x.space());
    b.add(f.base());
    res.heavy = true;
    res.witness = detail::extend_within(x.space(), b.flat(), f, s);
    return res;
  }
  PointSet p = x.subset(idx);
  FlatCensus census(p, s);
  const int top = census.top_dim();
  std::optional<std::uint32_t> best;
  if (top >= s) {
    for (auto id : census.level(s))
      if (!best || census[id].members.size() > census[*best].members.size()) best = id;
  }
  AffineFlat w;
  std::size_t m;
  if (best) {
    w = census[*best].flat;
    m = census[*best].members.size();
  } else {
    w = detail::extend_within(x.space(), span(p), f, s);
    m = p.size();
  }
  res.heavy = heavy_inequality(m, p.size(), f.dim(), s, eps);
  if (res.heavy) {
    res.witness = w;
    res.witness_count = m;
  }
  return res;
}

// Max count of an s-subflat for every s; spans smaller than s hold everything.
inline std::vector<std::size_t> subflat_profile(const AffineFlat& f, const PointSet& x) {
  auto idx = members_in_flat(x, f);
  std::vector<std::size_t> m(static_cast<std::size_t>(f.dim()) + 1, idx.size());
  if (idx.empty()) return m;
  PointSet p = x.subset(idx);
  FlatCensus census(p, f.dim());
  for (int s = 0; s <= f.dim() && s <= census.top_dim(); ++s) {
    std::size_t best = 0;
    for (auto id : census.level(s)) best = std::max(best, census[id].members.size());
    m[s] = best;
  }
  return m;
}

inline int balance_dim(const AffineFlat& f, const Rational& eps, const PointSet& x) {
  check_flat(x.space(), f);
  auto m = subflat_profile(f, x);
  if (m.back() == 0) fail(ErrorKind::EmptyIntersection, "flat contains no point of X");
  return balance_dim_from_profile(m, eps);
}

inline bool is_sj_balanced(const AffineFlat& f, int s, int j, const Rational& eps, const PointSet& x, std::size_t n, std::uint32_t q, int d) {
  if (j < 0 || j > d - 1) fail(ErrorKind::BadParams, "window index j must lie in 0..d-1");
  if (s != f.dim()) fail(ErrorKind::BadParams, "s must equal dim(F)");
  auto m = subflat_profile(f, x);
  if (m.back() == 0) return false;
  if (!in_density_window(m.back(), s, j, eps, n, q, d)) return false;
  return balance_dim_from_profile(m, eps) == s;
}

// Balance tests for spans of ground-set subsets, memoized per flat.
class BalanceCache {
 public:
  BalanceCache(const PointSet& x, Rational eps) : x_(&x), eps_(std::move(eps)) {}

  struct Entry {
    std::size_t count = 0;
    int balance = 0;
  };

  const Entry& stats(const AffineFlat& f) {
    auto it = cache_.find(f);
    if (it != cache_.end()) return it->second;
    auto m = subflat_profile(f, *x_);
    Entry e{m.back(), m.back() ? balance_dim_from_profile(m, eps_) : 0};
    return cache_.emplace(f, e).first->second;
  }

  bool sj_balanced(const AffineFlat& f, int j) {
    const auto& e = stats(f);
    if (e.count == 0 || e.balance != f.dim()) return false;
    return in_density_window(e.count, f.dim(), j, eps_, x_->size(), x_->field().q(), x_->dim());
  }

  const PointSet& ground() const { return *x_; }
  const Rational& eps() const { return eps_; }

 private:
  const PointSet* x_;
  Rational eps_;
  std::unordered_map<AffineFlat, Entry, FlatHash> cache_;
};

struct GoodSet {
  IndexSet J;                        // canonical point order
  std::vector<IndexSet> partition;   // V_1 .. V_{i+1}
  Index root = 0;                    // least point of V_1
  int i = 0;
  int j = 0;
};

inline std::size_t part_one_size(int i, int j) { return static_cast<std::size_t>((j - i + 1) / 2 + 1); }
inline std::size_t part_two_size(int i, int j) { return static_cast<std::size_t>((j - i) / 2 + 1); }

// Every transversal of the partition: one point from each part.
template <class Fn>
bool for_each_transversal(const std::vector<IndexSet>& parts, Fn&& fn) {
  IndexSet pick(parts.size());
  std::vector<std::size_t> pos(parts.size(), 0);
  for (;;) {
    for (std::size_t t = 0; t < parts.size(); ++t) pick[t] = parts[t][pos[t]];
    if (!fn(std::span<const Index>(pick))) return false;
    std::size_t t = 0;
    while (t < parts.size() && ++pos[t] == parts[t].size()) pos[t++] = 0;
    if (t == parts.size()) return true;
  }
}

// Exhaustive partition search. `balanced(I)` says whether span(I) is (i,j)-balanced.
template <class Pred>
std::optional<GoodSet> find_good_partition(const PointSet& x, IndexSet J, int i, int j, Pred&& balanced) {
  J = x.canonical_order(J);
  const std::size_t a = part_one_size(i, j), b = part_two_size(i, j);
  std::optional<GoodSet> found;
  for_each_combination(J.size(), a, [&](std::span<const std::size_t> c1) {
    std::vector<char> used(J.size(), 0);
    IndexSet v1;
    for (auto t : c1) {
      used[t] = 1;
      v1.push_back(J[t]);
    }
    IndexSet rest;
    for (std::size_t t = 0; t < J.size(); ++t)
      if (!used[t]) rest.push_back(J[t]);
    return for_each_combination(rest.size(), b, [&](std::span<const std::size_t> c2) {
      std::vector<char> used2(rest.size(), 0);
      std::vector<IndexSet> parts{v1, {}};
      for (auto t : c2) {
        used2[t] = 1;
        parts[1].push_back(rest[t]);
      }
      for (std::size_t t = 0; t < rest.size(); ++t)
        if (!used2[t]) parts.push_back({rest[t]});
      bool ok = for_each_transversal(parts, [&](std::span<const Index> I) { return balanced(I); });
      if (!ok) return true;
      GoodSet g;
      g.J = J;
      g.partition = parts;
      g.root = v1.front();
      g.i = i;
      g.j = j;
      found = std::move(g);
      return false;
    });
  });
  return found;
}

// |X cap F_J| <= n q^{-j/d}, i.e. c^d q^j <= n^d.
inline bool good_density(std::size_t c, std::size_t n, std::uint32_t q, int j, int d) {
  return pow(BigInt(c), static_cast<unsigned>(d)) * pow(BigInt(q), static_cast<unsigned>(j)) <= pow(BigInt(n), static_cast<unsigned>(d));
}

inline std::optional<GoodSet> is_good_set(const PointSet& x, const IndexSet& J, int i, BalanceCache& cache) {
  const int d = x.dim();
  const int j = static_cast<int>(J.size()) - 1;
  if (!(d - 1 >= j && j > i && i >= 1)) fail(ErrorKind::BadSize, "good sets need d-1 >= j > i >= 1");
  if (!affinely_independent(x, J)) fail(ErrorKind::NotIGP, "candidate good set is not in general position");
  if (!good_density(count_in_flat(x, span(x, J)), x.size(), x.field().q(), j, d)) return std::nullopt;
  return find_good_partition(x, J, i, j, [&](std::span<const Index> I) { return cache.sj_balanced(span(x, I), j); });
}

inline std::optional<GoodSet> is_good_set(const PointSet& x, const IndexSet& J, int i, const Rational& eps) {
  BalanceCache cache(x, eps);
  return is_good_set(x, J, i, cache);
}

// |F_J cap X| / |(F_J \ F) cap X| <= eps^{-d} q^{1/d}, compared as
// (c eps^d)^d <= q r^d.
inline bool good_ratio_check(const PointSet& x, const GoodSet& g, const AffineFlat& f, const Rational& eps) {
  const Space& sp = x.space();
  check_flat(sp, f);
  const int d = x.dim();
  AffineFlat fj = span(x, g.J);
  if (!flat_subset(sp, f, fj)) fail(ErrorKind::BadFlat, "flat is not inside F_J");
  if (f.contains(x.field(), x[g.root])) fail(ErrorKind::BadFlat, "flat contains the root");
  std::size_t c = 0, r = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (!fj.contains(x.field(), x[t])) continue;
    ++c;
    if (!f.contains(x.field(), x[t])) ++r;
  }
  if (r == 0) return false;
  Rational lhs = pow(Rational(BigInt(c)) * pow(eps, static_cast<unsigned>(d)), static_cast<unsigned>(d));
  Rational rhs = Rational(BigInt(x.field().q())) * pow(Rational(BigInt(r)), static_cast<unsigned>(d));
  return lhs <= rhs;
}

}  // namespace flatsat
