#pragma once

// Support hypergraphs, tight Hamiltonian cycles, the bipartite graphs H_F and
// alternating Hamiltonian paths.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <unordered_map>
#include <vector>

#include "flatsat/balance.hpp"
#include "flatsat/classify.hpp"

namespace flatsat {

// k-uniform hypergraph on vertices 0..n-1 with explicit edges.
class KGraph {
 public:
  KGraph(int k, std::size_t n) : k_(k), n_(n), degree_(n, 0) {
    if (k < 1) fail(ErrorKind::BadParams, "uniformity must be positive");
  }

  void add_edge(IndexSet e) {
    std::sort(e.begin(), e.end());
    if (static_cast<int>(e.size()) != k_ || std::adjacent_find(e.begin(), e.end()) != e.end())
      fail(ErrorKind::BadParams, "edge must have exactly k distinct vertices");
    if (e.back() >= n_) fail(ErrorKind::BadParams, "edge vertex out of range");
    if (edges_.insert(e).second)
      for (auto v : e) ++degree_[v];
  }

  bool has_edge(std::span<const Index> e) const {
    IndexSet s(e.begin(), e.end());
    std::sort(s.begin(), s.end());
    return edges_.count(s) > 0;
  }

  int k() const { return k_; }
  std::size_t vertex_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::set<IndexSet>& edges() const { return edges_; }
  std::size_t degree(Index v) const { return degree_.at(v); }

 private:
  int k_;
  std::size_t n_;
  std::set<IndexSet> edges_;
  std::vector<std::size_t> degree_;
};

// All (s+1)-subsets of x[idx] are affinely independent: no s+1 points in an (s-1)-flat.
inline bool is_support_edge(const PointSet& x, std::span<const Index> idx, int s) {
  return detail::all_small_subsets_independent(x, idx, static_cast<std::size_t>(s) + 1);
}

// (2sd+1)-uniform graph on the points of p; edges are the subsets admitting an
// ordering whose first s points are in general position and whose later points
// avoid every flat spanned by s earlier ones. That condition does not depend on
// the ordering and equals is_support_edge.
inline KGraph build_support_kgraph(const PointSet& p, int s, int d, std::uint64_t budget = 50'000'000ULL) {
  if (s < 1) fail(ErrorKind::BadParams, "support graphs need s >= 1");
  const std::size_t k = static_cast<std::size_t>(2 * s * d + 1);
  if (p.size() < k) fail(ErrorKind::TooFewPoints, "need at least 2sd+1 = " + std::to_string(k) + " points, have " + std::to_string(p.size()));
  if (binomial(p.size(), k) > BigInt(budget)) fail(ErrorKind::BudgetExceeded, "too many candidate edges");
  KGraph g(static_cast<int>(k), p.size());
  IndexSet e(k);
  for_each_combination(p.size(), k, [&](std::span<const std::size_t> c) {
    for (std::size_t t = 0; t < k; ++t) e[t] = static_cast<Index>(c[t]);
    if (is_support_edge(p, e, s)) g.add_edge(e);
    return true;
  });
  return g;
}

namespace detail {

// Backtracking over cyclic orders with order[0] = 0. `extend_ok(order, t)`
// validates the window ending at position t; `wrap_ok(window)` validates
// windows that wrap around the end.
template <class Extend, class Wrap>
std::vector<Index> tight_cycle_search(std::size_t n, std::size_t k, const std::vector<Index>& try_order, Extend&& extend_ok, Wrap&& wrap_ok,
                                      std::uint64_t node_budget) {
  if (n < k || n == 0) fail(ErrorKind::NoCycleFound, "fewer vertices than the uniformity");
  std::vector<Index> order(n);
  std::vector<char> used(n, 0);
  order[0] = try_order.empty() ? 0 : try_order[0];
  used[order[0]] = 1;
  std::uint64_t nodes = 0;
  IndexSet win(k);
  std::function<bool(std::size_t)> rec = [&](std::size_t t) -> bool {
    if (++nodes > node_budget) fail(ErrorKind::BudgetExceeded, "tight cycle search exceeded its node budget");
    if (t == n) {
      for (std::size_t start = n - k + 1; start < n; ++start) {
        for (std::size_t w = 0; w < k; ++w) win[w] = order[(start + w) % n];
        if (!wrap_ok(std::span<const Index>(win))) return false;
      }
      return true;
    }
    for (auto v : try_order) {
      if (used[v]) continue;
      order[t] = v;
      if (!extend_ok(std::span<const Index>(order.data(), t + 1), t)) continue;
      used[v] = 1;
      if (rec(t + 1)) return true;
      used[v] = 0;
    }
    return false;
  };
  if (!extend_ok(std::span<const Index>(order.data(), 1), 0) || !rec(1)) fail(ErrorKind::NoCycleFound, "no tight Hamiltonian cycle exists");
  return order;
}

}  // namespace detail

// Cyclic vertex order whose every k consecutive vertices form an edge.
inline std::vector<Index> tight_hamiltonian_cycle(const KGraph& g, std::uint64_t node_budget = 20'000'000ULL) {
  const std::size_t n = g.vertex_count(), k = static_cast<std::size_t>(g.k());
  for (Index v = 0; v < n; ++v)
    if (g.degree(v) == 0) fail(ErrorKind::NoCycleFound, "vertex " + std::to_string(v) + " lies in no edge");
  // Most constrained vertices first.
  std::vector<Index> try_order(n);
  for (Index v = 0; v < n; ++v) try_order[v] = v;
  std::stable_sort(try_order.begin(), try_order.end(), [&](Index a, Index b) { return g.degree(a) < g.degree(b); });
  auto extend = [&](std::span<const Index> order, std::size_t t) {
    if (t + 1 < k) return true;
    return g.has_edge(order.subspan(t + 1 - k, k));
  };
  auto wrap = [&](std::span<const Index> w) { return g.has_edge(w); };
  return detail::tight_cycle_search(n, k, try_order, extend, wrap, node_budget);
}

// Tight cycle of the support graph on x[verts], without materializing edges.
inline std::vector<Index> support_tight_cycle(const PointSet& x, const IndexSet& verts, int s, int d, std::uint64_t node_budget) {
  const std::size_t n = verts.size(), k = static_cast<std::size_t>(2 * s * d + 1);
  if (n < k) fail(ErrorKind::TooFewPoints, "need at least 2sd+1 = " + std::to_string(k) + " points, have " + std::to_string(n));
  std::vector<Index> try_order(n);
  for (Index v = 0; v < n; ++v) try_order[v] = v;
  IndexSet buf;
  // The window ending at t is valid iff the new point keeps every (s+1)-subset
  // containing it independent, given earlier windows were validated.
  auto extend = [&](std::span<const Index> order, std::size_t t) {
    std::size_t lo = t + 1 >= k ? t + 1 - k : 0;
    IndexSet prev;
    for (std::size_t w = lo; w < t; ++w) prev.push_back(verts[order[w]]);
    const Index v = verts[order[t]];
    const std::size_t m = std::min<std::size_t>(prev.size(), static_cast<std::size_t>(s));
    for (std::size_t r = 0; r <= m; ++r) {
      bool ok = for_each_combination(prev.size(), r, [&](std::span<const std::size_t> c) {
        buf.clear();
        for (auto i : c) buf.push_back(prev[i]);
        buf.push_back(v);
        return affinely_independent(x, buf);
      });
      if (!ok) return false;
    }
    return true;
  };
  auto wrap = [&](std::span<const Index> w) {
    IndexSet pts;
    for (auto i : w) pts.push_back(verts[i]);
    return is_support_edge(x, pts, s);
  };
  auto order = detail::tight_cycle_search(n, k, try_order, extend, wrap, node_budget);
  IndexSet out;
  for (auto i : order) out.push_back(verts[i]);
  return out;
}

// Bipartite graph between A = X cap F and B = X cap F'.
struct BipartiteIncidence {
  int s = 0;
  std::size_t k = 0;                 // 2sd+1
  IndexSet a, b;                     // ground indices, canonical order
  IndexSet cycle;                    // tight cycle on B
  std::vector<IndexSet> neighbors;   // neighbors[pos in a] = sorted ground indices in B

  const IndexSet* neighbors_of(Index u) const {
    auto it = std::lower_bound(a_sorted.begin(), a_sorted.end(), std::make_pair(u, std::size_t{0}));
    if (it == a_sorted.end() || it->first != u) return nullptr;
    return &neighbors[it->second];
  }

  std::size_t b_degree(Index v) const {
    std::size_t deg = 0;
    for (const auto& nb : neighbors) deg += std::binary_search(nb.begin(), nb.end(), v);
    return deg;
  }

  std::vector<std::pair<Index, std::size_t>> a_sorted;  // (ground index, position in a)
};

inline BipartiteIncidence build_hf(const AffineFlat& f, const AffineFlat& fp, const PointSet& x, int s, const Rational& eps,
                                   std::uint64_t node_budget = 20'000'000ULL) {
  const Space& sp = x.space();
  check_flat(sp, f);
  check_flat(sp, fp);
  if (s < 1) fail(ErrorKind::BadParams, "H_F needs s >= 1");
  if (fp.dim() != s) fail(ErrorKind::BadDimension, "F' must be an s-flat");
  if (!flat_subset(sp, fp, f)) fail(ErrorKind::BadFlat, "F' is not inside F");
  const int d = x.dim();
  BipartiteIncidence h;
  h.s = s;
  h.k = static_cast<std::size_t>(2 * s * d + 1);
  h.a = x.canonical_order(members_in_flat(x, f));
  h.b = x.canonical_order(members_in_flat(x, fp));
  if (!heavy_inequality(h.b.size(), h.a.size(), f.dim(), s, eps))
    fail(ErrorKind::HeavinessViolated, "F' does not witness (s,eps,X)-heaviness of F");
  h.cycle = support_tight_cycle(x, h.b, s, d, node_budget);
  const std::size_t m = h.cycle.size();
  h.neighbors.resize(h.a.size());
  for (std::size_t t = 0; t < h.a.size(); ++t) {
    const std::size_t e = t % m;  // equitable round-robin split over the cycle edges
    IndexSet nb;
    for (std::size_t w = 0; w < h.k; ++w) nb.push_back(h.cycle[(e + w) % m]);
    std::sort(nb.begin(), nb.end());
    h.neighbors[t] = std::move(nb);
    h.a_sorted.emplace_back(h.a[t], t);
  }
  std::sort(h.a_sorted.begin(), h.a_sorted.end());
  return h;
}

// True iff the points x[nb] can be covered by at most `flats` flats of dimension <= s-1.
inline bool coverable_by_flats(const PointSet& x, const IndexSet& nb, int s, int flats) {
  if (nb.size() > 64) fail(ErrorKind::BadParams, "cover check supports at most 64 points");
  if (s < 1) return nb.empty();
  // A covering flat may be replaced by the span of the points it covers, which
  // is spanned by at most s of them, so spans of <= s points are exhaustive.
  std::set<std::uint64_t> masks;
  IndexSet pick;
  for (std::size_t r = 1; r <= static_cast<std::size_t>(s) && r <= nb.size(); ++r)
    for_each_combination(nb.size(), r, [&](std::span<const std::size_t> c) {
      pick.clear();
      for (auto i : c) pick.push_back(nb[i]);
      FlatBuilder b(x.space());
      for (auto i : pick) b.add(x[i]);
      if (b.dim() > s - 1) return true;
      std::uint64_t mask = 0;
      for (std::size_t t = 0; t < nb.size(); ++t)
        if (b.contains(x[nb[t]])) mask |= (1ULL << t);
      masks.insert(mask);
      return true;
    });
  std::vector<std::uint64_t> cand(masks.begin(), masks.end());
  const std::uint64_t full = nb.size() == 64 ? ~0ULL : ((1ULL << nb.size()) - 1);
  std::function<bool(std::uint64_t, int)> rec = [&](std::uint64_t covered, int left) -> bool {
    if (covered == full) return true;
    if (left == 0) return false;
    std::uint64_t need = ~covered & full;
    std::uint64_t low = need & (~need + 1);
    for (auto m : cand)
      if ((m & low) && rec(covered | m, left - 1)) return true;
    return false;
  };
  return rec(0, flats);
}

struct HfCheck {
  bool a_degree_ok = true;
  bool b_degree_ok = true;
  bool cover_ok = true;
  std::size_t a_degree = 0;
  std::size_t max_b_degree = 0;
  bool ok() const { return a_degree_ok && b_degree_ok && cover_ok; }
};

// A-side degree 2sd+1 <= 3d^2; B-side degree <= 6d^2 |A|/|B|; no neighborhood
// coverable by 2d flats of dimension s-1.
inline HfCheck validate_hf(const BipartiteIncidence& h, const PointSet& x, int d) {
  HfCheck c;
  c.a_degree = h.k;
  const std::size_t lim_a = static_cast<std::size_t>(3 * d * d);
  for (const auto& nb : h.neighbors) {
    std::set<Index> distinct(nb.begin(), nb.end());
    if (distinct.size() != h.k || h.k > lim_a) c.a_degree_ok = false;
    if (c.cover_ok && coverable_by_flats(x, nb, h.s, 2 * d)) c.cover_ok = false;
  }
  for (auto v : h.b) {
    std::size_t deg = h.b_degree(v);
    c.max_b_degree = std::max(c.max_b_degree, deg);
    if (deg * h.b.size() > static_cast<std::size_t>(6 * d * d) * h.a.size()) c.b_degree_ok = false;
  }
  return c;
}

// b_1 = v, a_1, b_2, a_2, ... with A and B \ {v} in the given order.
inline IndexSet alternating_ham_path(const IndexSet& a, const IndexSet& b, Index v) {
  if (std::find(b.begin(), b.end(), v) == b.end()) fail(ErrorKind::PreconditionViolated, "start vertex must lie in B");
  if (!(a.size() <= b.size() && b.size() <= a.size() + 1)) fail(ErrorKind::SizeMismatch, "need |A| <= |B| <= |A|+1");
  IndexSet rest;
  for (auto x : b)
    if (x != v) rest.push_back(x);
  IndexSet path{v};
  for (std::size_t t = 0; t < a.size(); ++t) {
    path.push_back(a[t]);
    if (t < rest.size()) path.push_back(rest[t]);
  }
  return path;
}

}  // namespace flatsat
