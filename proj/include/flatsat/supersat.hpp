#pragma once

// Randomized constructions of coplanar (d+1)-set families, the support
// enlarging substitution, and co-degree accounting.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "flatsat/auxgraph.hpp"
#include "flatsat/classify.hpp"
#include "flatsat/parallel.hpp"
#include "flatsat/rng.hpp"

namespace flatsat {

using Member = IndexSet;

struct CoplanarFamily {
  std::size_t ground_size = 0;
  int d = 0;
  std::uint64_t seed = 0;
  std::vector<Member> members;  // sorted, deduplicated, each sorted
};

struct IndexSetHash {
  std::size_t operator()(const IndexSet& s) const {
    KeyHasher h(0x1f2e3d4c);
    h.mix_all<Index>(s);
    return static_cast<std::size_t>(h.value());
  }
};

// Retention statistics. `sum_p` sums candidate probabilities; `expected_size`
// and `variance` are exact for the distinct resulting sets.
struct ConstructStats {
  std::uint64_t candidates = 0;
  double sum_p = 0;
  double expected_size = 0;
  double variance = 0;
  bool expectation_exact = true;
  std::map<std::string, std::uint64_t> skips;
  std::size_t max_preimage = 0;
  std::uint64_t map_outputs = 0;
  std::map<std::string, std::uint64_t> map_cases;
  std::vector<std::string> log;
  std::size_t aux_graphs_built = 0;
  std::size_t aux_graphs_failed = 0;
  std::size_t aux_graph_violations = 0;
};

struct CoplanarSetList {
  std::vector<Member> sets;
  bool exact = true;
  double sampled_fraction = 1.0;
  double estimated_total = 0;
};

// Exact list from the flat census: each coplanar (d+1)-set spans exactly one
// flat of dimension <= d-1 and is emitted from that flat only.
inline CoplanarSetList all_coplanar_dsets(const PointSet& x, const Budget& budget = {}, std::uint64_t seed = 0) {
  const int d = x.dim();
  const std::size_t r = static_cast<std::size_t>(d) + 1;
  CoplanarSetList out;
  if (x.size() < r) return out;
  try {
    FlatCensus census(x, d - 1, budget.enumeration);
    BigInt work = 0;
    for (int k = 1; k <= d - 1; ++k)
      for (auto id : census.level(k)) work += binomial(census[id].members.size(), r);
    if (work > BigInt(budget.enumeration)) fail(ErrorKind::BudgetExceeded, "coplanar enumeration exceeds the budget");
    for (int k = 1; k <= d - 1; ++k)
      for (auto id : census.level(k))
        for_each_exact_spanning_subset(census, id, r, [&](std::span<const Index> s) { out.sets.emplace_back(s.begin(), s.end()); });
    std::sort(out.sets.begin(), out.sets.end());
    out.estimated_total = static_cast<double>(out.sets.size());
    return out;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::BudgetExceeded) throw;
  }
  // Sampling mode: uniform random (d+1)-subsets, coplanar ones kept.
  const std::uint64_t samples = std::max<std::uint64_t>(1, budget.enumeration / 16);
  CounterRng rng(KeyHasher(seed).mix(0x5a3b1e).value());
  std::unordered_map<IndexSet, char, IndexSetHash> seen;
  std::uint64_t hits = 0;
  IndexSet pick;
  for (std::uint64_t t = 0; t < samples; ++t) {
    pick.clear();
    while (pick.size() < r) {
      auto v = static_cast<Index>(rng.below(x.size()));
      if (std::find(pick.begin(), pick.end(), v) == pick.end()) pick.push_back(v);
    }
    std::sort(pick.begin(), pick.end());
    if (!affinely_independent(x, pick)) {
      ++hits;
      seen.emplace(pick, 1);
    }
  }
  for (auto& [s, _] : seen) out.sets.push_back(s);
  std::sort(out.sets.begin(), out.sets.end());
  out.exact = false;
  double total = to_double(binomial(x.size(), r));
  out.sampled_fraction = double(samples) / total;
  out.estimated_total = double(hits) / double(samples) * total;
  return out;
}

namespace detail {

inline std::uint64_t candidate_key(std::uint64_t seed, std::uint64_t tag, std::initializer_list<std::span<const Index>> parts) {
  KeyHasher h(seed);
  h.mix(tag);
  for (auto p : parts) h.mix_all<Index>(p);
  return h.value();
}

constexpr std::uint64_t kTagStructure = 0x5354;
constexpr std::uint64_t kTagHigh = 0x4849;
constexpr std::uint64_t kTagLow = 0x4c4f;

// Candidate outcomes keyed by resulting set, for exact expectation.
class Expectation {
 public:
  explicit Expectation(std::uint64_t cap) : cap_(cap) {}
  void add(const Member& m, double p) {
    sum_p_ += p;
    if (!exact_) return;
    if (log_miss_.size() >= cap_ && !log_miss_.count(m)) {
      exact_ = false;
      log_miss_.clear();
      return;
    }
    log_miss_[m] += (p >= 1.0) ? -1e300 : std::log1p(-p);
  }
  void merge(const Expectation& o) {
    sum_p_ += o.sum_p_;
    if (!o.exact_) exact_ = false;
    if (!exact_) {
      log_miss_.clear();
      return;
    }
    for (auto& [m, v] : o.log_miss_) log_miss_[m] += v;
    if (log_miss_.size() > cap_) {
      exact_ = false;
      log_miss_.clear();
    }
  }
  void finish(ConstructStats& st) const {
    st.sum_p = sum_p_;
    st.expectation_exact = exact_;
    if (!exact_) {
      st.expected_size = sum_p_;
      st.variance = 0;
      return;
    }
    // Sum in a fixed order for reproducible floating point.
    std::vector<std::pair<Member, double>> v(log_miss_.begin(), log_miss_.end());
    std::sort(v.begin(), v.end());
    double e = 0, var = 0;
    for (auto& [m, lm] : v) {
      double pk = -std::expm1(lm);
      e += pk;
      var += pk * (1 - pk);
    }
    st.expected_size = e;
    st.variance = var;
  }

 private:
  std::uint64_t cap_;
  double sum_p_ = 0;
  bool exact_ = true;
  std::unordered_map<Member, double, IndexSetHash> log_miss_;
};

inline double rational_to_double(const Rational& r) { return to_double(r); }

inline void finalize(CoplanarFamily& fam) {
  std::sort(fam.members.begin(), fam.members.end());
  fam.members.erase(std::unique(fam.members.begin(), fam.members.end()), fam.members.end());
}

inline void check_coplanar_members(const PointSet& x, const CoplanarFamily& fam) {
  for (const auto& m : fam.members)
    if (!is_coplanar_kset(x, m)) fail(ErrorKind::InvariantViolation, "retained set is not coplanar");
}

}  // namespace detail

// Each set kept independently with probability 1/q.
inline CoplanarFamily construct_structure(const PointSet& x, const CoplanarSetList& c, std::uint64_t seed, ConstructStats* stats = nullptr) {
  CoplanarFamily fam{x.size(), x.dim(), seed, {}};
  const std::uint32_t q = x.field().q();
  Bernoulli keep(Rational(1, q));
  const std::size_t chunk = 4096;
  const std::size_t tasks = (c.sets.size() + chunk - 1) / chunk;
  auto parts = parallel_map(tasks, [&](std::size_t t) {
    std::vector<Member> kept;
    for (std::size_t i = t * chunk; i < std::min(c.sets.size(), (t + 1) * chunk); ++i)
      if (keep(detail::candidate_key(seed, detail::kTagStructure, {c.sets[i]}))) kept.push_back(c.sets[i]);
    return kept;
  });
  for (auto& p : parts) fam.members.insert(fam.members.end(), p.begin(), p.end());
  detail::finalize(fam);
  detail::check_coplanar_members(x, fam);
  if (stats) {
    const double p = 1.0 / q, m = static_cast<double>(c.sets.size());
    stats->candidates = c.sets.size();
    stats->sum_p = stats->expected_size = m * p;
    stats->variance = m * p * (1 - p);
    stats->expectation_exact = c.exact;
  }
  return fam;
}

// (d+1)-candidates per distinct (I,u) may be huge; bound the total.
inline BigInt high_candidate_count(const PointSet& x, int i, const std::vector<IndexSet>& family) {
  const int d = x.dim();
  BigInt total = 0;
  for (const auto& I : family) {
    AffineFlat f = span(x, I);
    std::size_t pool = count_in_flat(x, f);
    total += BigInt(pool) * binomial(x.size() - static_cast<std::size_t>(i) - 2, static_cast<std::size_t>(d - i - 1));
  }
  return total;
}

// High-density case: I balanced, u in F_I off the spans of the i-subsets of I,
// W any (d-i-1)-set; keep U u W with probability eps^{d-i} n / (q |F cap X|).
inline CoplanarFamily construct_high(const PointSet& x, int i, int j, const Rational& eps, const std::vector<IndexSet>& family, std::uint64_t seed,
                                     const Budget& budget = {}, ConstructStats* stats = nullptr) {
  const int d = x.dim();
  const std::size_t n = x.size();
  const std::uint32_t q = x.field().q();
  if (j > i) fail(ErrorKind::BadParams, "construct_high needs j <= i");
  CoplanarFamily fam{n, d, seed, {}};
  ConstructStats local;
  if (family.empty()) {
    if (stats) *stats = local;
    return fam;
  }
  if (high_candidate_count(x, i, family) > BigInt(budget.enumeration)) fail(ErrorKind::BudgetExceeded, "high-density candidates exceed the budget");
  const std::size_t wsize = static_cast<std::size_t>(d - i - 1);
  const Rational base = pow(eps, static_cast<unsigned>(d - i)) * Rational(BigInt(n)) / Rational(BigInt(q));

  struct Part {
    std::vector<Member> kept;
    detail::Expectation exp{0};
    std::uint64_t candidates = 0;
    std::uint64_t critical_fail = 0;
  };
  const std::uint64_t cap = budget.enumeration / 4;
  auto parts = parallel_map(family.size(), [&](std::size_t t) {
    Part part;
    part.exp = detail::Expectation(cap);
    IndexSet I = family[t];
    std::sort(I.begin(), I.end());
    AffineFlat f = span(x, I);
    auto members = members_in_flat(x, f);
    Rational p = base / Rational(BigInt(members.size()));
    if (p > 1) fail(ErrorKind::ProbabilityOverflow, "retention probability " + to_string(p) + " > 1 on " + f.describe());
    Bernoulli keep(p);
    const double pd = to_double(p);
    std::vector<AffineFlat> faces;
    for_each_combination(I.size(), I.size() - 1, [&](std::span<const std::size_t> c) {
      IndexSet sub;
      for (auto k : c) sub.push_back(I[k]);
      faces.push_back(span(x, sub));
      return true;
    });
    for (auto u : members) {
      bool on_face = false;
      for (const auto& g : faces)
        if (g.contains(x.field(), x[u])) {
          on_face = true;
          break;
        }
      if (on_face) continue;
      IndexSet U = I;
      U.push_back(u);
      std::sort(U.begin(), U.end());
      if (!is_critical_coplanar(x, U)) {
        ++part.critical_fail;
        continue;
      }
      IndexSet rest;
      for (Index v = 0; v < n; ++v)
        if (!std::binary_search(U.begin(), U.end(), v)) rest.push_back(v);
      IndexSet W(wsize);
      Index uu[1] = {u};
      for_each_combination(rest.size(), wsize, [&](std::span<const std::size_t> c) {
        for (std::size_t k = 0; k < wsize; ++k) W[k] = rest[c[k]];
        ++part.candidates;
        Member m = U;
        m.insert(m.end(), W.begin(), W.end());
        std::sort(m.begin(), m.end());
        part.exp.add(m, pd);
        if (keep(detail::candidate_key(seed, detail::kTagHigh, {I, std::span<const Index>(uu), W}))) part.kept.push_back(std::move(m));
        return true;
      });
    }
    return part;
  });
  detail::Expectation total(cap);
  for (auto& p : parts) {
    fam.members.insert(fam.members.end(), p.kept.begin(), p.kept.end());
    total.merge(p.exp);
    local.candidates += p.candidates;
    if (p.critical_fail) local.skips["critical_coplanar_failed"] += p.critical_fail;
  }
  if (local.skips.count("critical_coplanar_failed")) fail(ErrorKind::InvariantViolation, "I + u was not critical coplanar");
  total.finish(local);
  detail::finalize(fam);
  detail::check_coplanar_members(x, fam);
  if (stats) *stats = local;
  return fam;
}

struct SubstitutionPlan {
  std::vector<AffineFlat> flats;
  IndexSet pool;  // ground indices in X cap F_I off every flat
};

inline bool contains_all(const IndexSet& big, const IndexSet& small) {
  for (auto v : small)
    if (std::find(big.begin(), big.end(), v) == big.end()) return false;
  return true;
}

inline IndexSet set_union(IndexSet a, const IndexSet& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

inline IndexSet set_minus(const IndexSet& a, const IndexSet& drop) {
  IndexSet out;
  for (auto v : a)
    if (std::find(drop.begin(), drop.end(), v) == drop.end()) out.push_back(v);
  return out;
}

inline bool same_set(IndexSet a, IndexSet b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

// Flats in F_I a replacement for x must avoid: F_I cap F_{U+I+u-{z,x}} for
// z in I+U-{x}, F_{J-{x}} cap F_I, and F_{I-{x}}.
inline SubstitutionPlan substitution_plan(const PointSet& x, const IndexSet& J, const IndexSet& I, const IndexSet& U, Index u, Index xo) {
  const Space& sp = x.space();
  if (!affinely_independent(x, J)) fail(ErrorKind::PreconditionViolated, "J is not in general position");
  if (!contains_all(J, I)) fail(ErrorKind::PreconditionViolated, "I is not a subset of J");
  if (!contains_all(J, U)) fail(ErrorKind::PreconditionViolated, "U is not a subset of J");
  if (contains_all(U, I)) fail(ErrorKind::PreconditionViolated, "I is contained in U");
  if (!contains_all(U, {xo}) || !contains_all(I, {xo})) fail(ErrorKind::PreconditionViolated, "x is not in U cap I");
  {
    auto supp = support(x, x[u], J);
    if (!same_set(supp, U)) fail(ErrorKind::PreconditionViolated, "u is not supported by U");
  }
  const int i = static_cast<int>(I.size()) - 1;
  AffineFlat fi = span(x, I);
  SubstitutionPlan plan;
  auto push = [&](const std::optional<AffineFlat>& g) {
    if (!g) return;
    if (g->dim() > i - 1 || !flat_subset(sp, *g, fi)) fail(ErrorKind::InvariantViolation, "forbidden flat is not a proper subflat of F_I");
    if (std::find(plan.flats.begin(), plan.flats.end(), *g) == plan.flats.end()) plan.flats.push_back(*g);
  };
  IndexSet uiu = set_union(set_union(U, I), {u});
  for (auto z : set_minus(set_union(I, U), {xo})) {
    IndexSet s = set_minus(uiu, {z, xo});
    if (s.empty()) continue;
    push(flat_intersect(sp, fi, span(x, s)));
  }
  IndexSet jx = set_minus(J, {xo});
  if (!jx.empty()) push(flat_intersect(sp, span(x, jx), fi));
  push(span(x, set_minus(I, {xo})));
  if (plan.flats.size() > static_cast<std::size_t>(x.dim()) + 2) fail(ErrorKind::InvariantViolation, "more than d+2 forbidden flats");
  for (auto v : members_in_flat(x, fi)) {
    bool bad = false;
    for (const auto& g : plan.flats)
      if (g.contains(x.field(), x[v])) {
        bad = true;
        break;
      }
    if (!bad) plan.pool.push_back(v);
  }
  plan.pool = x.canonical_order(plan.pool);
  return plan;
}

// Substitution graphs Γ_F keyed by flat; absent entries record why they failed.
struct GammaMap {
  std::unordered_map<AffineFlat, BipartiteIncidence, FlatHash> graphs;
  std::unordered_map<AffineFlat, std::string, FlatHash> failures;

  const BipartiteIncidence& at(const AffineFlat& f) const {
    auto it = graphs.find(f);
    if (it != graphs.end()) return it->second;
    auto ft = failures.find(f);
    fail(ErrorKind::SubstitutionStuck, "no substitution graph on " + f.describe() + (ft != failures.end() ? ": " + ft->second : ""));
  }
};

// Γ_F for every transversal flat of every good set, with parts A = B = X cap F.
inline GammaMap build_gamma_map(const PointSet& x, const std::vector<GoodSet>& goods, const Rational& eps, const Budget& budget = {}) {
  GammaMap g;
  for (const auto& gs : goods)
    for_each_transversal(gs.partition, [&](std::span<const Index> I) {
      AffineFlat f = span(x, I);
      if (g.graphs.count(f) || g.failures.count(f)) return true;
      try {
        g.graphs.emplace(f, build_hf(f, f, x, gs.i, eps, budget.search_nodes));
      } catch (const Error& e) {
        g.failures.emplace(f, e.what());
      }
      return true;
    });
  return g;
}

struct MapResult {
  IndexSet g;       // canonical order
  Index root = 0;   // y' with F_{g - y'} = F_{J - y}
  int rounds = 0;
  int path_case = 0;  // 0 identity, 1 single substitution, 2 path walk
};

namespace detail {

inline Index pick_neighbor(const PointSet& x, const GammaMap& gamma, const IndexSet& I, Index w, const SubstitutionPlan& plan) {
  const auto& h = gamma.at(span(x, I));
  const IndexSet* nb = h.neighbors_of(w);
  if (!nb) fail(ErrorKind::SubstitutionStuck, "substituted point is not a vertex of its graph");
  for (auto v : plan.pool)  // pool is in canonical order
    if (std::binary_search(nb->begin(), nb->end(), v)) return v;
  fail(ErrorKind::SubstitutionStuck, plan.pool.empty() ? "replacement pool is empty" : "no graph neighbor in the replacement pool");
}

inline IndexSet replace(const IndexSet& s, Index out, Index in) {
  IndexSet r;
  for (auto v : s) r.push_back(v == out ? in : v);
  return r;
}

}  // namespace detail

// g_u(J): substitute points of J until u is supported by all of it.
inline MapResult support_enlarging_map(const PointSet& x, Index u, const GoodSet& gs, const GammaMap& gamma) {
  const IndexSet& J = gs.J;
  MapResult res;
  res.root = gs.root;
  auto U = support(x, x[u], J);
  if (same_set(U, J)) {
    res.g = J;
    return res;
  }
  const IndexSet& v1 = gs.partition[0];
  const IndexSet& v2 = gs.partition[1];
  IndexSet rest;
  for (std::size_t t = 2; t < gs.partition.size(); ++t) rest.push_back(gs.partition[t][0]);

  auto verify = [&](const IndexSet& cur, const IndexSet& expect) {
    auto s = support(x, x[u], cur);
    if (!same_set(s, expect)) fail(ErrorKind::InvariantViolation, "substitution did not enlarge the support as required");
  };

  if (contains_all(U, v1) && contains_all(U, v2)) {
    // w in V1 other than the root; its transversal with the least V2 point.
    Index w = 0;
    bool have = false;
    for (auto v : v1)
      if (v != gs.root) {
        w = v;
        have = true;
        break;
      }
    if (!have) fail(ErrorKind::SubstitutionStuck, "V1 has no non-root point");
    IndexSet I{w, v2[0]};
    I.insert(I.end(), rest.begin(), rest.end());
    auto plan = substitution_plan(x, J, I, U, u, w);
    Index w2 = detail::pick_neighbor(x, gamma, I, w, plan);
    IndexSet j2 = x.canonical_order(detail::replace(J, w, w2));
    verify(j2, j2);
    res.g = j2;
    res.rounds = 1;
    res.path_case = 1;
    return res;
  }

  const IndexSet path = alternating_ham_path(v2, v1, gs.root);
  IndexSet cur = J, cu = U, removed;
  Index y = gs.root;
  const int max_rounds = gs.j + 1;
  for (int round = 1;; ++round) {
    if (same_set(cu, cur)) break;
    if (round > max_rounds) fail(ErrorKind::SubstitutionStuck, "support not full after j+1 rounds");
    std::optional<std::pair<Index, Index>> edge;
    for (std::size_t t = 0; t + 1 < path.size(); ++t) {
      Index a = path[t], b = path[t + 1];
      if (contains_all(cu, {a}) && !contains_all(cu, {b}) && !contains_all(removed, {b})) {
        edge = std::make_pair(a, b);
        break;
      }
    }
    if (!edge) fail(ErrorKind::SubstitutionStuck, "no path edge leaves the current support");
    auto [w, v] = *edge;
    IndexSet I{w, v};
    I.insert(I.end(), rest.begin(), rest.end());
    auto plan = substitution_plan(x, cur, I, cu, u, w);
    Index w2 = detail::pick_neighbor(x, gamma, I, w, plan);
    IndexSet next = detail::replace(cur, w, w2);
    IndexSet next_u = set_minus(set_union(set_union(cu, I), {w2}), {w});
    verify(next, next_u);
    if (w == y) y = w2;
    removed.push_back(w);
    cur = x.canonical_order(next);
    cu = next_u;
    res.rounds = round;
  }
  res.g = cur;
  res.root = y;
  res.path_case = 2;
  return res;
}

// A1: g + u critical coplanar. A2: F_g = F_J and F_{J - y} = F_{g - y'}.
struct MapCheck {
  bool a1 = false;
  bool a2 = false;
};

inline MapCheck check_map_output(const PointSet& x, Index u, const GoodSet& gs, const MapResult& r) {
  MapCheck c;
  IndexSet gu = r.g;
  gu.push_back(u);
  c.a1 = !contains_all(r.g, {u}) && is_critical_coplanar(x, gu);
  c.a2 = span(x, r.g) == span(x, gs.J) && contains_all(r.g, {r.root}) &&
         span(x, set_minus(gs.J, {gs.root})) == span(x, set_minus(r.g, {r.root}));
  return c;
}

// Candidates u of a good set: X cap (F_J \ F_{J - root}), u not in J.
inline IndexSet low_pool(const PointSet& x, const GoodSet& gs, std::size_t* off_face_count = nullptr) {
  AffineFlat fj = span(x, gs.J);
  AffineFlat fy = span(x, set_minus(gs.J, {gs.root}));
  IndexSet pool;
  std::size_t off = 0;
  for (auto v : members_in_flat(x, fj)) {
    if (fy.contains(x.field(), x[v])) continue;
    ++off;
    if (!contains_all(gs.J, {v})) pool.push_back(v);
  }
  if (off_face_count) *off_face_count = off;
  return pool;
}

// Low-density case: U = g_u(J) + u, W any (d-j-1)-set, kept with probability
// eps^d n / (q |(F_J \ F_{J - y}) cap X|).
inline CoplanarFamily construct_low(const PointSet& x, int i, int j, const Rational& eps, const std::vector<GoodSet>& goods, std::uint64_t seed,
                                    const Budget& budget = {}, ConstructStats* stats = nullptr, const GammaMap* prebuilt = nullptr) {
  const int d = x.dim();
  const std::size_t n = x.size();
  const std::uint32_t q = x.field().q();
  if (!(i < j)) fail(ErrorKind::BadParams, "construct_low needs i < j");
  CoplanarFamily fam{n, d, seed, {}};
  ConstructStats local;
  if (goods.empty()) {
    if (stats) *stats = local;
    return fam;
  }
  GammaMap own;
  if (!prebuilt) own = build_gamma_map(x, goods, eps, budget);
  const GammaMap& gamma = prebuilt ? *prebuilt : own;
  local.aux_graphs_built = gamma.graphs.size();
  local.aux_graphs_failed = gamma.failures.size();
  for (const auto& [f, h] : gamma.graphs)
    if (!validate_hf(h, x, d).ok()) ++local.aux_graph_violations;
  {
    std::vector<std::string> reasons;
    for (const auto& [f, why] : gamma.failures) reasons.push_back(f.describe() + ": " + why);
    std::sort(reasons.begin(), reasons.end());
    for (auto& r : reasons) local.log.push_back("substitution graph unavailable, " + r);
  }
  const std::size_t wsize = static_cast<std::size_t>(d - j - 1);
  const Rational base = pow(eps, static_cast<unsigned>(d)) * Rational(BigInt(n)) / Rational(BigInt(q));
  {
    BigInt total = 0;
    for (const auto& gs : goods) total += BigInt(low_pool(x, gs).size()) * binomial(n - static_cast<std::size_t>(j) - 2, wsize);
    if (total > BigInt(budget.enumeration)) fail(ErrorKind::BudgetExceeded, "low-density candidates exceed the budget");
  }
  const std::uint64_t cap = budget.enumeration / 4;

  struct Part {
    std::vector<Member> kept;
    detail::Expectation exp{0};
    std::uint64_t candidates = 0, outputs = 0;
    std::map<std::string, std::uint64_t> skips, cases;
    std::vector<std::pair<Index, IndexSet>> images;  // (u, g_u(J)) for preimage counts
    std::uint64_t a_fail = 0;
  };
  auto parts = parallel_map(goods.size(), [&](std::size_t t) {
    Part part;
    part.exp = detail::Expectation(cap);
    const GoodSet& gs = goods[t];
    std::size_t off = 0;
    IndexSet pool = low_pool(x, gs, &off);
    Rational p = base / Rational(BigInt(off));
    if (p > 1) fail(ErrorKind::ProbabilityOverflow, "retention probability " + to_string(p) + " > 1 on good set F_J");
    Bernoulli keep(p);
    const double pd = to_double(p);
    IndexSet Jsorted = gs.J;
    std::sort(Jsorted.begin(), Jsorted.end());
    for (auto u : pool) {
      MapResult r;
      try {
        r = support_enlarging_map(x, u, gs, gamma);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::SubstitutionStuck) throw;
        ++part.skips["substitution_stuck"];
        continue;
      }
      auto chk = check_map_output(x, u, gs, r);
      if (!chk.a1 || !chk.a2) {
        ++part.a_fail;
        continue;
      }
      ++part.outputs;
      ++part.cases[r.path_case == 0 ? "identity" : r.path_case == 1 ? "single_substitution" : "path_walk"];
      IndexSet gsort = r.g;
      std::sort(gsort.begin(), gsort.end());
      part.images.emplace_back(u, gsort);
      IndexSet U = gsort;
      U.push_back(u);
      std::sort(U.begin(), U.end());
      IndexSet restv;
      for (Index v = 0; v < n; ++v)
        if (!std::binary_search(U.begin(), U.end(), v)) restv.push_back(v);
      IndexSet W(wsize);
      Index uu[1] = {u};
      for_each_combination(restv.size(), wsize, [&](std::span<const std::size_t> c) {
        for (std::size_t k = 0; k < wsize; ++k) W[k] = restv[c[k]];
        ++part.candidates;
        Member m = U;
        m.insert(m.end(), W.begin(), W.end());
        std::sort(m.begin(), m.end());
        part.exp.add(m, pd);
        if (keep(detail::candidate_key(seed, detail::kTagLow, {Jsorted, std::span<const Index>(uu), W}))) part.kept.push_back(std::move(m));
        return true;
      });
    }
    return part;
  });
  detail::Expectation total(cap);
  std::map<std::pair<Index, IndexSet>, std::size_t> pre;
  std::uint64_t a_fail = 0;
  for (auto& p : parts) {
    fam.members.insert(fam.members.end(), p.kept.begin(), p.kept.end());
    total.merge(p.exp);
    local.candidates += p.candidates;
    local.map_outputs += p.outputs;
    for (auto& [k, v] : p.skips) local.skips[k] += v;
    for (auto& [k, v] : p.cases) local.map_cases[k] += v;
    for (auto& im : p.images) local.max_preimage = std::max(local.max_preimage, ++pre[im]);
    a_fail += p.a_fail;
  }
  if (a_fail) fail(ErrorKind::InvariantViolation, "support enlarging map output failed A1/A2");
  total.finish(local);
  detail::finalize(fam);
  detail::check_coplanar_members(x, fam);
  if (stats) *stats = local;
  return fam;
}

struct ConstructOptions {
  Budget budget;
  bool audit_aux_graphs = false;  // build and check H_F on every balanced witness flat
};

struct AuxAudit {
  std::size_t built = 0;
  std::size_t skipped = 0;
  std::size_t violations = 0;
  std::vector<std::string> notes;
};

struct ConstructResult {
  CoplanarFamily family;
  ClassificationOutcome outcome;
  ConstructStats stats;
  std::optional<CoplanarSetList> structure_pool;
  AuxAudit audit;
};

// H_F for each distinct balanced witness flat: F' = F with s = i.
inline AuxAudit audit_aux_graphs(const PointSet& x, const ClassificationOutcome& out, const Budget& budget) {
  AuxAudit a;
  if (out.tag != CaseTag::BalancedHigh && out.tag != CaseTag::BalancedLow) return a;
  std::vector<AffineFlat> flats;
  std::unordered_map<AffineFlat, char, FlatHash> seen;
  for (const auto& s : out.balanced_sets) {
    AffineFlat f = span(x, s);
    if (seen.emplace(f, 1).second) flats.push_back(f);
  }
  for (const auto& f : flats) {
    try {
      auto h = build_hf(f, f, x, f.dim(), out.eps, budget.search_nodes);
      ++a.built;
      auto c = validate_hf(h, x, x.dim());
      if (!c.ok()) {
        ++a.violations;
        a.notes.push_back("violation on " + f.describe());
      }
    } catch (const Error& e) {
      ++a.skipped;
      if (a.notes.size() < 20) a.notes.push_back(std::string("skipped ") + f.describe() + ": " + e.what());
    }
  }
  return a;
}

inline ConstructResult construct(const PointSet& x, const EpsilonParams& params, std::uint64_t seed, const ConstructOptions& opt = {}) {
  ConstructResult r;
  r.outcome = classify(x, params, opt.budget, seed);
  r.family = CoplanarFamily{x.size(), x.dim(), seed, {}};
  switch (r.outcome.tag) {
    case CaseTag::Structure: {
      r.structure_pool = all_coplanar_dsets(x, opt.budget, seed);
      r.family = construct_structure(x, *r.structure_pool, seed, &r.stats);
      break;
    }
    case CaseTag::BalancedHigh:
      r.family = construct_high(x, r.outcome.i, r.outcome.j, params.eps, r.outcome.balanced_sets, seed, opt.budget, &r.stats);
      break;
    case CaseTag::BalancedLow:
      r.family = construct_low(x, r.outcome.i, r.outcome.j, params.eps, r.outcome.good_sets, seed, opt.budget, &r.stats);
      break;
    case CaseTag::NoCaseFound:
      r.stats.log.push_back("no case fired: " + r.outcome.note);
      break;
  }
  if (opt.audit_aux_graphs) r.audit = audit_aux_graphs(x, r.outcome, opt.budget);
  return r;
}

// Δ_j: most members containing a common j-subset.
inline std::uint64_t codegree(const CoplanarFamily& s, int j) {
  if (j < 1 || j > s.d + 1) fail(ErrorKind::BadJ, "j must lie in 1..d+1");
  std::unordered_map<IndexSet, std::uint64_t, IndexSetHash> count;
  std::uint64_t best = 0;
  IndexSet sub(static_cast<std::size_t>(j));
  for (const auto& m : s.members)
    for_each_combination(m.size(), static_cast<std::size_t>(j), [&](std::span<const std::size_t> c) {
      for (std::size_t t = 0; t < c.size(); ++t) sub[t] = m[c[t]];
      best = std::max(best, ++count[sub]);
      return true;
    });
  return best;
}

struct BoundsReport {
  double c1 = 0;
  std::vector<double> c2;            // index j = 1..d+1 (slot 0 unused)
  std::vector<std::uint64_t> delta;  // Δ_j
  bool c1_pass = false;
  std::vector<bool> c2_pass;
  Rational C;
};

// c1 = |S| q / n^{d+1}; c2(j) = Δ_j n^{j-d-1} q^{(d+1-j)/d}. Pass means
// c1 >= 1/C and c2(j) <= C, both compared exactly.
inline BoundsReport verify_bounds(const CoplanarFamily& s, std::uint32_t q, int d, const Rational& C = Rational(100)) {
  BoundsReport r;
  r.C = C;
  const double n = static_cast<double>(s.ground_size);
  const BigInt nb(s.ground_size);
  r.c1 = n > 0 ? double(s.members.size()) * q / std::pow(n, d + 1) : 0.0;
  r.c1_pass = Rational(BigInt(s.members.size())) * Rational(BigInt(q)) * C >= Rational(pow(nb, static_cast<unsigned>(d + 1)));
  r.c2.assign(static_cast<std::size_t>(d) + 2, 0.0);
  r.delta.assign(static_cast<std::size_t>(d) + 2, 0);
  r.c2_pass.assign(static_cast<std::size_t>(d) + 2, true);
  for (int j = 1; j <= d + 1; ++j) {
    std::uint64_t dj = s.members.empty() ? 0 : codegree(s, j);
    r.delta[j] = dj;
    r.c2[j] = n > 0 ? double(dj) * std::pow(n, j - d - 1) * std::pow(double(q), double(d + 1 - j) / d) : 0.0;
    // (Δ_j n^{j-d-1})^d q^{d+1-j} <= C^d
    Rational lhs = pow(Rational(BigInt(dj)) / Rational(pow(nb, static_cast<unsigned>(d + 1 - j))), static_cast<unsigned>(d)) *
                   Rational(pow(BigInt(q), static_cast<unsigned>(d + 1 - j)));
    r.c2_pass[j] = n > 0 && lhs <= pow(C, static_cast<unsigned>(d));
  }
  return r;
}

}  // namespace flatsat
