#pragma once

// p-random subsets of F_q^d and maximum general-position subsets.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flatsat/parallel.hpp"
#include "flatsat/predicates.hpp"
#include "flatsat/rng.hpp"

namespace flatsat {

inline constexpr std::uint64_t kTagRandomSubset = 0x5052;

inline PointSet p_random_subset(const Space& space, const Rational& p, std::uint64_t seed, std::uint64_t p_index = 0, std::uint64_t trial = 0,
                                std::uint64_t budget = 50'000'000ULL) {
  if (space.size() > budget) fail(ErrorKind::BudgetExceeded, "q^d exceeds the point budget");
  Bernoulli keep(p);
  PointSet s(space);
  for (std::uint64_t r = 0; r < space.size(); ++r)
    if (keep(KeyHasher(seed).mix(kTagRandomSubset).mix(p_index).mix(trial).mix(r).value())) s.push_back(space.unrank(r));
  return s;
}

inline PointSet p_random_subset(std::uint32_t q, int d, const Rational& p, std::uint64_t seed) {
  return p_random_subset(Space(make_field(q), d), p, seed);
}

inline PointSet moment_curve(const Field& f, int d) {
  Space space(f, d);
  PointSet s(space);
  Point x(static_cast<std::size_t>(d));
  for (Elem t = 0; t < f.q(); ++t) {
    Elem pw = t;
    for (int c = 0; c < d; ++c) {
      x[c] = pw;
      pw = f.mul(pw, t);
    }
    s.push_back(x);
  }
  return s;
}

inline PointSet moment_curve(std::uint32_t q, int d) { return moment_curve(make_field(q), d); }

enum class SolverMode { Exact, Greedy, Both, Auto };

inline std::string_view to_string(SolverMode m) {
  switch (m) {
    case SolverMode::Exact: return "exact";
    case SolverMode::Greedy: return "greedy";
    case SolverMode::Both: return "both";
    case SolverMode::Auto: return "auto";
  }
  return "";
}

inline SolverMode parse_solver_mode(std::string_view s) {
  if (s == "exact") return SolverMode::Exact;
  if (s == "greedy") return SolverMode::Greedy;
  if (s == "both") return SolverMode::Both;
  if (s == "auto") return SolverMode::Auto;
  fail(ErrorKind::BadParams, "unknown solver mode '" + std::string(s) + "'");
}

namespace detail {

// Incremental IGP extension over a fixed ground set. `alive[c]` is true when
// the chosen set plus c is still in general position.
class GpExtender {
 public:
  explicit GpExtender(const PointSet& x) : x_(x), alive_(x.size(), 1), d_(x.dim()), alive_count_(x.size()) {}

  const IndexSet& chosen() const { return chosen_; }
  bool alive(Index c) const { return alive_[c] != 0; }
  std::size_t alive_count() const { return alive_count_; }

  // Adds v and returns the candidates it kills (for undo).
  IndexSet add(Index v) {
    IndexSet killed;
    kill(v, killed);
    // Flats spanned by v and T, T a subset of the chosen set with |T| <= d-1.
    FlatBuilder fb(x_.space());
    fb.add(x_[v]);
    grow(fb, 0, 1, killed);
    chosen_.push_back(v);
    return killed;
  }

  void undo(const IndexSet& killed) {
    chosen_.pop_back();
    for (auto c : killed) alive_[c] = 1;
    alive_count_ += killed.size();
  }

 private:
  void kill(Index c, IndexSet& killed) {
    if (!alive_[c]) return;
    alive_[c] = 0;
    --alive_count_;
    killed.push_back(c);
  }

  void sweep(const FlatBuilder& fb, IndexSet& killed) {
    for (Index c = 0; c < x_.size(); ++c)
      if (alive_[c] && fb.contains(x_[c])) kill(c, killed);
  }

  void grow(const FlatBuilder& fb, std::size_t start, int size, IndexSet& killed) {
    // fb spans v and size-1 chosen points; it is a flat of dim size-1 <= d-1
    if (size > 1) sweep(fb, killed);
    if (size >= d_) return;
    for (std::size_t t = start; t < chosen_.size(); ++t) {
      FlatBuilder next = fb;
      next.add(x_[chosen_[t]]);
      grow(next, t + 1, size + 1, killed);
    }
  }

  const PointSet& x_;
  std::vector<char> alive_;
  int d_;
  std::size_t alive_count_;
  IndexSet chosen_;
};

}  // namespace detail

struct GpResult {
  std::size_t value = 0;
  IndexSet witness;  // indices into X
  bool optimal = false;
  std::uint64_t nodes = 0;
  std::string mode;  // "exact", "greedy", "bnb-partial"
};

inline GpResult greedy_general_position(const PointSet& x) {
  GpResult r;
  r.mode = "greedy";
  detail::GpExtender ext(x);
  for (auto v : x.canonical_order(x.all_indices()))
    if (ext.alive(v)) ext.add(v);
  r.witness = ext.chosen();
  r.value = r.witness.size();
  return r;
}

// Branch and bound in canonical point order. Bound: every coordinate
// hyperplane x_t = c holds at most d points of a general-position set.
// On budget exhaustion throws BudgetExceeded unless allow_partial is set,
// in which case the best incumbent is returned with mode "bnb-partial".
inline GpResult exact_general_position(const PointSet& x, std::uint64_t node_budget = 20'000'000ULL, bool allow_partial = false) {
  const int d = x.dim();
  const std::uint32_t q = x.field().q();
  IndexSet order = x.canonical_order(x.all_indices());
  GpResult best = greedy_general_position(x);
  best.mode = "exact";
  detail::GpExtender ext(x);
  // coordinate-hyperplane occupancy of the chosen set
  std::vector<std::vector<int>> used(static_cast<std::size_t>(d), std::vector<int>(q, 0));
  std::vector<std::vector<int>> avail(static_cast<std::size_t>(d), std::vector<int>(q, 0));
  std::uint64_t nodes = 0;
  bool exhausted = false;

  auto bound = [&](std::size_t from) {
    const std::size_t cur = ext.chosen().size();
    std::size_t rem = 0;
    for (auto& row : avail) std::fill(row.begin(), row.end(), 0);
    for (std::size_t t = from; t < order.size(); ++t) {
      Index c = order[t];
      if (!ext.alive(c)) continue;
      ++rem;
      auto pt = x[c];
      for (int k = 0; k < d; ++k) ++avail[k][pt[k]];
    }
    std::size_t b = cur + rem;
    for (int k = 0; k < d; ++k) {
      std::size_t s = cur;
      for (std::uint32_t v = 0; v < q; ++v) s += static_cast<std::size_t>(std::max(0, std::min(d - used[k][v], avail[k][v])));
      b = std::min(b, s);
    }
    return b;
  };

  std::function<void(std::size_t)> rec = [&](std::size_t from) {
    if (exhausted) return;
    if (++nodes > node_budget) {
      exhausted = true;
      return;
    }
    if (ext.chosen().size() > best.value) {
      best.value = ext.chosen().size();
      best.witness = ext.chosen();
    }
    if (bound(from) <= best.value) return;
    for (std::size_t t = from; t < order.size(); ++t) {
      Index c = order[t];
      if (!ext.alive(c)) continue;
      auto pt = x[c];
      for (int k = 0; k < d; ++k) ++used[k][pt[k]];
      auto killed = ext.add(c);
      rec(t + 1);
      ext.undo(killed);
      for (int k = 0; k < d; ++k) --used[k][pt[k]];
      if (exhausted) return;
      if (bound(t + 1) <= best.value) return;
    }
  };
  rec(0);
  best.nodes = nodes;
  if (exhausted) {
    if (!allow_partial) fail(ErrorKind::BudgetExceeded, "branch and bound exceeded " + std::to_string(node_budget) + " nodes");
    best.mode = "bnb-partial";
    best.optimal = false;
  } else {
    best.optimal = true;
  }
  return best;
}

inline GpResult max_general_position(const PointSet& x, SolverMode mode, std::uint64_t node_budget = 20'000'000ULL) {
  switch (mode) {
    case SolverMode::Greedy: return greedy_general_position(x);
    case SolverMode::Exact: return exact_general_position(x, node_budget, false);
    case SolverMode::Auto: return exact_general_position(x, node_budget, true);
    case SolverMode::Both: break;
  }
  fail(ErrorKind::BadParams, "max_general_position takes a single solver mode");
}

// N(q,d,k): number of k-subsets of F_q^d in general position, by pruned DFS.
inline BigInt count_igp_ksets(std::uint32_t q, int d, int k, std::uint64_t budget = 50'000'000ULL) {
  if (k < 0) fail(ErrorKind::BadParams, "k must be nonnegative");
  Space space(make_field(q), d);
  if (binomial(space.size(), static_cast<std::size_t>(k)) > BigInt(budget))
    fail(ErrorKind::BudgetExceeded, "C(q^d, k) exceeds the enumeration budget");
  if (k == 0) return 1;
  PointSet x = PointSet::full_space(space);
  detail::GpExtender ext(x);
  BigInt total = 0;
  std::function<void(Index)> rec = [&](Index from) {
    if (static_cast<int>(ext.chosen().size()) == k - 1) {
      for (Index c = from; c < x.size(); ++c)
        if (ext.alive(c)) ++total;
      return;
    }
    for (Index c = from; c < x.size(); ++c) {
      if (!ext.alive(c)) continue;
      auto killed = ext.add(c);
      rec(c + 1);
      ext.undo(killed);
    }
  };
  rec(0);
  return total;
}

struct SweepConfig {
  std::uint32_t q = 0;
  int d = 0;
  std::vector<Rational> grid;
  int trials = 1;
  std::uint64_t seed = 0;
  SolverMode mode = SolverMode::Auto;
  std::uint64_t node_budget = 200'000ULL;
  bool timing = false;

  void validate() const {
    if (trials < 1) fail(ErrorKind::BadParams, "trials must be at least 1");
    if (grid.empty()) fail(ErrorKind::BadParams, "empty p grid");
    for (std::size_t t = 0; t < grid.size(); ++t) {
      if (grid[t] < 0 || grid[t] > 1) fail(ErrorKind::BadParams, "grid value " + to_string(grid[t]) + " outside [0,1]");
      if (t && !(grid[t - 1] < grid[t])) fail(ErrorKind::BadParams, "grid must be strictly ascending");
    }
  }
};

struct SweepRow {
  Rational p;
  std::size_t p_index = 0;
  int trial = 0;
  std::size_t sample_size = 0;
  std::size_t alpha = 0;
  std::string mode;
  std::int64_t millis = 0;
};

// Round x to a rational with denominator 10^6, clamped to [0,1].
inline Rational round_rational(double x) {
  const long long den = 1'000'000;
  long long num = std::llround(std::clamp(x, 0.0, 1.0) * den);
  return Rational(num, den);
}

inline Rational lower_boundary(std::uint32_t q, int d) { return round_rational(std::pow(double(q), -double(d) + 1.0 / d)); }
inline Rational upper_boundary(std::uint32_t q, int d) { return round_rational(std::pow(double(q), -1.0 + 1.0 / d)); }

// p = 0, the two regime boundaries, and log-spaced points from q^{-d} to 1.
inline std::vector<Rational> auto_grid(std::uint32_t q, int d, int points = 20) {
  std::vector<Rational> g{Rational(0), lower_boundary(q, d), upper_boundary(q, d), Rational(1)};
  const double lo = -double(d) * std::log(double(q));
  const int inner = points - 4;
  for (int t = 0; t <= inner; ++t) {
    double x = std::exp(lo * (1.0 - double(t) / inner));
    g.push_back(t == inner ? Rational(1) : round_rational(x));
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  // top up with midpoints if rounding merged values
  while (static_cast<int>(g.size()) < points) {
    std::size_t best = 1;
    for (std::size_t t = 1; t < g.size(); ++t)
      if (g[t] - g[t - 1] > g[best] - g[best - 1]) best = t;
    g.insert(g.begin() + static_cast<std::ptrdiff_t>(best), (g[best] + g[best - 1]) / 2);
  }
  return g;
}

inline std::vector<SweepRow> alpha_sweep(const SweepConfig& cfg) {
  cfg.validate();
  Space space(make_field(cfg.q), cfg.d);
  std::vector<SolverMode> modes;
  if (cfg.mode == SolverMode::Both)
    modes = {SolverMode::Exact, SolverMode::Greedy};
  else
    modes = {cfg.mode};
  const std::size_t tasks = cfg.grid.size() * static_cast<std::size_t>(cfg.trials);
  auto per = parallel_map(tasks, [&](std::size_t t) {
    const std::size_t pi = t / static_cast<std::size_t>(cfg.trials);
    const int trial = static_cast<int>(t % static_cast<std::size_t>(cfg.trials));
    PointSet s = p_random_subset(space, cfg.grid[pi], cfg.seed, pi, static_cast<std::uint64_t>(trial));
    std::vector<SweepRow> rows;
    for (auto m : modes) {
      auto start = std::chrono::steady_clock::now();
      GpResult r = max_general_position(s, m, cfg.node_budget);
      auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
      if (!is_igp(s, r.witness)) fail(ErrorKind::InvariantViolation, "solver witness is not in general position");
      rows.push_back(SweepRow{cfg.grid[pi], pi, trial, s.size(), r.value, r.mode, cfg.timing ? static_cast<std::int64_t>(ms) : 0});
    }
    return rows;
  });
  std::vector<SweepRow> out;
  for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
  return out;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
}

struct SweepPoint {
  Rational p;
  double median_alpha = 0;
  double median_size = 0;
  std::size_t exact_rows = 0, rows = 0;
};

// Per-p medians over the rows of one solver mode family (greedy rows are
// skipped when exact-type rows exist for that p).
inline std::vector<SweepPoint> sweep_summary(const std::vector<SweepRow>& rows) {
  std::vector<SweepPoint> out;
  std::size_t t = 0;
  while (t < rows.size()) {
    std::size_t e = t;
    while (e < rows.size() && rows[e].p_index == rows[t].p_index) ++e;
    SweepPoint sp;
    sp.p = rows[t].p;
    bool has_exactish = false;
    for (std::size_t k = t; k < e; ++k) has_exactish |= rows[k].mode != "greedy";
    std::vector<double> a, s;
    for (std::size_t k = t; k < e; ++k) {
      if (has_exactish && rows[k].mode == "greedy") continue;
      a.push_back(double(rows[k].alpha));
      s.push_back(double(rows[k].sample_size));
      ++sp.rows;
      if (rows[k].mode == "exact") ++sp.exact_rows;
    }
    sp.median_alpha = median(a);
    sp.median_size = median(s);
    out.push_back(sp);
    t = e;
  }
  return out;
}

}  // namespace flatsat
