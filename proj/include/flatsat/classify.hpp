#pragma once

// Structure-versus-randomness classifier: either many coplanar (d+1)-sets,
// or a dense family of balanced (i+1)-sets (plus good sets when j > i).

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "flatsat/balance.hpp"
#include "flatsat/parallel.hpp"
#include "flatsat/rng.hpp"

namespace flatsat {

struct Budget {
  std::uint64_t enumeration = 50'000'000ULL;  // subsets or candidates per stage
  std::uint64_t search_nodes = 20'000'000ULL; // backtracking nodes
};

enum class CaseTag { Structure, BalancedHigh, BalancedLow, NoCaseFound };

inline std::string_view to_string(CaseTag t) {
  switch (t) {
    case CaseTag::Structure: return "Structure";
    case CaseTag::BalancedHigh: return "BalancedHigh";
    case CaseTag::BalancedLow: return "BalancedLow";
    case CaseTag::NoCaseFound: return "NoCaseFound";
  }
  return "";
}

struct CoplanarEstimate {
  std::uint64_t samples = 0;
  std::uint64_t hits = 0;
  double estimate = 0, ci_low = 0, ci_high = 0;
};

struct ClassificationOutcome {
  CaseTag tag = CaseTag::NoCaseFound;
  int i = -1, j = -1;
  Rational eps;
  Hierarchy hierarchy;
  std::size_t n = 0;
  bool below_size_threshold = false;  // n < C q

  BigInt coplanar_count;
  std::optional<CoplanarEstimate> coplanar_sampled;
  Rational structure_threshold;  // gamma^{2d} n^{d+1}

  // a_counts[i][j] = |A_{i,j}|, balanced_counts[i][j] counts those with balanced span (row 0 unused).
  std::vector<std::vector<BigInt>> a_counts, balanced_counts;
  std::vector<BigInt> window_sums;            // sum_i |A_{i,j}| n^{d-i-1}
  std::vector<Rational> window_thresholds;    // beta_j n^d
  std::vector<Rational> level_thresholds;     // beta_{j*} eps_i n^{i+1}, index i

  std::vector<IndexSet> balanced_sets;
  std::vector<GoodSet> good_sets;
  std::string note;
};

namespace detail {

inline CoplanarEstimate sample_coplanar(const PointSet& x, std::uint64_t samples, std::uint64_t seed) {
  const std::size_t n = x.size(), r = static_cast<std::size_t>(x.dim()) + 1;
  CoplanarEstimate e;
  e.samples = samples;
  CounterRng rng(KeyHasher(seed).mix(0xc0b1a4).value());
  IndexSet pick;
  for (std::uint64_t t = 0; t < samples; ++t) {
    pick.clear();
    while (pick.size() < r) {
      auto v = static_cast<Index>(rng.below(n));
      if (std::find(pick.begin(), pick.end(), v) == pick.end()) pick.push_back(v);
    }
    if (!affinely_independent(x, pick)) ++e.hits;
  }
  double total = to_double(binomial(n, r));
  double f = samples ? double(e.hits) / double(samples) : 0.0;
  double half = samples ? 1.96 * std::sqrt(f * (1 - f) / double(samples)) : 1.0;
  e.estimate = f * total;
  e.ci_low = std::max(0.0, f - half) * total;
  e.ci_high = std::min(1.0, f + half) * total;
  return e;
}

}  // namespace detail

// Number of coplanar (d+1)-subsets, from the flat census.
inline BigInt coplanar_dset_count(const FlatCensus& census, int d) {
  BigInt total = 0;
  for (int k = 1; k <= std::min(d - 1, census.max_dim()); ++k)
    for (auto id : census.level(k)) total += census.exact_span_count(id, static_cast<std::size_t>(d) + 1);
  return total;
}

// r-subsets of a census flat's members whose span is the whole flat.
template <class Fn>
void for_each_exact_spanning_subset(const FlatCensus& census, std::uint32_t id, std::size_t r, Fn&& fn) {
  const auto& f = census[id];
  const PointSet& x = census.ground();
  IndexSet pick(r);
  for_each_combination(f.members.size(), r, [&](std::span<const std::size_t> c) {
    for (std::size_t t = 0; t < r; ++t) pick[t] = f.members[c[t]];
    if (span_dim(x, pick) == f.dim) fn(std::span<const Index>(pick));
    return true;
  });
}

inline ClassificationOutcome classify(const PointSet& x, const EpsilonParams& params, const Budget& budget = {}, std::uint64_t seed = 0) {
  const int d = x.dim();
  const std::size_t n = x.size();
  const std::uint32_t q = x.field().q();
  params.validate(d);
  if (n == 0) fail(ErrorKind::EmptySet, "classification needs at least one point");
  ClassificationOutcome out;
  out.eps = params.eps;
  out.hierarchy = params.resolved(d);
  out.n = n;
  out.below_size_threshold = Rational(BigInt(n)) < params.C * Rational(BigInt(q));
  const Hierarchy& h = out.hierarchy;
  out.structure_threshold = pow(h.gamma, static_cast<unsigned>(2 * d)) * Rational(pow(BigInt(n), static_cast<unsigned>(d + 1)));

  std::optional<FlatCensus> census;
  try {
    census.emplace(x, d - 1, budget.enumeration);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::BudgetExceeded) throw;
    auto est = detail::sample_coplanar(x, std::min<std::uint64_t>(budget.enumeration / 8, 2'000'000), seed);
    out.coplanar_sampled = est;
    out.coplanar_count = BigInt(static_cast<long long>(est.estimate));
    if (Rational(BigInt(static_cast<long long>(est.ci_low))) >= out.structure_threshold) {
      out.tag = CaseTag::Structure;
      out.note = "coplanar count estimated by sampling";
      return out;
    }
    throw;
  }

  out.coplanar_count = coplanar_dset_count(*census, d);
  if (Rational(out.coplanar_count) >= out.structure_threshold) {
    out.tag = CaseTag::Structure;
    return out;
  }

  // Density windows of every spanned i-flat, 1 <= i <= d-1.
  out.a_counts.assign(d, std::vector<BigInt>(d, 0));
  out.balanced_counts.assign(d, std::vector<BigInt>(d, 0));
  std::vector<std::vector<std::vector<std::uint32_t>>> balanced_flats(d, std::vector<std::vector<std::uint32_t>>(d));
  for (int i = 1; i <= d - 1; ++i) {
    for (auto id : census->level(i)) {
      const auto& f = (*census)[id];
      auto w = density_window(f.members.size(), i, params.eps, n, q, d);
      if (!w) continue;
      BigInt cnt = census->exact_span_count(id, static_cast<std::size_t>(i) + 1);
      out.a_counts[i][*w] += cnt;
      if (balance_dim_from_profile(census->max_subflat_counts(id), params.eps) == i) {
        out.balanced_counts[i][*w] += cnt;
        balanced_flats[i][*w].push_back(id);
      }
    }
  }

  const Rational nd(pow(BigInt(n), static_cast<unsigned>(d)));
  int jstar = -1;
  for (int j = 0; j < d; ++j) {
    BigInt sum = 0;
    for (int i = 1; i <= d - 1; ++i) sum += out.a_counts[i][j] * pow(BigInt(n), static_cast<unsigned>(d - i - 1));
    out.window_sums.push_back(sum);
    out.window_thresholds.push_back(h.beta_j(j) * nd);
    if (jstar < 0 && Rational(sum) >= out.window_thresholds.back()) jstar = j;
  }
  if (jstar < 0) {
    out.note = "no window j reaches beta_j n^d";
    return out;
  }
  int istar = -1;
  out.level_thresholds.assign(d, Rational(0));
  for (int i = 1; i <= d - 1; ++i) {
    out.level_thresholds[i] = h.beta_j(jstar) * h.eps_i(i) * Rational(pow(BigInt(n), static_cast<unsigned>(i + 1)));
    if (istar < 0 && Rational(out.a_counts[i][jstar]) >= out.level_thresholds[i]) istar = i;
  }
  if (istar < 0) {
    out.j = jstar;
    out.note = "window j* = " + std::to_string(jstar) + " found but no level i reaches beta_j* eps_i n^{i+1}";
    return out;
  }
  out.i = istar;
  out.j = jstar;

  BigInt bal = out.balanced_counts[istar][jstar];
  if (bal == 0) {
    out.note = "no (i*,j*)-balanced flat among the dense windows";
    return out;
  }
  if (bal > BigInt(budget.enumeration)) fail(ErrorKind::BudgetExceeded, "balanced family too large to enumerate");
  const std::size_t r = static_cast<std::size_t>(istar) + 1;
  for (auto id : balanced_flats[istar][jstar])
    for_each_exact_spanning_subset(*census, id, r, [&](std::span<const Index> s) { out.balanced_sets.emplace_back(s.begin(), s.end()); });
  std::sort(out.balanced_sets.begin(), out.balanced_sets.end());

  if (jstar <= istar) {
    out.tag = CaseTag::BalancedHigh;
    return out;
  }

  // Good sets: every point of J lies in a balanced transversal, so J is drawn
  // from the vertices of the balanced family.
  std::set<std::uint32_t> bal_ids(balanced_flats[istar][jstar].begin(), balanced_flats[istar][jstar].end());
  IndexSet verts;
  for (const auto& s : out.balanced_sets) verts.insert(verts.end(), s.begin(), s.end());
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  const std::size_t jr = static_cast<std::size_t>(jstar) + 1;
  if (binomial(verts.size(), jr) > BigInt(budget.enumeration)) fail(ErrorKind::BudgetExceeded, "good-set candidates exceed the budget");
  census->prepare_all();
  const FlatCensus& cen = *census;
  auto per_first = parallel_map(verts.size(), [&](std::size_t a) {
    std::vector<GoodSet> found;
    if (verts.size() - a < jr) return found;
    IndexSet J(jr);
    J[0] = verts[a];
    for_each_combination(verts.size() - a - 1, jr - 1, [&](std::span<const std::size_t> c) {
      for (std::size_t t = 0; t + 1 < jr; ++t) J[t + 1] = verts[a + 1 + c[t]];
      if (!affinely_independent(x, J)) return true;
      auto fj = cen.find_span(J);
      if (!fj || !good_density(cen[*fj].members.size(), n, q, jstar, d)) return true;
      auto g = find_good_partition(x, J, istar, jstar, [&](std::span<const Index> I) {
        auto fi = cen.find_span(I);
        return fi && bal_ids.count(*fi) > 0;
      });
      if (g) found.push_back(std::move(*g));
      return true;
    });
    return found;
  });
  for (auto& v : per_first)
    for (auto& g : v) out.good_sets.push_back(std::move(g));
  std::sort(out.good_sets.begin(), out.good_sets.end(), [](const GoodSet& a, const GoodSet& b) {
    IndexSet sa = a.J, sb = b.J;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return sa < sb;
  });
  if (out.good_sets.empty()) {
    out.note = "balanced family found for j* > i* but no good (j*+1)-set exists";
    return out;
  }
  out.tag = CaseTag::BalancedLow;
  return out;
}

}  // namespace flatsat
