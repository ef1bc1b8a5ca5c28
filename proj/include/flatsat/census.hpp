#pragma once

// Every flat spanned by points of a set, grouped by dimension, with member
// lists and subflat relations. Level k is grown from level k-1 by adding one
// outside point at a time.

#include <algorithm>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "flatsat/predicates.hpp"
#include "flatsat/rational.hpp"

namespace flatsat {

struct CensusFlat {
  AffineFlat flat;
  int dim = 0;
  IndexSet members;   // sorted indices into the ground set
  IndexSet spanning;  // dim+1 independent members spanning the flat
};

class FlatCensus {
 public:
  // Flats of dimension 0..max_dim. `budget` caps span computations.
  FlatCensus(const PointSet& x, int max_dim, std::uint64_t budget = 400'000'000ULL)
      : x_(&x), max_dim_(std::min(max_dim, x.dim())) {
    build(budget);
  }

  const PointSet& ground() const { return *x_; }
  int max_dim() const { return max_dim_; }
  std::size_t size() const { return flats_.size(); }
  const CensusFlat& operator[](std::size_t id) const { return flats_[id]; }
  const std::vector<std::uint32_t>& level(int k) const { return levels_.at(static_cast<std::size_t>(k)); }
  int top_dim() const {
    for (int k = max_dim_; k >= 0; --k)
      if (!levels_[k].empty()) return k;
    return -1;
  }

  std::optional<std::uint32_t> find(const AffineFlat& f) const {
    auto it = ids_.find(f);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  // Census id of span(x[idx]); the span must have dimension <= max_dim.
  std::optional<std::uint32_t> find_span(std::span<const Index> idx) const {
    FlatBuilder b(x_->space());
    for (auto i : idx) b.add((*x_)[i]);
    if (b.dim() > max_dim_) return std::nullopt;
    return find(b.flat());
  }

  // Census flats of dimension s contained in flat `id` (s < dim).
  const std::vector<std::uint32_t>& subflats(std::uint32_t id, int s) const {
    ensure_subflats(id);
    return sub_[id][static_cast<std::size_t>(s)];
  }

  // Largest member count of an s-flat inside flat `id`, for s = 0..dim.
  std::vector<std::size_t> max_subflat_counts(std::uint32_t id) const {
    const auto& f = flats_[id];
    std::vector<std::size_t> m(static_cast<std::size_t>(f.dim) + 1, 0);
    m[0] = 1;
    for (int s = 1; s < f.dim; ++s)
      for (auto g : subflats(id, s)) m[s] = std::max(m[s], flats_[g].members.size());
    m[f.dim] = f.members.size();
    return m;
  }

  // Number of r-subsets (r >= 2) of the members whose span is exactly this flat.
  BigInt exact_span_count(std::uint32_t id, std::size_t r) const {
    auto key = std::make_pair(id, r);
    if (auto it = span_count_.find(key); it != span_count_.end()) return it->second;
    const auto& f = flats_[id];
    BigInt c = binomial(f.members.size(), r);
    if (static_cast<std::size_t>(f.dim) + 1 > r) {
      c = 0;
    } else {
      // Point flats contribute nothing for r >= 2.
      for (int s = 1; s < f.dim; ++s)
        for (auto g : subflats(id, s)) c -= exact_span_count(g, r);
    }
    span_count_.emplace(key, c);
    return c;
  }

  // Subflat relations are filled lazily; call this before sharing across threads.
  void prepare_all() const {
    for (std::uint32_t id = 0; id < flats_.size(); ++id) ensure_subflats(id);
  }

 private:
  void build(std::uint64_t budget) {
    const PointSet& x = *x_;
    const std::size_t n = x.size();
    levels_.assign(static_cast<std::size_t>(std::max(max_dim_, 0)) + 1, {});
    if (n == 0 || max_dim_ < 0) return;
    FlatBuilder b(x.space());
    for (std::size_t i = 0; i < n; ++i) {
      b.reset();
      b.add(x[i]);
      add_flat(b.flat(), 0, {static_cast<Index>(i)}, {static_cast<Index>(i)});
    }
    std::uint64_t work = 0;
    std::vector<char> covered(n);
    for (int k = 1; k <= max_dim_; ++k) {
      const auto prev = levels_[k - 1];
      for (auto gid : prev) {
        std::fill(covered.begin(), covered.end(), 0);
        for (auto m : flats_[gid].members) covered[m] = 1;
        for (std::size_t p = 0; p < n; ++p) {
          if (covered[p]) continue;
          if (++work > budget) fail(ErrorKind::BudgetExceeded, "flat census exceeded its budget");
          b.assign(flats_[gid].flat);
          b.add(x[p]);
          AffineFlat f = b.flat();
          std::uint32_t fid;
          if (auto hit = ids_.find(f); hit != ids_.end()) {
            fid = hit->second;
          } else {
            IndexSet members;
            for (std::size_t t = 0; t < n; ++t)
              if (f.contains(x.field(), x[t])) members.push_back(static_cast<Index>(t));
            work += n / 16;
            IndexSet sp = flats_[gid].spanning;
            sp.push_back(static_cast<Index>(p));
            std::sort(sp.begin(), sp.end());
            fid = add_flat(std::move(f), k, std::move(members), std::move(sp));
          }
          for (auto m : flats_[fid].members) covered[m] = 1;
        }
      }
      // Canonical order within a level: by sorted member list.
      auto& lv = levels_[k];
      std::sort(lv.begin(), lv.end(), [&](std::uint32_t a, std::uint32_t c) { return flats_[a].members < flats_[c].members; });
    }
    renumber();
  }

  std::uint32_t add_flat(AffineFlat f, int dim, IndexSet members, IndexSet spanning) {
    auto id = static_cast<std::uint32_t>(flats_.size());
    ids_.emplace(f, id);
    flats_.push_back({std::move(f), dim, std::move(members), std::move(spanning)});
    levels_[dim].push_back(id);
    return id;
  }

  // Ids follow (dimension, member list) order so iteration is canonical.
  void renumber() {
    std::vector<CensusFlat> sorted;
    sorted.reserve(flats_.size());
    for (auto& lv : levels_)
      for (auto id : lv) sorted.push_back(std::move(flats_[id]));
    flats_ = std::move(sorted);
    ids_.clear();
    std::uint32_t id = 0;
    for (auto& lv : levels_)
      for (auto& slot : lv) {
        slot = id;
        ids_.emplace(flats_[id].flat, id);
        ++id;
      }
    sub_.assign(flats_.size(), {});
    sub_ready_.assign(flats_.size(), 0);
  }

  void ensure_subflats(std::uint32_t id) const {
    if (sub_ready_[id]) return;
    const auto& f = flats_[id];
    std::vector<std::vector<std::uint32_t>> out(static_cast<std::size_t>(std::max(f.dim, 1)));
    if (f.dim >= 2) {
      std::vector<char> in(x_->size(), 0);
      for (auto m : f.members) in[m] = 1;
      for (int s = 1; s < f.dim; ++s)
        for (auto g : levels_[s]) {
          bool inside = true;
          for (auto sp : flats_[g].spanning)
            if (!in[sp]) {
              inside = false;
              break;
            }
          if (inside) out[s].push_back(g);
        }
    }
    sub_[id] = std::move(out);
    sub_ready_[id] = 1;
  }

  const PointSet* x_;
  int max_dim_;
  std::vector<CensusFlat> flats_;
  std::vector<std::vector<std::uint32_t>> levels_;
  std::unordered_map<AffineFlat, std::uint32_t, FlatHash> ids_;
  mutable std::vector<std::vector<std::vector<std::uint32_t>>> sub_;
  mutable std::vector<char> sub_ready_;
  mutable std::map<std::pair<std::uint32_t, std::size_t>, BigInt> span_count_;
};

}  // namespace flatsat
