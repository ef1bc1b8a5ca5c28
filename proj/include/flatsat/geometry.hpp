#pragma once

// Points, affine flats and point sets in F_q^d.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "flatsat/field.hpp"

namespace flatsat {

using Point = std::vector<Elem>;
using PointRef = std::span<const Elem>;
using Index = std::uint32_t;
using IndexSet = std::vector<Index>;

class Space {
 public:
  Space(Field field, int d) : field_(std::move(field)), d_(d) {
    if (d < 1) fail(ErrorKind::BadDimension, "ambient dimension must be positive");
    long double size = 1;
    for (int i = 0; i < d; ++i) size *= field_.q();
    if (size >= 1.8e19L) fail(ErrorKind::BadDimension, "q^d does not fit in 64 bits");
  }

  const Field& field() const { return field_; }
  int dim() const { return d_; }
  std::uint32_t q() const { return field_.q(); }
  std::uint64_t size() const {
    std::uint64_t s = 1;
    for (int i = 0; i < d_; ++i) s *= field_.q();
    return s;
  }

  bool operator==(const Space& o) const { return d_ == o.d_ && field_ == o.field_; }

  // Lexicographic rank of a point; canonical point order is rank order.
  std::uint64_t rank(PointRef x) const {
    std::uint64_t r = 0;
    for (auto c : x) r = r * field_.q() + c;
    return r;
  }
  Point unrank(std::uint64_t r) const {
    Point x(d_);
    for (int i = d_; i-- > 0;) {
      x[i] = static_cast<Elem>(r % field_.q());
      r /= field_.q();
    }
    return x;
  }

  void check_point(PointRef x) const {
    if (static_cast<int>(x.size()) != d_)
      fail(ErrorKind::BadDimension, "point has " + std::to_string(x.size()) + " coordinates, expected " + std::to_string(d_));
    for (auto c : x)
      if (!field_.contains(c)) fail(ErrorKind::MixedFields, "coordinate " + std::to_string(c) + " is not in GF(" + std::to_string(q()) + ")");
  }

 private:
  Field field_;
  int d_;
};

// All q^d points in lexicographic order.
inline std::vector<Point> enumerate_space(const Field& field, int d, std::uint64_t budget = 50'000'000ULL) {
  Space sp(field, d);
  if (sp.size() > budget) fail(ErrorKind::BudgetExceeded, "q^d = " + std::to_string(sp.size()) + " exceeds the enumeration budget");
  std::vector<Point> out;
  out.reserve(sp.size());
  for (std::uint64_t r = 0; r < sp.size(); ++r) out.push_back(sp.unrank(r));
  return out;
}

class FlatBuilder;

// Canonical affine flat: reduced row echelon direction basis and a base point
// whose pivot coordinates are zero. Equal flats have equal representations.
class AffineFlat {
 public:
  AffineFlat() = default;

  int ambient_dim() const { return d_; }
  int dim() const { return static_cast<int>(pivots_.size()); }
  std::uint64_t field_id() const { return field_id_; }
  PointRef base() const { return base_; }
  PointRef basis_row(int r) const { return PointRef(basis_).subspan(std::size_t(r) * d_, d_); }
  std::span<const int> pivots() const { return pivots_; }

  bool operator==(const AffineFlat& o) const {
    return field_id_ == o.field_id_ && d_ == o.d_ && pivots_ == o.pivots_ && base_ == o.base_ && basis_ == o.basis_;
  }

  std::size_t hash() const {
    std::uint64_t h = field_id_ ^ (std::uint64_t(d_) << 56) ^ (std::uint64_t(pivots_.size()) << 48);
    auto mixin = [&h](std::uint64_t v) { h = (h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2))); };
    for (auto c : base_) mixin(c);
    for (auto c : basis_) mixin(c);
    return static_cast<std::size_t>(h);
  }

  // Membership: x - sum_r x[piv_r] * row_r must equal the base point.
  bool contains(const Field& f, PointRef x) const {
    for (int c = 0; c < d_; ++c) {
      Elem v = x[c];
      for (std::size_t r = 0; r < pivots_.size(); ++r) {
        Elem b = basis_[r * d_ + c];
        if (b) v = f.sub(v, f.mul(x[pivots_[r]], b));
      }
      if (v != base_[c]) return false;
    }
    return true;
  }

  std::string describe() const {
    std::string s = "flat(dim=" + std::to_string(dim()) + ", base=(";
    for (int c = 0; c < d_; ++c) s += (c ? "," : "") + std::to_string(base_[c]);
    s += ")";
    for (int r = 0; r < dim(); ++r) {
      s += r ? ",(" : ", dirs=(";
      for (int c = 0; c < d_; ++c) s += (c ? "," : "") + std::to_string(basis_[static_cast<std::size_t>(r) * d_ + c]);
      s += ")";
    }
    s += ")";
    return s;
  }

 private:
  friend class FlatBuilder;
  std::uint64_t field_id_ = 0;
  int d_ = 0;
  Point base_;
  std::vector<Elem> basis_;
  std::vector<int> pivots_;
};

struct FlatHash {
  std::size_t operator()(const AffineFlat& f) const { return f.hash(); }
};

// Incremental span: add points one at a time, keeping the direction space in RREF.
class FlatBuilder {
 public:
  explicit FlatBuilder(const Space& space) : f_(&space.field()), fid_(space.field().id()), d_(space.dim()), v_(space.dim()) {}

  void reset() {
    origin_.clear();
    rows_.clear();
    pivots_.clear();
  }

  void assign(const AffineFlat& flat) {
    origin_.assign(flat.base_.begin(), flat.base_.end());
    rows_ = flat.basis_;
    pivots_ = flat.pivots_;
  }

  bool empty() const { return origin_.empty(); }
  int dim() const { return origin_.empty() ? -1 : static_cast<int>(pivots_.size()); }

  // Returns true iff the point was not already in the span.
  bool add(PointRef x) {
    if (origin_.empty()) {
      origin_.assign(x.begin(), x.end());
      return true;
    }
    reduce(x);
    int piv = -1;
    for (int c = 0; c < d_; ++c)
      if (v_[c]) {
        piv = c;
        break;
      }
    if (piv < 0) return false;
    Elem s = f_->inv(v_[piv]);
    for (int c = piv; c < d_; ++c) v_[c] = f_->mul(v_[c], s);
    for (std::size_t r = 0; r < pivots_.size(); ++r) {
      Elem e = rows_[r * d_ + piv];
      if (e)
        for (int c = 0; c < d_; ++c) rows_[r * d_ + c] = f_->sub(rows_[r * d_ + c], f_->mul(e, v_[c]));
    }
    std::size_t pos = 0;
    while (pos < pivots_.size() && pivots_[pos] < piv) ++pos;
    pivots_.insert(pivots_.begin() + static_cast<std::ptrdiff_t>(pos), piv);
    rows_.insert(rows_.begin() + static_cast<std::ptrdiff_t>(pos * d_), v_.begin(), v_.end());
    return true;
  }

  // Adds a direction vector (not a point) to the span.
  bool add_direction(PointRef dir) {
    Point x(d_);
    for (int c = 0; c < d_; ++c) x[c] = f_->add(origin_[c], dir[c]);
    return add(x);
  }

  bool contains(PointRef x) const {
    if (origin_.empty()) return false;
    reduce(x);
    for (int c = 0; c < d_; ++c)
      if (v_[c]) return false;
    return true;
  }

  AffineFlat flat() const {
    if (origin_.empty()) fail(ErrorKind::EmptySet, "span of the empty set");
    AffineFlat out;
    out.field_id_ = fid_;
    out.d_ = d_;
    out.pivots_ = pivots_;
    out.basis_ = rows_;
    out.base_ = origin_;
    for (std::size_t r = 0; r < pivots_.size(); ++r) {
      Elem e = out.base_[pivots_[r]];
      if (e)
        for (int c = 0; c < d_; ++c) out.base_[c] = f_->sub(out.base_[c], f_->mul(e, rows_[r * d_ + c]));
    }
    return out;
  }

 private:
  void reduce(PointRef x) const {
    for (int c = 0; c < d_; ++c) v_[c] = f_->sub(x[c], origin_[c]);
    for (std::size_t r = 0; r < pivots_.size(); ++r) {
      Elem e = v_[pivots_[r]];
      if (e)
        for (int c = 0; c < d_; ++c) v_[c] = f_->sub(v_[c], f_->mul(e, rows_[r * d_ + c]));
    }
  }

  const Field* f_;
  std::uint64_t fid_;
  int d_;
  Point origin_;
  std::vector<Elem> rows_;
  std::vector<int> pivots_;
  mutable Point v_;
};

// Deduplicated ordered list of points of one space. Indices follow insertion order.
class PointSet {
 public:
  explicit PointSet(Space space) : space_(std::move(space)) {}

  static PointSet from_points(const Space& space, const std::vector<Point>& pts) {
    PointSet s(space);
    for (const auto& p : pts) s.push_back(p);
    return s;
  }

  static PointSet full_space(const Space& space) {
    PointSet s(space);
    const std::uint64_t n = space.size();
    for (std::uint64_t r = 0; r < n; ++r) s.push_back(space.unrank(r));
    return s;
  }

  void push_back(PointRef x) {
    space_.check_point(x);
    auto r = space_.rank(x);
    auto [it, fresh] = index_.emplace(r, static_cast<Index>(size()));
    if (!fresh) fail(ErrorKind::BadPoint, "duplicate point at index " + std::to_string(size()));
    coords_.insert(coords_.end(), x.begin(), x.end());
    ranks_.push_back(r);
  }

  const Space& space() const { return space_; }
  const Field& field() const { return space_.field(); }
  int dim() const { return space_.dim(); }
  std::size_t size() const { return ranks_.size(); }
  bool empty() const { return ranks_.empty(); }

  PointRef operator[](std::size_t i) const { return PointRef(coords_).subspan(i * space_.dim(), space_.dim()); }
  Point point(std::size_t i) const { auto r = (*this)[i]; return Point(r.begin(), r.end()); }
  std::uint64_t rank(std::size_t i) const { return ranks_[i]; }

  std::optional<Index> index_of(PointRef x) const {
    if (static_cast<int>(x.size()) != space_.dim()) return std::nullopt;
    for (auto c : x)
      if (!field().contains(c)) return std::nullopt;
    auto it = index_.find(space_.rank(x));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  PointSet subset(std::span<const Index> idx) const {
    PointSet s(space_);
    for (auto i : idx) s.push_back((*this)[i]);
    return s;
  }

  // Indices sorted by canonical point order.
  IndexSet canonical_order(std::span<const Index> idx) const {
    IndexSet out(idx.begin(), idx.end());
    std::sort(out.begin(), out.end(), [&](Index a, Index b) { return ranks_[a] < ranks_[b]; });
    return out;
  }

  IndexSet all_indices() const {
    IndexSet out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<Index>(i);
    return out;
  }

 private:
  Space space_;
  std::vector<Elem> coords_;
  std::vector<std::uint64_t> ranks_;
  std::unordered_map<std::uint64_t, Index> index_;
};

}  // namespace flatsat
