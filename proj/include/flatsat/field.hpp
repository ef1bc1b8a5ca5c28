#pragma once

// GF(q) for q = p^k. Elements are integer codes in [0, q): the residue when
// k = 1, otherwise the coefficient tuple (c_0, ..., c_{k-1}) packed in base p
// with c_0 least significant. Element order is code order.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "flatsat/error.hpp"

namespace flatsat {

using Elem = std::uint32_t;

enum class ArithOp { Add, Sub, Mul, Div };

struct FieldElement {
  Elem code = 0;
  std::uint64_t field_id = 0;
  bool operator==(const FieldElement&) const = default;
};

namespace detail {

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t f = 2; f * f <= n; ++f)
    if (n % f == 0) return false;
  return true;
}

// Polynomials over GF(p), coefficient vectors low degree first, no trailing zeros.
using Poly = std::vector<std::uint32_t>;

inline void trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline std::uint32_t inv_mod(std::uint32_t a, std::uint32_t p) {
  std::int64_t t = 0, nt = 1, r = p, nr = a % p;
  while (nr != 0) {
    std::int64_t qt = r / nr;
    t -= qt * nt;
    std::swap(t, nt);
    r -= qt * nr;
    std::swap(r, nr);
  }
  if (r != 1) fail(ErrorKind::DivisionByZero, "inverse of zero");
  if (t < 0) t += p;
  return static_cast<std::uint32_t>(t);
}

inline Poly poly_mod(Poly a, const Poly& m, std::uint32_t p) {
  trim(a);
  const std::size_t dm = m.size() - 1;
  std::uint32_t lead_inv = inv_mod(m.back(), p);
  while (a.size() > dm) {
    std::uint64_t c = std::uint64_t(a.back()) * lead_inv % p;
    std::size_t shift = a.size() - 1 - dm;
    for (std::size_t i = 0; i <= dm; ++i) {
      std::uint64_t sub = c * m[i] % p;
      a[shift + i] = static_cast<std::uint32_t>((a[shift + i] + p - sub) % p);
    }
    trim(a);
  }
  return a;
}

inline bool is_irreducible(const Poly& f, std::uint32_t p) {
  const std::size_t deg = f.size() - 1;
  if (deg <= 1) return deg == 1;
  // Trial division by every monic polynomial of degree 1..deg/2.
  for (std::size_t dg = 1; dg * 2 <= deg; ++dg) {
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < dg; ++i) count *= p;
    for (std::uint64_t t = 0; t < count; ++t) {
      Poly g(dg + 1);
      std::uint64_t v = t;
      for (std::size_t i = 0; i < dg; ++i) {
        g[i] = static_cast<std::uint32_t>(v % p);
        v /= p;
      }
      g[dg] = 1;
      if (poly_mod(f, g, p).empty()) return false;
    }
  }
  return true;
}

}  // namespace detail

class Field {
 public:
  // make_field: q must be a prime power; the reduction polynomial is the
  // lexicographically smallest monic irreducible (coefficients compared low degree first).
  static Field make(std::uint64_t q) {
    if (q < 2) fail(ErrorKind::NotPrimePower, std::to_string(q) + " is not a prime power");
    std::uint64_t p = 0;
    for (std::uint64_t f = 2; f * f <= q; ++f)
      if (q % f == 0) {
        p = f;
        break;
      }
    if (p == 0) p = q;
    std::uint32_t k = 0;
    std::uint64_t r = q;
    while (r % p == 0) {
      r /= p;
      ++k;
    }
    if (r != 1) fail(ErrorKind::NotPrimePower, std::to_string(q) + " is not a prime power");
    if (q > (1ULL << 31)) fail(ErrorKind::BadParams, "field order too large");
    return Field(static_cast<std::uint32_t>(p), k, smallest_irreducible(static_cast<std::uint32_t>(p), k));
  }

  // Field with an explicit reduction polynomial (monic, degree k, irreducible).
  static Field with_reduction(std::uint32_t p, std::uint32_t k, detail::Poly reduction) {
    if (!detail::is_prime(p)) fail(ErrorKind::NotPrimePower, "characteristic " + std::to_string(p) + " is not prime");
    if (k == 0) fail(ErrorKind::BadParams, "extension degree must be positive");
    if (k == 1) return Field(p, 1, {0, 1});
    for (auto c : reduction)
      if (c >= p) fail(ErrorKind::BadParams, "reduction coefficient out of range");
    if (reduction.size() != k + 1 || reduction.back() != 1)
      fail(ErrorKind::BadParams, "reduction polynomial must be monic of degree " + std::to_string(k));
    if (!detail::is_irreducible(reduction, p)) fail(ErrorKind::BadParams, "reduction polynomial is reducible");
    std::uint64_t q = 1;
    for (std::uint32_t i = 0; i < k; ++i) q *= p;
    if (q > (1ULL << 31)) fail(ErrorKind::BadParams, "field order too large");
    return Field(p, k, std::move(reduction));
  }

  std::uint32_t p() const { return t_->p; }
  std::uint32_t k() const { return t_->k; }
  std::uint32_t q() const { return t_->q; }
  const detail::Poly& reduction() const { return t_->reduction; }
  std::uint64_t id() const { return t_->id; }

  bool operator==(const Field& o) const { return t_ == o.t_ || t_->id == o.t_->id; }

  Elem zero() const { return 0; }
  Elem one() const { return 1; }
  bool contains(Elem a) const { return a < t_->q; }

  Elem add(Elem a, Elem b) const {
    if (t_->k == 1) {
      std::uint64_t s = std::uint64_t(a) + b;
      return static_cast<Elem>(s >= t_->q ? s - t_->q : s);
    }
    if (!t_->add.empty()) return t_->add[a * t_->q + b];
    return add_slow(a, b);
  }
  Elem neg(Elem a) const {
    if (t_->k == 1) return a == 0 ? 0 : t_->q - a;
    if (!t_->neg.empty()) return t_->neg[a];
    return neg_slow(a);
  }
  Elem sub(Elem a, Elem b) const { return add(a, neg(b)); }
  Elem mul(Elem a, Elem b) const {
    if (!t_->mul.empty()) return t_->mul[std::size_t(a) * t_->q + b];
    if (t_->k == 1) return static_cast<Elem>(std::uint64_t(a) * b % t_->q);
    return mul_slow(a, b);
  }
  Elem inv(Elem a) const {
    if (a == 0) fail(ErrorKind::DivisionByZero, "inverse of zero");
    if (!t_->inv.empty()) return t_->inv[a];
    return inv_slow(a);
  }
  Elem div(Elem a, Elem b) const { return mul(a, inv(b)); }

  // Tagged, checked arithmetic.
  FieldElement element(Elem code) const {
    if (!contains(code)) fail(ErrorKind::MixedFields, "code " + std::to_string(code) + " is not in GF(" + std::to_string(q()) + ")");
    return {code, id()};
  }
  FieldElement arith(FieldElement a, FieldElement b, ArithOp op) const {
    if (a.field_id != id() || b.field_id != id()) fail(ErrorKind::MixedFields, "operands belong to different fields");
    switch (op) {
      case ArithOp::Add: return {add(a.code, b.code), id()};
      case ArithOp::Sub: return {sub(a.code, b.code), id()};
      case ArithOp::Mul: return {mul(a.code, b.code), id()};
      case ArithOp::Div: return {div(a.code, b.code), id()};
    }
    return {};
  }

  // Coefficient tuple of an element, low degree first.
  std::vector<std::uint32_t> coefficients(Elem a) const {
    std::vector<std::uint32_t> c(t_->k);
    for (auto& x : c) {
      x = a % t_->p;
      a /= t_->p;
    }
    return c;
  }
  Elem from_coefficients(std::span<const std::uint32_t> c) const {
    Elem code = 0;
    for (std::size_t i = c.size(); i-- > 0;) code = code * t_->p + c[i];
    return code;
  }

  // Reference implementations, independent of the lookup tables.
  Elem add_slow(Elem a, Elem b) const {
    auto ca = coefficients(a), cb = coefficients(b);
    for (std::size_t i = 0; i < ca.size(); ++i) ca[i] = (ca[i] + cb[i]) % t_->p;
    return from_coefficients(ca);
  }
  Elem neg_slow(Elem a) const {
    auto ca = coefficients(a);
    for (auto& x : ca) x = (t_->p - x) % t_->p;
    return from_coefficients(ca);
  }
  Elem mul_slow(Elem a, Elem b) const {
    if (t_->k == 1) return static_cast<Elem>(std::uint64_t(a) * b % t_->p);
    auto ca = coefficients(a), cb = coefficients(b);
    detail::Poly prod(2 * t_->k, 0);
    for (std::size_t i = 0; i < ca.size(); ++i)
      for (std::size_t j = 0; j < cb.size(); ++j)
        prod[i + j] = static_cast<std::uint32_t>((prod[i + j] + std::uint64_t(ca[i]) * cb[j]) % t_->p);
    auto r = detail::poly_mod(prod, t_->reduction, t_->p);
    r.resize(t_->k, 0);
    return from_coefficients(r);
  }
  Elem inv_slow(Elem a) const {
    if (a == 0) fail(ErrorKind::DivisionByZero, "inverse of zero");
    if (t_->k == 1) return detail::inv_mod(a, t_->p);
    // Fermat: a^(q-2)
    Elem result = 1, base = a;
    std::uint64_t e = t_->q - 2;
    while (e) {
      if (e & 1) result = mul_slow(result, base);
      base = mul_slow(base, base);
      e >>= 1;
    }
    return result;
  }

 private:
  struct Tables {
    std::uint32_t p = 0, k = 0, q = 0;
    detail::Poly reduction;
    std::uint64_t id = 0;
    std::vector<Elem> add, neg, mul, inv;
  };

  static constexpr std::uint32_t kTableLimit = 1024;

  Field(std::uint32_t p, std::uint32_t k, detail::Poly reduction) {
    auto t = std::make_shared<Tables>();
    t->p = p;
    t->k = k;
    t->q = 1;
    for (std::uint32_t i = 0; i < k; ++i) t->q *= p;
    t->reduction = std::move(reduction);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mixin = [&h](std::uint64_t v) { h = (h ^ v) * 0x100000001b3ULL; };
    mixin(p);
    mixin(k);
    for (auto c : t->reduction) mixin(c + 1);
    t->id = h;
    t_ = t;
    if (t->q <= kTableLimit) {
      const std::uint32_t q = t->q;
      t->mul.resize(std::size_t(q) * q);
      t->inv.resize(q);
      if (k > 1) {
        t->add.resize(std::size_t(q) * q);
        t->neg.resize(q);
      }
      for (Elem a = 0; a < q; ++a) {
        if (k > 1) t->neg[a] = neg_slow(a);
        for (Elem b = 0; b < q; ++b) {
          if (k > 1) t->add[a * q + b] = add_slow(a, b);
          t->mul[a * q + b] = mul_slow(a, b);
        }
      }
      for (Elem a = 1; a < q; ++a)
        for (Elem b = 1; b < q; ++b)
          if (t->mul[a * q + b] == 1) {
            t->inv[a] = b;
            break;
          }
    }
  }

  static detail::Poly smallest_irreducible(std::uint32_t p, std::uint32_t k) {
    if (k == 1) return {0, 1};
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < k; ++i) count *= p;
    // Counting t upward with c_0 as the most significant digit walks candidates
    // in lexicographic order of (c_0, ..., c_{k-1}).
    for (std::uint64_t t = 0; t < count; ++t) {
      detail::Poly f(k + 1);
      std::uint64_t v = t;
      for (std::uint32_t i = k; i-- > 0;) {
        f[i] = static_cast<std::uint32_t>(v % p);
        v /= p;
      }
      f[k] = 1;
      if (detail::is_irreducible(f, p)) return f;
    }
    fail(ErrorKind::InvariantViolation, "no irreducible polynomial found");
  }

  std::shared_ptr<Tables> t_;
};

inline Field make_field(std::uint64_t q) { return Field::make(q); }

}  // namespace flatsat
