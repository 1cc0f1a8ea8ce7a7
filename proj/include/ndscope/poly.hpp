#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ndscope/error.hpp"
#include "ndscope/rational.hpp"

namespace ndscope {

/// Univariate polynomial in λ with exact rational coefficients.
///
/// Coefficients are stored lowest degree first with no trailing zeros, so the
/// zero polynomial is the empty sequence and has degree kMinusInfinity.
class Poly {
 public:
  static constexpr int kMinusInfinity = std::numeric_limits<int>::min();

  Poly() = default;
  Poly(const Rat& c) {  // NOLINT(google-explicit-constructor)
    if (!ndscope::is_zero(c)) coeffs_.push_back(c);
  }
  Poly(long c) : Poly(Rat(c)) {}  // NOLINT(google-explicit-constructor)
  Poly(int c) : Poly(Rat(c)) {}   // NOLINT(google-explicit-constructor)
  explicit Poly(std::vector<Rat> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

  /// c·λ^k
  static Poly monomial(const Rat& c, int k) {
    if (ndscope::is_zero(c)) return {};
    std::vector<Rat> v(static_cast<std::size_t>(k) + 1);
    v.back() = c;
    return Poly(std::move(v));
  }
  static Poly lambda() { return monomial(Rat(1), 1); }

  int degree() const {
    return coeffs_.empty() ? kMinusInfinity : static_cast<int>(coeffs_.size()) - 1;
  }
  bool is_zero() const { return coeffs_.empty(); }
  bool is_constant() const { return coeffs_.size() <= 1; }
  bool is_one() const { return coeffs_.size() == 1 && coeffs_[0] == 1; }

  const std::vector<Rat>& coeffs() const { return coeffs_; }
  Rat coeff(int k) const {
    if (k < 0 || k >= static_cast<int>(coeffs_.size())) return Rat(0);
    return coeffs_[static_cast<std::size_t>(k)];
  }
  const Rat& leading() const { return coeffs_.back(); }

  std::size_t bit_size() const {
    std::size_t total = 0;
    for (const auto& c : coeffs_) total += ndscope::bit_size(c);
    return total;
  }

  Poly monic() const {
    if (is_zero()) return {};
    const Rat lc = leading();
    if (lc == 1) return *this;
    Poly out = *this;
    for (auto& c : out.coeffs_) c /= lc;
    return out;
  }

  Poly operator-() const {
    Poly out = *this;
    for (auto& c : out.coeffs_) c = -c;
    return out;
  }

  Poly& operator+=(const Poly& o) {
    if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size());
    for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    trim();
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size());
    for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    trim();
    return *this;
  }
  Poly& operator*=(const Poly& o) {
    *this = *this * o;
    return *this;
  }

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rat> v(a.coeffs_.size() + b.coeffs_.size() - 1);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
      if (ndscope::is_zero(a.coeffs_[i])) continue;
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) v[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
    return Poly(std::move(v));
  }

  friend bool operator==(const Poly& a, const Poly& b) { return a.coeffs_ == b.coeffs_; }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  /// Euclidean division: a = q·b + r with deg r < deg b.
  friend std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw Error("polynomial division by zero");
    if (a.degree() < b.degree()) return {Poly(), a};
    std::vector<Rat> rem = a.coeffs_;
    const std::size_t db = b.coeffs_.size() - 1;
    std::vector<Rat> quot(rem.size() - db);
    const Rat& lb = b.leading();
    for (std::size_t k = rem.size(); k-- > db;) {
      if (ndscope::is_zero(rem[k])) continue;
      Rat f = rem[k] / lb;
      for (std::size_t j = 0; j <= db; ++j) rem[k - db + j] -= f * b.coeffs_[j];
      quot[k - db] = std::move(f);
    }
    rem.resize(db);
    return {Poly(std::move(quot)), Poly(std::move(rem))};
  }

  /// Exact quotient; throws when b does not divide a.
  friend Poly exact_div(const Poly& a, const Poly& b) {
    auto [q, r] = divmod(a, b);
    if (!r.is_zero()) throw Error("inexact polynomial division");
    return q;
  }

  /// True iff b divides a (0 divides only 0).
  friend bool divides(const Poly& b, const Poly& a) {
    if (b.is_zero()) return a.is_zero();
    return divmod(a, b).second.is_zero();
  }

  Rat eval(const Rat& x) const {
    Rat acc(0);
    for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * x + coeffs_[k];
    return acc;
  }

  std::complex<double> eval(std::complex<double> x) const {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * x + coeffs_[k].get_d();
    return acc;
  }

  std::string to_string(const std::string& var = "s") const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (std::size_t k = coeffs_.size(); k-- > 0;) {
      const Rat& c = coeffs_[k];
      if (ndscope::is_zero(c)) continue;
      Rat mag = abs(c);
      if (first) {
        if (sgn(c) < 0) os << "-";
      } else {
        os << (sgn(c) < 0 ? " - " : " + ");
      }
      first = false;
      if (k == 0 || mag != 1) os << mag.get_str();
      if (k > 0) {
        if (mag != 1) os << "*";
        os << var;
        if (k > 1) os << "^" << k;
      }
    }
    return os.str();
  }

 private:
  void trim() {
    while (!coeffs_.empty() && ndscope::is_zero(coeffs_.back())) coeffs_.pop_back();
  }

  std::vector<Rat> coeffs_;
};

inline bool is_zero(const Poly& p) { return p.is_zero(); }

/// Monic greatest common divisor; gcd(0, 0) = 0.
inline Poly poly_gcd(Poly a, Poly b) {
  if (a.is_zero()) return b.monic();
  if (b.is_zero()) return a.monic();
  a = a.monic();
  b = b.monic();
  while (!b.is_zero()) {
    Poly r = divmod(a, b).second.monic();
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

/// Extended gcd: s·a + t·b = g with g monic, deg s < deg(b/g), deg t < deg(a/g).
struct PolyXgcd {
  Poly g, s, t;
};

inline PolyXgcd poly_xgcd(const Poly& a, const Poly& b) {
  Poly r0 = a, r1 = b;
  Poly s0(Rat(1)), s1, t0, t1(Rat(1));
  while (!r1.is_zero()) {
    auto [q, r] = divmod(r0, r1);
    r0 = std::move(r1);
    r1 = std::move(r);
    Poly s2 = s0 - q * s1;
    s0 = std::move(s1);
    s1 = std::move(s2);
    Poly t2 = t0 - q * t1;
    t0 = std::move(t1);
    t1 = std::move(t2);
  }
  if (r0.is_zero()) return {Poly(), Poly(), Poly()};
  const Poly inv(Rat(1) / r0.leading());
  return {r0 * inv, s0 * inv, t0 * inv};
}

/// Monic least common multiple; lcm with 0 is 0.
inline Poly poly_lcm(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  const Poly g = poly_gcd(a, b);
  return (exact_div(a, g) * b).monic();
}

}  // namespace ndscope
