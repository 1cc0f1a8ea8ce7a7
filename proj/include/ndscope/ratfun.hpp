#pragma once

#include <complex>
#include <string>
#include <utility>

#include "ndscope/poly.hpp"

namespace ndscope {

/// Reduced rational function num/den with monic den; zero is 0/1.
class RatFun {
 public:
  RatFun() : den_(Rat(1)) {}
  RatFun(const Rat& c) : num_(c), den_(Rat(1)) {}    // NOLINT(google-explicit-constructor)
  RatFun(long c) : RatFun(Rat(c)) {}                  // NOLINT(google-explicit-constructor)
  RatFun(int c) : RatFun(Rat(c)) {}                   // NOLINT(google-explicit-constructor)
  RatFun(const Poly& p) : num_(p), den_(Rat(1)) {}   // NOLINT(google-explicit-constructor)
  RatFun(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) { reduce(); }

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }

  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const { return den_.is_one(); }
  /// deg num < deg den (the zero function counts as strictly proper).
  bool is_strictly_proper() const { return num_.degree() < den_.degree(); }
  bool is_proper() const { return num_.degree() <= den_.degree(); }

  RatFun operator-() const { return from_reduced(-num_, den_); }

  friend RatFun operator+(const RatFun& a, const RatFun& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.den_ == b.den_) return RatFun(a.num_ + b.num_, a.den_);
    return RatFun(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend RatFun operator-(const RatFun& a, const RatFun& b) { return a + (-b); }
  friend RatFun operator*(const RatFun& a, const RatFun& b) {
    if (a.is_zero() || b.is_zero()) return {};
    if (a.is_polynomial() && b.is_polynomial()) return from_reduced(a.num_ * b.num_, Poly(Rat(1)));
    // Cross-cancel before multiplying to keep degrees small.
    const Poly g1 = poly_gcd(a.num_, b.den_);
    const Poly g2 = poly_gcd(b.num_, a.den_);
    return RatFun(exact_div(a.num_, g1) * exact_div(b.num_, g2),
                  exact_div(a.den_, g2) * exact_div(b.den_, g1));
  }
  friend RatFun operator/(const RatFun& a, const RatFun& b) {
    if (b.is_zero()) throw Error("rational function division by zero");
    return a * RatFun(b.den_, b.num_);
  }
  RatFun& operator+=(const RatFun& o) { return *this = *this + o; }
  RatFun& operator-=(const RatFun& o) { return *this = *this - o; }
  RatFun& operator*=(const RatFun& o) { return *this = *this * o; }

  friend bool operator==(const RatFun& a, const RatFun& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const RatFun& a, const RatFun& b) { return !(a == b); }

  /// Polynomial part and strictly proper remainder.
  std::pair<Poly, RatFun> split() const {
    auto [q, r] = divmod(num_, den_);
    return {q, from_reduced(r, den_)};
  }

  std::complex<double> eval(std::complex<double> x) const { return num_.eval(x) / den_.eval(x); }

  std::string to_string(const std::string& var = "s") const {
    if (den_.is_one()) return num_.to_string(var);
    return "(" + num_.to_string(var) + ")/(" + den_.to_string(var) + ")";
  }

 private:
  static RatFun from_reduced(Poly num, Poly den) {
    RatFun f;
    if (num.is_zero()) return f;
    f.num_ = std::move(num);
    f.den_ = std::move(den);
    return f;
  }

  void reduce() {
    if (den_.is_zero()) throw Error("rational function with zero denominator");
    if (num_.is_zero()) {
      den_ = Poly(Rat(1));
      return;
    }
    if (!den_.is_constant()) {
      const Poly g = poly_gcd(num_, den_);
      if (!g.is_one()) {
        num_ = exact_div(num_, g);
        den_ = exact_div(den_, g);
      }
    }
    const Rat lc = den_.leading();
    if (lc != 1) {
      num_ = num_ * Poly(Rat(1) / lc);
      den_ = den_.monic();
    }
  }

  Poly num_;
  Poly den_;
};

inline bool is_zero(const RatFun& f) { return f.is_zero(); }

}  // namespace ndscope
