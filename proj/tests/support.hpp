#pragma once

#include <cstdint>
#include <random>
#include <string>

#include <ostream>

#include "ndscope/matrix.hpp"

namespace ndscope {

inline void PrintTo(const Poly& p, std::ostream* os) { *os << p.to_string(); }
inline void PrintTo(const RatFun& f, std::ostream* os) { *os << f.to_string(); }

}  // namespace ndscope

namespace ndscope::testing {

inline Poly lam() { return Poly::lambda(); }

inline Poly P(std::initializer_list<long> lowest_first) {
  std::vector<Rat> c;
  for (long v : lowest_first) c.emplace_back(v);
  return Poly(std::move(c));
}

inline Rat R(const std::string& s) { return parse_rational(s); }

/// Small seeded generator for random exact instances.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  Rat rat(long span = 5, long max_den = 3) {
    Rat r(mpz_class(integer(-span, span)), mpz_class(integer(1, max_den)));
    r.canonicalize();
    return r;
  }
  Rat nonzero_rat(long span = 5, long max_den = 3) {
    Rat r;
    do r = rat(span, max_den);
    while (r == 0);
    return r;
  }

  Poly poly(int max_deg, double zero_prob = 0.2) {
    if (coin(zero_prob)) return {};
    const int d = static_cast<int>(integer(0, max_deg));
    std::vector<Rat> c;
    for (int k = 0; k <= d; ++k) c.push_back(rat());
    return Poly(std::move(c));
  }

  Poly monic_poly(int deg) {
    std::vector<Rat> c;
    for (int k = 0; k < deg; ++k) c.push_back(rat());
    c.emplace_back(1);
    return Poly(std::move(c));
  }

  RatMat rat_mat(std::size_t r, std::size_t c, double zero_prob = 0.3) {
    RatMat m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j)
        if (!coin(zero_prob)) m(i, j) = rat();
    return m;
  }

  RatMat nonzero_mat(std::size_t r, std::size_t c) {
    RatMat m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m(i, j) = nonzero_rat();
    return m;
  }

  PolyMat poly_mat(std::size_t r, std::size_t c, int max_deg, double zero_prob = 0.2) {
    PolyMat m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m(i, j) = poly(max_deg, zero_prob);
    return m;
  }

  /// Product of random elementary unimodular operations.
  PolyMat unimodular(std::size_t n, int steps = 4, int max_deg = 1) {
    PolyMat u = PolyMat::identity(n);
    if (n < 2) {
      u(0, 0) = Poly(nonzero_rat());
      return u;
    }
    for (int s = 0; s < steps; ++s) {
      const auto i = static_cast<std::size_t>(integer(0, static_cast<long>(n) - 1));
      auto j = static_cast<std::size_t>(integer(0, static_cast<long>(n) - 2));
      if (j >= i) ++j;
      const Poly q = poly(max_deg, 0.0);
      for (std::size_t c = 0; c < n; ++c) u(i, c) += q * u(j, c);
    }
    return u;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace ndscope::testing
