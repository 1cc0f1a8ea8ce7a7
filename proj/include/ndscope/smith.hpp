#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "ndscope/linalg.hpp"

namespace ndscope {

/// M = U·S·Vᵀ with U, V unimodular and S the padded diagonal of invariant factors.
struct SmithForm {
  PolyMat U, U_inv, V, V_inv;
  std::vector<Poly> invariant_factors;  // monic, μ_j | μ_{j+1}
  std::size_t normal_rank = 0;

  /// The rows×cols padded diagonal.
  PolyMat diagonal(std::size_t rows, std::size_t cols) const {
    PolyMat s(rows, cols);
    for (std::size_t j = 0; j < invariant_factors.size(); ++j) s(j, j) = invariant_factors[j];
    return s;
  }
};

/// G = U·diag(κ_j)·Vᵀ with κ_j = ε_j/ψ_j, ε_j | ε_{j+1}, ψ_{j+1} | ψ_j.
struct SmithMcMillanForm {
  PolyMat U, U_inv, V, V_inv;
  std::vector<RatFun> kappas;
  std::size_t normal_rank = 0;

  RatFunMat diagonal(std::size_t rows, std::size_t cols) const {
    RatFunMat s(rows, cols);
    for (std::size_t j = 0; j < kappas.size(); ++j) s(j, j) = kappas[j];
    return s;
  }
};

/// G = N·Den⁻¹ with col{Den, N} right coprime.
struct RightMfd {
  PolyMat N;
  PolyMat Den;
};

/// F = R + Q·Ω⁻¹ with Q·Ω⁻¹ strictly proper and (Q, Ω) right coprime.
struct ProperSplit {
  PolyMat R;
  PolyMat Q;
  PolyMat Omega;
};

struct SmithOptions {
  /// When set, ties among minimal-degree pivot candidates are broken at random.
  std::optional<std::uint64_t> shuffle_seed;
};

namespace detail {

// Elementary-operation reducer that keeps L·M·R = A together with L⁻¹ and R⁻¹.
class SmithReducer {
 public:
  SmithReducer(const PolyMat& m, const SmithOptions& opts)
      : a_(m),
        l_(PolyMat::identity(m.rows())),
        l_inv_(PolyMat::identity(m.rows())),
        r_(PolyMat::identity(m.cols())),
        r_inv_(PolyMat::identity(m.cols())) {
    if (opts.shuffle_seed) rng_.emplace(*opts.shuffle_seed);
  }

  SmithForm run() {
    const std::size_t m = a_.rows(), n = a_.cols();
    std::size_t k = 0;
    for (; k < std::min(m, n); ++k) {
      auto piv = pick_pivot(k, k);
      if (!piv) break;
      bring_to(k, piv->first, piv->second);
      while (true) {
        clear_column(k);
        if (clear_row(k)) continue;
        if (auto bad = find_non_divisible(k)) {
          add_row(k, *bad, Poly(Rat(1)));
          continue;
        }
        break;
      }
      const Rat lc = a_(k, k).leading();
      if (lc != 1) scale_row(k, Rat(1) / lc);
    }
    SmithForm sf;
    sf.normal_rank = k;
    for (std::size_t j = 0; j < k; ++j) sf.invariant_factors.push_back(a_(j, j));
    sf.U = l_inv_;
    sf.U_inv = l_;
    sf.V = r_inv_.transpose();
    sf.V_inv = r_.transpose();
    return sf;
  }

 private:
  using Pos = std::pair<std::size_t, std::size_t>;

  std::optional<Pos> pick_pivot(std::size_t r0, std::size_t c0) {
    std::vector<Pos> best;
    int best_deg = 0;
    std::size_t best_bits = 0;
    for (std::size_t i = r0; i < a_.rows(); ++i) {
      for (std::size_t j = c0; j < a_.cols(); ++j) {
        const Poly& p = a_(i, j);
        if (p.is_zero()) continue;
        const int d = p.degree();
        const std::size_t bits = p.bit_size();
        if (best.empty() || d < best_deg || (!rng_ && d == best_deg && bits < best_bits)) {
          best.assign(1, {i, j});
          best_deg = d;
          best_bits = bits;
        } else if (rng_ && d == best_deg) {
          best.push_back({i, j});
        }
      }
    }
    if (best.empty()) return std::nullopt;
    if (!rng_ || best.size() == 1) return best.front();
    std::uniform_int_distribution<std::size_t> pick(0, best.size() - 1);
    return best[pick(*rng_)];
  }

  void bring_to(std::size_t k, std::size_t i, std::size_t j) {
    swap_rows(k, i);
    swap_cols(k, j);
  }

  // Zeroes column k below the pivot; a_kk becomes the gcd of the column.
  void clear_column(std::size_t k) {
    for (std::size_t i = k + 1; i < a_.rows(); ++i) {
      if (a_(i, k).is_zero()) continue;
      if (divides(a_(k, k), a_(i, k))) {
        add_row(i, k, -exact_div(a_(i, k), a_(k, k)));
        continue;
      }
      const Poly a = a_(k, k), b = a_(i, k);
      auto x = poly_xgcd(a, b);
      combine_rows(k, i, x.s, x.t, -exact_div(b, x.g), exact_div(a, x.g));
    }
  }

  // Zeroes row k right of the pivot; returns true when column k was refilled.
  bool clear_row(std::size_t k) {
    bool refilled = false;
    for (std::size_t j = k + 1; j < a_.cols(); ++j) {
      if (a_(k, j).is_zero()) continue;
      if (divides(a_(k, k), a_(k, j))) {
        add_col(j, k, -exact_div(a_(k, j), a_(k, k)));
        continue;
      }
      const Poly a = a_(k, k), b = a_(k, j);
      auto x = poly_xgcd(a, b);
      combine_cols(k, j, x.s, x.t, -exact_div(b, x.g), exact_div(a, x.g));
      refilled = true;
    }
    if (!refilled) return false;
    for (std::size_t i = k + 1; i < a_.rows(); ++i)
      if (!a_(i, k).is_zero()) return true;
    return false;
  }

  std::optional<std::size_t> find_non_divisible(std::size_t k) {
    for (std::size_t i = k + 1; i < a_.rows(); ++i)
      for (std::size_t j = k + 1; j < a_.cols(); ++j)
        if (!a_(i, j).is_zero() && !divides(a_(k, k), a_(i, j))) return i;
    return std::nullopt;
  }

  // Row operations act on A and L from the left; L⁻¹ receives the inverse on the right.
  void swap_rows(std::size_t i, std::size_t j) {
    if (i == j) return;
    a_.swap_rows(i, j);
    l_.swap_rows(i, j);
    l_inv_.swap_cols(i, j);
  }
  // (row_k, row_i) <- (s·row_k + t·row_i, u·row_k + v·row_i) with s·v − t·u = 1
  void combine_rows(std::size_t k, std::size_t i, const Poly& s, const Poly& t, const Poly& u,
                    const Poly& v) {
    auto mix = [&](PolyMat& m) {
      for (std::size_t c = 0; c < m.cols(); ++c) {
        Poly pk = s * m(k, c) + t * m(i, c);
        Poly pi = u * m(k, c) + v * m(i, c);
        m(k, c) = std::move(pk);
        m(i, c) = std::move(pi);
      }
    };
    mix(a_);
    mix(l_);
    for (std::size_t r = 0; r < l_inv_.rows(); ++r) {
      Poly ck = l_inv_(r, k) * v - l_inv_(r, i) * u;
      Poly ci = l_inv_(r, i) * s - l_inv_(r, k) * t;
      l_inv_(r, k) = std::move(ck);
      l_inv_(r, i) = std::move(ci);
    }
  }

  // row_i += q·row_j
  void add_row(std::size_t i, std::size_t j, const Poly& q) {
    for (std::size_t c = 0; c < a_.cols(); ++c)
      if (!a_(j, c).is_zero()) a_(i, c) += q * a_(j, c);
    for (std::size_t c = 0; c < l_.cols(); ++c)
      if (!l_(j, c).is_zero()) l_(i, c) += q * l_(j, c);
    // (E⁻¹): col_j -= q·col_i
    for (std::size_t r = 0; r < l_inv_.rows(); ++r)
      if (!l_inv_(r, i).is_zero()) l_inv_(r, j) -= q * l_inv_(r, i);
  }
  void scale_row(std::size_t i, const Rat& c) {
    const Poly pc(c), pinv(Rat(1) / c);
    for (std::size_t col = 0; col < a_.cols(); ++col) a_(i, col) = pc * a_(i, col);
    for (std::size_t col = 0; col < l_.cols(); ++col) l_(i, col) = pc * l_(i, col);
    for (std::size_t r = 0; r < l_inv_.rows(); ++r) l_inv_(r, i) = pinv * l_inv_(r, i);
  }

  // Column operations act on A and R from the right; R⁻¹ receives the inverse on the left.
  void swap_cols(std::size_t i, std::size_t j) {
    if (i == j) return;
    a_.swap_cols(i, j);
    r_.swap_cols(i, j);
    r_inv_.swap_rows(i, j);
  }
  // (col_k, col_j) <- (s·col_k + t·col_j, u·col_k + v·col_j) with s·v − t·u = 1
  void combine_cols(std::size_t k, std::size_t j, const Poly& s, const Poly& t, const Poly& u,
                    const Poly& v) {
    auto mix = [&](PolyMat& m) {
      for (std::size_t r = 0; r < m.rows(); ++r) {
        Poly pk = s * m(r, k) + t * m(r, j);
        Poly pj = u * m(r, k) + v * m(r, j);
        m(r, k) = std::move(pk);
        m(r, j) = std::move(pj);
      }
    };
    mix(a_);
    mix(r_);
    for (std::size_t c = 0; c < r_inv_.cols(); ++c) {
      Poly rk = v * r_inv_(k, c) - u * r_inv_(j, c);
      Poly rj = s * r_inv_(j, c) - t * r_inv_(k, c);
      r_inv_(k, c) = std::move(rk);
      r_inv_(j, c) = std::move(rj);
    }
  }

  // col_i += q·col_j
  void add_col(std::size_t i, std::size_t j, const Poly& q) {
    for (std::size_t r = 0; r < a_.rows(); ++r)
      if (!a_(r, j).is_zero()) a_(r, i) += q * a_(r, j);
    for (std::size_t r = 0; r < r_.rows(); ++r)
      if (!r_(r, j).is_zero()) r_(r, i) += q * r_(r, j);
    // (F⁻¹): row_j -= q·row_i
    for (std::size_t c = 0; c < r_inv_.cols(); ++c)
      if (!r_inv_(i, c).is_zero()) r_inv_(j, c) -= q * r_inv_(i, c);
  }

  PolyMat a_, l_, l_inv_, r_, r_inv_;
  std::optional<std::mt19937_64> rng_;
};

}  // namespace detail

inline SmithForm smith_form(const PolyMat& m, const SmithOptions& opts = {}) {
  return detail::SmithReducer(m, opts).run();
}

inline SmithMcMillanForm smith_mcmillan(const RatFunMat& g, const SmithOptions& opts = {}) {
  const Poly d = common_denominator(g);
  const SmithForm sf = smith_form(scale_to_poly(g, d), opts);
  SmithMcMillanForm out;
  out.U = sf.U;
  out.U_inv = sf.U_inv;
  out.V = sf.V;
  out.V_inv = sf.V_inv;
  out.normal_rank = sf.normal_rank;
  for (const auto& mu : sf.invariant_factors) out.kappas.emplace_back(mu, d);
  return out;
}

/// Polynomial inverse of a unimodular matrix.
inline PolyMat unimodular_inverse(const PolyMat& u) {
  if (u.rows() != u.cols()) throw NotUnimodular("matrix is not square");
  const Poly det = determinant(u);
  if (det.is_zero() || det.degree() > 0) throw NotUnimodular("determinant is not a nonzero constant");
  const Poly inv_det(Rat(1) / det.leading());
  PolyMat adj = adjugate(u);
  for (std::size_t i = 0; i < adj.rows(); ++i)
    for (std::size_t j = 0; j < adj.cols(); ++j) adj(i, j) = inv_det * adj(i, j);
  return adj;
}

/// True iff every Smith invariant factor of col{Den, N} equals 1 (full column rank everywhere).
inline bool is_coprime_right(const PolyMat& n, const PolyMat& den) {
  if (n.cols() != den.cols()) throw ShapeError("right coprimeness needs equal column counts");
  const SmithForm sf = smith_form(vstack(den, n));
  if (sf.normal_rank != den.cols()) return false;
  for (const auto& mu : sf.invariant_factors)
    if (!mu.is_one()) return false;
  return true;
}

/// Right coprime MFD read off the Smith–McMillan form: N = U·E, Den = V_invᵀ·Ψ.
inline RightMfd right_coprime_mfd(const RatFunMat& g) {
  const std::size_t m = g.rows(), p = g.cols();
  const SmithMcMillanForm smm = smith_mcmillan(g);
  PolyMat e(m, p);
  PolyMat psi = PolyMat::identity(p);
  for (std::size_t j = 0; j < smm.kappas.size(); ++j) {
    e(j, j) = smm.kappas[j].num();
    psi(j, j) = smm.kappas[j].den();
  }
  return {smm.U * e, smm.V_inv.transpose() * psi};
}

inline RatFunMat mfd_value(const PolyMat& n, const PolyMat& den) {
  return lift<RatFun>(n) * inverse_adjugate(lift<RatFun>(den));
}

/// Entrywise polynomial part plus a right coprime factorization of the strictly proper rest.
inline ProperSplit proper_split(const RatFunMat& f) {
  PolyMat r(f.rows(), f.cols());
  RatFunMat rest(f.rows(), f.cols());
  for (std::size_t i = 0; i < f.rows(); ++i) {
    for (std::size_t j = 0; j < f.cols(); ++j) {
      auto [q, sp] = f(i, j).split();
      r(i, j) = std::move(q);
      rest(i, j) = std::move(sp);
    }
  }
  RightMfd mfd = right_coprime_mfd(rest);
  return {std::move(r), std::move(mfd.N), std::move(mfd.Den)};
}

}  // namespace ndscope
