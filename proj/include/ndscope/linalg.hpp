#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ndscope/matrix.hpp"

namespace ndscope {

// ---------------------------------------------------------------------------
// Gauss-Jordan elimination over a field (Rat or RatFun).
// ---------------------------------------------------------------------------

template <typename T>
struct Echelon {
  Matrix<T> reduced;                // reduced row echelon form
  std::vector<std::size_t> pivots;  // pivot column of each nonzero row
};

namespace detail {

inline std::size_t pivot_cost(const Rat& x) { return bit_size(x); }
inline std::size_t pivot_cost(const RatFun& f) {
  return static_cast<std::size_t>(f.num().degree() + f.den().degree()) * 64 + f.num().bit_size() +
         f.den().bit_size();
}

}  // namespace detail

template <typename T>
Echelon<T> rref(Matrix<T> m) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
    std::size_t best = m.rows();
    std::size_t best_cost = 0;
    for (std::size_t i = row; i < m.rows(); ++i) {
      if (is_zero(m(i, col))) continue;
      const std::size_t cost = detail::pivot_cost(m(i, col));
      if (best == m.rows() || cost < best_cost) {
        best = i;
        best_cost = cost;
      }
    }
    if (best == m.rows()) continue;
    m.swap_rows(row, best);
    const T inv = T(1) / m(row, col);
    for (std::size_t j = col; j < m.cols(); ++j) m(row, j) = m(row, j) * inv;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == row || is_zero(m(i, col))) continue;
      const T f = m(i, col);
      for (std::size_t j = col; j < m.cols(); ++j) {
        if (!is_zero(m(row, j))) m(i, j) -= f * m(row, j);
      }
    }
    pivots.push_back(col);
    ++row;
  }
  return {std::move(m), std::move(pivots)};
}

template <typename T>
std::size_t rank(const Matrix<T>& m) {
  return rref(m).pivots.size();
}

/// Columns spanning {x : m·x = 0}, one per free variable of the RREF.
template <typename T>
Matrix<T> right_null_space(const Matrix<T>& m) {
  const auto e = rref(m);
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto p : e.pivots) is_pivot[p] = true;
  std::vector<std::size_t> free;
  for (std::size_t j = 0; j < m.cols(); ++j)
    if (!is_pivot[j]) free.push_back(j);
  Matrix<T> basis(m.cols(), free.size());
  for (std::size_t k = 0; k < free.size(); ++k) {
    basis(free[k], k) = T(1);
    for (std::size_t r = 0; r < e.pivots.size(); ++r) basis(e.pivots[r], k) = -e.reduced(r, free[k]);
  }
  return basis;
}

/// Rows spanning {y : y·m = 0}.
template <typename T>
Matrix<T> left_null_space(const Matrix<T>& m) {
  return right_null_space(m.transpose()).transpose();
}

/// Reduced column echelon form of the column span of b: columns whose first
/// nonzero entry is 1, uniquely determined by the span.
template <typename T>
Matrix<T> canonical_column_basis(const Matrix<T>& b) {
  const auto e = rref(b.transpose());
  return e.reduced.rows_range(0, e.pivots.size()).transpose();
}

template <typename T>
Matrix<T> inverse(const Matrix<T>& m) {
  if (m.rows() != m.cols()) throw ShapeError("inverse of a non-square matrix");
  const std::size_t n = m.rows();
  auto e = rref(hstack(m, Matrix<T>::identity(n)));
  if (e.pivots.size() < n || (n > 0 && e.pivots[n - 1] != n - 1)) {
    throw SingularMatrix("matrix is singular");
  }
  return e.reduced.block(0, n, n, n);
}

inline Rat determinant(RatMat m) {
  if (m.rows() != m.cols()) throw ShapeError("determinant of a non-square matrix");
  Rat det(1);
  const std::size_t n = m.rows();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    while (p < n && is_zero(m(p, k))) ++p;
    if (p == n) return Rat(0);
    if (p != k) {
      m.swap_rows(p, k);
      det = -det;
    }
    det *= m(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      if (is_zero(m(i, k))) continue;
      const Rat f = m(i, k) / m(k, k);
      for (std::size_t j = k; j < n; ++j) m(i, j) -= f * m(k, j);
    }
  }
  return det;
}

/// Solves a·x = b; returns nullopt-like empty matrix flag via bool.
inline bool solve(const RatMat& a, const RatMat& b, RatMat& x) {
  if (a.rows() != b.rows()) throw ShapeError("solve shape mismatch");
  const auto e = rref(hstack(a, b));
  for (auto p : e.pivots)
    if (p >= a.cols()) return false;
  x = RatMat(a.cols(), b.cols());
  for (std::size_t r = 0; r < e.pivots.size(); ++r)
    for (std::size_t j = 0; j < b.cols(); ++j) x(e.pivots[r], j) = e.reduced(r, a.cols() + j);
  return true;
}

// ---------------------------------------------------------------------------
// Fraction-free (Bareiss) elimination over Q[λ].
// ---------------------------------------------------------------------------

struct BareissResult {
  PolyMat reduced;
  std::size_t rank = 0;
  bool swapped_odd = false;
};

inline BareissResult bareiss(PolyMat m) {
  BareissResult res;
  Poly prev(Rat(1));
  std::size_t row = 0;
  const std::size_t nr = m.rows(), nc = m.cols();
  for (std::size_t col = 0; col < nc && row < nr; ++col) {
    std::size_t best = nr;
    for (std::size_t i = row; i < nr; ++i) {
      if (m(i, col).is_zero()) continue;
      if (best == nr || m(i, col).degree() < m(best, col).degree()) best = i;
    }
    if (best == nr) continue;
    if (best != row) {
      m.swap_rows(best, row);
      res.swapped_odd = !res.swapped_odd;
    }
    const Poly& piv = m(row, col);
    for (std::size_t i = row + 1; i < nr; ++i) {
      const Poly f = m(i, col);
      for (std::size_t j = col + 1; j < nc; ++j) {
        Poly v = piv * m(i, j) - f * m(row, j);
        m(i, j) = prev.is_one() ? std::move(v) : exact_div(v, prev);
      }
      m(i, col) = Poly();
    }
    prev = piv;
    ++row;
  }
  res.rank = row;
  res.reduced = std::move(m);
  return res;
}

inline std::size_t normal_rank(const PolyMat& m) { return bareiss(m).rank; }

inline Poly determinant(const PolyMat& m) {
  if (m.rows() != m.cols()) throw ShapeError("determinant of a non-square matrix");
  const std::size_t n = m.rows();
  if (n == 0) return Poly(Rat(1));
  auto res = bareiss(m);
  if (res.rank < n) return Poly();
  Poly d = res.reduced(n - 1, n - 1);
  return res.swapped_odd ? -d : d;
}

inline PolyMat adjugate(const PolyMat& m) {
  if (m.rows() != m.cols()) throw ShapeError("adjugate of a non-square matrix");
  const std::size_t n = m.rows();
  PolyMat adj(n, n);
  if (n == 1) {
    adj(0, 0) = Poly(Rat(1));
    return adj;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      PolyMat minor(n - 1, n - 1);
      for (std::size_t r = 0, rr = 0; r < n; ++r) {
        if (r == i) continue;
        for (std::size_t c = 0, cc = 0; c < n; ++c) {
          if (c == j) continue;
          minor(rr, cc++) = m(r, c);
        }
        ++rr;
      }
      Poly d = determinant(minor);
      adj(j, i) = ((i + j) % 2 == 0) ? std::move(d) : -d;
    }
  }
  return adj;
}

/// Row-wise denominator clearing: returns P with P(i,·) = d_i·M(i,·) and the d_i.
inline std::pair<PolyMat, std::vector<Poly>> clear_row_denominators(const RatFunMat& m) {
  PolyMat p(m.rows(), m.cols());
  std::vector<Poly> dens(m.rows(), Poly(Rat(1)));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Poly d(Rat(1));
    for (std::size_t j = 0; j < m.cols(); ++j) d = poly_lcm(d, m(i, j).den());
    for (std::size_t j = 0; j < m.cols(); ++j)
      p(i, j) = m(i, j).num() * exact_div(d, m(i, j).den());
    dens[i] = d;
  }
  return {std::move(p), std::move(dens)};
}

/// Monic lcm of every entry denominator.
inline Poly common_denominator(const RatFunMat& m) {
  Poly d(Rat(1));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d = poly_lcm(d, m(i, j).den());
  return d;
}

inline PolyMat scale_to_poly(const RatFunMat& m, const Poly& d) {
  PolyMat p(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) p(i, j) = m(i, j).num() * exact_div(d, m(i, j).den());
  return p;
}

inline std::size_t normal_rank(const RatFunMat& m) {
  return bareiss(clear_row_denominators(m).first).rank;
}

inline RatFun determinant(const RatFunMat& m) {
  auto [p, dens] = clear_row_denominators(m);
  Poly prod(Rat(1));
  for (const auto& d : dens) prod = prod * d;
  return RatFun(determinant(p), prod);
}

/// Inverse over Q(λ) through the adjugate of the denominator-cleared matrix.
inline RatFunMat inverse_adjugate(const RatFunMat& m) {
  if (m.rows() != m.cols()) throw ShapeError("inverse of a non-square matrix");
  const Poly d = common_denominator(m);
  const PolyMat p = scale_to_poly(m, d);
  const Poly det = determinant(p);
  if (det.is_zero()) throw SingularMatrix("rational matrix is singular");
  const PolyMat adj = adjugate(p);
  RatFunMat inv(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) inv(i, j) = RatFun(d * adj(i, j), det);
  return inv;
}

}  // namespace ndscope
