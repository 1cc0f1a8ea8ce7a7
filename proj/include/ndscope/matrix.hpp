#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "ndscope/error.hpp"
#include "ndscope/ratfun.hpp"

namespace ndscope {

/// Dense row-major matrix over an exact ring (Rat, Poly or RatFun).
template <typename T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  Matrix(std::size_t rows, std::size_t cols, const T& fill)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<T>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw ShapeError("ragged matrix initializer");
      for (const auto& v : row) data_.push_back(v);
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  bool is_zero() const {
    for (const auto& v : data_) {
      if (!ndscope::is_zero(v)) return false;
    }
    return true;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) throw ShapeError("block out of range");
    Matrix b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
  }

  void set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
    if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) throw ShapeError("set_block out of range");
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
  }

  Matrix rows_range(std::size_t r0, std::size_t nr) const { return block(r0, 0, nr, cols_); }
  Matrix cols_range(std::size_t c0, std::size_t nc) const { return block(0, c0, rows_, nc); }

  Matrix select_cols(const std::vector<std::size_t>& which) const {
    Matrix out(rows_, which.size());
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < which.size(); ++k) out(i, k) = (*this)(i, which[k]);
    return out;
  }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
  }
  void swap_cols(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t i = 0; i < rows_; ++i) std::swap((*this)(i, a), (*this)(i, b));
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }
  friend bool operator!=(const Matrix& a, const Matrix& b) { return !(a == b); }

  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "+");
    Matrix c = a;
    for (std::size_t k = 0; k < c.data_.size(); ++k) c.data_[k] += b.data_[k];
    return c;
  }
  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "-");
    Matrix c = a;
    for (std::size_t k = 0; k < c.data_.size(); ++k) c.data_[k] -= b.data_[k];
    return c;
  }
  Matrix operator-() const {
    Matrix c = *this;
    for (auto& v : c.data_) v = -v;
    return c;
  }
  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) {
      throw ShapeError("matrix product shape mismatch: " + std::to_string(a.rows_) + "x" +
                       std::to_string(a.cols_) + " * " + std::to_string(b.rows_) + "x" +
                       std::to_string(b.cols_));
    }
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T& aik = a(i, k);
        if (ndscope::is_zero(aik)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) {
          if (ndscope::is_zero(b(k, j))) continue;
          c(i, j) += aik * b(k, j);
        }
      }
    }
    return c;
  }
  friend Matrix operator*(const T& s, const Matrix& a) {
    Matrix c = a;
    for (auto& v : c.data_) v = s * v;
    return c;
  }

 private:
  static void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
      throw ShapeError(std::string("shape mismatch in matrix ") + op);
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RatMat = Matrix<Rat>;
using PolyMat = Matrix<Poly>;
using RatFunMat = Matrix<RatFun>;

template <typename To, typename From>
Matrix<To> lift(const Matrix<From>& m) {
  Matrix<To> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = To(m(i, j));
  return out;
}

template <typename T>
Matrix<T> block_diag(const std::vector<Matrix<T>>& blocks) {
  std::size_t r = 0, c = 0;
  for (const auto& b : blocks) {
    r += b.rows();
    c += b.cols();
  }
  Matrix<T> out(r, c);
  std::size_t r0 = 0, c0 = 0;
  for (const auto& b : blocks) {
    out.set_block(r0, c0, b);
    r0 += b.rows();
    c0 += b.cols();
  }
  return out;
}

template <typename T>
Matrix<T> hstack(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows()) throw ShapeError("hstack row mismatch");
  Matrix<T> out(a.rows(), a.cols() + b.cols());
  out.set_block(0, 0, a);
  out.set_block(0, a.cols(), b);
  return out;
}

template <typename T>
Matrix<T> vstack(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.cols()) throw ShapeError("vstack column mismatch");
  Matrix<T> out(a.rows() + b.rows(), a.cols());
  out.set_block(0, 0, a);
  out.set_block(a.rows(), 0, b);
  return out;
}

/// λ·E − A as a first-degree polynomial matrix.
inline PolyMat pencil(const RatMat& e, const RatMat& a) {
  if (e.rows() != a.rows() || e.cols() != a.cols()) throw ShapeError("pencil shape mismatch");
  PolyMat p(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      p(i, j) = Poly(std::vector<Rat>{Rat(-a(i, j)), e(i, j)});
  return p;
}

/// Highest entry degree of a polynomial matrix (kMinusInfinity when zero).
inline int max_degree(const PolyMat& m) {
  int d = Poly::kMinusInfinity;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d = std::max(d, m(i, j).degree());
  return d;
}

/// Coefficient matrix of λ^k.
inline RatMat coefficient(const PolyMat& m, int k) {
  RatMat c(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) c(i, j) = m(i, j).coeff(k);
  return c;
}

inline RatMat evaluate(const PolyMat& m, const Rat& x) {
  RatMat out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).eval(x);
  return out;
}

}  // namespace ndscope
