#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gorbit/rational.hpp"

namespace gorbit {

/// Dense row-major matrix over an exact or floating scalar. Sizes here are
/// tiny (ambient matrices are at most 12x12, coordinate matrices ~30x30), so
/// no attempt is made at blocking or sparsity in the dense type.
template <class T>
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(std::size_t r, std::size_t c) : rows_(r), cols_(c), a_(r * c, scalar_traits<T>::zero()) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = scalar_traits<T>::one();
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  T trace() const {
    T s = scalar_traits<T>::zero();
    for (std::size_t i = 0; i < rows_ && i < cols_; ++i) s += (*this)(i, i);
    return s;
  }

  bool is_zero() const {
    for (const T& x : a_)
      if (!scalar_traits<T>::is_zero(x)) return false;
    return true;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
  }
  Matrix& operator*=(const T& s) {
    for (T& x : a_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { a += b; return a; }
  friend Matrix operator-(Matrix a, const Matrix& b) { a -= b; return a; }
  friend Matrix operator*(Matrix a, const T& s) { a *= s; return a; }
  friend Matrix operator*(const T& s, Matrix a) { a *= s; return a; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("Matrix: shape mismatch in product");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T& aik = a(i, k);
        if (scalar_traits<T>::is_zero(aik)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.a_ == b.a_;
  }

  std::vector<T> operator*(const std::vector<T>& x) const {
    if (cols_ != x.size()) throw std::invalid_argument("Matrix: shape mismatch in mat-vec");
    std::vector<T> y(rows_, scalar_traits<T>::zero());
    T scratch = scalar_traits<T>::zero();
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) {
        if (scalar_traits<T>::is_zero((*this)(i, j)) || scalar_traits<T>::is_zero(x[j])) continue;
        fused_add_mul(y[i], (*this)(i, j), x[j], scratch);
      }
    return y;
  }

 private:
  void check_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw std::invalid_argument("Matrix: shape mismatch");
  }

  std::size_t rows_, cols_;
  std::vector<T> a_;
};

using MatQ = Matrix<Rat>;
using MatD = Matrix<double>;

template <class T, class U>
Matrix<U> convert_matrix(const Matrix<T>& m) {
  Matrix<U> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out(i, j) = scalar_traits<U>::from_rat(m(i, j));
  return out;
}

inline MatD to_double(const MatQ& m) { return convert_matrix<Rat, double>(m); }

/// Matrix commutator XY - YX.
template <class T>
Matrix<T> bracket(const Matrix<T>& x, const Matrix<T>& y) {
  if (x.rows() != x.cols() || y.rows() != y.cols() || x.rows() != y.rows())
    throw std::invalid_argument("bracket: equal square shapes required");
  return x * y - y * x;
}

/// Sparse triplet view of an ambient basis matrix; the distinguished bases
/// have at most ~2l nonzero entries, which makes structure constants cheap.
struct SparseQ {
  struct Ent {
    int r, c;
    Rat v;
  };
  int n = 0;
  std::vector<Ent> ents;

  static SparseQ from_dense(const MatQ& m) {
    SparseQ s;
    s.n = static_cast<int>(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j)
        if (!m(i, j).is_zero()) s.ents.push_back({static_cast<int>(i), static_cast<int>(j), m(i, j)});
    return s;
  }

  MatQ to_dense() const {
    MatQ m(n, n);
    for (const auto& e : ents) m(e.r, e.c) += e.v;
    return m;
  }
};

/// tr(XY) for sparse operands: sum over entry pairs with matching indices.
inline Rat trace_product(const SparseQ& x, const SparseQ& y) {
  Rat s = 0;
  for (const auto& ex : x.ents)
    for (const auto& ey : y.ents)
      if (ex.c == ey.r && ey.c == ex.r) s += ex.v * ey.v;
  return s;
}

/// Commutator of sparse operands, returned dense (results are still tiny).
inline MatQ bracket_sparse(const SparseQ& x, const SparseQ& y) {
  MatQ m(x.n, x.n);
  for (const auto& ex : x.ents)
    for (const auto& ey : y.ents) {
      if (ex.c == ey.r) m(ex.r, ey.c) += ex.v * ey.v;
      if (ey.c == ex.r) m(ey.r, ex.c) -= ey.v * ex.v;
    }
  return m;
}

}  // namespace gorbit
