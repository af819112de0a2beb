#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "gorbit/linalg.hpp"
#include "gorbit/matrix.hpp"

namespace gorbit {

enum class Family { A, B, C, D };

inline char family_char(Family f) {
  switch (f) {
    case Family::A: return 'A';
    case Family::B: return 'B';
    case Family::C: return 'C';
    default: return 'D';
  }
}

inline Family family_from_char(char c) {
  switch (c) {
    case 'A': case 'a': return Family::A;
    case 'B': case 'b': return Family::B;
    case 'C': case 'c': return Family::C;
    case 'D': case 'd': return Family::D;
    default: throw std::invalid_argument("unknown family (expected A, B, C or D)");
  }
}

/// Classical compact type: family + rank, with the supported rank windows
/// enforced up front (A: l>=1, B: l>=5, C: l>=3, D: l>=5).
struct LieType {
  Family family;
  int rank;

  LieType(Family f, int l) : family(f), rank(l) {
    int min_rank = 1;
    switch (f) {
      case Family::A: min_rank = 1; break;
      case Family::B: min_rank = 5; break;
      case Family::C: min_rank = 3; break;
      case Family::D: min_rank = 5; break;
    }
    if (l < min_rank)
      throw std::out_of_range(std::string("outside supported range: family ") + family_char(f) +
                              " requires rank >= " + std::to_string(min_rank) + ", got " +
                              std::to_string(l));
  }

  int ambient_dim() const {
    switch (family) {
      case Family::A: return rank + 1;
      case Family::B: return 2 * rank + 1;
      default: return 2 * rank;
    }
  }

  int dim_k() const {
    const int l = rank;
    switch (family) {
      case Family::A: return l * (l + 1) / 2;          // so(l+1)
      case Family::B: return l * l;                    // so(l+1) + so(l)
      case Family::C: return l * l;                    // u(l)
      default: return l * (l - 1);                     // so(l) + so(l)
    }
  }

  std::string str() const { return std::string(1, family_char(family)) + std::to_string(rank); }

  friend bool operator==(const LieType& a, const LieType& b) {
    return a.family == b.family && a.rank == b.rank;
  }
};

enum class LabelKind { W, U, V, UDiag };

struct Label {
  LabelKind kind;
  int i = 0, j = 0;  // 1-based; V/UDiag use i only

  std::string str() const {
    switch (kind) {
      case LabelKind::W: return "w(" + std::to_string(i) + "," + std::to_string(j) + ")";
      case LabelKind::U: return "u(" + std::to_string(i) + "," + std::to_string(j) + ")";
      case LabelKind::V: return "v(" + std::to_string(i) + ")";
      default: return "udiag(" + std::to_string(i) + ")";
    }
  }

  friend bool operator==(const Label& a, const Label& b) {
    return a.kind == b.kind && a.i == b.i && a.j == b.j;
  }
};

struct BasisElement {
  Label label;
  MatQ matrix;
  SparseQ sparse;
};

namespace detail {
inline void put(MatQ& m, int r, int c, long v) { m(r, c) += Rat(v); }
}  // namespace detail

/// The distinguished generator for a label, as an ambient matrix (1-based
/// index convention of the block displays; storage is 0-based).
inline MatQ label_matrix(const LieType& t, const Label& lb) {
  const int l = t.rank;
  const int n = t.ambient_dim();
  MatQ m(n, n);
  const int i = lb.i, j = lb.j;
  using detail::put;
  switch (t.family) {
    case Family::A:
      put(m, i - 1, j - 1, 1), put(m, j - 1, i - 1, -1);
      break;
    case Family::B:
      switch (lb.kind) {
        case LabelKind::V:
          put(m, i, 0, 1), put(m, 0, i, -1), put(m, l + i, 0, 1), put(m, 0, l + i, -1);
          break;
        case LabelKind::W:
          put(m, i, j, 1), put(m, j, i, -1), put(m, l + i, l + j, 1), put(m, l + j, l + i, -1);
          break;
        default:  // U
          put(m, l + i, j, 1), put(m, l + j, i, -1), put(m, i, l + j, 1), put(m, j, l + i, -1);
          break;
      }
      break;
    case Family::C:
      switch (lb.kind) {
        case LabelKind::UDiag:
          put(m, l + i - 1, i - 1, 1), put(m, i - 1, l + i - 1, -1);
          break;
        case LabelKind::W:
          put(m, i - 1, j - 1, 1), put(m, j - 1, i - 1, -1);
          put(m, l + i - 1, l + j - 1, 1), put(m, l + j - 1, l + i - 1, -1);
          break;
        default:  // U
          put(m, l + i - 1, j - 1, 1), put(m, l + j - 1, i - 1, 1);
          put(m, i - 1, l + j - 1, -1), put(m, j - 1, l + i - 1, -1);
          break;
      }
      break;
    case Family::D:
      if (lb.kind == LabelKind::W) {
        put(m, i - 1, j - 1, 1), put(m, j - 1, i - 1, -1);
        put(m, l + i - 1, l + j - 1, 1), put(m, l + j - 1, l + i - 1, -1);
      } else {  // U
        put(m, l + i - 1, j - 1, 1), put(m, l + j - 1, i - 1, -1);
        put(m, i - 1, l + j - 1, 1), put(m, j - 1, l + i - 1, -1);
      }
      break;
  }
  return m;
}

/// Ordered basis of the compact algebra: label families in the documented
/// order (v / udiag first where present, then w, then u), lexicographic
/// (i, j) within each family.
inline std::vector<BasisElement> build_basis(const LieType& t) {
  const int l = t.rank;
  std::vector<Label> labels;
  auto push_pairs = [&](LabelKind k, int hi) {
    for (int i = 2; i <= hi; ++i)
      for (int j = 1; j < i; ++j) labels.push_back({k, i, j});
  };
  switch (t.family) {
    case Family::A:
      push_pairs(LabelKind::W, l + 1);
      break;
    case Family::B:
      for (int k = 1; k <= l; ++k) labels.push_back({LabelKind::V, k, 0});
      push_pairs(LabelKind::W, l);
      push_pairs(LabelKind::U, l);
      break;
    case Family::C:
      for (int k = 1; k <= l; ++k) labels.push_back({LabelKind::UDiag, k, 0});
      push_pairs(LabelKind::W, l);
      push_pairs(LabelKind::U, l);
      break;
    case Family::D:
      push_pairs(LabelKind::W, l);
      push_pairs(LabelKind::U, l);
      break;
  }
  std::vector<BasisElement> basis;
  basis.reserve(labels.size());
  for (const auto& lb : labels) {
    MatQ m = label_matrix(t, lb);
    SparseQ s = SparseQ::from_dense(m);
    basis.push_back({lb, std::move(m), std::move(s)});
  }
  return basis;
}

/// Invariant inner product. The per-family closed forms all collapse to a
/// scaled trace: -(l-1) tr(XY) for A (minus the Killing form of so(l+1)),
/// -tr(XY)/4 for B, C and D.
inline Rat inner_scale(const LieType& t) {
  if (t.family == Family::A) return Rat(-(t.rank - 1));
  return Rat(-1, 4);
}

inline Rat inner(const MatQ& x, const MatQ& y, const LieType& t) {
  if (x.rows() != static_cast<std::size_t>(t.ambient_dim()) || x.rows() != y.rows() ||
      x.cols() != y.cols() || x.rows() != x.cols())
    throw std::invalid_argument("inner: shape mismatch");
  return inner_scale(t) * (x * y).trace();
}

inline Rat inner(const SparseQ& x, const SparseQ& y, const LieType& t) {
  return inner_scale(t) * trace_product(x, y);
}

inline double inner(const MatD& x, const MatD& y, const LieType& t) {
  return inner_scale(t).to_double() * (x * y).trace();
}

/// Ad(k) X = k X k^T for orthogonal k acting on the ambient space.
template <class T>
Matrix<T> conjugate(const Matrix<T>& k, const Matrix<T>& x, double tol = 1e-9) {
  if (k.rows() != k.cols() || k.rows() != x.rows() || x.rows() != x.cols())
    throw std::invalid_argument("conjugate: shape mismatch");
  Matrix<T> gram = k.transpose() * k;
  const Matrix<T> id = Matrix<T>::identity(k.rows());
  if constexpr (scalar_traits<T>::is_exact) {
    if (!(gram == id)) throw std::invalid_argument("conjugate: k is not orthogonal");
  } else {
    gram -= id;
    for (std::size_t i = 0; i < gram.rows(); ++i)
      for (std::size_t j = 0; j < gram.cols(); ++j)
        if (std::fabs(gram(i, j)) > tol)
          throw std::invalid_argument("conjugate: k is not orthogonal");
  }
  return k * x * k.transpose();
}

/// Membership test for the compact algebra's block shape.
inline bool in_algebra(const LieType& t, const MatQ& m) {
  const int n = t.ambient_dim();
  if (m.rows() != static_cast<std::size_t>(n) || m.cols() != static_cast<std::size_t>(n))
    return false;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!(m(i, j) + m(j, i)).is_zero()) return false;  // skew overall, all families
  const int l = t.rank;
  auto eq = [&](int r1, int c1, int r2, int c2) { return m(r1, c1) == m(r2, c2); };
  switch (t.family) {
    case Family::A:
      return true;
    case Family::B:
      for (int i = 0; i < l; ++i) {
        if (!eq(0, 1 + i, 0, 1 + l + i)) return false;
        for (int j = 0; j < l; ++j) {
          if (!eq(1 + i, 1 + j, 1 + l + i, 1 + l + j)) return false;      // diagonal blocks equal
          if (!eq(1 + l + i, 1 + j, 1 + i, 1 + l + j)) return false;      // off blocks equal
        }
      }
      return true;
    case Family::C:
      for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) {
          if (!eq(i, j, l + i, l + j)) return false;                      // A block repeated
          if (!(m(l + i, j) + m(i, l + j)).is_zero()) return false;       // off blocks = B, -B
          if (!eq(l + i, j, l + j, i)) return false;                      // B symmetric
        }
      return true;
    case Family::D:
      for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) {
          if (!eq(i, j, l + i, l + j)) return false;
          if (!eq(l + i, j, i, l + j)) return false;                      // off blocks equal
        }
      return true;
  }
  return false;
}

}  // namespace gorbit
