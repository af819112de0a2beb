#pragma once

#include <cstddef>
#include <vector>

#include "gorbit/decomposition.hpp"

namespace gorbit {

/// Precomputed coordinate data for one decomposition and one scalar mode:
/// Gram diagonals, dense ambient copies, structure constants over the
/// combined (tangent + isotropy) basis, and the isotropy action matrices.
/// Everything downstream (metrics, invariance, geodesic residuals) works in
/// coordinates against this table.
template <class T>
struct Workspace {
  struct Ent {
    int idx;
    T v;
  };

  const Decomposition* dec = nullptr;
  LieType type;
  std::size_t mdim = 0, kdim = 0;

  std::vector<T> m_norm2, k_norm2;
  std::vector<Matrix<T>> m_dense, k_dense;
  std::vector<std::vector<std::vector<Ent>>> br;  // br[a][b]: combined coords of [e_a, e_b]
  std::vector<Matrix<T>> ad_k;                    // ad(k-basis[j]) restricted to the tangent space

  explicit Workspace(const LieType& t) : type(t) {}

  std::size_t total() const { return mdim + kdim; }

  /// Combined-coordinate bracket of two tangent vectors (given in tangent
  /// coordinates); the result has tangent part [0, mdim) and isotropy part
  /// [mdim, mdim+kdim).
  std::vector<T> bracket_m(const std::vector<T>& x, const std::vector<T>& y) const {
    std::vector<T> out(total(), scalar_traits<T>::zero());
    T f = scalar_traits<T>::zero(), scratch = scalar_traits<T>::zero();
    for (std::size_t a = 0; a < mdim; ++a) {
      if (scalar_traits<T>::is_zero(x[a])) continue;
      for (std::size_t b = 0; b < mdim; ++b) {
        if (br[a][b].empty() || scalar_traits<T>::is_zero(y[b])) continue;
        f = scalar_traits<T>::zero();
        fused_add_mul(f, x[a], y[b], scratch);
        for (const auto& e : br[a][b]) fused_add_mul(out[e.idx], f, e.v, scratch);
      }
    }
    return out;
  }

  /// Tangent part of [k-basis[j], Y] for a tangent vector Y.
  std::vector<T> bracket_k_m(std::size_t j, const std::vector<T>& y) const {
    std::vector<T> out(mdim, scalar_traits<T>::zero());
    T scratch = scalar_traits<T>::zero();
    for (std::size_t b = 0; b < mdim; ++b) {
      if (scalar_traits<T>::is_zero(y[b])) continue;
      for (const auto& e : br[mdim + j][b])
        if (e.idx < static_cast<int>(mdim)) fused_add_mul(out[e.idx], y[b], e.v, scratch);
    }
    return out;
  }

  /// Coordinate matrix of Ad(k) on the tangent space for an ambient
  /// orthogonal k (columns are images of the adapted basis vectors).
  Matrix<T> ad_group_matrix(const Matrix<T>& k, double tol = 1e-9) const {
    Matrix<T> out(mdim, mdim);
    for (std::size_t b = 0; b < mdim; ++b) {
      const Matrix<T> img = conjugate(k, m_dense[b], tol);
      for (std::size_t i = 0; i < mdim; ++i) {
        T ip = scalar_traits<T>::zero();
        for (std::size_t r = 0; r < img.rows(); ++r)
          for (std::size_t c = 0; c < img.cols(); ++c) {
            if (scalar_traits<T>::is_zero(m_dense[i](c, r))) continue;
            ip += img(r, c) * m_dense[i](c, r);
          }
        const T scale = scalar_traits<T>::from_rat(inner_scale(type));
        out(i, b) = scale * ip / m_norm2[i];
      }
    }
    return out;
  }

  T gram_norm2_m(const std::vector<T>& x) const {
    T s = scalar_traits<T>::zero(), t = scalar_traits<T>::zero(), scratch = scalar_traits<T>::zero();
    for (std::size_t i = 0; i < mdim; ++i) {
      if (scalar_traits<T>::is_zero(x[i])) continue;
      t = scalar_traits<T>::zero();
      fused_add_mul(t, x[i], m_norm2[i], scratch);
      fused_add_mul(s, t, x[i], scratch);
    }
    return s;
  }
};

template <class T>
Workspace<T> make_workspace(const Decomposition& dec) {
  const LieType& t = dec.theta.type;
  Workspace<T> ws(t);
  ws.dec = &dec;
  ws.mdim = dec.dim_m();
  ws.kdim = dec.dim_k();
  for (const auto& q : dec.m_norm2) ws.m_norm2.push_back(scalar_traits<T>::from_rat(q));
  for (const auto& q : dec.k_norm2) ws.k_norm2.push_back(scalar_traits<T>::from_rat(q));
  for (const auto& m : dec.m_basis) ws.m_dense.push_back(convert_matrix<Rat, T>(m));
  for (const auto& m : dec.k_basis) ws.k_dense.push_back(convert_matrix<Rat, T>(m));

  const std::size_t n = ws.total();
  std::vector<const SparseQ*> combined(n);
  std::vector<const Rat*> norms(n);
  for (std::size_t i = 0; i < ws.mdim; ++i) combined[i] = &dec.m_sparse[i], norms[i] = &dec.m_norm2[i];
  for (std::size_t j = 0; j < ws.kdim; ++j)
    combined[ws.mdim + j] = &dec.k_sparse[j], norms[ws.mdim + j] = &dec.k_norm2[j];

  ws.br.assign(n, std::vector<std::vector<typename Workspace<T>::Ent>>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const MatQ br_ab = bracket_sparse(*combined[a], *combined[b]);
      if (br_ab.is_zero()) continue;
      const SparseQ brs = SparseQ::from_dense(br_ab);
      for (std::size_t c = 0; c < n; ++c) {
        const Rat coeff = inner(brs, *combined[c], t) / *norms[c];
        if (coeff.is_zero()) continue;
        ws.br[a][b].push_back({static_cast<int>(c), scalar_traits<T>::from_rat(coeff)});
        ws.br[b][a].push_back({static_cast<int>(c), scalar_traits<T>::from_rat(-coeff)});
      }
    }

  ws.ad_k.reserve(ws.kdim);
  for (std::size_t j = 0; j < ws.kdim; ++j) {
    Matrix<T> adw(ws.mdim, ws.mdim);
    for (std::size_t b = 0; b < ws.mdim; ++b)
      for (const auto& e : ws.br[ws.mdim + j][b])
        if (e.idx < static_cast<int>(ws.mdim)) adw(e.idx, b) = e.v;
    ws.ad_k.push_back(std::move(adw));
  }
  return ws;
}

}  // namespace gorbit
