#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "gorbit/matrix.hpp"

namespace gorbit {

/// Row-reduce [A | B] in place over the scalar field. Returns pivot columns
/// of A. Exact scalars pivot on the first nonzero entry; doubles pivot on the
/// largest magnitude with `tol` as the rank threshold.
template <class T>
std::vector<std::size_t> row_reduce(Matrix<T>& a, Matrix<T>& b, double tol = 1e-11) {
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < n && row < m; ++col) {
    std::size_t sel = m;
    if constexpr (scalar_traits<T>::is_exact) {
      for (std::size_t i = row; i < m; ++i)
        if (!a(i, col).is_zero()) { sel = i; break; }
    } else {
      double best = tol;
      for (std::size_t i = row; i < m; ++i) {
        double v = abs_value(a(i, col));
        if (v > best) { best = v; sel = i; }
      }
    }
    if (sel == m) continue;
    if (sel != row) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(row, j), a(sel, j));
      for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(row, j), b(sel, j));
    }
    const T piv = a(row, col);
    T scratch = scalar_traits<T>::zero();
    for (std::size_t j = 0; j < n; ++j) a(row, j) /= piv;
    for (std::size_t j = 0; j < b.cols(); ++j) b(row, j) /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == row) continue;
      const T f = a(i, col);
      if (scalar_traits<T>::is_zero(f)) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (scalar_traits<T>::is_zero(a(row, j))) continue;
        fused_sub_mul(a(i, j), f, a(row, j), scratch);
      }
      a(i, col) = scalar_traits<T>::zero();
      for (std::size_t j = 0; j < b.cols(); ++j) {
        if (scalar_traits<T>::is_zero(b(row, j))) continue;
        fused_sub_mul(b(i, j), f, b(row, j), scratch);
      }
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

template <class T>
struct SolveResult {
  bool consistent = false;
  std::vector<T> x;  // a particular solution (free variables set to zero)
};

/// Solve A x = b, reporting consistency; free variables are set to zero.
template <class T>
SolveResult<T> solve_linear(Matrix<T> a, const std::vector<T>& rhs, double tol = 1e-11) {
  const std::size_t m = a.rows(), n = a.cols();
  Matrix<T> b(m, 1);
  for (std::size_t i = 0; i < m; ++i) b(i, 0) = rhs[i];
  const auto pivots = row_reduce(a, b, tol);
  SolveResult<T> res;
  res.x.assign(n, scalar_traits<T>::zero());
  // Rows past the rank must have zero rhs for consistency.
  for (std::size_t i = pivots.size(); i < m; ++i) {
    if constexpr (scalar_traits<T>::is_exact) {
      if (!b(i, 0).is_zero()) return res;
    } else {
      if (std::fabs(scalar_traits<T>::to_double(b(i, 0))) > tol) return res;
    }
  }
  res.consistent = true;
  for (std::size_t r = 0; r < pivots.size(); ++r) res.x[pivots[r]] = b(r, 0);
  return res;
}

template <class T>
std::size_t rank(Matrix<T> a, double tol = 1e-11) {
  Matrix<T> dummy(a.rows(), 0);
  return row_reduce(a, dummy, tol).size();
}

template <class T>
Matrix<T> inverse(Matrix<T> a, double tol = 1e-11) {
  const std::size_t n = a.rows();
  Matrix<T> inv = Matrix<T>::identity(n);
  if (row_reduce(a, inv, tol).size() != n)
    throw std::invalid_argument("inverse: singular matrix");
  return inv;
}

/// Basis of the nullspace of A (columns of the returned matrices are the
/// coordinates; each vector has a 1 in its own free column).
template <class T>
std::vector<std::vector<T>> nullspace(Matrix<T> a, double tol = 1e-11) {
  const std::size_t n = a.cols();
  Matrix<T> dummy(a.rows(), 0);
  const auto pivots = row_reduce(a, dummy, tol);
  std::vector<bool> is_pivot(n, false);
  for (auto p : pivots) is_pivot[p] = true;
  std::vector<std::vector<T>> basis;
  for (std::size_t free = 0; free < n; ++free) {
    if (is_pivot[free]) continue;
    std::vector<T> v(n, scalar_traits<T>::zero());
    v[free] = scalar_traits<T>::one();
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -a(r, free);
    basis.push_back(std::move(v));
  }
  return basis;
}

template <class T>
struct LstsqResult {
  std::vector<T> x;
  T residual_sq;  // (Ax+b)^T G (Ax+b), exactly zero iff the system is consistent
};

/// Minimize ||A x + b||^2 in the inner product with diagonal Gram weights g
/// (weights are the squared norms of the target basis). Normal equations are
/// solved exactly over Rat; they are always consistent.
template <class T>
LstsqResult<T> lstsq_gram(const Matrix<T>& a, const std::vector<T>& b,
                          const std::vector<T>& g, double tol = 1e-11) {
  const std::size_t m = a.rows(), n = a.cols();
  LstsqResult<T> out;
  if (n == 0) {
    out.x.clear();
    T r = scalar_traits<T>::zero();
    for (std::size_t i = 0; i < m; ++i) r += b[i] * g[i] * b[i];
    out.residual_sq = r;
    return out;
  }
  Matrix<T> nmat(n, n);
  std::vector<T> nrhs(n, scalar_traits<T>::zero());
  T t = scalar_traits<T>::zero(), scratch = scalar_traits<T>::zero();
  // Weighted columns: ga(i, j) = g[i] * a(i, j).
  Matrix<T> ga(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (scalar_traits<T>::is_zero(a(i, j))) continue;
      fused_add_mul(ga(i, j), g[i], a(i, j), scratch);
    }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j; k < n; ++k) {
      T s = scalar_traits<T>::zero();
      for (std::size_t i = 0; i < m; ++i) {
        if (scalar_traits<T>::is_zero(ga(i, j)) || scalar_traits<T>::is_zero(a(i, k))) continue;
        fused_add_mul(s, ga(i, j), a(i, k), scratch);
      }
      nmat(j, k) = s;
      nmat(k, j) = s;
    }
    T s = scalar_traits<T>::zero();
    for (std::size_t i = 0; i < m; ++i) {
      if (scalar_traits<T>::is_zero(ga(i, j)) || scalar_traits<T>::is_zero(b[i])) continue;
      fused_add_mul(s, ga(i, j), b[i], scratch);
    }
    nrhs[j] = -s;
  }
  auto sol = solve_linear(nmat, nrhs, tol);
  out.x = std::move(sol.x);
  std::vector<T> r = a * out.x;
  T rs = scalar_traits<T>::zero();
  for (std::size_t i = 0; i < m; ++i) {
    const T ri = r[i] + b[i];
    if (scalar_traits<T>::is_zero(ri)) continue;
    t = scalar_traits<T>::zero();
    fused_add_mul(t, ri, g[i], scratch);
    fused_add_mul(rs, t, ri, scratch);
  }
  out.residual_sq = rs;
  return out;
}

struct PdReport {
  bool positive_definite = false;
  std::size_t failing_minor = 0;  // 1-based index of the first non-positive pivot
};

/// LDL^T positivity test: pivots are ratios of leading principal minors, so a
/// non-positive pivot pinpoints the offending minor. Float mode applies the
/// `floor` threshold to the pivots.
template <class T>
PdReport positive_definite(Matrix<T> a, double floor = 1e-10) {
  const std::size_t n = a.rows();
  PdReport rep;
  T scratch = scalar_traits<T>::zero();
  for (std::size_t k = 0; k < n; ++k) {
    const T piv = a(k, k);
    bool ok;
    if constexpr (scalar_traits<T>::is_exact)
      ok = piv.sign() > 0;
    else
      ok = scalar_traits<T>::to_double(piv) > floor;
    if (!ok) {
      rep.failing_minor = k + 1;
      return rep;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const T f = a(i, k) / piv;
      if (scalar_traits<T>::is_zero(f)) continue;
      for (std::size_t j = k; j < n; ++j) {
        if (scalar_traits<T>::is_zero(a(k, j))) continue;
        fused_sub_mul(a(i, j), f, a(k, j), scratch);
      }
    }
  }
  rep.positive_definite = true;
  return rep;
}

/// Characteristic polynomial of a square matrix by the Faddeev-LeVerrier
/// recursion; coefficients returned lowest degree first, monic leading term.
template <class T>
std::vector<T> char_poly(const Matrix<T>& a) {
  const std::size_t n = a.rows();
  std::vector<T> c(n + 1, scalar_traits<T>::zero());
  c[n] = scalar_traits<T>::one();
  Matrix<T> m = Matrix<T>::identity(n);  // M_1
  for (std::size_t k = 1; k <= n; ++k) {
    Matrix<T> am = a * m;
    const T divk = scalar_traits<T>::from_rat(Rat(static_cast<long>(k)));
    c[n - k] = -(am.trace() / divk);
    for (std::size_t i = 0; i < n; ++i) am(i, i) += c[n - k];
    m = std::move(am);  // M_{k+1}
  }
  return c;
}

inline Rat eval_poly(const std::vector<Rat>& c, const Rat& x) {
  Rat acc = 0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

namespace detail {
inline std::vector<mpz_class> divisors_capped(mpz_class n, std::size_t cap) {
  std::vector<mpz_class> ds;
  if (n < 0) n = -n;
  if (n == 0) return ds;
  std::vector<std::pair<mpz_class, unsigned>> fac;
  mpz_class d = 2;
  while (d * d <= n) {
    if (d > 3000000) return {};  // give up: caller treats as "no rational roots found"
    if (n % d == 0) {
      unsigned e = 0;
      while (n % d == 0) { n /= d; ++e; }
      fac.push_back({d, e});
    }
    d += (d == 2) ? 1 : 2;
  }
  if (n > 1) fac.push_back({n, 1});
  ds.push_back(1);
  for (const auto& [p, e] : fac) {
    const std::size_t sz = ds.size();
    mpz_class pk = 1;
    for (unsigned k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < sz; ++i) {
        ds.push_back(ds[i] * pk);
        if (ds.size() > cap) return {};
      }
    }
  }
  return ds;
}
}  // namespace detail

/// All rational roots of a rational-coefficient polynomial (lowest degree
/// first). Uses the rational root bound on the integer-cleared polynomial;
/// divisor enumeration bails out (returning what was found so far) on huge
/// coefficients, which simply makes the caller skip the block.
inline std::vector<Rat> rational_roots(const std::vector<Rat>& poly) {
  // Strip leading zero coefficients and factor out x^k.
  std::vector<Rat> c = poly;
  while (!c.empty() && c.back().is_zero()) c.pop_back();
  std::vector<Rat> roots;
  if (c.size() <= 1) return roots;
  std::size_t low = 0;
  while (low < c.size() && c[low].is_zero()) ++low;
  if (low > 0) {
    roots.push_back(Rat(0));
    c.erase(c.begin(), c.begin() + static_cast<long>(low));
  }
  if (c.size() <= 1) return roots;
  // Clear denominators to an integer polynomial.
  mpz_class lcm = 1;
  for (const auto& q : c) {
    mpz_class den = q.raw().get_den();
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), lcm.get_mpz_t(), den.get_mpz_t());
    lcm = lcm / g * den;
  }
  std::vector<mpz_class> ic;
  for (const auto& q : c) ic.push_back(mpz_class(q.raw().get_num() * (lcm / q.raw().get_den())));
  const auto ps = detail::divisors_capped(ic.front(), 4096);
  const auto qs = detail::divisors_capped(ic.back(), 4096);
  if (ps.empty() || qs.empty()) return roots;
  for (const auto& p : ps)
    for (const auto& q : qs) {
      for (int sgn : {1, -1}) {
        Rat cand(mpq_class(sgn * p, q));
        if (eval_poly(c, cand).is_zero()) {
          bool dup = false;
          for (const auto& r : roots) dup = dup || (r == cand);
          if (!dup) roots.push_back(cand);
        }
      }
    }
  return roots;
}

/// Eigenvalues/vectors of a symmetric double matrix by cyclic Jacobi.
struct EigenSym {
  std::vector<double> values;
  MatD vectors;  // columns are eigenvectors
};

inline EigenSym jacobi_eigen(MatD a, int sweeps = 64) {
  const std::size_t n = a.rows();
  MatD v = MatD::identity(n);
  for (int s = 0; s < sweeps; ++s) {
    double off = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-26) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a(p, q)) < 1e-15) continue;
        const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
        const double cs = 1 / std::sqrt(t * t + 1), sn = t * cs;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = cs * akp - sn * akq;
          a(k, q) = sn * akp + cs * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = cs * apk - sn * aqk;
          a(q, k) = sn * apk + cs * aqk;
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = cs * vkp - sn * vkq;
          v(k, q) = sn * vkp + cs * vkq;
        }
      }
  }
  EigenSym e;
  e.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) e.values[i] = a(i, i);
  e.vectors = std::move(v);
  return e;
}

}  // namespace gorbit
