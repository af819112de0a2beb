#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "gorbit/metric.hpp"

namespace gorbit {

enum class Verdict { GO, NOT_GO, UNDECIDED };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::GO: return "GO";
    case Verdict::NOT_GO: return "NOT_GO";
    default: return "UNDECIDED";
  }
}

/// Result of one geodesic-vector test: the squared distance from zero of
/// [Z + X, AX] minimized over the isotropy algebra, with the minimizing Z.
template <class T>
struct GoSample {
  std::vector<T> x;          // tangent coordinates
  T residual_sq{};           // exact zero iff X is a geodesic vector
  std::vector<T> witness_z;  // minimizing isotropy coordinates
  bool solved = false;       // residual is (numerically) zero
  T k_component_sq{};        // isotropy part of [X, AX]; zero for invariant A
  std::string label;
};

struct GoTolerance {
  double fail = 1e-6;  // relative residual above this: not a geodesic vector
  double pass = 1e-9;  // relative residual below this: counts as solved
};

/// Minimize |[Z + X, AX]| over the isotropy algebra. Exact mode decides the
/// consistency of the linear system; float mode reports the least-squares
/// residual against the tolerances.
template <class T>
GoSample<T> geodesic_residual(const Workspace<T>& ws, const Matrix<T>& a, const std::vector<T>& x,
                              const GoTolerance& tol = {}) {
  const std::size_t m = ws.mdim, k = ws.kdim;
  GoSample<T> s;
  s.x = x;
  const std::vector<T> y = a * x;
  const std::vector<T> v = ws.bracket_m(x, y);
  // Isotropy component of [X, AX]: must vanish when A is invariant.
  T ksq = scalar_traits<T>::zero();
  for (std::size_t j = 0; j < k; ++j) ksq += v[m + j] * ws.k_norm2[j] * v[m + j];
  s.k_component_sq = ksq;
  const double scale = 1.0 + std::sqrt(std::max(0.0, scalar_traits<T>::to_double(ws.gram_norm2_m(y))));
  if constexpr (scalar_traits<T>::is_exact) {
    if (!ksq.is_zero())
      throw std::domain_error(
          "geodesic residual: [X, AX] has a nonzero isotropy component; the metric is not "
          "invariant");
  } else {
    if (std::sqrt(std::fabs(scalar_traits<T>::to_double(ksq))) > tol.fail * scale)
      throw std::domain_error(
          "geodesic residual: [X, AX] has a nonzero isotropy component; the metric is not "
          "invariant");
  }
  std::vector<T> d(v.begin(), v.begin() + m);
  bool d_zero = true;
  for (const T& di : d) d_zero = d_zero && scalar_traits<T>::is_zero(di);
  if (d_zero) {
    // [X, AX] already vanishes: Z = 0 solves.
    s.residual_sq = scalar_traits<T>::zero();
    s.witness_z.assign(k, scalar_traits<T>::zero());
    s.solved = true;
    return s;
  }
  Matrix<T> lmap(m, k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::vector<T> col = ws.bracket_k_m(j, y);
    for (std::size_t i = 0; i < m; ++i) lmap(i, j) = col[i];
  }
  auto ls = lstsq_gram(lmap, d, ws.m_norm2);
  s.residual_sq = ls.residual_sq;
  s.witness_z = std::move(ls.x);
  if constexpr (scalar_traits<T>::is_exact)
    s.solved = s.residual_sq.is_zero();
  else
    s.solved = std::sqrt(std::fabs(s.residual_sq)) <= tol.pass * scale;
  return s;
}

enum class ClosedForm { Yes, No, Unknown };  // Unknown: no closed form covers the case

template <class T>
struct GoReport {
  Verdict verdict = Verdict::GO;
  bool exact_mode = true;
  std::optional<bool> classified;  // closed-form predicate, when one exists
  bool agreement = true;           // numeric vs closed form (true when no closed form)
  bool certified = false;          // GO backed by the closed form
  T max_residual_sq{};
  std::optional<GoSample<T>> failing_witness;
  int samples_evaluated = 0;
  int sweep_basis = 0, sweep_pairs = 0, sweep_random = 0;
};

/// Sampling plan: every adapted basis vector, every pairwise sum of two
/// basis vectors, and `n_samples` random integer-coordinate vectors with
/// entries in [-3, 3].
template <class T>
GoReport<T> is_go_numeric(const Workspace<T>& ws, const Matrix<T>& a, int n_samples,
                          std::uint64_t seed, const GoTolerance& tol = {}) {
  GoReport<T> rep;
  rep.exact_mode = scalar_traits<T>::is_exact;
  const std::size_t m = ws.mdim;
  bool undecided_seen = false;
  double max_res = 0;

  auto consider = [&](std::vector<T> x, const std::string& label) -> bool {
    GoSample<T> s = geodesic_residual(ws, a, x, tol);
    s.label = label;
    ++rep.samples_evaluated;
    const double res = scalar_traits<T>::to_double(s.residual_sq);
    if (res > max_res) {
      max_res = res;
      rep.max_residual_sq = s.residual_sq;
    }
    if constexpr (scalar_traits<T>::is_exact) {
      if (!s.residual_sq.is_zero()) {
        rep.verdict = Verdict::NOT_GO;
        rep.failing_witness = std::move(s);
        return false;
      }
    } else {
      const std::vector<T> y = a * s.x;
      const double scale =
          1.0 + std::sqrt(std::max(0.0, scalar_traits<T>::to_double(ws.gram_norm2_m(y))));
      const double r = std::sqrt(std::fabs(res));
      if (r > tol.fail * scale) {
        rep.verdict = Verdict::NOT_GO;
        rep.failing_witness = std::move(s);
        return false;
      }
      if (r > tol.pass * scale) undecided_seen = true;
    }
    return true;
  };

  // (a) basis vectors
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<T> x(m, scalar_traits<T>::zero());
    x[i] = scalar_traits<T>::one();
    ++rep.sweep_basis;
    if (!consider(std::move(x), "e" + std::to_string(i))) return rep;
  }
  // (b) pairwise sums
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      std::vector<T> x(m, scalar_traits<T>::zero());
      x[i] = scalar_traits<T>::one();
      x[j] = scalar_traits<T>::one();
      ++rep.sweep_pairs;
      if (!consider(std::move(x), "e" + std::to_string(i) + "+e" + std::to_string(j))) return rep;
    }
  // (c) random integer vectors
  Rng rng(seed);
  for (int s = 0; s < n_samples && m > 0; ++s) {
    std::vector<T> x(m, scalar_traits<T>::zero());
    bool nonzero = false;
    for (std::size_t i = 0; i < m; ++i) {
      const long c = rng.uniform(-3, 3);
      nonzero = nonzero || c != 0;
      x[i] = scalar_traits<T>::from_rat(Rat(c));
    }
    if (!nonzero) x[0] = scalar_traits<T>::one();
    ++rep.sweep_random;
    if (!consider(std::move(x), "random#" + std::to_string(s))) return rep;
  }
  rep.verdict = undecided_seen ? Verdict::UNDECIDED : Verdict::GO;
  return rep;
}

// ---- closed-form classification ------------------------------------------

namespace detail {

/// Equality comparison for parameter values: exact when both are rational.
struct ParamEq {
  bool all_exact;
  bool eq(const PVal& a, const PVal& b) const {
    if (all_exact) return a.r == b.r;
    const double x = a.as_double(), y = b.as_double();
    return std::fabs(x - y) <= 1e-9 * (1 + std::fabs(x) + std::fabs(y));
  }
  bool eqv(const PVal& a, const Rat& q) const { return eq(a, PVal::of(q)); }
  bool eq_num(const PVal& a, double y) const {
    const double x = a.as_double();
    return std::fabs(x - y) <= 1e-9 * (1 + std::fabs(x) + std::fabs(y));
  }
};

inline bool all_equal(const std::vector<PVal>& vs, const ParamEq& eq) {
  for (std::size_t i = 1; i < vs.size(); ++i)
    if (!eq.eq(vs[0], vs[i])) return false;
  return true;
}

}  // namespace detail

/// Evaluate the closed-form geodesic-orbit conditions for the case, if the
/// classification provides one (the special rank-4 C flags are numeric-only).
inline std::optional<bool> is_go_classified(const ThetaSpec& th, const MetricParams& p) {
  const MetricCase mc = metric_case(th);
  const Schema sch = param_schema(th);
  bool all_exact = true;
  for (const auto& [k, v] : p.values) all_exact = all_exact && v.exact;
  detail::ParamEq E{all_exact};
  const int r = th.blocks();

  auto collect = [&](const std::string& prefix) {
    std::vector<PVal> out;
    for (const auto& ps : sch.params)
      if (ps.name.rfind(prefix, 0) == 0) out.push_back(p.get(ps.name));
    return out;
  };
  auto pair_tags = [&](int upto) {
    std::vector<std::string> tags;
    for (int n = 1; n <= upto; ++n)
      for (int m = n + 1; m <= upto; ++m) tags.push_back(detail::tag2(m, n));
    return tags;
  };
  // lambda1 = lambda2 = lambda, b common, over the given pair tags (with the
  // given parameter prefixes); returns false in `ok` on any mismatch.
  struct PairCommon {
    bool ok = true;
    std::optional<PVal> lambda, b;
  };
  auto common_pairs = [&](const char* d1, const char* d2, const char* off,
                          const std::vector<std::string>& tags) {
    PairCommon c;
    for (const auto& tag : tags) {
      const PVal l1 = p.get(d1 + tag), l2 = p.get(d2 + tag), bb = p.get(off + tag);
      if (!E.eq(l1, l2)) { c.ok = false; return c; }
      if (!c.lambda) c.lambda = l1;
      if (!E.eq(*c.lambda, l1)) { c.ok = false; return c; }
      if (!c.b) c.b = bb;
      if (!E.eq(*c.b, bb)) { c.ok = false; return c; }
    }
    return c;
  };
  auto gamma_value_matches = [&](const std::vector<PVal>& gammas, const PVal& lambda,
                                 const PVal& b) {
    // gamma = (lambda^2 - b^2) / lambda
    if (gammas.empty()) return true;
    if (!detail::all_equal(gammas, E)) return false;
    if (all_exact) {
      const Rat lam = lambda.r, bb = b.r;
      return gammas[0].r * lam == lam * lam - bb * bb;
    }
    const double lam = lambda.as_double(), bb = b.as_double();
    return E.eq_num(gammas[0], (lam * lam - bb * bb) / lam);
  };

  switch (mc) {
    case MetricCase::Point:
    case MetricCase::A3Irr:
    case MetricCase::A3Pair:
      return true;
    case MetricCase::AGeneric:
      return detail::all_equal(collect("mu_"), E);
    case MetricCase::A3Empty: {
      if (!detail::all_equal(collect("mu_"), E)) return false;
      const PVal b1 = p.get("b_1"), b2 = p.get("b_2"), b3 = p.get("b_3");
      if (!E.eq(b1, b3)) return false;
      if (all_exact) return b2.r == -b1.r;
      return E.eq_num(b2, -b1.as_double());
    }
    case MetricCase::A3Single: {
      const PVal m21 = p.get("mu_2_1"), m22 = p.get("mu_2_2"), m1 = p.get("mu_1"), b = p.get("b");
      if (!E.eq(m21, m22)) return false;
      if (all_exact) return b.r * b.r == m21.r * (m21.r - m1.r);
      return E.eq_num(b, std::sqrt(std::max(0.0, m21.as_double() * (m21.as_double() - m1.as_double())))) ||
             E.eq_num(b, -std::sqrt(std::max(0.0, m21.as_double() * (m21.as_double() - m1.as_double()))));
    }
    case MetricCase::BNoAlpha: {
      const auto mus = collect("mu_");
      if (!detail::all_equal(mus, E)) return false;
      const auto tags = pair_tags(r);
      const auto gammas = collect("gamma_");
      if (tags.empty()) return true;  // single block: (mu, gamma) free
      auto c = common_pairs("lambda1_", "lambda2_", "b_", tags);
      if (!c.ok) return false;
      // mu - lambda = b
      if (all_exact) {
        if (!(mus[0].r - c.lambda->r == c.b->r)) return false;
      } else if (!E.eq_num(*c.b, mus[0].as_double() - c.lambda->as_double())) {
        return false;
      }
      return gamma_value_matches(gammas, *c.lambda, *c.b);
    }
    case MetricCase::BAlpha: {
      const auto mus = collect("mu_");
      const auto rhos = collect("rho_");
      if (!detail::all_equal(mus, E) || !detail::all_equal(rhos, E)) return false;
      const auto tags = pair_tags(r - 1);
      const auto gammas = collect("gamma_");
      // gamma = 2 mu rho / (mu + rho), stated without reference to lambda so
      // it also covers the two-block shape with no coupled pairs.
      auto gamma_harmonic = [&]() {
        if (gammas.empty()) return true;
        if (!detail::all_equal(gammas, E)) return false;
        if (all_exact)
          return gammas[0].r * (mus[0].r + rhos[0].r) == Rat(2) * mus[0].r * rhos[0].r;
        return E.eq_num(gammas[0], 2 * mus[0].as_double() * rhos[0].as_double() /
                                       (mus[0].as_double() + rhos[0].as_double()));
      };
      if (tags.empty()) return gamma_harmonic();
      auto c = common_pairs("lambda1_", "lambda2_", "b_", tags);
      if (!c.ok) return false;
      if (all_exact) {
        if (!(mus[0].r - c.lambda->r == c.b->r)) return false;
        if (!(c.lambda->r - rhos[0].r == c.b->r)) return false;
      } else {
        if (!E.eq_num(*c.b, mus[0].as_double() - c.lambda->as_double())) return false;
        if (!E.eq_num(*c.b, c.lambda->as_double() - rhos[0].as_double())) return false;
      }
      return gamma_harmonic();
    }
    case MetricCase::CNoAlpha:
    case MetricCase::CAlpha: {
      const int rtilde = mc == MetricCase::CAlpha ? r - 1 : r;
      // All off-center couplings vanish and all off-center scalars agree.
      std::vector<PVal> scalars;
      for (const auto& tag : pair_tags(mc == MetricCase::CAlpha ? r - 1 : r)) {
        if (all_exact ? !p.get("b_" + tag).r.is_zero() : !E.eq_num(p.get("b_" + tag), 0.0))
          return false;
        scalars.push_back(p.get("mu1_" + tag));
        scalars.push_back(p.get("mu2_" + tag));
      }
      if (mc == MetricCase::CAlpha)
        for (int n = 1; n <= r - 1; ++n) scalars.push_back(p.get("mu_" + detail::tag2(r, n)));
      for (int i = 1; i <= rtilde; ++i)
        if (th.partition[i - 1] > 1) scalars.push_back(p.get("mu_" + std::to_string(i)));
      if (scalars.empty()) return true;  // only the center block: unconstrained
      if (!detail::all_equal(scalars, E)) return false;
      const PVal mu = scalars[0];
      // Center block ties: a_{mn} l_n = mu0_n - mu and a_{mn} l_m = mu0_m - mu
      // (couplings are stored per unit of sqrt(l_m l_n)).
      for (int n = 1; n <= rtilde; ++n)
        for (int m = n + 1; m <= rtilde; ++m) {
          const PVal a = p.get("a_" + detail::tag2(m, n));
          const PVal mn = p.get("mu0_" + std::to_string(n)), mm = p.get("mu0_" + std::to_string(m));
          const long ln = th.partition[n - 1], lm = th.partition[m - 1];
          if (all_exact) {
            if (!(a.r * Rat(ln) == mn.r - mu.r)) return false;
            if (!(a.r * Rat(lm) == mm.r - mu.r)) return false;
          } else {
            if (!E.eq_num(a, (mn.as_double() - mu.as_double()) / ln)) return false;
            if (!E.eq_num(a, (mm.as_double() - mu.as_double()) / lm)) return false;
          }
        }
      return true;
    }
    case MetricCase::C4Empty:
    case MetricCase::C4Single:
      return std::nullopt;  // numeric-only route
    case MetricCase::DNoAlpha: {
      const auto tags = pair_tags(r);
      if (tags.empty()) return true;  // single in-block summand
      auto c = common_pairs("lambda1_", "lambda2_", "b_", tags);
      if (!c.ok) return false;
      return gamma_value_matches(collect("gamma_"), *c.lambda, *c.b);
    }
    case MetricCase::DBoth: {
      std::vector<PVal> diag;
      for (const auto& tag : pair_tags(r - 1)) {
        if (all_exact ? !p.get("b_" + tag).r.is_zero() : !E.eq_num(p.get("b_" + tag), 0.0))
          return false;
        diag.push_back(p.get("lambda1_" + tag));
        diag.push_back(p.get("lambda2_" + tag));
      }
      for (int n = 1; n <= r - 1; ++n) diag.push_back(p.get("lambda_" + detail::tag2(r, n)));
      for (auto& g : collect("gamma_")) diag.push_back(g);
      return detail::all_equal(diag, E);
    }
    case MetricCase::DAlphaOnly: {
      auto tags = pair_tags(r - 2);
      for (int n = 1; n <= r - 2; ++n) tags.push_back(detail::tag2(r - 1, n));
      if (tags.empty()) return true;  // tangent space is one in-block summand
      auto c = common_pairs("lambda1_", "lambda2_", "b_", tags);
      if (!c.ok) return false;
      return gamma_value_matches(collect("gamma_"), *c.lambda, *c.b);
    }
  }
  return std::nullopt;
}

/// Names of the free values expected by go_family for this flag's shape.
/// Empty for the special rank-4 C flags (no closed form) and for points.
inline std::vector<std::string> go_family_free_names(const ThetaSpec& th) {
  const MetricCase mc = metric_case(th);
  const Schema sch = param_schema(th);
  auto have_prefix = [&](const std::string& prefix) {
    for (const auto& ps : sch.params)
      if (ps.name.rfind(prefix, 0) == 0) return true;
    return false;
  };
  switch (mc) {
    case MetricCase::Point: return {};
    case MetricCase::AGeneric:
    case MetricCase::A3Irr: return {"mu"};
    case MetricCase::A3Empty: return {"mu", "b"};
    case MetricCase::A3Single: return {"mu_1", "mu_2"};
    case MetricCase::A3Pair: return {"mu_1", "mu_2"};
    case MetricCase::BNoAlpha:
      if (have_prefix("lambda1_")) return {"lambda", "b"};
      return have_prefix("gamma_") ? std::vector<std::string>{"mu", "gamma"}
                                   : std::vector<std::string>{"mu"};
    case MetricCase::BAlpha:
      return have_prefix("lambda1_") ? std::vector<std::string>{"lambda", "b"}
                                     : std::vector<std::string>{"mu", "rho"};
    case MetricCase::CNoAlpha:
    case MetricCase::CAlpha: return {"mu", "c"};
    case MetricCase::C4Empty:
    case MetricCase::C4Single: return {};
    case MetricCase::DNoAlpha:
    case MetricCase::DAlphaOnly:
      return have_prefix("lambda1_") ? std::vector<std::string>{"lambda", "b"}
                                     : std::vector<std::string>{"lambda"};
    case MetricCase::DBoth: return {"lambda"};
  }
  return {};
}

/// Construct parameters satisfying the geodesic-orbit constraints from the
/// case's free values. Throws on infeasible values.
inline MetricParams go_family(const ThetaSpec& th,
                              const std::map<std::string, Rat>& free_values) {
  const MetricCase mc = metric_case(th);
  const Schema sch = param_schema(th);
  MetricParams p;
  p.case_name = metric_case_name(mc);
  const int r = th.blocks();
  auto need = [&](const char* n) -> Rat {
    auto it = free_values.find(n);
    if (it == free_values.end())
      throw std::invalid_argument(std::string("go_family: missing free value '") + n + "'");
    return it->second;
  };
  auto have_prefix = [&](const std::string& prefix) {
    for (const auto& ps : sch.params)
      if (ps.name.rfind(prefix, 0) == 0) return true;
    return false;
  };
  auto fill = [&](const std::string& prefix, const Rat& v) {
    for (const auto& ps : sch.params)
      if (ps.name.rfind(prefix, 0) == 0) p.set(ps.name, PVal::of(v));
  };
  switch (mc) {
    case MetricCase::Point:
      break;
    case MetricCase::AGeneric:
    case MetricCase::A3Irr:
      fill("mu", need("mu"));
      break;
    case MetricCase::A3Pair:
      p.set("mu_1", PVal::of(need("mu_1")));
      p.set("mu_2", PVal::of(need("mu_2")));
      break;
    case MetricCase::A3Empty: {
      const Rat mu = need("mu"), b = need("b");
      fill("mu_", mu);
      p.set("b_1", PVal::of(b));
      p.set("b_2", PVal::of(-b));
      p.set("b_3", PVal::of(b));
      break;
    }
    case MetricCase::A3Single: {
      const Rat mu1 = need("mu_1"), mu2 = need("mu_2");
      if (mu2 < mu1)
        throw std::invalid_argument("go_family: requires mu_2 >= mu_1");
      auto b = sqrt_exact(mu2 * (mu2 - mu1));
      if (!b)
        throw std::invalid_argument(
            "go_family: mu_2 (mu_2 - mu_1) is not a rational square; use float mode");
      p.set("mu_1", PVal::of(mu1));
      p.set("mu_2_1", PVal::of(mu2));
      p.set("mu_2_2", PVal::of(mu2));
      p.set("b", PVal::of(*b));
      break;
    }
    case MetricCase::BNoAlpha: {
      if (!have_prefix("lambda1_")) {
        fill("mu_", need("mu"));
        if (have_prefix("gamma_")) fill("gamma_", need("gamma"));
        break;
      }
      const Rat lam = need("lambda"), b = need("b");
      fill("lambda1_", lam);
      fill("lambda2_", lam);
      fill("b_", b);
      fill("mu_", lam + b);
      if (have_prefix("gamma_")) fill("gamma_", (lam * lam - b * b) / lam);
      break;
    }
    case MetricCase::BAlpha: {
      if (!have_prefix("lambda1_")) {
        const Rat mu = need("mu"), rho = need("rho");
        fill("mu_", mu);
        fill("rho_", rho);
        if (have_prefix("gamma_")) fill("gamma_", Rat(2) * mu * rho / (mu + rho));
        break;
      }
      const Rat lam = need("lambda"), b = need("b");
      fill("lambda1_", lam);
      fill("lambda2_", lam);
      fill("b_", b);
      fill("mu_", lam + b);
      fill("rho_", lam - b);
      if (have_prefix("gamma_")) fill("gamma_", (lam * lam - b * b) / lam);
      break;
    }
    case MetricCase::CNoAlpha:
    case MetricCase::CAlpha: {
      const Rat mu = need("mu"), c = need("c");
      const int rtilde = mc == MetricCase::CAlpha ? r - 1 : r;
      for (int i = 1; i <= rtilde; ++i)
        p.set("mu0_" + std::to_string(i), PVal::of(mu + c * Rat(th.partition[i - 1])));
      fill("a_", c);
      fill("mu1_", mu);
      fill("mu2_", mu);
      fill("b_", Rat(0));
      fill("mu_", mu);  // both the in-block summands and the last-block scalars
      break;
    }
    case MetricCase::C4Empty:
    case MetricCase::C4Single:
      throw std::invalid_argument("go_family: no closed form for the special rank-4 C flags");
    case MetricCase::DNoAlpha:
    case MetricCase::DAlphaOnly: {
      if (!have_prefix("lambda1_")) {
        fill("gamma_", need("lambda"));
        break;
      }
      const Rat lam = need("lambda"), b = need("b");
      fill("lambda1_", lam);
      fill("lambda2_", lam);
      fill("b_", b);
      fill("gamma_", (lam * lam - b * b) / lam);
      break;
    }
    case MetricCase::DBoth: {
      const Rat lam = need("lambda");
      fill("lambda", lam);  // covers lambda1_/lambda2_/lambda_
      fill("b_", Rat(0));
      fill("gamma_", lam);
      break;
    }
  }
  // Canonical ordering: follow the schema.
  MetricParams ordered;
  ordered.case_name = p.case_name;
  for (const auto& ps : sch.params) ordered.values.emplace_back(ps.name, p.get(ps.name));
  return ordered;
}

// ---- obstruction scan ------------------------------------------------------

/// A subspace inside one eigenspace of the metric operator: spanning vectors
/// in tangent coordinates plus the eigenvalue.
template <class T>
struct EigenUnit {
  std::vector<std::vector<T>> vecs;
  T value{};
  std::string label;
};

template <class T>
struct ObstructionFact {
  int a = 0, b = 0, c = -1;  // unit indices; c >= 0 for the triple form
  bool violated = false;
  std::string description;
};

template <class T>
struct ObstructionScan {
  std::vector<EigenUnit<T>> units;
  std::vector<ObstructionFact<T>> facts;
  bool complete = true;  // false when some eigen-blocks were skipped (irrational spectrum)
};

namespace detail {

/// Refine one eigenspace (given by spanning vectors in class coordinates)
/// into its intersections with the class's irreducible submodules; pieces
/// that do not exhaust the eigenspace are supplemented by the eigenspace
/// itself. Every emitted unit is an invariant subspace of one eigenspace.
template <class T>
void push_units(const Workspace<T>& ws, const IsotypicalClass& cls, const T& lam,
                const std::vector<std::vector<T>>& evecs, std::vector<EigenUnit<T>>& units) {
  const std::size_t d = cls.dim, b0 = cls.begin;
  auto lift = [&](const std::vector<T>& v) {
    std::vector<T> full(ws.mdim, scalar_traits<T>::zero());
    for (std::size_t i = 0; i < d; ++i) full[b0 + i] = v[i];
    return full;
  };
  std::size_t covered = 0;
  for (int sid : cls.submodule_ids) {
    const Submodule& s = ws.dec->submodules[sid];
    const std::size_t s0 = s.begin - b0;  // offset within the class slice
    // Combinations of eigenvectors supported inside the submodule slice:
    // nullspace of the rows outside the slice.
    Matrix<T> outside(d - s.dim, evecs.size());
    std::size_t row = 0;
    for (std::size_t i = 0; i < d; ++i) {
      if (i >= s0 && i < s0 + s.dim) continue;
      for (std::size_t c = 0; c < evecs.size(); ++c) outside(row, c) = evecs[c][i];
      ++row;
    }
    auto combos = nullspace(outside);
    if (combos.empty()) continue;
    EigenUnit<T> u;
    u.value = lam;
    u.label = s.name + ":" + scalar_traits<T>::str(lam);
    for (const auto& c : combos) {
      std::vector<T> v(d, scalar_traits<T>::zero());
      for (std::size_t e = 0; e < evecs.size(); ++e)
        for (std::size_t i = 0; i < d; ++i) v[i] += c[e] * evecs[e][i];
      u.vecs.push_back(lift(v));
    }
    covered += u.vecs.size();
    units.push_back(std::move(u));
  }
  if (covered < evecs.size()) {
    EigenUnit<T> u;
    u.value = lam;
    u.label = cls.name + ":" + scalar_traits<T>::str(lam);
    for (const auto& v : evecs) u.vecs.push_back(lift(v));
    units.push_back(std::move(u));
  }
}

template <class T>
std::vector<EigenUnit<T>> eigen_units(const Workspace<T>& ws, const Matrix<T>& a,
                                      std::size_t& eigen_covered) {
  std::vector<EigenUnit<T>> units;
  eigen_covered = 0;
  for (const auto& cls : ws.dec->classes) {
    const std::size_t b0 = cls.begin, d = cls.dim;
    Matrix<T> blk(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) blk(i, j) = a(b0 + i, b0 + j);
    if constexpr (scalar_traits<T>::is_exact) {
      const auto roots = rational_roots(char_poly(blk));
      for (const auto& lam : roots) {
        Matrix<T> shifted = blk;
        for (std::size_t i = 0; i < d; ++i) shifted(i, i) -= lam;
        auto ns = nullspace(shifted);
        if (ns.empty()) continue;
        eigen_covered += ns.size();
        push_units(ws, cls, lam, ns, units);
      }
    } else {
      // Symmetrize with the diagonal Gram, then cluster the spectrum.
      MatD sym(d, d);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
          sym(i, j) = std::sqrt(ws.m_norm2[b0 + i]) * scalar_traits<T>::to_double(blk(i, j)) /
                      std::sqrt(ws.m_norm2[b0 + j]);
      auto eig = jacobi_eigen(sym);
      std::vector<std::size_t> order(d);
      for (std::size_t i = 0; i < d; ++i) order[i] = i;
      std::sort(order.begin(), order.end(),
                [&](std::size_t x, std::size_t y) { return eig.values[x] < eig.values[y]; });
      std::size_t i = 0;
      while (i < d) {
        std::size_t j = i;
        while (j + 1 < d && std::fabs(eig.values[order[j + 1]] - eig.values[order[i]]) <
                                1e-8 * (1 + std::fabs(eig.values[order[i]])))
          ++j;
        std::vector<std::vector<T>> evecs;
        for (std::size_t kk = i; kk <= j; ++kk) {
          std::vector<T> v(d, 0.0);
          for (std::size_t row = 0; row < d; ++row)
            v[row] = eig.vectors(row, order[kk]) / std::sqrt(ws.m_norm2[b0 + row]);
          evecs.push_back(std::move(v));
        }
        eigen_covered += evecs.size();
        push_units(ws, cls, eig.values[order[i]], evecs, units);
        i = j + 1;
      }
    }
  }
  return units;
}

}  // namespace detail

/// Scan for forced eigenvalue equalities: whenever the bracket of two
/// invariant eigenspace pieces projects nontrivially outside their sum (or
/// onto a third piece), their eigenvalues must agree in any geodesic-orbit
/// metric. In exact mode only rational eigenvalues are split off; skipped
/// spectrum marks the scan incomplete.
template <class T>
ObstructionScan<T> obstruction_scan(const Workspace<T>& ws, const Matrix<T>& a) {
  ObstructionScan<T> scan;
  std::size_t covered = 0;
  scan.units = detail::eigen_units(ws, a, covered);
  scan.complete = covered == ws.mdim;

  auto values_differ = [&](const T& x, const T& y) {
    if constexpr (scalar_traits<T>::is_exact)
      return !(x == y);
    else
      return std::fabs(x - y) > 1e-8 * (1 + std::fabs(x) + std::fabs(y));
  };
  auto gram_inner = [&](const std::vector<T>& x, const std::vector<T>& y) {
    T s = scalar_traits<T>::zero();
    for (std::size_t i = 0; i < ws.mdim; ++i) s += x[i] * ws.m_norm2[i] * y[i];
    return s;
  };

  const int nu = static_cast<int>(scan.units.size());
  for (int ia = 0; ia < nu; ++ia)
    for (int ib = ia + 1; ib < nu; ++ib) {
      // Pieces of one eigenspace force nothing; only differing values can
      // produce an obstruction.
      if (!values_differ(scan.units[ia].value, scan.units[ib].value)) continue;
      bool pair_fact = false;
      std::vector<bool> triple(nu, false);
      for (const auto& pa : scan.units[ia].vecs)
        for (const auto& pb : scan.units[ib].vecs) {
          const std::vector<T> v = ws.bracket_m(pa, pb);
          const std::vector<T> wm(v.begin(), v.begin() + ws.mdim);
          // Projection onto the complement of unit_a + unit_b.
          std::size_t cols = scan.units[ia].vecs.size() + scan.units[ib].vecs.size();
          Matrix<T> span(ws.mdim, cols);
          std::size_t cidx = 0;
          for (const auto& vv : scan.units[ia].vecs) {
            for (std::size_t i = 0; i < ws.mdim; ++i) span(i, cidx) = vv[i];
            ++cidx;
          }
          for (const auto& vv : scan.units[ib].vecs) {
            for (std::size_t i = 0; i < ws.mdim; ++i) span(i, cidx) = vv[i];
            ++cidx;
          }
          std::vector<T> neg(ws.mdim);
          for (std::size_t i = 0; i < ws.mdim; ++i) neg[i] = -wm[i];
          auto ls = lstsq_gram(span, neg, ws.m_norm2);
          bool outside;
          if constexpr (scalar_traits<T>::is_exact)
            outside = !ls.residual_sq.is_zero();
          else
            outside = std::fabs(ls.residual_sq) > 1e-16;
          if (outside) pair_fact = true;
          for (int ic = 0; ic < nu && outside; ++ic) {
            if (ic == ia || ic == ib || triple[ic]) continue;
            for (const auto& rv : scan.units[ic].vecs) {
              const T ip = gram_inner(wm, rv);
              const bool nz = scalar_traits<T>::is_exact
                                  ? !scalar_traits<T>::is_zero(ip)
                                  : std::fabs(scalar_traits<T>::to_double(ip)) > 1e-10;
              if (nz) {
                triple[ic] = true;
                break;
              }
            }
          }
        }
      if (pair_fact) {
        ObstructionFact<T> f;
        f.a = ia;
        f.b = ib;
        f.violated = values_differ(scan.units[ia].value, scan.units[ib].value);
        f.description = scan.units[ia].label + " must equal " + scan.units[ib].label;
        scan.facts.push_back(f);
        for (int ic = 0; ic < nu; ++ic)
          if (triple[ic]) {
            ObstructionFact<T> g;
            g.a = ia;
            g.b = ib;
            g.c = ic;
            g.violated = f.violated || values_differ(scan.units[ia].value, scan.units[ic].value);
            g.description = scan.units[ia].label + ", " + scan.units[ib].label + " and " +
                            scan.units[ic].label + " must all agree";
            scan.facts.push_back(g);
          }
      }
    }
  return scan;
}

/// Numeric verdict combined with the closed-form predicate (when one exists):
/// GO is certified only when the universal half is supplied by the predicate.
template <class T>
GoReport<T> full_go_report(const ThetaSpec& th, const MetricParams& p, const Workspace<T>& ws,
                           const Matrix<T>& a, int n_samples, std::uint64_t seed,
                           const GoTolerance& tol = {}) {
  GoReport<T> rep = is_go_numeric(ws, a, n_samples, seed, tol);
  rep.classified = is_go_classified(th, p);
  if (rep.classified.has_value() && rep.verdict != Verdict::UNDECIDED)
    rep.agreement = (*rep.classified == (rep.verdict == Verdict::GO));
  rep.certified = rep.verdict == Verdict::GO && rep.classified.has_value() && *rep.classified;
  return rep;
}

template <class T>
nlohmann::ordered_json coords_json(const std::vector<T>& x, const std::vector<std::string>& names) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (scalar_traits<T>::is_zero(x[i])) continue;
    if constexpr (scalar_traits<T>::is_exact)
      j[names[i]] = x[i].str();
    else
      j[names[i]] = x[i];
  }
  return j;
}

template <class T>
nlohmann::ordered_json report_to_json(const GoReport<T>& rep, const Workspace<T>& ws) {
  nlohmann::ordered_json j;
  j["verdict"] = verdict_name(rep.verdict);
  j["mode"] = rep.exact_mode ? "exact" : "float";
  j["certificate"] = rep.certified ? "certified" : (rep.exact_mode ? "exact-sampled" : "float-sampled");
  if (rep.classified.has_value())
    j["classified_verdict"] = *rep.classified;
  else
    j["classified_verdict"] = "no-closed-form";
  j["agreement"] = rep.agreement;
  if constexpr (scalar_traits<T>::is_exact)
    j["max_residual_sq"] = rep.max_residual_sq.str();
  else
    j["max_residual_sq"] = rep.max_residual_sq;
  j["samples_evaluated"] = rep.samples_evaluated;
  j["sweep"] = {{"basis", rep.sweep_basis}, {"pairs", rep.sweep_pairs}, {"random", rep.sweep_random}};
  if (rep.failing_witness.has_value()) {
    const auto& w = *rep.failing_witness;
    nlohmann::ordered_json wj;
    wj["label"] = w.label;
    wj["X"] = coords_json(w.x, ws.dec->m_names);
    wj["best_Z"] = coords_json(w.witness_z, ws.dec->k_names);
    if constexpr (scalar_traits<T>::is_exact)
      wj["residual_sq"] = w.residual_sq.str();
    else
      wj["residual_sq"] = w.residual_sq;
    j["failing_witness"] = wj;
  }
  if (rep.verdict == Verdict::UNDECIDED)
    j["recommendation"] = "residuals fall between the pass and fail thresholds; re-run in exact mode";
  return j;
}

}  // namespace gorbit
