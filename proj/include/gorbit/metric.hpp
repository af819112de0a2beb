#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gorbit/workspace.hpp"

namespace gorbit {

/// One variant per covered (family, theta-shape); the parameter schema of an
/// invariant metric is fixed by the case.
enum class MetricCase {
  Point,
  AGeneric,
  A3Empty,
  A3Single,
  A3Irr,
  A3Pair,
  BNoAlpha,
  BAlpha,
  CNoAlpha,
  CAlpha,
  C4Empty,
  C4Single,
  DNoAlpha,
  DBoth,
  DAlphaOnly,
};

inline MetricCase metric_case(const ThetaSpec& th) {
  if (th.degenerate()) return MetricCase::Point;
  const auto& p = th.partition;
  switch (th.type.family) {
    case Family::A:
      if (th.type.rank != 3) return MetricCase::AGeneric;
      if (p == std::vector<int>{1, 1, 1, 1}) return MetricCase::A3Empty;
      if (p == std::vector<int>{2, 2}) return MetricCase::A3Pair;
      if (p == std::vector<int>{3, 1} || p == std::vector<int>{1, 3}) return MetricCase::A3Irr;
      return MetricCase::A3Single;
    case Family::B:
      return th.alpha_l ? MetricCase::BAlpha : MetricCase::BNoAlpha;
    case Family::C:
      if (detail::c4_special(th))
        return p == std::vector<int>{1, 1, 1, 1} ? MetricCase::C4Empty : MetricCase::C4Single;
      return th.alpha_l ? MetricCase::CAlpha : MetricCase::CNoAlpha;
    default:
      switch (th.d_case()) {
        case DCase::NoAlphaL: return MetricCase::DNoAlpha;
        case DCase::Both: return MetricCase::DBoth;
        default: return MetricCase::DAlphaOnly;
      }
  }
}

inline std::string metric_case_name(MetricCase c) {
  switch (c) {
    case MetricCase::Point: return "point";
    case MetricCase::AGeneric: return "A_generic";
    case MetricCase::A3Empty: return "A3_empty";
    case MetricCase::A3Single: return "A3_single";
    case MetricCase::A3Irr: return "A3_irr";
    case MetricCase::A3Pair: return "A3_pair";
    case MetricCase::BNoAlpha: return "B_no_alpha_l";
    case MetricCase::BAlpha: return "B_alpha_l";
    case MetricCase::CNoAlpha: return "C_no_alpha_l";
    case MetricCase::CAlpha: return "C_alpha_l";
    case MetricCase::C4Empty: return "C4_empty";
    case MetricCase::C4Single: return "C4_single";
    case MetricCase::DNoAlpha: return "D_no_alpha_l";
    case MetricCase::DBoth: return "D_both";
    default: return "D_alpha_l_only";
  }
}

struct ParamSpec {
  std::string name;
  bool positive = false;  // strictly positive diagonal parameter
};

struct Schema {
  MetricCase mcase = MetricCase::Point;
  std::vector<ParamSpec> params;

  bool has(const std::string& n) const {
    for (const auto& p : params)
      if (p.name == n) return true;
    return false;
  }
};

namespace detail {
inline std::string tag2(int m, int n) { return std::to_string(m) + "_" + std::to_string(n); }
}  // namespace detail

/// Names, positivity constraints and count of the free metric parameters.
inline Schema param_schema(const ThetaSpec& th) {
  Schema sch;
  sch.mcase = metric_case(th);
  const int r = th.blocks();
  auto diag = [&](const std::string& n) { sch.params.push_back({n, true}); };
  auto coup = [&](const std::string& n) { sch.params.push_back({n, false}); };
  auto pair_params = [&](const char* d1, const char* d2, const char* off, int upto) {
    for (int n = 1; n <= upto; ++n)
      for (int m = n + 1; m <= upto; ++m) {
        diag(d1 + detail::tag2(m, n));
        diag(d2 + detail::tag2(m, n));
        coup(off + detail::tag2(m, n));
      }
  };
  auto gamma_params = [&](int upto) {
    for (int i = 1; i <= upto; ++i)
      if (th.partition[i - 1] > 1) diag("gamma_" + std::to_string(i));
  };
  auto center_params = [&](int rtilde) {
    for (int i = 1; i <= rtilde; ++i) diag("mu0_" + std::to_string(i));
    for (int n = 1; n <= rtilde; ++n)
      for (int m = n + 1; m <= rtilde; ++m) coup("a_" + detail::tag2(m, n));
  };
  switch (sch.mcase) {
    case MetricCase::Point:
      break;
    case MetricCase::AGeneric:
      for (int n = 1; n <= r; ++n)
        for (int m = n + 1; m <= r; ++m) diag("mu_" + detail::tag2(m, n));
      break;
    case MetricCase::A3Empty:
      for (int i = 1; i <= 3; ++i) {
        diag("mu_" + std::to_string(i) + "_1");
        diag("mu_" + std::to_string(i) + "_2");
        coup("b_" + std::to_string(i));
      }
      break;
    case MetricCase::A3Single:
      diag("mu_1");
      diag("mu_2_1");
      diag("mu_2_2");
      coup("b");
      break;
    case MetricCase::A3Irr:
      diag("mu");
      break;
    case MetricCase::A3Pair:
      diag("mu_1");
      diag("mu_2");
      break;
    case MetricCase::BNoAlpha:
      for (int i = 1; i <= r; ++i) diag("mu_" + std::to_string(i));
      pair_params("lambda1_", "lambda2_", "b_", r);
      gamma_params(r);
      break;
    case MetricCase::BAlpha:
      for (int i = 1; i <= r - 1; ++i) {
        diag("rho_" + std::to_string(i));
        diag("mu_" + std::to_string(i));
      }
      pair_params("lambda1_", "lambda2_", "b_", r - 1);
      gamma_params(r - 1);
      break;
    case MetricCase::CNoAlpha:
      center_params(r);
      pair_params("mu1_", "mu2_", "b_", r);
      for (int i = 1; i <= r; ++i)
        if (th.partition[i - 1] > 1) diag("mu_" + std::to_string(i));
      break;
    case MetricCase::CAlpha:
      center_params(r - 1);
      pair_params("mu1_", "mu2_", "b_", r - 1);
      for (int n = 1; n <= r - 1; ++n) diag("mu_" + detail::tag2(r, n));
      for (int i = 1; i <= r - 1; ++i)
        if (th.partition[i - 1] > 1) diag("mu_" + std::to_string(i));
      break;
    case MetricCase::C4Empty:
      center_params(4);
      for (int i = 1; i <= 3; ++i) {
        for (int j = 1; j <= 4; ++j) diag("mu_" + detail::tag2(i, j));
        coup("b_" + detail::tag2(i, 1));
        coup("b_" + detail::tag2(i, 2));
      }
      break;
    case MetricCase::C4Single: {
      center_params(3);
      int blk = 1;
      for (int i = 0; i < 3; ++i)
        if (th.partition[i] == 2) blk = i + 1;
      diag("mu_" + std::to_string(blk));
      diag("muM_1");
      diag("muM_2");
      coup("bM");
      for (int j = 1; j <= 4; ++j) diag("muN_" + std::to_string(j));
      coup("bN_1");
      coup("bN_2");
      break;
    }
    case MetricCase::DNoAlpha:
      pair_params("lambda1_", "lambda2_", "b_", r);
      gamma_params(r);
      break;
    case MetricCase::DBoth:
      pair_params("lambda1_", "lambda2_", "b_", r - 1);
      for (int n = 1; n <= r - 1; ++n) diag("lambda_" + detail::tag2(r, n));
      gamma_params(r - 1);
      break;
    case MetricCase::DAlphaOnly:
      pair_params("lambda1_", "lambda2_", "b_", r - 2);
      gamma_params(r - 2);
      // The mixed last-block summands carry a single coupling: the isotropy
      // algebra contains the u(l, next-to-last block) directions, and
      // commuting with them ties the two strands of the coupling together.
      for (int n = 1; n <= r - 2; ++n) {
        diag("lambda1_" + detail::tag2(r - 1, n));
        diag("lambda2_" + detail::tag2(r - 1, n));
        coup("b_" + detail::tag2(r - 1, n));
      }
      diag("gamma_" + std::to_string(r - 1));
      break;
  }
  return sch;
}

/// A parameter value: exact rational, or a float supplied in fast mode.
struct PVal {
  bool exact = true;
  Rat r;
  double d = 0;

  static PVal of(const Rat& q) { return {true, q, q.to_double()}; }
  static PVal of(double x) { return {false, Rat(0), x}; }
  double as_double() const { return exact ? r.to_double() : d; }
};

template <class T>
T pval_as(const PVal& v) {
  if constexpr (scalar_traits<T>::is_exact) {
    if (!v.exact)
      throw std::invalid_argument("exact mode requires rational parameter values");
    return v.r;
  } else {
    return v.as_double();
  }
}

struct MetricParams {
  std::string case_name;
  std::vector<std::pair<std::string, PVal>> values;

  const PVal& get(const std::string& n) const {
    for (const auto& [k, v] : values)
      if (k == n) return v;
    throw std::invalid_argument("metric parameter '" + n + "' missing");
  }
  bool has(const std::string& n) const {
    for (const auto& [k, v] : values)
      if (k == n) return true;
    return false;
  }
  void set(const std::string& n, const PVal& v) {
    for (auto& [k, old] : values)
      if (k == n) {
        old = v;
        return;
      }
    values.emplace_back(n, v);
  }
};

inline nlohmann::ordered_json params_to_json(const MetricParams& p) {
  nlohmann::ordered_json values = nlohmann::ordered_json::object();
  for (const auto& [k, v] : p.values) {
    if (v.exact)
      values[k] = v.r.str();
    else
      values[k] = v.d;
  }
  return nlohmann::ordered_json{{"case", p.case_name}, {"values", values}};
}

inline MetricParams params_from_json(const nlohmann::ordered_json& j) {
  MetricParams p;
  p.case_name = j.at("case").get<std::string>();
  for (const auto& [k, v] : j.at("values").items()) {
    if (v.is_string())
      p.values.emplace_back(k, PVal::of(Rat::from_string(v.get<std::string>())));
    else
      p.values.emplace_back(k, PVal::of(v.get<double>()));
  }
  return p;
}

struct MetricOperator {
  // Operator matrix in the adapted basis (column j holds the image of the
  // j-th adapted vector). It is self-adjoint for the diagonal Gram of the
  // basis; G*mat is a symmetric positive definite matrix.
  MatQ mat_q;  // filled in exact mode
  MatD mat_d;  // always filled
  bool exact = true;

  template <class T>
  const Matrix<T>& mat() const {
    if constexpr (scalar_traits<T>::is_exact)
      return mat_q;
    else
      return mat_d;
  }
};

namespace detail {

inline const IsotypicalClass& cls_by_name(const Decomposition& dec, const std::string& n) {
  for (const auto& c : dec.classes)
    if (c.name == n) return c;
  throw std::logic_error("isotypical class '" + n + "' not found");
}

inline const Submodule& sub_by_name(const Decomposition& dec, const std::string& n) {
  for (const auto& s : dec.submodules)
    if (s.name == n) return s;
  throw std::logic_error("submodule '" + n + "' not found");
}

template <class T>
struct Assembler {
  const Decomposition& dec;
  const MetricParams& p;
  Matrix<T> m;

  Assembler(const Decomposition& d, const MetricParams& params)
      : dec(d), p(params), m(d.dim_m(), d.dim_m()) {}

  T val(const std::string& n) const { return pval_as<T>(p.get(n)); }

  void scalar_range(std::size_t begin, std::size_t dim, const T& v) {
    for (std::size_t i = 0; i < dim; ++i) m(begin + i, begin + i) = v;
  }
  void scalar_sub(const std::string& name, const T& v) {
    const auto& s = sub_by_name(dec, name);
    scalar_range(s.begin, s.dim, v);
  }
  /// Coupled equivalent pair: v1 I on the first submodule, v2 I on the
  /// second, b I linking matching basis vectors.
  void couple(const std::string& first, const std::string& second, const T& v1, const T& v2,
              const T& b) {
    const auto& s1 = sub_by_name(dec, first);
    const auto& s2 = sub_by_name(dec, second);
    if (s1.dim != s2.dim) throw std::logic_error("coupled pair with mismatched dimensions");
    scalar_range(s1.begin, s1.dim, v1);
    scalar_range(s2.begin, s2.dim, v2);
    for (std::size_t i = 0; i < s1.dim; ++i) {
      m(s1.begin + i, s2.begin + i) = b;
      m(s2.begin + i, s1.begin + i) = b;
    }
  }
  /// Fully coupled center block (the mutually equivalent one-dimensional
  /// diagonal-sum pieces of the C family). Off-diagonal parameters are
  /// expressed per unit of the product of block sizes, which keeps them
  /// rational in the unnormalized basis: the (i,j) operator entry is
  /// a_{ij} * l_j.
  void center_block(const std::string& cls_name, int rtilde) {
    const auto& c = cls_by_name(dec, cls_name);
    for (int i = 1; i <= rtilde; ++i)
      m(c.begin + i - 1, c.begin + i - 1) = val("mu0_" + std::to_string(i));
    for (int n = 1; n <= rtilde; ++n)
      for (int mm = n + 1; mm <= rtilde; ++mm) {
        const T a = val("a_" + tag2(mm, n));
        const T lm = scalar_traits<T>::from_rat(Rat(dec.theta.partition[mm - 1]));
        const T ln = scalar_traits<T>::from_rat(Rat(dec.theta.partition[n - 1]));
        // Entry (i, j) carries the block size of the source column j.
        m(c.begin + mm - 1, c.begin + n - 1) = a * ln;
        m(c.begin + n - 1, c.begin + mm - 1) = a * lm;
      }
  }
};

template <class T>
Matrix<T> assemble(const Decomposition& dec, const MetricParams& p) {
  const ThetaSpec& th = dec.theta;
  const MetricCase mc = metric_case(th);
  Assembler<T> A(dec, p);
  const int r = th.blocks();
  auto pair_blocks = [&](const char* d1, const char* d2, const char* off, int upto) {
    for (int n = 1; n <= upto; ++n)
      for (int mm = n + 1; mm <= upto; ++mm) {
        const std::string tag = std::to_string(mm) + std::to_string(n);
        A.couple("W" + tag, "U" + tag, A.val(d1 + tag2(mm, n)), A.val(d2 + tag2(mm, n)),
                 A.val(off + tag2(mm, n)));
      }
  };
  auto gamma_blocks = [&](int upto) {
    for (int i = 1; i <= upto; ++i)
      if (th.partition[i - 1] > 1) A.scalar_sub("U" + std::to_string(i), A.val("gamma_" + std::to_string(i)));
  };
  switch (mc) {
    case MetricCase::Point:
      break;
    case MetricCase::AGeneric:
      for (int n = 1; n <= r; ++n)
        for (int mm = n + 1; mm <= r; ++mm)
          A.scalar_sub("M" + std::to_string(mm) + std::to_string(n), A.val("mu_" + tag2(mm, n)));
      break;
    case MetricCase::A3Empty:
      for (int i = 0; i < 3; ++i) {
        const T m1 = A.val("mu_" + std::to_string(i + 1) + "_1");
        const T m2 = A.val("mu_" + std::to_string(i + 1) + "_2");
        const T b = A.val("b_" + std::to_string(i + 1));
        A.m(2 * i, 2 * i) = m1;
        A.m(2 * i + 1, 2 * i + 1) = m2;
        A.m(2 * i, 2 * i + 1) = b;
        A.m(2 * i + 1, 2 * i) = b;
      }
      break;
    case MetricCase::A3Single: {
      // Basis (x, p1, p2, q1, q2); the coupling enters with opposite signs
      // on the two strands, with the strand pairing fixed by the case table.
      const T mu1 = A.val("mu_1"), mu21 = A.val("mu_2_1"), mu22 = A.val("mu_2_2");
      T b = A.val("b");
      if (th.partition == std::vector<int>{1, 2, 1}) b = -b;  // pulled-back sign pattern
      A.m(0, 0) = mu1;
      A.m(1, 1) = mu21;
      A.m(2, 2) = mu21;
      A.m(3, 3) = mu22;
      A.m(4, 4) = mu22;
      A.m(1, 3) = b; A.m(3, 1) = b;
      A.m(2, 4) = -b; A.m(4, 2) = -b;
      break;
    }
    case MetricCase::A3Irr:
      A.scalar_range(0, 3, A.val("mu"));
      break;
    case MetricCase::A3Pair:
      A.scalar_sub("M1", A.val("mu_1"));
      A.scalar_sub("M2", A.val("mu_2"));
      break;
    case MetricCase::BNoAlpha:
      for (int i = 1; i <= r; ++i) A.scalar_sub("V" + std::to_string(i), A.val("mu_" + std::to_string(i)));
      pair_blocks("lambda1_", "lambda2_", "b_", r);
      gamma_blocks(r);
      break;
    case MetricCase::BAlpha:
      for (int i = 1; i <= r - 1; ++i) {
        A.scalar_sub("V" + std::to_string(i) + "_1", A.val("rho_" + std::to_string(i)));
        A.scalar_sub("V" + std::to_string(i) + "_2", A.val("mu_" + std::to_string(i)));
      }
      pair_blocks("lambda1_", "lambda2_", "b_", r - 1);
      gamma_blocks(r - 1);
      break;
    case MetricCase::CNoAlpha:
      A.center_block("M0", r);
      pair_blocks("mu1_", "mu2_", "b_", r);
      for (int i = 1; i <= r; ++i)
        if (th.partition[i - 1] > 1)
          A.scalar_sub("U" + std::to_string(i), A.val("mu_" + std::to_string(i)));
      break;
    case MetricCase::CAlpha:
      A.center_block("M0", r - 1);
      pair_blocks("mu1_", "mu2_", "b_", r - 1);
      for (int n = 1; n <= r - 1; ++n)
        A.scalar_sub("M" + std::to_string(r) + std::to_string(n), A.val("mu_" + tag2(r, n)));
      for (int i = 1; i <= r - 1; ++i)
        if (th.partition[i - 1] > 1)
          A.scalar_sub("U" + std::to_string(i), A.val("mu_" + std::to_string(i)));
      break;
    case MetricCase::C4Empty: {
      A.center_block("M0", 4);
      for (int i = 1; i <= 3; ++i) {
        const auto& c = cls_by_name(dec, "N" + std::to_string(i));
        for (int j = 0; j < 4; ++j)
          A.m(c.begin + j, c.begin + j) = A.val("mu_" + tag2(i, j + 1));
        const T b1 = A.val("b_" + tag2(i, 1)), b2 = A.val("b_" + tag2(i, 2));
        A.m(c.begin + 0, c.begin + 2) = b1; A.m(c.begin + 2, c.begin + 0) = b1;
        A.m(c.begin + 1, c.begin + 3) = b2; A.m(c.begin + 3, c.begin + 1) = b2;
      }
      break;
    }
    case MetricCase::C4Single: {
      A.center_block("M0", 3);
      int blk = 1;
      for (int i = 0; i < 3; ++i)
        if (th.partition[i] == 2) blk = i + 1;
      A.scalar_sub("U" + std::to_string(blk), A.val("mu_" + std::to_string(blk)));
      const auto& cm = cls_by_name(dec, "M");
      A.m(cm.begin, cm.begin) = A.val("muM_1");
      A.m(cm.begin + 1, cm.begin + 1) = A.val("muM_2");
      A.m(cm.begin, cm.begin + 1) = A.val("bM");
      A.m(cm.begin + 1, cm.begin) = A.val("bM");
      const auto& cn = cls_by_name(dec, "N");
      // Diagonal: muN_1 on the first two, muN_2 on the next two, etc.
      for (int j = 0; j < 8; ++j)
        A.m(cn.begin + j, cn.begin + j) = A.val("muN_" + std::to_string(j / 2 + 1));
      const T b1 = A.val("bN_1"), b2 = A.val("bN_2");
      for (int j = 0; j < 2; ++j) {
        A.m(cn.begin + j, cn.begin + 4 + j) = b1;
        A.m(cn.begin + 4 + j, cn.begin + j) = b1;
        A.m(cn.begin + 2 + j, cn.begin + 6 + j) = b2;
        A.m(cn.begin + 6 + j, cn.begin + 2 + j) = b2;
      }
      break;
    }
    case MetricCase::DNoAlpha:
      pair_blocks("lambda1_", "lambda2_", "b_", r);
      gamma_blocks(r);
      break;
    case MetricCase::DBoth:
      pair_blocks("lambda1_", "lambda2_", "b_", r - 1);
      for (int n = 1; n <= r - 1; ++n)
        A.scalar_sub("M" + std::to_string(r) + std::to_string(n), A.val("lambda_" + tag2(r, n)));
      gamma_blocks(r - 1);
      break;
    case MetricCase::DAlphaOnly: {
      pair_blocks("lambda1_", "lambda2_", "b_", r - 2);
      gamma_blocks(r - 2);
      for (int n = 1; n <= r - 2; ++n) {
        const auto& sm = sub_by_name(dec, "M" + std::to_string(n));
        const auto& sn = sub_by_name(dec, "N" + std::to_string(n));
        const T l1 = A.val("lambda1_" + tag2(r - 1, n)), l2 = A.val("lambda2_" + tag2(r - 1, n));
        const T b = A.val("b_" + tag2(r - 1, n));
        A.scalar_range(sm.begin, sm.dim, l1);
        A.scalar_range(sn.begin, sn.dim, l2);
        for (std::size_t i = 0; i < sm.dim; ++i) {
          A.m(sm.begin + i, sn.begin + i) = b;
          A.m(sn.begin + i, sm.begin + i) = b;
        }
      }
      A.scalar_sub("V" + std::to_string(r - 1), A.val("gamma_" + std::to_string(r - 1)));
      break;
    }
  }
  return std::move(A.m);
}

}  // namespace detail

/// Assemble the metric operator for the given parameters, enforcing the
/// schema (exact name set), the positivity of diagonal parameters, and
/// positive definiteness of the resulting operator.
inline MetricOperator build_metric(const Decomposition& dec, const MetricParams& p,
                                   bool exact_mode = true) {
  const Schema sch = param_schema(dec.theta);
  if (p.case_name != metric_case_name(sch.mcase))
    throw std::invalid_argument("metric case mismatch: expected '" + metric_case_name(sch.mcase) +
                                "', got '" + p.case_name + "'");
  for (const auto& ps : sch.params) {
    if (!p.has(ps.name)) throw std::invalid_argument("schema mismatch: missing parameter '" + ps.name + "'");
    const PVal& v = p.get(ps.name);
    const bool positive = v.exact ? v.r.sign() > 0 : v.d > 0;
    if (ps.positive && !positive)
      throw std::invalid_argument("parameter '" + ps.name + "' must be strictly positive");
  }
  for (const auto& [k, v] : p.values)
    if (!sch.has(k)) throw std::invalid_argument("schema mismatch: unexpected parameter '" + k + "'");

  MetricOperator op;
  op.exact = exact_mode;
  if (exact_mode) {
    op.mat_q = detail::assemble<Rat>(dec, p);
    op.mat_d = to_double(op.mat_q);
    // Positive definiteness of the symmetric Gram-weighted matrix.
    const std::size_t n = dec.dim_m();
    MatQ gm(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) gm(i, j) = dec.m_norm2[i] * op.mat_q(i, j);
    auto rep = positive_definite(gm);
    if (n > 0 && !rep.positive_definite)
      throw std::domain_error("metric is not positive definite (leading principal minor " +
                              std::to_string(rep.failing_minor) + " is not positive)");
  } else {
    op.mat_d = detail::assemble<double>(dec, p);
    const std::size_t n = dec.dim_m();
    MatD gm(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) gm(i, j) = dec.m_norm2[i].to_double() * op.mat_d(i, j);
    if (n > 0) {
      auto eig = jacobi_eigen(gm);
      double mn = eig.values[0];
      for (double v : eig.values) mn = std::min(mn, v);
      if (mn <= 1e-10)
        throw std::domain_error("metric is not positive definite (minimum eigenvalue " +
                                scalar_traits<double>::str(mn) + ")");
    }
  }
  return op;
}

struct InvarianceReport {
  bool ok = true;
  bool exact = true;
  double max_residual = 0;
  std::string witness;  // which isotropy direction or group element failed
};

/// Random block-orthogonal isotropy element (Cayley rotations per block).
inline MatQ random_isotropy_element(const ThetaSpec& th, Rng& rng) {
  const int psize = th.type.family == Family::A ? th.type.rank + 1 : th.type.rank;
  MatQ p = MatQ::identity(psize);
  for (int i = 1; i <= th.blocks(); ++i) {
    const int I = th.tilde(i - 1), li = th.partition[i - 1];
    if (li < 2) continue;
    MatQ q = detail::cayley_block(li, rng);
    for (int a = 0; a < li; ++a)
      for (int b = 0; b < li; ++b) p(I + a, I + b) = q(a, b);
  }
  return detail::embed_group(th.type, p);
}

/// Verify that the operator commutes with the isotropy action: exactly with
/// every isotropy-algebra direction, and with the discrete representatives
/// plus `samples` random block rotations.
template <class T>
InvarianceReport check_invariance(const Workspace<T>& ws, const Matrix<T>& op, int samples = 3,
                                  std::uint64_t seed = 1, double tol = 1e-9) {
  InvarianceReport rep;
  rep.exact = scalar_traits<T>::is_exact;
  auto scan = [&](const Matrix<T>& action, const std::string& who) {
    const Matrix<T> comm = action * op - op * action;
    double mx = 0;
    for (std::size_t i = 0; i < comm.rows(); ++i)
      for (std::size_t j = 0; j < comm.cols(); ++j)
        mx = std::max(mx, std::fabs(scalar_traits<T>::to_double(comm(i, j))));
    bool bad;
    if constexpr (scalar_traits<T>::is_exact)
      bad = !comm.is_zero();
    else
      bad = mx > tol;
    if (bad && rep.ok) {
      rep.ok = false;
      rep.witness = who;
    }
    rep.max_residual = std::max(rep.max_residual, mx);
  };
  for (std::size_t j = 0; j < ws.kdim; ++j)
    scan(ws.ad_k[j], "ad " + ws.dec->k_names[j]);
  if constexpr (scalar_traits<T>::is_exact) {
    for (std::size_t g = 0; g < ws.dec->discrete_generators.size(); ++g)
      scan(ws.ad_group_matrix(ws.dec->discrete_generators[g]),
           "discrete generator #" + std::to_string(g));
  } else {
    const auto samples = isotropy_samples_float(ws.dec->theta);
    for (std::size_t g = 0; g < samples.size(); ++g)
      scan(ws.ad_group_matrix(samples[g]), "isotropy sample #" + std::to_string(g));
  }
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const MatQ k = random_isotropy_element(ws.dec->theta, rng);
    scan(ws.ad_group_matrix(convert_matrix<Rat, T>(k)), "random isotropy sample #" + std::to_string(s));
  }
  return rep;
}

/// Halve every coupling until the assembled operator is positive definite.
inline MetricParams repair_positive_definite(const Decomposition& dec, MetricParams p) {
  const Schema sch = param_schema(dec.theta);
  for (int attempt = 0; attempt < 64; ++attempt) {
    try {
      build_metric(dec, p);
      return p;
    } catch (const std::domain_error&) {
      for (const auto& ps : sch.params)
        if (!ps.positive) {
          const PVal& v = p.get(ps.name);
          p.set(ps.name, v.exact ? PVal::of(v.r / Rat(2)) : PVal::of(v.d / 2));
        }
    }
  }
  throw std::logic_error("could not repair positive definiteness");
}

/// Seeded random parameters: diagonals in [1,5], couplings in [-1,1], the
/// couplings then halved as needed so the assembled operator stays positive
/// definite. Deterministic per seed.
inline MetricParams random_invariant_metric(const Decomposition& dec, std::uint64_t seed) {
  const Schema sch = param_schema(dec.theta);
  Rng rng(seed);
  MetricParams p;
  p.case_name = metric_case_name(sch.mcase);
  for (const auto& ps : sch.params) {
    if (ps.positive)
      p.values.emplace_back(ps.name, PVal::of(rng.uniform_rat(1, 5, 4)));
    else
      p.values.emplace_back(ps.name, PVal::of(rng.uniform_rat(-1, 1, 8)));
  }
  return repair_positive_definite(dec, p);
}

/// Normal metric: mu I (couplings zero, every diagonal parameter mu).
inline MetricParams normal_metric_params(const ThetaSpec& th, const Rat& mu = Rat(1)) {
  const Schema sch = param_schema(th);
  MetricParams p;
  p.case_name = metric_case_name(sch.mcase);
  for (const auto& ps : sch.params)
    p.values.emplace_back(ps.name, PVal::of(ps.positive ? mu : Rat(0)));
  return p;
}

}  // namespace gorbit
