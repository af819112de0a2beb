#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "gorbit/lie.hpp"

namespace gorbit {

/// D-family subcase, determined by the last-root flags.
enum class DCase { NoAlphaL, Both, AlphaLOnly };

/// A subset of simple roots, encoded as an ordered partition (l_1,...,l_r)
/// plus last-root membership flags. For A the parts sum to rank+1; for B, C
/// and D they sum to rank. For D the membership of the (l-1)-th simple root
/// is determined by the partition (it lies in the set iff l_r >= 2).
struct ThetaSpec {
  LieType type;
  std::vector<int> partition;
  bool alpha_l = false;        // B, C, D only
  bool alpha_lminus1 = false;  // D only (derived)

  ThetaSpec(LieType t, std::vector<int> parts, bool al = false)
      : type(t), partition(std::move(parts)), alpha_l(al) {
    const int total = type.family == Family::A ? type.rank + 1 : type.rank;
    int sum = 0;
    for (int p : partition) {
      if (p <= 0) throw std::invalid_argument("theta: partition parts must be positive");
      sum += p;
    }
    if (sum != total)
      throw std::invalid_argument("theta: partition must sum to " + std::to_string(total) +
                                  " for " + type.str());
    if (type.family == Family::A && alpha_l)
      throw std::invalid_argument("theta: family A has no last-root flag");
    alpha_lminus1 = type.family == Family::D && partition.back() >= 2;
  }

  int blocks() const { return static_cast<int>(partition.size()); }

  /// Prefix sums: tilde(0) = 0, tilde(i) = l_1 + ... + l_i.
  int tilde(int i) const {
    int s = 0;
    for (int k = 0; k < i; ++k) s += partition[k];
    return s;
  }

  DCase d_case() const {
    if (type.family != Family::D) throw std::logic_error("d_case: family is not D");
    if (!alpha_l) return DCase::NoAlphaL;
    return partition.back() >= 2 ? DCase::Both : DCase::AlphaLOnly;
  }

  /// The full simple-root set was selected (the flag degenerates to a point).
  bool degenerate() const {
    if (partition.size() != 1) return false;
    return type.family == Family::A ? true : alpha_l;
  }

  /// Indices of the simple roots in the set (1-based).
  std::vector<int> root_set() const {
    std::vector<int> roots;
    const int r = blocks();
    for (int i = 1; i <= r; ++i)
      if (partition[i - 1] > 1)
        for (int a = tilde(i - 1) + 1; a <= tilde(i) - 1; ++a) roots.push_back(a);
    if (alpha_l) roots.push_back(type.rank);
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return roots;
  }

  std::string partition_str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < partition.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(partition[i]);
    }
    s += ")";
    if (alpha_l) s += "+al";
    return s;
  }

  std::string root_set_str() const {
    auto roots = root_set();
    std::string s = "{";
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (i) s += ",";
      s += "a" + std::to_string(roots[i]);
    }
    return s + "}";
  }

  friend bool operator==(const ThetaSpec& a, const ThetaSpec& b) {
    return a.type == b.type && a.partition == b.partition && a.alpha_l == b.alpha_l;
  }
};

/// The characteristic diagonal element: block-constant values, zero on the
/// last block exactly when the last root is selected (for D with l_r = 1 the
/// last value is the negative of the previous one). The centralizer of this
/// element inside the compact algebra is the isotropy algebra.
inline MatQ characteristic_element(const ThetaSpec& th) {
  const LieType& t = th.type;
  const int l = t.rank, r = th.blocks();
  std::vector<Rat> lam(l, Rat(0));  // values on positions 1..l
  for (int i = 1; i <= r; ++i) {
    Rat c;
    switch (t.family) {
      case Family::A:
        c = Rat(r - i);
        break;
      default:
        c = th.alpha_l ? Rat(r - i) : Rat(r - i + 1);
        break;
    }
    if (t.family == Family::D && th.alpha_l && th.partition.back() == 1 && i == r)
      c = Rat(-1);  // lambda_{l-1} + lambda_l = 0 with lambda_{l-1} = 1
    if (t.family != Family::A)
      for (int p = th.tilde(i - 1); p < th.tilde(i); ++p) lam[p] = c;
  }
  const int n = t.ambient_dim();
  MatQ h(n, n);
  switch (t.family) {
    case Family::A: {
      // Diagonal block-constant values on l+1 positions.
      for (int i = 1; i <= r; ++i)
        for (int p = th.tilde(i - 1); p < th.tilde(i); ++p) h(p, p) = Rat(r - i);
      break;
    }
    case Family::B:
      for (int p = 0; p < l; ++p) {
        h(1 + p, 1 + p) = lam[p];
        h(1 + l + p, 1 + l + p) = -lam[p];
      }
      break;
    case Family::C:
    case Family::D:
      for (int p = 0; p < l; ++p) {
        h(p, p) = lam[p];
        h(l + p, l + p) = -lam[p];
      }
      break;
  }
  return h;
}

/// All subsets of the simple roots for a type, as partition encodings.
/// Ordered by block count (descending), then by the sorted part multiset,
/// then lexicographically within a multiset; the B/C/D last-root variants
/// follow each partition (flag off, then on). The full set appears once,
/// flagged degenerate.
inline std::vector<ThetaSpec> enumerate_thetas(const LieType& t) {
  const int total = t.family == Family::A ? t.rank + 1 : t.rank;
  std::vector<std::vector<int>> comps;
  std::vector<int> cur;
  // All compositions of `total`.
  auto rec = [&](auto&& self, int rem) -> void {
    if (rem == 0) {
      comps.push_back(cur);
      return;
    }
    for (int part = 1; part <= rem; ++part) {
      cur.push_back(part);
      self(self, rem - part);
      cur.pop_back();
    }
  };
  rec(rec, total);
  std::sort(comps.begin(), comps.end(), [](const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    std::vector<int> sa = a, sb = b;
    std::sort(sa.rbegin(), sa.rend());
    std::sort(sb.rbegin(), sb.rend());
    if (sa != sb) return sa > sb;
    return a > b;
  });
  std::vector<ThetaSpec> out;
  for (const auto& c : comps) {
    if (t.family == Family::A) {
      out.emplace_back(t, c);
    } else {
      out.emplace_back(t, c, false);
      out.emplace_back(t, c, true);
    }
  }
  return out;
}

}  // namespace gorbit
