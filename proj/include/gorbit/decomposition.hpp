#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gorbit/rng.hpp"
#include "gorbit/theta.hpp"

namespace gorbit {

struct Submodule {
  std::string name;
  int cls = 0;          // isotypical class id
  std::size_t begin = 0, dim = 0;  // contiguous slice of the adapted basis
};

struct IsotypicalClass {
  std::string name;
  std::vector<int> submodule_ids;
  std::size_t begin = 0, dim = 0;  // classes are contiguous by construction
};

/// The reductive split of the compact algebra for a given root subset,
/// together with the adapted tangent basis, its irreducible submodules,
/// their grouping into isotypical summands, and a finite set of isotropy
/// representatives used by the invariance checks.
struct Decomposition {
  explicit Decomposition(ThetaSpec th) : theta(std::move(th)) {}

  ThetaSpec theta;
  std::vector<MatQ> k_basis;        // isotropy algebra, ambient matrices
  std::vector<SparseQ> k_sparse;
  std::vector<Rat> k_norm2;
  std::vector<std::string> k_names;
  std::vector<MatQ> m_basis;        // adapted tangent basis, ambient matrices
  std::vector<SparseQ> m_sparse;
  std::vector<Rat> m_norm2;
  std::vector<std::string> m_names;
  std::vector<Submodule> submodules;
  std::vector<IsotypicalClass> classes;
  std::vector<MatQ> discrete_generators;
  bool special_case = false;  // routed through the rank-3/rank-4 case tables

  std::size_t dim_m() const { return m_basis.size(); }
  std::size_t dim_k() const { return k_basis.size(); }
};

namespace detail {

struct Builder {
  const ThetaSpec& th;
  const LieType& t;
  Decomposition dec;
  std::vector<std::pair<std::string, MatQ>> pending;  // current submodule entries

  explicit Builder(const ThetaSpec& theta) : th(theta), t(theta.type), dec(theta) {}

  MatQ mat(LabelKind k, int i, int j = 0) const { return label_matrix(t, {k, i, j}); }

  void add(const std::string& name, MatQ m) { pending.emplace_back(name, std::move(m)); }
  void add_w(int i, int j) { add("w(" + std::to_string(i) + "," + std::to_string(j) + ")", mat(LabelKind::W, i, j)); }
  void add_u(int i, int j) { add("u(" + std::to_string(i) + "," + std::to_string(j) + ")", mat(LabelKind::U, i, j)); }
  void add_v(int k) { add("v(" + std::to_string(k) + ")", mat(LabelKind::V, k)); }

  /// Close the current submodule under the given name/class.
  void close_submodule(const std::string& name, int cls) {
    Submodule s;
    s.name = name;
    s.cls = cls;
    s.begin = dec.m_basis.size();
    s.dim = pending.size();
    for (auto& [nm, m] : pending) {
      dec.m_names.push_back(nm);
      dec.m_basis.push_back(std::move(m));
    }
    pending.clear();
    dec.submodules.push_back(std::move(s));
  }

  int new_class(const std::string& name) {
    dec.classes.push_back({name, {}, 0, 0});
    return static_cast<int>(dec.classes.size()) - 1;
  }
};

// ---- per-family adapted bases ------------------------------------------

inline void build_a_generic(Builder& b) {
  const int r = b.th.blocks();
  for (int n = 1; n <= r; ++n)
    for (int m = n + 1; m <= r; ++m) {
      const int cls = b.new_class("M" + std::to_string(m) + std::to_string(n));
      for (int s = 1; s <= b.th.partition[m - 1]; ++s)
        for (int tt = 1; tt <= b.th.partition[n - 1]; ++tt)
          b.add_w(b.th.tilde(m - 1) + s, b.th.tilde(n - 1) + tt);
      b.close_submodule("M" + std::to_string(m) + std::to_string(n), cls);
    }
}

inline void build_a3(Builder& b) {
  b.dec.special_case = true;
  const auto& p = b.th.partition;
  auto single = [&](std::initializer_list<std::pair<int, int>> ws, const std::string& name, int cls) {
    for (auto [i, j] : ws) b.add_w(i, j);
    b.close_submodule(name, cls);
  };
  if (p == std::vector<int>{1, 1, 1, 1}) {
    int c1 = b.new_class("M1"), c2 = b.new_class("M2"), c3 = b.new_class("M3");
    single({{2, 1}}, "m21", c1);
    single({{4, 3}}, "m43", c1);
    single({{3, 1}}, "m31", c2);
    single({{4, 2}}, "m42", c2);
    single({{3, 2}}, "m32", c3);
    single({{4, 1}}, "m41", c3);
  } else if (p == std::vector<int>{2, 1, 1}) {
    int c1 = b.new_class("M1"), c2 = b.new_class("M2");
    single({{4, 3}}, "m43", c1);
    single({{3, 1}, {3, 2}}, "m31+m32", c2);
    single({{4, 2}, {4, 1}}, "m42+m41", c2);
  } else if (p == std::vector<int>{1, 2, 1}) {
    int c1 = b.new_class("M1"), c2 = b.new_class("M2");
    single({{4, 1}}, "m41", c1);
    single({{2, 1}, {3, 1}}, "m21+m31", c2);
    single({{4, 3}, {4, 2}}, "m43+m42", c2);
  } else if (p == std::vector<int>{1, 1, 2}) {
    int c1 = b.new_class("M1"), c2 = b.new_class("M2");
    single({{2, 1}}, "m21", c1);
    single({{3, 1}, {4, 1}}, "m31+m41", c2);
    single({{4, 2}, {3, 2}}, "m42+m32", c2);
  } else if (p == std::vector<int>{3, 1}) {
    int c1 = b.new_class("M1");
    single({{4, 1}, {4, 2}, {4, 3}}, "m", c1);
  } else if (p == std::vector<int>{1, 3}) {
    int c1 = b.new_class("M1");
    single({{2, 1}, {3, 1}, {4, 1}}, "m", c1);
  } else if (p == std::vector<int>{2, 2}) {
    int c1 = b.new_class("M1"), c2 = b.new_class("M2");
    b.add("w(3,1)-w(4,2)", b.mat(LabelKind::W, 3, 1) - b.mat(LabelKind::W, 4, 2));
    b.add("w(4,1)+w(3,2)", b.mat(LabelKind::W, 4, 1) + b.mat(LabelKind::W, 3, 2));
    b.close_submodule("M1", c1);
    b.add("w(3,1)+w(4,2)", b.mat(LabelKind::W, 3, 1) + b.mat(LabelKind::W, 4, 2));
    b.add("w(4,1)-w(3,2)", b.mat(LabelKind::W, 4, 1) - b.mat(LabelKind::W, 3, 2));
    b.close_submodule("M2", c2);
  } else {
    throw std::logic_error("A3 case table: unexpected partition");
  }
}

inline void add_pair_blocks(Builder& b, int upto_m) {
  // Coupled equivalent pairs W(m,n) ~ U(m,n), basis w's then u's.
  const int r = b.th.blocks();
  for (int n = 1; n <= std::min(upto_m, r); ++n)
    for (int m = n + 1; m <= upto_m; ++m) {
      const std::string tag = std::to_string(m) + std::to_string(n);
      const int cls = b.new_class("M" + tag);
      for (int s = 1; s <= b.th.partition[m - 1]; ++s)
        for (int tt = 1; tt <= b.th.partition[n - 1]; ++tt)
          b.add_w(b.th.tilde(m - 1) + s, b.th.tilde(n - 1) + tt);
      b.close_submodule("W" + tag, cls);
      for (int s = 1; s <= b.th.partition[m - 1]; ++s)
        for (int tt = 1; tt <= b.th.partition[n - 1]; ++tt)
          b.add_u(b.th.tilde(m - 1) + s, b.th.tilde(n - 1) + tt);
      b.close_submodule("U" + tag, cls);
    }
}

inline void add_u_block(Builder& b, int i) {
  // In-block skew directions u(s,t), s > t inside block i.
  const std::string name = "U" + std::to_string(i);
  const int cls = b.new_class(name);
  for (int s = 2; s <= b.th.partition[i - 1]; ++s)
    for (int tt = 1; tt < s; ++tt)
      b.add_u(b.th.tilde(i - 1) + s, b.th.tilde(i - 1) + tt);
  b.close_submodule(name, cls);
}

inline void build_b(Builder& b) {
  const int r = b.th.blocks();
  if (!b.th.alpha_l) {
    for (int i = 1; i <= r; ++i) {
      const std::string name = "V" + std::to_string(i);
      const int cls = b.new_class(name);
      for (int s = 1; s <= b.th.partition[i - 1]; ++s) b.add_v(b.th.tilde(i - 1) + s);
      b.close_submodule(name, cls);
    }
    add_pair_blocks(b, r);
    for (int i = 1; i <= r; ++i)
      if (b.th.partition[i - 1] > 1) add_u_block(b, i);
  } else {
    const int lr = b.th.partition[r - 1], R = b.th.tilde(r - 1);
    for (int i = 1; i <= r - 1; ++i) {
      const int I = b.th.tilde(i - 1), li = b.th.partition[i - 1];
      const std::string n1 = "V" + std::to_string(i) + "_1";
      const int c1 = b.new_class(n1);
      for (int s = 1; s <= lr; ++s)
        for (int tt = 1; tt <= li; ++tt)
          b.add("w-u(" + std::to_string(R + s) + "," + std::to_string(I + tt) + ")",
                b.mat(LabelKind::W, R + s, I + tt) - b.mat(LabelKind::U, R + s, I + tt));
      b.close_submodule(n1, c1);
      const std::string n2 = "V" + std::to_string(i) + "_2";
      const int c2 = b.new_class(n2);
      for (int tt = 1; tt <= li; ++tt) b.add_v(I + tt);
      for (int s = 1; s <= lr; ++s)
        for (int tt = 1; tt <= li; ++tt)
          b.add("w+u(" + std::to_string(R + s) + "," + std::to_string(I + tt) + ")",
                b.mat(LabelKind::W, R + s, I + tt) + b.mat(LabelKind::U, R + s, I + tt));
      b.close_submodule(n2, c2);
    }
    add_pair_blocks(b, r - 1);
    for (int i = 1; i <= r - 1; ++i)
      if (b.th.partition[i - 1] > 1) add_u_block(b, i);
  }
}

inline void add_c_center_block(Builder& b, int rtilde) {
  // Sums of diagonal generators over each block: all mutually equivalent.
  const int cls = b.new_class("M0");
  for (int i = 1; i <= rtilde; ++i) {
    const int I = b.th.tilde(i - 1), li = b.th.partition[i - 1];
    MatQ acc(b.t.ambient_dim(), b.t.ambient_dim());
    for (int s = 1; s <= li; ++s) acc += b.mat(LabelKind::UDiag, I + s);
    b.add("vt(" + std::to_string(i) + ")", std::move(acc));
    b.close_submodule("V" + std::to_string(i), cls);
  }
}

inline void add_c_traceless_block(Builder& b, int i) {
  // Traceless diagonal differences plus in-block u's.
  const int I = b.th.tilde(i - 1), li = b.th.partition[i - 1];
  const std::string name = "U" + std::to_string(i);
  const int cls = b.new_class("M" + std::to_string(i));
  for (int s = 1; s <= li - 1; ++s) {
    MatQ acc(b.t.ambient_dim(), b.t.ambient_dim());
    for (int tt = 1; tt <= s; ++tt) acc += Rat(1, s) * b.mat(LabelKind::UDiag, I + tt);
    acc -= b.mat(LabelKind::UDiag, I + s + 1);
    b.add("ud-diff(" + std::to_string(i) + "," + std::to_string(s) + ")", std::move(acc));
  }
  for (int s = 2; s <= li; ++s)
    for (int tt = 1; tt < s; ++tt) b.add_u(I + s, I + tt);
  b.close_submodule(name, cls);
}

inline void build_c_generic(Builder& b) {
  const int r = b.th.blocks();
  const int rtilde = b.th.alpha_l ? r - 1 : r;
  add_c_center_block(b, rtilde);
  if (!b.th.alpha_l) {
    add_pair_blocks(b, r);
  } else {
    add_pair_blocks(b, r - 1);
    // Last-block mixed summands: w's and u's against block r fuse into one
    // irreducible piece per lower block.
    const int R = b.th.tilde(r - 1), lr = b.th.partition[r - 1];
    for (int n = 1; n <= r - 1; ++n) {
      const std::string name = "M" + std::to_string(r) + std::to_string(n);
      const int cls = b.new_class(name);
      for (int s = 1; s <= lr; ++s)
        for (int tt = 1; tt <= b.th.partition[n - 1]; ++tt)
          b.add_w(R + s, b.th.tilde(n - 1) + tt);
      for (int s = 1; s <= lr; ++s)
        for (int tt = 1; tt <= b.th.partition[n - 1]; ++tt)
          b.add_u(R + s, b.th.tilde(n - 1) + tt);
      b.close_submodule(name, cls);
    }
  }
  for (int i = 1; i <= rtilde; ++i)
    if (b.th.partition[i - 1] > 1) add_c_traceless_block(b, i);
}

inline bool c4_special(const ThetaSpec& th) {
  if (th.type.family != Family::C || th.type.rank != 4 || th.alpha_l) return false;
  const auto& p = th.partition;
  return p == std::vector<int>{1, 1, 1, 1} || p == std::vector<int>{2, 1, 1} ||
         p == std::vector<int>{1, 2, 1} || p == std::vector<int>{1, 1, 2};
}

inline void build_c4_special(Builder& b) {
  b.dec.special_case = true;
  const auto& p = b.th.partition;
  auto pair_class = [&](const char* cname, std::initializer_list<std::pair<int, int>> ws,
                        std::initializer_list<std::pair<int, int>> us) {
    const int cls = b.new_class(cname);
    for (auto [i, j] : ws) {
      b.add_w(i, j);
      b.close_submodule("W" + std::to_string(i) + std::to_string(j), cls);
    }
    for (auto [i, j] : us) {
      b.add_u(i, j);
      b.close_submodule("U" + std::to_string(i) + std::to_string(j), cls);
    }
  };
  if (p == std::vector<int>{1, 1, 1, 1}) {
    add_c_center_block(b, 4);
    pair_class("N1", {{2, 1}, {4, 3}}, {{2, 1}, {4, 3}});
    pair_class("N2", {{3, 1}, {4, 2}}, {{3, 1}, {4, 2}});
    pair_class("N3", {{3, 2}, {4, 1}}, {{3, 2}, {4, 1}});
    return;
  }
  add_c_center_block(b, 3);
  if (p == std::vector<int>{2, 1, 1}) {
    add_c_traceless_block(b, 1);  // U1 = {u(2,1)}
    // M = W32 + U32 = {w43, u43}; N groups the four cross blocks.
    {
      const int cls = b.new_class("M");
      b.add_w(4, 3);
      b.close_submodule("W32", cls);
      b.add_u(4, 3);
      b.close_submodule("U32", cls);
    }
    {
      const int cls = b.new_class("N");
      b.add_w(3, 1); b.add_w(3, 2);
      b.close_submodule("W21", cls);
      b.add_w(4, 1); b.add_w(4, 2);
      b.close_submodule("W31", cls);
      b.add_u(3, 1); b.add_u(3, 2);
      b.close_submodule("U21", cls);
      b.add_u(4, 1); b.add_u(4, 2);
      b.close_submodule("U31", cls);
    }
  } else if (p == std::vector<int>{1, 2, 1}) {
    add_c_traceless_block(b, 2);  // U2 = {u(3,2)}
    {
      const int cls = b.new_class("M");
      b.add_w(4, 1);
      b.close_submodule("W31", cls);
      b.add_u(4, 1);
      b.close_submodule("U31", cls);
    }
    {
      const int cls = b.new_class("N");
      b.add_w(2, 1); b.add_w(3, 1);
      b.close_submodule("W21", cls);
      b.add_w(4, 2); b.add_w(4, 3);
      b.close_submodule("W32", cls);
      b.add_u(2, 1); b.add_u(3, 1);
      b.close_submodule("U21", cls);
      b.add_u(4, 2); b.add_u(4, 3);
      b.close_submodule("U32", cls);
    }
  } else {  // (1,1,2)
    add_c_traceless_block(b, 3);  // U3 = {u(4,3)}
    {
      const int cls = b.new_class("M");
      b.add_w(2, 1);
      b.close_submodule("W21", cls);
      b.add_u(2, 1);
      b.close_submodule("U21", cls);
    }
    {
      const int cls = b.new_class("N");
      b.add_w(3, 1); b.add_w(4, 1);
      b.close_submodule("W31", cls);
      b.add_w(3, 2); b.add_w(4, 2);
      b.close_submodule("W32", cls);
      b.add_u(3, 1); b.add_u(4, 1);
      b.close_submodule("U31", cls);
      b.add_u(3, 2); b.add_u(4, 2);
      b.close_submodule("U32", cls);
    }
  }
}

inline void build_d(Builder& b) {
  const int r = b.th.blocks();
  const int l = b.t.rank;
  switch (b.th.d_case()) {
    case DCase::NoAlphaL:
      add_pair_blocks(b, r);
      for (int i = 1; i <= r; ++i)
        if (b.th.partition[i - 1] > 1) add_u_block(b, i);
      break;
    case DCase::Both: {
      add_pair_blocks(b, r - 1);
      const int R = b.th.tilde(r - 1), lr = b.th.partition[r - 1];
      for (int n = 1; n <= r - 1; ++n) {
        const std::string name = "M" + std::to_string(r) + std::to_string(n);
        const int cls = b.new_class(name);
        for (int s = 1; s <= lr; ++s)
          for (int tt = 1; tt <= b.th.partition[n - 1]; ++tt)
            b.add_w(R + s, b.th.tilde(n - 1) + tt);
        for (int s = 1; s <= lr; ++s)
          for (int tt = 1; tt <= b.th.partition[n - 1]; ++tt)
            b.add_u(R + s, b.th.tilde(n - 1) + tt);
        b.close_submodule(name, cls);
      }
      for (int i = 1; i <= r - 1; ++i)
        if (b.th.partition[i - 1] > 1) add_u_block(b, i);
      break;
    }
    case DCase::AlphaLOnly: {
      // Last block is a single position; the next-to-last block pairs with it.
      add_pair_blocks(b, r - 2);
      for (int i = 1; i <= r - 2; ++i)
        if (b.th.partition[i - 1] > 1) add_u_block(b, i);
      const int Rm1 = b.th.tilde(r - 2), lrm1 = b.th.partition[r - 2];
      for (int n = 1; n <= r - 2; ++n) {
        const int N = b.th.tilde(n - 1), ln = b.th.partition[n - 1];
        const std::string tag = std::to_string(n);
        const int cls = b.new_class("S" + tag);
        for (int s = 1; s <= lrm1; ++s)
          for (int tt = 1; tt <= ln; ++tt) b.add_w(Rm1 + s, N + tt);
        for (int tt = 1; tt <= ln; ++tt) b.add_u(l, N + tt);
        b.close_submodule("M" + tag, cls);
        for (int s = 1; s <= lrm1; ++s)
          for (int tt = 1; tt <= ln; ++tt) b.add_u(Rm1 + s, N + tt);
        for (int tt = 1; tt <= ln; ++tt) b.add_w(l, N + tt);
        b.close_submodule("N" + tag, cls);
      }
      const std::string vname = "V" + std::to_string(r - 1);
      const int cls = b.new_class(vname);
      for (int s = 2; s <= lrm1; ++s)
        for (int tt = 1; tt < s; ++tt) b.add_u(Rm1 + s, Rm1 + tt);
      for (int tt = 1; tt <= lrm1; ++tt) b.add_w(l, Rm1 + tt);
      b.close_submodule(vname, cls);
      break;
    }
  }
}

// ---- discrete isotropy representatives ----------------------------------

/// Embed an orthogonal block P (size l for B/C/D, l+1 for A) into the group.
template <class T>
Matrix<T> embed_group(const LieType& t, const Matrix<T>& p) {
  const int l = t.rank, n = t.ambient_dim();
  Matrix<T> k(n, n);
  switch (t.family) {
    case Family::A:
      return p;
    case Family::B:
      k(0, 0) = scalar_traits<T>::one();
      for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) {
          k(1 + i, 1 + j) = p(i, j);
          k(1 + l + i, 1 + l + j) = p(i, j);
        }
      return k;
    default:
      for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) {
          k(i, j) = p(i, j);
          k(l + i, l + j) = p(i, j);
        }
      return k;
  }
}

inline MatQ cayley_block(int size, Rng& rng) {
  MatQ s(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = i + 1; j < size; ++j) {
      Rat v(rng.uniform(-2, 2), 2);
      s(i, j) = v;
      s(j, i) = -v;
    }
  const MatQ id = MatQ::identity(size);
  return (id - s) * inverse(id + s);
}

/// Sign-diagonal elements (paired up where the group is a special-orthogonal
/// product) plus seeded random in-block rotations, embedded exactly as the
/// isotropy subgroups sit inside the ambient group.
inline std::vector<MatQ> discrete_isotropy_generators(const ThetaSpec& th,
                                                      std::uint64_t seed = 0x5eedULL) {
  const LieType& t = th.type;
  const int r = th.blocks();
  const int psize = t.family == Family::A ? t.rank + 1 : t.rank;
  const bool det_constrained = t.family != Family::C;
  std::vector<MatQ> gens;
  auto flip = [&](int pos_a, int pos_b) {
    MatQ p = MatQ::identity(psize);
    p(pos_a, pos_a) = Rat(-1);
    if (pos_b >= 0) p(pos_b, pos_b) = Rat(-1);
    gens.push_back(embed_group(t, p));
  };
  for (int i = 1; i <= r; ++i) {
    const int I = th.tilde(i - 1), li = th.partition[i - 1];
    for (int s = 0; s < li; ++s) {
      const int pos = I + s;
      if (!det_constrained) {
        flip(pos, -1);
      } else if (r >= 2) {
        const int anchor = th.tilde(i % r);  // first position of the next block
        flip(pos, anchor);
      } else if (psize >= 2) {
        flip(pos, (pos + 1) % psize);
      }
    }
  }
  Rng rng(seed);
  for (int i = 1; i <= r; ++i) {
    const int I = th.tilde(i - 1), li = th.partition[i - 1];
    if (li < 2) continue;
    for (int rep = 0; rep < 3; ++rep) {
      MatQ p = MatQ::identity(psize);
      MatQ q = cayley_block(li, rng);
      for (int a = 0; a < li; ++a)
        for (int bcol = 0; bcol < li; ++bcol) p(I + a, I + bcol) = q(a, bcol);
      gens.push_back(embed_group(t, p));
    }
  }
  // One simultaneous rotation of every block.
  {
    MatQ p = MatQ::identity(psize);
    bool any = false;
    for (int i = 1; i <= r; ++i) {
      const int I = th.tilde(i - 1), li = th.partition[i - 1];
      if (li < 2) continue;
      any = true;
      MatQ q = cayley_block(li, rng);
      for (int a = 0; a < li; ++a)
        for (int bcol = 0; bcol < li; ++bcol) p(I + a, I + bcol) = q(a, bcol);
    }
    if (any) gens.push_back(embed_group(t, p));
  }
  return gens;
}

}  // namespace detail

using detail::discrete_isotropy_generators;

/// Float-mode isotropy samples: the rational representatives plus the
/// half-turn rotations (entries 1/sqrt(2)) in the leading plane of every
/// non-singleton block — the probe elements the invariance arguments use.
inline std::vector<MatD> isotropy_samples_float(const ThetaSpec& th,
                                                std::uint64_t seed = 0x5eedULL) {
  std::vector<MatD> out;
  for (const auto& k : detail::discrete_isotropy_generators(th, seed)) out.push_back(to_double(k));
  const LieType& t = th.type;
  const int psize = t.family == Family::A ? t.rank + 1 : t.rank;
  const double irt2 = 1.0 / std::sqrt(2.0);
  for (int i = 1; i <= th.blocks(); ++i) {
    const int I = th.tilde(i - 1), li = th.partition[i - 1];
    if (li < 2) continue;
    MatD p = MatD::identity(psize);
    p(I, I) = irt2;
    p(I, I + 1) = -irt2;
    p(I + 1, I) = irt2;
    p(I + 1, I + 1) = irt2;
    out.push_back(detail::embed_group(t, p));
  }
  return out;
}

/// Split the algebra along the characteristic element and assemble the
/// adapted tangent basis with its submodule/summand bookkeeping.
inline Decomposition build_decomposition(const ThetaSpec& th, std::uint64_t generator_seed = 0x5eedULL) {
  detail::Builder b(th);
  const LieType& t = th.type;

  // Isotropy algebra: basis elements commuting with the characteristic diagonal.
  const MatQ h = characteristic_element(th);
  auto basis = build_basis(t);
  for (auto& e : basis) {
    if (bracket(h, e.matrix).is_zero()) {
      b.dec.k_names.push_back(e.label.str());
      b.dec.k_basis.push_back(e.matrix);
    }
  }

  if (!th.degenerate()) {
    if (t.family == Family::A) {
      if (t.rank == 3)
        detail::build_a3(b);
      else
        detail::build_a_generic(b);
    } else if (t.family == Family::B) {
      detail::build_b(b);
    } else if (t.family == Family::C) {
      if (detail::c4_special(th))
        detail::build_c4_special(b);
      else
        detail::build_c_generic(b);
    } else {
      detail::build_d(b);
    }
  }

  Decomposition dec = std::move(b.dec);
  if (dec.dim_k() + dec.dim_m() != static_cast<std::size_t>(t.dim_k()))
    throw std::logic_error("decomposition: dimension bookkeeping failed for " + t.str() + " " +
                           th.partition_str());

  for (const auto& m : dec.k_basis) dec.k_sparse.push_back(SparseQ::from_dense(m));
  for (const auto& m : dec.m_basis) dec.m_sparse.push_back(SparseQ::from_dense(m));
  for (const auto& s : dec.k_sparse) dec.k_norm2.push_back(inner(s, s, t));
  for (const auto& s : dec.m_sparse) dec.m_norm2.push_back(inner(s, s, t));

  // Class slices (submodules of one class are contiguous by construction).
  for (std::size_t si = 0; si < dec.submodules.size(); ++si) {
    auto& cls = dec.classes[dec.submodules[si].cls];
    if (cls.submodule_ids.empty()) cls.begin = dec.submodules[si].begin;
    cls.submodule_ids.push_back(static_cast<int>(si));
    cls.dim += dec.submodules[si].dim;
  }

  dec.discrete_generators = discrete_isotropy_generators(th, generator_seed);
  return dec;
}

enum class ProjectTarget { KTheta, MTheta };

/// Coordinates of the orthogonal projection onto the isotropy algebra or the
/// tangent space, in the stored (orthogonal) bases.
inline std::vector<Rat> project(const MatQ& x, ProjectTarget target, const Decomposition& dec) {
  const LieType& t = dec.theta.type;
  const SparseQ xs = SparseQ::from_dense(x);
  const auto& basis = target == ProjectTarget::KTheta ? dec.k_sparse : dec.m_sparse;
  const auto& norms = target == ProjectTarget::KTheta ? dec.k_norm2 : dec.m_norm2;
  std::vector<Rat> coords(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) coords[i] = inner(xs, basis[i], t) / norms[i];
  return coords;
}

/// Coordinates of the projection onto a single submodule span.
inline std::vector<Rat> project(const MatQ& x, const Submodule& s, const Decomposition& dec) {
  const LieType& t = dec.theta.type;
  const SparseQ xs = SparseQ::from_dense(x);
  std::vector<Rat> coords(s.dim);
  for (std::size_t i = 0; i < s.dim; ++i)
    coords[i] = inner(xs, dec.m_sparse[s.begin + i], t) / dec.m_norm2[s.begin + i];
  return coords;
}

}  // namespace gorbit
