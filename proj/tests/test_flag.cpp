#include <catch2/catch_amalgamated.hpp>

#include "gorbit/decomposition.hpp"
#include "gorbit/workspace.hpp"

using namespace gorbit;

namespace {

/// Exact residual of X against the span of the given ambient basis vectors.
MatQ span_residual(const MatQ& x, const std::vector<MatQ>& basis, const LieType& t) {
  MatQ res = x;
  for (const auto& b : basis) {
    const Rat c = inner(x, b, t) / inner(b, b, t);
    if (!c.is_zero()) res -= c * b;
  }
  return res;
}

void check_decomposition_invariants(const Decomposition& dec) {
  const LieType& t = dec.theta.type;
  INFO(t.str() << " " << dec.theta.partition_str());

  // Orthogonal reductive split.
  for (const auto& w : dec.k_sparse)
    for (const auto& x : dec.m_sparse) REQUIRE(inner(w, x, t) == Rat(0));

  // The adapted basis is orthogonal.
  for (std::size_t i = 0; i < dec.m_sparse.size(); ++i)
    for (std::size_t j = i + 1; j < dec.m_sparse.size(); ++j)
      REQUIRE(inner(dec.m_sparse[i], dec.m_sparse[j], t) == Rat(0));

  // Subalgebra closure and reductivity.
  for (const auto& w1 : dec.k_basis)
    for (const auto& w2 : dec.k_basis)
      REQUIRE(span_residual(bracket(w1, w2), dec.k_basis, t).is_zero());
  for (const auto& w : dec.k_basis)
    for (const auto& x : dec.m_basis)
      REQUIRE(span_residual(bracket(w, x), dec.m_basis, t).is_zero());

  // Submodule invariance under the isotropy algebra.
  for (const auto& s : dec.submodules) {
    std::vector<MatQ> sub(dec.m_basis.begin() + s.begin, dec.m_basis.begin() + s.begin + s.dim);
    for (const auto& w : dec.k_basis)
      for (std::size_t i = 0; i < s.dim; ++i)
        REQUIRE(span_residual(bracket(w, dec.m_basis[s.begin + i]), sub, t).is_zero());
  }

  // Discrete generators: orthogonal, preserve the isotropy algebra and every
  // submodule span.
  for (const auto& k : dec.discrete_generators) {
    REQUIRE(k.transpose() * k == MatQ::identity(k.rows()));
    for (const auto& w : dec.k_basis)
      REQUIRE(span_residual(conjugate(k, w), dec.k_basis, t).is_zero());
    for (const auto& s : dec.submodules) {
      std::vector<MatQ> sub(dec.m_basis.begin() + s.begin, dec.m_basis.begin() + s.begin + s.dim);
      for (std::size_t i = 0; i < s.dim; ++i)
        REQUIRE(span_residual(conjugate(k, dec.m_basis[s.begin + i]), sub, t).is_zero());
    }
  }
}

}  // namespace

TEST_CASE("theta enumeration for A3 matches the documented order") {
  const LieType t(Family::A, 3);
  auto thetas = enumerate_thetas(t);
  REQUIRE(thetas.size() == 8);
  const std::vector<std::vector<int>> expected = {
      {1, 1, 1, 1}, {2, 1, 1}, {1, 2, 1}, {1, 1, 2}, {3, 1}, {1, 3}, {2, 2}, {4}};
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(thetas[i].partition == expected[i]);
  CHECK(thetas.back().degenerate());
  int degenerate = 0;
  for (const auto& th : thetas) degenerate += th.degenerate() ? 1 : 0;
  CHECK(degenerate == 1);
}

TEST_CASE("theta enumeration covers the last-root variants") {
  const LieType c3(Family::C, 3);
  auto thetas = enumerate_thetas(c3);
  CHECK(thetas.size() == 8);  // 4 compositions x 2 flags
  int with_flag = 0;
  for (const auto& th : thetas) with_flag += th.alpha_l ? 1 : 0;
  CHECK(with_flag == 4);

  const LieType d5(Family::D, 5);
  for (const auto& th : enumerate_thetas(d5)) {
    if (th.alpha_l && !th.alpha_lminus1) CHECK(th.partition.back() == 1);
    if (th.alpha_l && th.alpha_lminus1) CHECK(th.partition.back() >= 2);
  }
}

TEST_CASE("theta root sets and validation") {
  const LieType a3(Family::A, 3);
  CHECK(ThetaSpec(a3, {2, 1, 1}).root_set() == std::vector<int>{1});
  CHECK(ThetaSpec(a3, {2, 2}).root_set() == std::vector<int>{1, 3});
  CHECK(ThetaSpec(a3, {1, 3}).root_set() == std::vector<int>{2, 3});
  CHECK_THROWS(ThetaSpec(a3, {2, 1}));           // wrong total
  CHECK_THROWS(ThetaSpec(a3, {2, 1, 1}, true));  // A has no last-root flag

  const LieType b5(Family::B, 5);
  CHECK(ThetaSpec(b5, {2, 3}, false).root_set() == std::vector<int>{1, 3, 4});
  CHECK(ThetaSpec(b5, {2, 3}, true).root_set() == std::vector<int>{1, 3, 4, 5});
  CHECK(ThetaSpec(b5, {5}, true).degenerate());
  CHECK(!ThetaSpec(b5, {5}, false).degenerate());
}

TEST_CASE("A2 minimal flag decomposes into three singleton summands") {
  const LieType t(Family::A, 2);
  auto dec = build_decomposition(ThetaSpec(t, {1, 1, 1}));
  CHECK(dec.dim_k() == 0);
  REQUIRE(dec.dim_m() == 3);
  CHECK(dec.submodules.size() == 3);
  CHECK(dec.classes.size() == 3);
  check_decomposition_invariants(dec);
}

TEST_CASE("A3 case table") {
  const LieType t(Family::A, 3);
  SECTION("empty set: six singletons, three summands of dimension 2") {
    auto dec = build_decomposition(ThetaSpec(t, {1, 1, 1, 1}));
    CHECK(dec.special_case);
    CHECK(dec.dim_k() == 0);
    REQUIRE(dec.dim_m() == 6);
    REQUIRE(dec.classes.size() == 3);
    for (const auto& c : dec.classes) CHECK(c.dim == 2);
    CHECK(dec.m_names == std::vector<std::string>{"w(2,1)", "w(4,3)", "w(3,1)", "w(4,2)",
                                                  "w(3,2)", "w(4,1)"});
    check_decomposition_invariants(dec);
  }
  SECTION("single roots") {
    for (auto parts : {std::vector<int>{2, 1, 1}, {1, 2, 1}, {1, 1, 2}}) {
      auto dec = build_decomposition(ThetaSpec(t, parts));
      CHECK(dec.dim_k() == 1);
      REQUIRE(dec.dim_m() == 5);
      REQUIRE(dec.classes.size() == 2);
      CHECK(dec.classes[0].dim == 1);
      CHECK(dec.classes[1].dim == 4);
      check_decomposition_invariants(dec);
    }
  }
  SECTION("two-by-two blocks: the displayed plus/minus combinations") {
    auto dec = build_decomposition(ThetaSpec(t, {2, 2}));
    CHECK(dec.k_names == std::vector<std::string>{"w(2,1)", "w(4,3)"});
    REQUIRE(dec.dim_m() == 4);
    REQUIRE(dec.classes.size() == 2);
    CHECK(dec.m_names[0] == "w(3,1)-w(4,2)");
    CHECK(dec.m_names[1] == "w(4,1)+w(3,2)");
    check_decomposition_invariants(dec);
  }
  SECTION("irreducible cases") {
    for (auto parts : {std::vector<int>{3, 1}, {1, 3}}) {
      auto dec = build_decomposition(ThetaSpec(t, parts));
      CHECK(dec.classes.size() == 1);
      CHECK(dec.dim_m() == 3);
      check_decomposition_invariants(dec);
    }
  }
}

TEST_CASE("A-family dimension bookkeeping") {
  for (int rank : {2, 4, 5}) {
    const LieType t(Family::A, rank);
    for (const auto& th : enumerate_thetas(t)) {
      if (th.degenerate()) continue;
      auto dec = build_decomposition(th);
      std::size_t expect = 0;
      for (int n = 1; n <= th.blocks(); ++n)
        for (int m = n + 1; m <= th.blocks(); ++m)
          expect += static_cast<std::size_t>(th.partition[m - 1]) * th.partition[n - 1];
      CHECK(dec.dim_m() == expect);
    }
  }
}

TEST_CASE("B5 decomposition invariants") {
  const LieType t(Family::B, 5);
  SECTION("without the short root") {
    auto dec = build_decomposition(ThetaSpec(t, {2, 3}, false));
    // V1, V2, W21, U21, U1, U2
    REQUIRE(dec.submodules.size() == 6);
    CHECK(dec.submodules[0].name == "V1");
    CHECK(dec.submodules[0].dim == 2);
    CHECK(dec.submodules[1].dim == 3);
    CHECK(dec.submodules[2].name == "W21");
    CHECK(dec.submodules[2].dim == 6);
    CHECK(dec.submodules[3].name == "U21");
    // W21 and U21 share one isotypical class.
    CHECK(dec.submodules[2].cls == dec.submodules[3].cls);
    CHECK(dec.classes.size() == 5);
    CHECK(dec.dim_k() == 1 + 3);  // so(2) + so(3)
    CHECK(dec.dim_m() == 25 - 4);
    check_decomposition_invariants(dec);
  }
  SECTION("with the short root") {
    auto dec = build_decomposition(ThetaSpec(t, {2, 3}, true));
    // (V1)_1 dim 6, (V1)_2 dim 2 + 6, U1 dim 1
    REQUIRE(dec.submodules.size() == 3);
    CHECK(dec.submodules[0].name == "V1_1");
    CHECK(dec.submodules[0].dim == 6);
    CHECK(dec.submodules[1].name == "V1_2");
    CHECK(dec.submodules[1].dim == 8);
    CHECK(dec.submodules[2].name == "U1");
    CHECK(dec.dim_k() == 1 + 3 + 3 + 3);  // in-block w's + last-block v's and u's
    check_decomposition_invariants(dec);
  }
  SECTION("five singleton blocks") {
    auto dec = build_decomposition(ThetaSpec(t, {1, 1, 1, 1, 1}, false));
    CHECK(dec.dim_k() == 0);
    CHECK(dec.dim_m() == 25);
    CHECK(dec.classes.size() == 5 + 10);
    check_decomposition_invariants(dec);
  }
}

TEST_CASE("C3 decomposition invariants") {
  const LieType t(Family::C, 3);
  SECTION("all-singleton partition, no long root") {
    auto dec = build_decomposition(ThetaSpec(t, {1, 1, 1}, false));
    CHECK(dec.dim_k() == 0);
    CHECK(dec.dim_m() == 9);
    // M0 groups the three diagonal directions into one summand.
    CHECK(dec.classes[0].name == "M0");
    CHECK(dec.classes[0].dim == 3);
    CHECK(dec.classes.size() == 4);
    check_decomposition_invariants(dec);
  }
  SECTION("all-singleton partition with the long root") {
    auto dec = build_decomposition(ThetaSpec(t, {1, 1, 1}, true));
    CHECK(dec.dim_k() == 1);  // the u(1) direction of the last position
    CHECK(dec.classes[0].name == "M0");
    CHECK(dec.classes[0].dim == 2);
    // M21 coupled pair + two last-block summands M31, M32.
    CHECK(dec.classes.size() == 4);
    check_decomposition_invariants(dec);
  }
  SECTION("partition (2,1) with and without the long root") {
    for (bool al : {false, true}) {
      auto dec = build_decomposition(ThetaSpec(t, {2, 1}, al));
      check_decomposition_invariants(dec);
    }
  }
}

TEST_CASE("C4 special case table") {
  const LieType t(Family::C, 4);
  SECTION("empty set: four summands of dimension 4") {
    auto dec = build_decomposition(ThetaSpec(t, {1, 1, 1, 1}, false));
    CHECK(dec.special_case);
    REQUIRE(dec.classes.size() == 4);
    for (const auto& c : dec.classes) CHECK(c.dim == 4);
    CHECK(dec.classes[0].name == "M0");
    CHECK(dec.classes[1].name == "N1");
    CHECK(dec.classes[2].name == "N2");
    CHECK(dec.classes[3].name == "N3");
    check_decomposition_invariants(dec);
  }
  SECTION("one size-2 block: summands M0, M1, M, N") {
    auto dec = build_decomposition(ThetaSpec(t, {2, 1, 1}, false));
    CHECK(dec.special_case);
    REQUIRE(dec.classes.size() == 4);
    CHECK(dec.classes[0].name == "M0");
    CHECK(dec.classes[0].dim == 3);
    CHECK(dec.classes[1].name == "M1");
    // U1 carries the traceless diagonal difference besides u(2,1); the
    // count is forced by dim u(4) = 16.
    CHECK(dec.classes[1].dim == 2);
    CHECK(dec.classes[2].name == "M");
    CHECK(dec.classes[2].dim == 2);
    CHECK(dec.classes[3].name == "N");
    CHECK(dec.classes[3].dim == 8);
    check_decomposition_invariants(dec);
    // Submodule members of N per the case table.
    std::vector<std::string> names;
    for (int id : dec.classes[3].submodule_ids) names.push_back(dec.submodules[id].name);
    CHECK(names == std::vector<std::string>{"W21", "W31", "U21", "U31"});
  }
  SECTION("the other size-2 positions") {
    for (auto parts : {std::vector<int>{1, 2, 1}, {1, 1, 2}}) {
      auto dec = build_decomposition(ThetaSpec(t, parts, false));
      CHECK(dec.special_case);
      REQUIRE(dec.classes.size() == 4);
      check_decomposition_invariants(dec);
    }
  }
  SECTION("non-special C4 flags use the generic route") {
    auto dec = build_decomposition(ThetaSpec(t, {2, 2}, false));
    CHECK(!dec.special_case);
    check_decomposition_invariants(dec);
    auto dec2 = build_decomposition(ThetaSpec(t, {2, 1, 1}, true));
    CHECK(!dec2.special_case);
    check_decomposition_invariants(dec2);
  }
}

TEST_CASE("D5 decomposition invariants across the three last-root cases") {
  const LieType t(Family::D, 5);
  SECTION("no last root") {
    auto dec = build_decomposition(ThetaSpec(t, {2, 3}, false));
    CHECK(dec.dim_k() == 1 + 3);
    CHECK(dec.dim_m() == 20 - 4);
    check_decomposition_invariants(dec);
  }
  SECTION("both final roots") {
    auto dec = build_decomposition(ThetaSpec(t, {1, 2, 2}, true));
    REQUIRE(dec.theta.d_case() == DCase::Both);
    // M31, M32 are single irreducible summands here.
    bool found = false;
    for (const auto& c : dec.classes) found = found || c.name == "M31";
    CHECK(found);
    check_decomposition_invariants(dec);
  }
  SECTION("last root only (forced singleton last block)") {
    auto dec = build_decomposition(ThetaSpec(t, {2, 2, 1}, true));
    REQUIRE(dec.theta.d_case() == DCase::AlphaLOnly);
    CHECK(dec.dim_k() == 1 + 1 + 2);  // in-block w's + u(5, next-to-last block)
    // S1 = M1 + N1 (dim 6 each), V2 (dim 3), U1 (dim 1).
    REQUIRE(dec.classes.size() == 3);
    CHECK(dec.classes[0].name == "U1");
    CHECK(dec.classes[1].name == "S1");
    CHECK(dec.classes[1].dim == 12);
    CHECK(dec.classes[2].name == "V2");
    CHECK(dec.classes[2].dim == 3);
    check_decomposition_invariants(dec);
  }
  SECTION("singleton partition with last root only") {
    auto dec = build_decomposition(ThetaSpec(t, {1, 1, 1, 1, 1}, true));
    REQUIRE(dec.theta.d_case() == DCase::AlphaLOnly);
    check_decomposition_invariants(dec);
  }
}

TEST_CASE("projection API") {
  const LieType t(Family::B, 5);
  auto dec = build_decomposition(ThetaSpec(t, {2, 3}, false));

  // Isotropy elements project to zero on the tangent side.
  for (const auto& w : dec.k_basis) {
    auto coords = project(w, ProjectTarget::MTheta, dec);
    for (const auto& c : coords) CHECK(c.is_zero());
  }

  // Summing submodule projections reconstructs tangent vectors.
  MatQ x(t.ambient_dim(), t.ambient_dim());
  x += Rat(2) * dec.m_basis[0] + Rat(-3) * dec.m_basis[4] + Rat(1, 2) * dec.m_basis[7];
  MatQ acc(t.ambient_dim(), t.ambient_dim());
  for (const auto& s : dec.submodules) {
    auto coords = project(x, s, dec);
    for (std::size_t i = 0; i < s.dim; ++i)
      if (!coords[i].is_zero()) acc += coords[i] * dec.m_basis[s.begin + i];
  }
  CHECK((acc - x).is_zero());
}

TEST_CASE("degenerate full-set flags have empty tangent space") {
  auto dec = build_decomposition(ThetaSpec(LieType(Family::A, 3), {4}));
  CHECK(dec.theta.degenerate());
  CHECK(dec.dim_m() == 0);
  CHECK(dec.dim_k() == 6);
  auto dec2 = build_decomposition(ThetaSpec(LieType(Family::C, 3), {3}, true));
  CHECK(dec2.theta.degenerate());
  CHECK(dec2.dim_m() == 0);
}

TEST_CASE("float isotropy samples include the half-turn rotation") {
  // A3 single-root flag: the sample list contains the element with
  // r = t = u = -s = 1/sqrt(2) and v = z = 1 in the leading 2-block.
  const ThetaSpec th(LieType(Family::A, 3), {2, 1, 1});
  const double irt2 = 1.0 / std::sqrt(2.0);
  MatD expect = MatD::identity(4);
  expect(0, 0) = irt2; expect(0, 1) = -irt2;
  expect(1, 0) = irt2; expect(1, 1) = irt2;
  bool found = false;
  for (const auto& k : isotropy_samples_float(th)) {
    double diff = 0;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) diff = std::max(diff, std::fabs(k(i, j) - expect(i, j)));
    found = found || diff < 1e-12;
  }
  CHECK(found);
}

TEST_CASE("isotropy action matrix reproduces the documented rotation block") {
  // A3, single-root case: the rotation r=t=u=-s=1/sqrt(2), v=z=1 acts on the
  // adapted basis (w43, w31, w32, w42, w41) as
  //   diag(vz, [[vr, vs],[vt, vu]], [[zu, zt],[zs, zr]]).
  const LieType t(Family::A, 3);
  auto dec = build_decomposition(ThetaSpec(t, {2, 1, 1}));
  auto ws = make_workspace<double>(dec);
  const double irt2 = 1.0 / std::sqrt(2.0);
  const double r = irt2, s = -irt2, tt = irt2, u = irt2, v = 1.0, z = 1.0;
  MatD k(4, 4);
  k(0, 0) = r; k(0, 1) = s; k(1, 0) = tt; k(1, 1) = u; k(2, 2) = v; k(3, 3) = z;
  MatD ad = ws.ad_group_matrix(k);
  MatD expected(5, 5);
  expected(0, 0) = v * z;
  expected(1, 1) = v * r; expected(1, 2) = v * s;
  expected(2, 1) = v * tt; expected(2, 2) = v * u;
  expected(3, 3) = z * u; expected(3, 4) = z * tt;
  expected(4, 3) = z * s; expected(4, 4) = z * r;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(ad(i, j) == Catch::Approx(expected(i, j)).margin(1e-12));
}
