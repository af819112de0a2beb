#include <catch2/catch_amalgamated.hpp>

#include "gorbit/go.hpp"

using namespace gorbit;

namespace {

struct Setup {
  Decomposition dec;
  Workspace<Rat> ws;

  explicit Setup(const ThetaSpec& th) : dec(build_decomposition(th)), ws(make_workspace<Rat>(dec)) {}
};

MetricParams mp(const ThetaSpec& th, std::initializer_list<std::pair<const char*, Rat>> kv) {
  MetricParams p;
  p.case_name = metric_case_name(metric_case(th));
  for (const auto& [k, v] : kv) p.values.emplace_back(k, PVal::of(v));
  return p;
}

std::vector<Rat> coords_by_name(const Decomposition& dec,
                                std::initializer_list<std::pair<const char*, Rat>> kv) {
  std::vector<Rat> x(dec.dim_m(), Rat(0));
  for (const auto& [name, v] : kv) {
    bool found = false;
    for (std::size_t i = 0; i < dec.m_names.size(); ++i)
      if (dec.m_names[i] == name) {
        x[i] = v;
        found = true;
      }
    REQUIRE(found);
  }
  return x;
}

}  // namespace

TEST_CASE("normal metrics have zero residual with zero witness") {
  Setup s(ThetaSpec(LieType(Family::B, 5), {2, 3}, false));
  auto op = build_metric(s.dec, normal_metric_params(s.dec.theta, Rat(5, 2)));
  Rng rng(3);
  for (int iter = 0; iter < 10; ++iter) {
    std::vector<Rat> x(s.ws.mdim);
    for (auto& c : x) c = Rat(rng.uniform(-3, 3));
    auto r = geodesic_residual(s.ws, op.mat_q, x);
    CHECK(r.residual_sq == Rat(0));
    CHECK(r.k_component_sq == Rat(0));
    for (const auto& z : r.witness_z) CHECK(z.is_zero());
  }
}

TEST_CASE("the pinned single-root rank-3 instance solves with the documented multiplier") {
  Setup s(ThetaSpec(LieType(Family::A, 3), {2, 1, 1}));
  auto op = build_metric(s.dec, mp(s.dec.theta, {{"mu_1", Rat(3)},
                                                 {"mu_2_1", Rat(4)},
                                                 {"mu_2_2", Rat(4)},
                                                 {"b", Rat(2)}}));
  auto x = coords_by_name(s.dec, {{"w(4,3)", Rat(1)}, {"w(3,1)", Rat(1)}});
  auto r = geodesic_residual(s.ws, op.mat_q, x);
  CHECK(r.residual_sq == Rat(0));
  REQUIRE(r.witness_z.size() == 1);  // isotropy algebra is spanned by w(2,1)
  CHECK(r.witness_z[0] == Rat(1, 2));
}

TEST_CASE("a rank-2 diagonal metric with unequal scalars has the expected residual") {
  Setup s(ThetaSpec(LieType(Family::A, 2), {1, 1, 1}));
  MetricParams p = mp(s.dec.theta, {{"mu_2_1", Rat(1)}, {"mu_3_1", Rat(1)}, {"mu_3_2", Rat(2)}});
  auto op = build_metric(s.dec, p);
  auto x = coords_by_name(s.dec, {{"w(2,1)", Rat(1)}, {"w(3,2)", Rat(1)}});
  auto r = geodesic_residual(s.ws, op.mat_q, x);
  // [X, AX] = -w(3,1), whose squared norm is 2(l-1) = 2; no isotropy algebra.
  CHECK(r.residual_sq == Rat(2));
}

TEST_CASE("go family constructors") {
  SECTION("B without the short root") {
    ThetaSpec th(LieType(Family::B, 5), {2, 3}, false);
    auto p = go_family(th, {{"lambda", Rat(2)}, {"b", Rat(1)}});
    CHECK(p.get("mu_1").r == Rat(3));
    CHECK(p.get("mu_2").r == Rat(3));
    CHECK(p.get("gamma_1").r == Rat(3, 2));
    CHECK(p.get("lambda1_2_1").r == Rat(2));
    CHECK(p.get("b_2_1").r == Rat(1));
    CHECK(is_go_classified(th, p) == std::optional<bool>(true));
  }
  SECTION("D with zero coupling collapses to the in-block scalar") {
    ThetaSpec th(LieType(Family::D, 5), {2, 3}, false);
    auto p = go_family(th, {{"lambda", Rat(2)}, {"b", Rat(0)}});
    CHECK(p.get("gamma_1").r == Rat(2));
    CHECK(p.get("gamma_2").r == Rat(2));
  }
  SECTION("the single-root rank-3 coupling") {
    ThetaSpec th(LieType(Family::A, 3), {2, 1, 1});
    auto p = go_family(th, {{"mu_1", Rat(3)}, {"mu_2", Rat(4)}});
    CHECK(p.get("b").r == Rat(2));
    CHECK_THROWS_AS(go_family(th, {{"mu_1", Rat(1)}, {"mu_2", Rat(2)}}), std::invalid_argument);
    CHECK_THROWS_AS(go_family(th, {{"mu_1", Rat(4)}, {"mu_2", Rat(3)}}), std::invalid_argument);
  }
  SECTION("infeasible values are rejected downstream by positivity") {
    ThetaSpec th(LieType(Family::B, 5), {2, 3}, false);
    auto p = go_family(th, {{"lambda", Rat(1)}, {"b", Rat(2)}});  // gamma = -3 < 0
    auto dec = build_decomposition(th);
    CHECK_THROWS(build_metric(dec, p));
  }
}

TEST_CASE("B-family instances: the solved family is geodesic-orbit, violations are not") {
  for (auto parts : {std::vector<int>{2, 3}, {1, 2, 2}}) {
    ThetaSpec th(LieType(Family::B, 5), parts, false);
    Setup s(th);
    auto p = go_family(th, {{"lambda", Rat(2)}, {"b", Rat(1)}});
    auto op = build_metric(s.dec, p);
    auto rep = is_go_numeric(s.ws, op.mat_q, 16, 5);
    INFO("partition " << th.partition_str());
    CHECK(rep.verdict == Verdict::GO);
    CHECK(rep.max_residual_sq == Rat(0));
    CHECK(is_go_classified(th, p) == std::optional<bool>(true));

    // Perturb gamma: not geodesic-orbit, witness among the pairwise sums.
    MetricParams bad = p;
    std::string gamma_name;
    for (const auto& ps : param_schema(th).params)
      if (ps.name.rfind("gamma_", 0) == 0) { gamma_name = ps.name; break; }
    REQUIRE(!gamma_name.empty());
    bad.set(gamma_name, PVal::of(Rat(2)));
    auto opb = build_metric(s.dec, bad);
    auto repb = is_go_numeric(s.ws, opb.mat_q, 16, 5);
    CHECK(repb.verdict == Verdict::NOT_GO);
    REQUIRE(repb.failing_witness.has_value());
    CHECK(is_go_classified(th, bad) == std::optional<bool>(false));
  }
}

TEST_CASE("B-family with the short root: harmonic-mean constraint") {
  ThetaSpec th(LieType(Family::B, 5), {2, 2, 1}, true);
  Setup s(th);
  auto p = go_family(th, {{"lambda", Rat(2)}, {"b", Rat(1)}});
  CHECK(p.get("mu_1").r == Rat(3));
  CHECK(p.get("rho_1").r == Rat(1));
  CHECK(p.get("gamma_1").r == Rat(3, 2));
  auto op = build_metric(s.dec, p);
  auto rep = is_go_numeric(s.ws, op.mat_q, 16, 5);
  CHECK(rep.verdict == Verdict::GO);
  CHECK(is_go_classified(th, p) == std::optional<bool>(true));

  MetricParams bad = p;
  bad.set("gamma_1", PVal::of(Rat(1)));
  CHECK(is_go_classified(th, bad) == std::optional<bool>(false));
  auto opb = build_metric(s.dec, bad);
  CHECK(is_go_numeric(s.ws, opb.mat_q, 16, 5).verdict == Verdict::NOT_GO);
}

TEST_CASE("A3 special families") {
  SECTION("empty set: common scalar with the alternating coupling pattern") {
    ThetaSpec th(LieType(Family::A, 3), {1, 1, 1, 1});
    Setup s(th);
    auto p = go_family(th, {{"mu", Rat(2)}, {"b", Rat(1)}});
    CHECK(p.get("b_2").r == Rat(-1));
    auto op = build_metric(s.dec, p);
    CHECK(is_go_numeric(s.ws, op.mat_q, 16, 5).verdict == Verdict::GO);

    // Breaking the sign pattern destroys the property.
    MetricParams bad = p;
    bad.set("b_2", PVal::of(Rat(1)));
    auto opb = build_metric(s.dec, bad);
    CHECK(is_go_numeric(s.ws, opb.mat_q, 16, 5).verdict == Verdict::NOT_GO);
    CHECK(is_go_classified(th, bad) == std::optional<bool>(false));
  }
  SECTION("single root: the square-root coupling, exact") {
    ThetaSpec th(LieType(Family::A, 3), {2, 1, 1});
    Setup s(th);
    auto p = go_family(th, {{"mu_1", Rat(3)}, {"mu_2", Rat(4)}});
    auto op = build_metric(s.dec, p);
    auto rep = is_go_numeric(s.ws, op.mat_q, 16, 5);
    CHECK(rep.verdict == Verdict::GO);
    CHECK(rep.max_residual_sq == Rat(0));
    CHECK(is_go_classified(th, p) == std::optional<bool>(true));
  }
  SECTION("both 2-blocks: every invariant metric works") {
    ThetaSpec th(LieType(Family::A, 3), {2, 2});
    Setup s(th);
    auto p = mp(th, {{"mu_1", Rat(2)}, {"mu_2", Rat(7)}});
    auto op = build_metric(s.dec, p);
    CHECK(is_go_numeric(s.ws, op.mat_q, 16, 5).verdict == Verdict::GO);
    CHECK(is_go_classified(th, p) == std::optional<bool>(true));
  }
  SECTION("the documented witness vector reproduces the constraint") {
    ThetaSpec th(LieType(Family::A, 3), {2, 1, 1});
    Setup s(th);
    auto x = coords_by_name(s.dec, {{"w(4,3)", Rat(1)}, {"w(3,2)", Rat(1)}, {"w(4,1)", Rat(2)}});
    // Coupling satisfying b^2 = mu2 (mu2 - mu1): solvable.
    auto good = build_metric(s.dec, mp(th, {{"mu_1", Rat(3)},
                                            {"mu_2_1", Rat(4)},
                                            {"mu_2_2", Rat(4)},
                                            {"b", Rat(2)}}));
    CHECK(geodesic_residual(s.ws, good.mat_q, x).residual_sq == Rat(0));
    // Coupling off the constraint: unsolvable on the same vector.
    auto badm = build_metric(s.dec, mp(th, {{"mu_1", Rat(3)},
                                            {"mu_2_1", Rat(4)},
                                            {"mu_2_2", Rat(4)},
                                            {"b", Rat(1)}}));
    CHECK(geodesic_residual(s.ws, badm.mat_q, x).residual_sq > Rat(0));
  }
}

TEST_CASE("C-family center-block family") {
  ThetaSpec th(LieType(Family::C, 3), {1, 1, 1}, false);
  Setup s(th);
  auto p = mp(th, {{"mu0_1", Rat(2)}, {"mu0_2", Rat(2)}, {"mu0_3", Rat(2)},
                   {"a_2_1", Rat(1)}, {"a_3_1", Rat(1)}, {"a_3_2", Rat(1)},
                   {"mu1_2_1", Rat(1)}, {"mu2_2_1", Rat(1)}, {"b_2_1", Rat(0)},
                   {"mu1_3_1", Rat(1)}, {"mu2_3_1", Rat(1)}, {"b_3_1", Rat(0)},
                   {"mu1_3_2", Rat(1)}, {"mu2_3_2", Rat(1)}, {"b_3_2", Rat(0)}});
  auto op = build_metric(s.dec, p);
  auto rep = is_go_numeric(s.ws, op.mat_q, 16, 5);
  CHECK(rep.verdict == Verdict::GO);
  CHECK(rep.max_residual_sq == Rat(0));
  CHECK(is_go_classified(th, p) == std::optional<bool>(true));
  CHECK(params_to_json(go_family(th, {{"mu", Rat(1)}, {"c", Rat(1)}})) == params_to_json(p));

  // Decoupling the center while keeping distinct scalars is not enough.
  MetricParams bad = p;
  for (const char* a : {"a_2_1", "a_3_1", "a_3_2"}) bad.set(a, PVal::of(Rat(0)));
  auto opb = build_metric(s.dec, bad);
  CHECK(is_go_numeric(s.ws, opb.mat_q, 16, 5).verdict == Verdict::NOT_GO);
  CHECK(is_go_classified(th, bad) == std::optional<bool>(false));
}

TEST_CASE("D-family instances") {
  SECTION("no last root: coupled family") {
    ThetaSpec th(LieType(Family::D, 5), {2, 3}, false);
    Setup s(th);
    auto p = go_family(th, {{"lambda", Rat(2)}, {"b", Rat(1)}});
    CHECK(p.get("gamma_1").r == Rat(3, 2));
    auto op = build_metric(s.dec, p);
    CHECK(is_go_numeric(s.ws, op.mat_q, 16, 5).verdict == Verdict::GO);
  }
  SECTION("both final roots: only the normal metric") {
    ThetaSpec th(LieType(Family::D, 5), {1, 2, 2}, true);
    Setup s(th);
    auto normal = go_family(th, {{"lambda", Rat(2)}});
    auto op = build_metric(s.dec, normal);
    CHECK(is_go_numeric(s.ws, op.mat_q, 16, 5).verdict == Verdict::GO);
    MetricParams bad = normal;
    bad.set("lambda_3_1", PVal::of(Rat(3)));
    auto opb = build_metric(s.dec, bad);
    CHECK(is_go_numeric(s.ws, opb.mat_q, 16, 5).verdict == Verdict::NOT_GO);
    CHECK(is_go_classified(th, bad) == std::optional<bool>(false));
  }
  SECTION("last root alone with the forced singleton block") {
    ThetaSpec th(LieType(Family::D, 5), {2, 2, 1}, true);
    Setup s(th);
    auto p = go_family(th, {{"lambda", Rat(2)}, {"b", Rat(1)}});
    auto op = build_metric(s.dec, p);
    auto rep = is_go_numeric(s.ws, op.mat_q, 16, 5);
    CHECK(rep.verdict == Verdict::GO);
    CHECK(rep.max_residual_sq == Rat(0));
    CHECK(is_go_classified(th, p) == std::optional<bool>(true));
  }
}

TEST_CASE("scale invariance of residuals and verdicts") {
  ThetaSpec th(LieType(Family::B, 5), {2, 3}, false);
  Setup s(th);
  auto p = random_invariant_metric(s.dec, 21);
  auto op = build_metric(s.dec, p);
  const Rat c(7, 3);
  MetricParams scaled = p;
  for (auto& [k, v] : scaled.values) v = PVal::of(v.r * c);
  auto opc = build_metric(s.dec, scaled);
  Rng rng(9);
  for (int iter = 0; iter < 6; ++iter) {
    std::vector<Rat> x(s.ws.mdim);
    for (auto& e : x) e = Rat(rng.uniform(-2, 2));
    auto r1 = geodesic_residual(s.ws, op.mat_q, x);
    auto r2 = geodesic_residual(s.ws, opc.mat_q, x);
    CHECK(r2.residual_sq == c * c * r1.residual_sq);
  }
  CHECK(is_go_numeric(s.ws, op.mat_q, 8, 11).verdict ==
        is_go_numeric(s.ws, opc.mat_q, 8, 11).verdict);
  CHECK(is_go_classified(th, p) == is_go_classified(th, scaled));
}

TEST_CASE("float mode flags violations above tolerance") {
  ThetaSpec th(LieType(Family::A, 3), {2, 1, 1});
  auto dec = build_decomposition(th);
  auto ws = make_workspace<double>(dec);
  MetricParams p;
  p.case_name = "A3_single";
  p.values.emplace_back("mu_1", PVal::of(3.0));
  p.values.emplace_back("mu_2_1", PVal::of(4.0));
  p.values.emplace_back("mu_2_2", PVal::of(4.0));
  p.values.emplace_back("b", PVal::of(2.01));
  auto op = build_metric(dec, p, /*exact_mode=*/false);
  auto rep = is_go_numeric(ws, op.mat_d, 16, 5);
  CHECK(rep.verdict == Verdict::NOT_GO);
  REQUIRE(rep.failing_witness.has_value());
  CHECK(std::sqrt(rep.failing_witness->residual_sq) > 1e-6);

  p.set("b", PVal::of(2.0));
  auto op2 = build_metric(dec, p, false);
  CHECK(is_go_numeric(ws, op2.mat_d, 16, 5).verdict == Verdict::GO);
}

TEST_CASE("classification matches numeric verdicts on random draws") {
  std::vector<ThetaSpec> flags;
  flags.emplace_back(LieType(Family::A, 4), std::vector<int>{2, 1, 2});
  flags.emplace_back(LieType(Family::C, 3), std::vector<int>{1, 1, 1}, false);
  flags.emplace_back(LieType(Family::B, 5), std::vector<int>{2, 3}, false);
  std::uint64_t seed = 3000;
  for (const auto& th : flags) {
    Setup s(th);
    for (int draw = 0; draw < 12; ++draw) {
      auto p = random_invariant_metric(s.dec, seed++);
      auto op = build_metric(s.dec, p);
      auto rep = full_go_report(th, p, s.ws, op.mat_q, 16, seed++);
      INFO(th.type.str() << " " << th.partition_str() << " draw " << draw);
      REQUIRE(rep.classified.has_value());
      CHECK(rep.agreement);
    }
  }
}

TEST_CASE("obstruction scan") {
  SECTION("distinct scalars on coupled blocks force equalities") {
    ThetaSpec th(LieType(Family::A, 4), {1, 1, 1, 1, 1});
    Setup s(th);
    MetricParams p = normal_metric_params(th, Rat(2));
    p.set("mu_2_1", PVal::of(Rat(2)));
    p.set("mu_3_1", PVal::of(Rat(3)));  // differs
    auto op = build_metric(s.dec, p);
    auto scan = obstruction_scan(s.ws, op.mat_q);
    bool found = false;
    for (const auto& f : scan.facts) {
      if (!f.violated) continue;
      const std::string& la = scan.units[f.a].label;
      const std::string& lb = scan.units[f.b].label;
      if ((la.find("M21") == 0 && lb.find("M31") == 0) ||
          (la.find("M31") == 0 && lb.find("M21") == 0))
        found = true;
    }
    CHECK(found);
    // Every violated fact is confirmed by the sampling verdict.
    CHECK(is_go_numeric(s.ws, op.mat_q, 16, 5).verdict == Verdict::NOT_GO);
  }
  SECTION("normal metrics emit nothing") {
    ThetaSpec th(LieType(Family::B, 5), {2, 3}, false);
    Setup s(th);
    auto op = build_metric(s.dec, normal_metric_params(th));
    auto scan = obstruction_scan(s.ws, op.mat_q);
    CHECK(scan.facts.empty());
  }
  SECTION("in-block scalar off the common value is obstructed") {
    ThetaSpec th(LieType(Family::C, 3), {2, 1}, false);
    Setup s(th);
    // mu^(1) on the in-block summand differs from the pair scalar mu.
    auto p = go_family(th, {{"mu", Rat(1)}, {"c", Rat(0)}});
    p.set("mu_1", PVal::of(Rat(3)));
    auto op = build_metric(s.dec, p);
    auto scan = obstruction_scan(s.ws, op.mat_q);
    bool found = false;
    for (const auto& f : scan.facts) found = found || f.violated;
    CHECK(found);
    CHECK(is_go_numeric(s.ws, op.mat_q, 16, 5).verdict == Verdict::NOT_GO);
  }
}

TEST_CASE("the isotropy component of [X, AX] vanishes for invariant metrics") {
  ThetaSpec th(LieType(Family::B, 5), {2, 2, 1}, true);
  Setup s(th);
  auto p = random_invariant_metric(s.dec, 99);
  auto op = build_metric(s.dec, p);
  Rng rng(13);
  for (int iter = 0; iter < 8; ++iter) {
    std::vector<Rat> x(s.ws.mdim);
    for (auto& c : x) c = Rat(rng.uniform(-3, 3));
    auto r = geodesic_residual(s.ws, op.mat_q, x);
    CHECK(r.k_component_sq == Rat(0));
  }
}

TEST_CASE("float-mode obstruction scan matches the exact facts") {
  ThetaSpec th(LieType(Family::A, 4), {1, 1, 1, 1, 1});
  auto dec = build_decomposition(th);
  auto wsq = make_workspace<Rat>(dec);
  auto wsd = make_workspace<double>(dec);
  MetricParams p = normal_metric_params(th, Rat(2));
  p.set("mu_3_1", PVal::of(Rat(3)));
  auto op = build_metric(dec, p);
  auto exact_scan = obstruction_scan(wsq, op.mat_q);
  auto float_scan = obstruction_scan(wsd, to_double(op.mat_q));
  CHECK(exact_scan.complete);
  CHECK(float_scan.complete);
  int exact_violated = 0, float_violated = 0;
  for (const auto& f : exact_scan.facts) exact_violated += f.violated ? 1 : 0;
  for (const auto& f : float_scan.facts) float_violated += f.violated ? 1 : 0;
  CHECK(exact_violated > 0);
  CHECK(exact_violated == float_violated);
}

TEST_CASE("float mode accepts the solved families within tolerance") {
  ThetaSpec th(LieType(Family::D, 5), {2, 2, 1}, true);
  auto dec = build_decomposition(th);
  auto wsd = make_workspace<double>(dec);
  auto p = go_family(th, {{"lambda", Rat(2)}, {"b", Rat(1)}});
  auto op = build_metric(dec, p, /*exact_mode=*/false);
  auto rep = is_go_numeric(wsd, op.mat_d, 16, 5);
  CHECK(rep.verdict == Verdict::GO);
  CHECK(check_invariance(wsd, op.mat_d, 2, 7).ok);
}

TEST_CASE("full reports carry certification and agreement") {
  ThetaSpec th(LieType(Family::B, 5), {2, 3}, false);
  Setup s(th);
  auto p = go_family(th, {{"lambda", Rat(2)}, {"b", Rat(1)}});
  auto op = build_metric(s.dec, p);
  auto rep = full_go_report(th, p, s.ws, op.mat_q, 16, 5);
  CHECK(rep.verdict == Verdict::GO);
  CHECK(rep.certified);
  CHECK(rep.agreement);
  auto j = report_to_json(rep, s.ws);
  CHECK(j["verdict"] == "GO");
  CHECK(j["certificate"] == "certified");
  CHECK(j["max_residual_sq"] == "0");

  // The special rank-4 C flags have no closed form: sampled-only certificates.
  ThetaSpec thc(LieType(Family::C, 4), {2, 1, 1}, false);
  Setup sc(thc);
  auto pc = random_invariant_metric(sc.dec, 5);
  auto opc = build_metric(sc.dec, pc);
  auto repc = full_go_report(thc, pc, sc.ws, opc.mat_q, 16, 7);
  CHECK(!repc.classified.has_value());
  CHECK(!repc.certified);
  CHECK(repc.verdict != Verdict::UNDECIDED);  // exact mode decides
}
