// Command-line front end: enumerate flags, dump decompositions and metric
// schemas, check a metric for the geodesic-orbit property, and survey the
// geodesic-orbit families of a whole family/rank.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "gorbit/go.hpp"
#include "gorbit/version.hpp"

using namespace gorbit;
using nlohmann::ordered_json;

namespace {

struct RunConfig {
  std::string family;
  int rank = 0;
  std::vector<int> partition;
  bool alpha_l = false;
  bool alpha_l1 = false;
  bool alpha_l1_set = false;
  std::string mode = "exact";
  double tol = 1e-6;
  int samples = 64;
  std::uint64_t seed = 0;
  std::string params_path, out_path;
  std::string format = "text";

  ordered_json echo() const {
    ordered_json j;
    j["family"] = family;
    j["rank"] = rank;
    if (!partition.empty()) j["partition"] = partition;
    j["alpha_l"] = alpha_l;
    if (alpha_l1_set) j["alpha_l_minus_1"] = alpha_l1;
    j["mode"] = mode;
    j["tol"] = tol;
    j["samples"] = samples;
    j["seed"] = seed;
    j["format"] = format;
    return j;
  }
};

void write_out(const RunConfig& cfg, const std::string& text) {
  if (cfg.out_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    std::ofstream out(cfg.out_path);
    out << text;
  }
}

LieType make_type(const RunConfig& cfg) {
  if (cfg.family.size() != 1) throw CLI::ValidationError("--family expects one of A, B, C, D");
  return LieType(family_from_char(cfg.family[0]), cfg.rank);
}

ThetaSpec make_theta(const RunConfig& cfg) {
  const LieType t = make_type(cfg);
  if (cfg.partition.empty()) throw CLI::ValidationError("--partition is required");
  ThetaSpec th(t, cfg.partition, cfg.alpha_l);
  if (cfg.alpha_l1_set) {
    if (t.family != Family::D)
      throw CLI::ValidationError("--alpha-l-1 applies to family D only");
    if (th.alpha_lminus1 != cfg.alpha_l1)
      throw CLI::ValidationError(
          "--alpha-l-1 contradicts the partition (the next-to-last root lies in the set iff the "
          "last part is >= 2)");
  }
  return th;
}

std::string theta_key(const ThetaSpec& th) {
  return th.type.str() + " " + th.partition_str() + " " + th.root_set_str();
}

ordered_json decomposition_json(const Decomposition& dec) {
  ordered_json j;
  j["family"] = std::string(1, family_char(dec.theta.type.family));
  j["rank"] = dec.theta.type.rank;
  j["partition"] = dec.theta.partition;
  j["alpha_l"] = dec.theta.alpha_l;
  if (dec.theta.type.family == Family::D) j["alpha_l_minus_1"] = dec.theta.alpha_lminus1;
  j["theta"] = dec.theta.root_set_str();
  j["degenerate"] = dec.theta.degenerate();
  j["special_case"] = dec.special_case;
  j["dim_k_theta"] = dec.dim_k();
  j["dim_m_theta"] = dec.dim_m();
  ordered_json subs = ordered_json::array();
  for (const auto& s : dec.submodules)
    subs.push_back(ordered_json{{"name", s.name},
                                {"dim", s.dim},
                                {"class", dec.classes[s.cls].name},
                                {"basis", std::vector<std::string>(
                                              dec.m_names.begin() + s.begin,
                                              dec.m_names.begin() + s.begin + s.dim)}});
  j["submodules"] = subs;
  ordered_json classes = ordered_json::array();
  for (const auto& c : dec.classes) {
    std::vector<std::string> members;
    for (int id : c.submodule_ids) members.push_back(dec.submodules[id].name);
    classes.push_back(ordered_json{{"name", c.name}, {"dim", c.dim}, {"members", members}});
  }
  j["isotypical_summands"] = classes;
  j["k_theta_basis"] = dec.k_names;
  return j;
}

ordered_json schema_json(const ThetaSpec& th) {
  const Schema sch = param_schema(th);
  ordered_json j;
  j["case"] = metric_case_name(sch.mcase);
  j["parameter_count"] = sch.params.size();
  ordered_json ps = ordered_json::array();
  for (const auto& p : sch.params)
    ps.push_back(ordered_json{{"name", p.name}, {"constraint", p.positive ? "positive" : "free"}});
  j["parameters"] = ps;
  return j;
}

// ---- list -----------------------------------------------------------------

int cmd_list(const RunConfig& cfg) {
  const LieType t = make_type(cfg);
  auto thetas = enumerate_thetas(t);
  ordered_json rows = ordered_json::array();
  int proper = 0;
  for (const auto& th : thetas) {
    auto dec = build_decomposition(th);
    const Schema sch = param_schema(th);
    if (!th.degenerate()) ++proper;
    ordered_json row;
    row["partition"] = th.partition;
    row["alpha_l"] = th.alpha_l;
    row["theta"] = th.root_set_str();
    row["degenerate"] = th.degenerate();
    row["special"] = dec.special_case;
    row["dim_k_theta"] = dec.dim_k();
    row["dim_m_theta"] = dec.dim_m();
    row["submodules"] = dec.submodules.size();
    row["summands"] = dec.classes.size();
    row["case"] = metric_case_name(sch.mcase);
    row["parameters"] = sch.params.size();
    rows.push_back(row);
  }
  if (cfg.format == "json") {
    ordered_json j;
    j["version"] = kVersion;
    j["config"] = cfg.echo();
    j["proper_flags"] = proper;
    j["flags"] = rows;
    write_out(cfg, j.dump(2) + "\n");
  } else if (cfg.format == "csv") {
    std::ostringstream os;
    os << "partition,alpha_l,theta,degenerate,special,dim_k_theta,dim_m_theta,submodules,"
          "summands,case,parameters\n";
    for (const auto& r : rows) {
      std::string parts;
      for (const auto& v : r["partition"]) parts += (parts.empty() ? "" : " ") + v.dump();
      os << "(" << parts << ")," << r["alpha_l"] << "," << r["theta"].get<std::string>() << ","
         << r["degenerate"] << "," << r["special"] << "," << r["dim_k_theta"] << ","
         << r["dim_m_theta"] << "," << r["submodules"] << "," << r["summands"] << ","
         << r["case"].get<std::string>() << "," << r["parameters"] << "\n";
    }
    write_out(cfg, os.str());
  } else {
    std::ostringstream os;
    os << kVersion << "  " << t.str() << ": " << proper << " proper flags (" << rows.size()
       << " encodings including the full set)\n";
    for (const auto& r : rows) {
      std::string parts;
      for (const auto& v : r["partition"]) parts += (parts.empty() ? "" : ",") + v.dump();
      os << "  (" << parts << ")" << (r["alpha_l"].get<bool>() ? "+al" : "") << "  theta="
         << r["theta"].get<std::string>() << "  dim k_theta=" << r["dim_k_theta"]
         << " dim m_theta=" << r["dim_m_theta"] << "  summands=" << r["summands"] << "  case="
         << r["case"].get<std::string>() << "  params=" << r["parameters"];
      if (r["degenerate"].get<bool>()) os << "  [degenerate point]";
      if (r["special"].get<bool>()) os << "  [special]";
      os << "\n";
    }
    write_out(cfg, os.str());
  }
  return 0;
}

// ---- decompose / schema -----------------------------------------------------

int cmd_decompose(const RunConfig& cfg) {
  const ThetaSpec th = make_theta(cfg);
  auto dec = build_decomposition(th);
  ordered_json j = decomposition_json(dec);
  j["version"] = kVersion;
  j["config"] = cfg.echo();
  if (cfg.format == "text") {
    std::ostringstream os;
    os << theta_key(th) << (th.degenerate() ? "  [degenerate point]" : "") << "\n"
       << "  dim k_theta = " << dec.dim_k() << ", dim m_theta = " << dec.dim_m() << "\n";
    for (const auto& c : dec.classes) {
      os << "  summand " << c.name << " (dim " << c.dim << "): ";
      for (std::size_t i = 0; i < c.submodule_ids.size(); ++i)
        os << (i ? " + " : "") << dec.submodules[c.submodule_ids[i]].name;
      os << "\n";
    }
    write_out(cfg, os.str());
  } else {
    write_out(cfg, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_schema(const RunConfig& cfg) {
  const ThetaSpec th = make_theta(cfg);
  ordered_json j = schema_json(th);
  if (cfg.format == "text") {
    std::ostringstream os;
    os << theta_key(th) << "  case=" << j["case"].get<std::string>()
       << "  parameters=" << j["parameter_count"] << "\n";
    for (const auto& p : j["parameters"])
      os << "  " << p["name"].get<std::string>() << "  (" << p["constraint"].get<std::string>()
         << ")\n";
    write_out(cfg, os.str());
  } else {
    j["version"] = kVersion;
    j["config"] = cfg.echo();
    write_out(cfg, j.dump(2) + "\n");
  }
  return 0;
}

// ---- check ------------------------------------------------------------------

template <class T>
int run_check(const RunConfig& cfg, const ThetaSpec& th, const MetricParams& params) {
  auto dec = build_decomposition(th);
  auto ws = make_workspace<T>(dec);
  MetricOperator op = build_metric(dec, params, scalar_traits<T>::is_exact);
  const Matrix<T>& a = op.template mat<T>();

  auto inv = check_invariance(ws, a, 3, cfg.seed ^ 0xabcdefULL, cfg.tol * 1e-3);
  GoTolerance tol{cfg.tol, cfg.tol * 1e-3};
  auto rep = full_go_report(th, params, ws, a, cfg.samples, cfg.seed, tol);

  ordered_json j;
  j["version"] = kVersion;
  j["config"] = cfg.echo();
  j["flag"] = theta_key(th);
  j["params"] = params_to_json(params);
  j["invariance"] =
      ordered_json{{"ok", inv.ok}, {"max_residual", inv.max_residual}, {"witness", inv.witness}};
  j["report"] = report_to_json(rep, ws);

  int code;
  if (rep.classified.has_value() && !rep.agreement)
    code = 2;
  else if (rep.verdict == Verdict::GO)
    code = 0;
  else if (rep.verdict == Verdict::NOT_GO)
    code = 1;
  else
    code = 2;

  if (cfg.format == "text") {
    std::ostringstream os;
    os << kVersion << "  " << theta_key(th) << "  (mode " << cfg.mode << ", seed "
       << cfg.seed << ")\n"
       << "  invariance pre-check: " << (inv.ok ? "ok" : ("FAILED at " + inv.witness)) << "\n"
       << "  verdict: " << verdict_name(rep.verdict) << "  ("
       << j["report"]["certificate"].get<std::string>() << ")\n"
       << "  classified: " << j["report"]["classified_verdict"].dump()
       << "  agreement: " << (rep.agreement ? "yes" : "NO") << "\n"
       << "  samples evaluated: " << rep.samples_evaluated << "\n";
    if (rep.failing_witness.has_value()) {
      os << "  witness X: " << j["report"]["failing_witness"]["X"].dump() << "\n";
    }
    if (rep.verdict == Verdict::UNDECIDED)
      os << "  recommendation: re-run in exact mode\n";
    os << "  exit code: " << code << "\n";
    write_out(cfg, os.str());
  } else {
    write_out(cfg, j.dump(2) + "\n");
  }
  return code;
}

int cmd_check(const RunConfig& cfg) {
  const ThetaSpec th = make_theta(cfg);
  std::ifstream in(cfg.params_path);
  if (!in) throw CLI::ValidationError("cannot open params file '" + cfg.params_path + "'");
  ordered_json pj = ordered_json::parse(in);
  MetricParams params = params_from_json(pj);
  if (cfg.mode == "exact") return run_check<Rat>(cfg, th, params);
  return run_check<double>(cfg, th, params);
}

// ---- classify ----------------------------------------------------------------

std::map<std::string, Rat> canonical_free_values(const std::vector<std::string>& names) {
  std::map<std::string, Rat> vals;
  for (const auto& n : names) {
    if (n == "lambda") vals[n] = Rat(2);
    else if (n == "b") vals[n] = Rat(1);
    else if (n == "mu") vals[n] = Rat(2);
    else if (n == "gamma") vals[n] = Rat(3);
    else if (n == "rho") vals[n] = Rat(1);
    else if (n == "c") vals[n] = Rat(1);
    else if (n == "mu_1") vals[n] = Rat(3);
    else if (n == "mu_2") vals[n] = Rat(4);
    else vals[n] = Rat(2);
  }
  return vals;
}

int cmd_classify(const RunConfig& cfg) {
  const LieType t = make_type(cfg);
  ordered_json rows = ordered_json::array();
  std::uint64_t salt = 0;
  for (const auto& th : enumerate_thetas(t)) {
    if (th.degenerate()) continue;
    ++salt;
    auto dec = build_decomposition(th);
    auto ws = make_workspace<Rat>(dec);
    const auto free_names = go_family_free_names(th);
    const bool closed_form =
        metric_case(th) != MetricCase::C4Empty && metric_case(th) != MetricCase::C4Single;
    ordered_json row;
    row["partition"] = th.partition;
    row["alpha_l"] = th.alpha_l;
    row["theta"] = th.root_set_str();
    row["case"] = metric_case_name(metric_case(th));
    row["closed_form"] = closed_form;
    if (closed_form) {
      row["non_normal_go_exists"] = free_names.size() >= 2;
      row["go_family_free_parameters"] = free_names;
      // Spot check: one canonical instance of the family, verified by sampling.
      auto params = go_family(th, canonical_free_values(free_names));
      auto op = build_metric(dec, params);
      auto rep = full_go_report(th, params, ws, op.mat_q, cfg.samples, cfg.seed + salt);
      row["spot_verdict"] = verdict_name(rep.verdict);
      row["spot_agreement"] = rep.agreement;
      // Obstruction scan on a perturbed (generically non-g.o.) variant.
      MetricParams broken = params;
      if (!params.values.empty()) {
        const auto& [name, v] = params.values.front();
        broken.set(name, PVal::of(v.r * Rat(2)));
      }
      int violated = 0;
      try {
        auto opb = build_metric(dec, broken);
        auto scan = obstruction_scan(ws, opb.mat_q);
        for (const auto& f : scan.facts) violated += f.violated ? 1 : 0;
      } catch (const std::domain_error&) {
        violated = -1;  // perturbation left the positive cone
      }
      row["obstruction_violated_facts"] = violated;
    } else {
      row["non_normal_go_exists"] = "unknown";
      row["go_family_free_parameters"] = ordered_json::array();
      auto params = random_invariant_metric(dec, cfg.seed + salt);
      auto op = build_metric(dec, params);
      auto rep = is_go_numeric(ws, op.mat_q, cfg.samples, cfg.seed + salt);
      row["spot_verdict"] = std::string(verdict_name(rep.verdict)) + " (random instance)";
      row["spot_agreement"] = true;
      row["obstruction_violated_facts"] = 0;
    }
    rows.push_back(row);
  }
  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "partition,alpha_l,theta,case,closed_form,non_normal_go_exists,free_parameters,"
          "spot_verdict,spot_agreement,obstruction_violated_facts\n";
    for (const auto& r : rows) {
      std::string parts;
      for (const auto& v : r["partition"]) parts += (parts.empty() ? "" : " ") + v.dump();
      std::string frees;
      for (const auto& v : r["go_family_free_parameters"])
        frees += (frees.empty() ? "" : " ") + v.get<std::string>();
      os << "(" << parts << ")," << r["alpha_l"] << "," << r["theta"].get<std::string>() << ","
         << r["case"].get<std::string>() << "," << r["closed_form"] << ","
         << r["non_normal_go_exists"].dump() << "," << frees << ","
         << r["spot_verdict"].get<std::string>() << "," << r["spot_agreement"] << ","
         << r["obstruction_violated_facts"] << "\n";
    }
    write_out(cfg, os.str());
  } else if (cfg.format == "json") {
    ordered_json j;
    j["version"] = kVersion;
    j["config"] = cfg.echo();
    j["rows"] = rows;
    write_out(cfg, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << kVersion << " geodesic-orbit survey for " << t.str() << " (seed " << cfg.seed
       << ", samples " << cfg.samples << ", mode " << cfg.mode << ")\n";
    for (const auto& r : rows) {
      std::string parts;
      for (const auto& v : r["partition"]) parts += (parts.empty() ? "" : ",") + v.dump();
      os << "  (" << parts << ")" << (r["alpha_l"].get<bool>() ? "+al" : "") << "  "
         << r["theta"].get<std::string>() << "  case=" << r["case"].get<std::string>();
      if (r["closed_form"].get<bool>()) {
        os << (r["non_normal_go_exists"].get<bool>() ? "  non-normal family" : "  normal only");
        std::string frees;
        for (const auto& v : r["go_family_free_parameters"])
          frees += (frees.empty() ? "" : ",") + v.get<std::string>();
        os << " (free: " << frees << ")";
      } else {
        os << "  numeric-only (no closed form)";
      }
      os << "  spot=" << r["spot_verdict"].get<std::string>()
         << (r["spot_agreement"].get<bool>() ? "" : " DISAGREES")
         << "  obstructions=" << r["obstruction_violated_facts"].dump() << "\n";
    }
    write_out(cfg, os.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kVersion) +
               " - invariant metrics and geodesic-orbit checks on real flag manifolds"};
  app.require_subcommand(1);

  RunConfig cfg;
  auto add_common = [&](CLI::App* sub, bool needs_theta, bool needs_seed) {
    sub->add_option("--family", cfg.family, "Lie family: A, B, C or D")->required();
    sub->add_option("--rank", cfg.rank, "rank of the family")->required();
    if (needs_theta) {
      sub->add_option("--partition", cfg.partition, "ordered block sizes, e.g. 2,3")
          ->delimiter(',')
          ->required();
      sub->add_flag("--alpha-l", cfg.alpha_l, "include the last simple root (B, C, D)");
      sub->add_flag_function(
          "--alpha-l-1",
          [&](std::int64_t) {
            cfg.alpha_l1 = true;
            cfg.alpha_l1_set = true;
          },
          "require the next-to-last simple root (D only; must match the partition)");
    }
    if (needs_seed)
      sub->add_option("--seed", cfg.seed, "random seed (mandatory for randomized commands)")
          ->required();
    sub->add_option("--mode", cfg.mode, "arithmetic mode")
        ->check(CLI::IsMember({"exact", "float"}))
        ->capture_default_str();
    sub->add_option("--tol", cfg.tol, "float-mode failure threshold")->capture_default_str();
    sub->add_option("--samples", cfg.samples, "random sample vectors per check")
        ->capture_default_str();
    sub->add_option("--out", cfg.out_path, "write the report to a file instead of stdout");
    sub->add_option("--format", cfg.format, "output format")
        ->check(CLI::IsMember({"json", "csv", "text"}))
        ->capture_default_str();
  };

  auto* list = app.add_subcommand("list", "enumerate the covered flags of a family/rank");
  add_common(list, false, false);
  auto* decompose = app.add_subcommand("decompose", "print the reductive decomposition of a flag");
  add_common(decompose, true, false);
  auto* schema = app.add_subcommand("schema", "print the invariant-metric parameter schema");
  add_common(schema, true, false);
  auto* check = app.add_subcommand("check", "decide the geodesic-orbit property of a metric");
  add_common(check, true, true);
  check->add_option("--params", cfg.params_path, "metric parameters JSON file")->required();
  auto* classify = app.add_subcommand("classify", "survey the geodesic-orbit families at a rank");
  add_common(classify, false, true);

  try {
    app.parse(argc, argv);
    if (list->parsed()) return cmd_list(cfg);
    if (decompose->parsed()) return cmd_decompose(cfg);
    if (schema->parsed()) return cmd_schema(cfg);
    if (check->parsed()) return cmd_check(cfg);
    if (classify->parsed()) return cmd_classify(cfg);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
