#include "cptlab/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "cptlab/choquet.hpp"
#include "cptlab/format.hpp"
#include "cptlab/market.hpp"
#include "cptlab/optimizer.hpp"
#include "cptlab/preferences.hpp"
#include "cptlab/toolkit.hpp"
#include "cptlab/wellposed.hpp"

#ifndef CPTLAB_VERSION
#define CPTLAB_VERSION "0.0.0"
#endif

namespace cptlab::cli {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// nlohmann prints the shortest round-trip form; every float here goes out
// with 17 significant digits instead, so golden files compare exactly.
void emit(const Json& j, std::ostream& os, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) os << ",\n";
        first = false;
        os << inner << Json(key).dump() << ": ";
        emit(value, os, indent + 1);
      }
      os << '\n' << pad << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      if (flat) {
        os << '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i > 0) os << ", ";
          emit(j[i], os, indent + 1);
        }
        os << ']';
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) os << ",\n";
        os << inner;
        emit(j[i], os, indent + 1);
      }
      os << '\n' << pad << ']';
      return;
    }
    case Json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

std::string to_text(const Json& j) {
  std::ostringstream os;
  emit(j, os, 0);
  os << '\n';
  return os.str();
}

Json extended(const ExtendedReal& v) {
  return v.is_finite() ? Json(v.value()) : Json("+inf");
}

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json strategy_json(const PureStrategy& s) {
  Json o = Json::object();
  for (const auto& [node, theta] : s.allocation) o[std::to_string(node)] = vec_json(theta);
  return o;
}

Json value_json(const CPTValue& v) {
  Json o;
  o["v_plus"] = extended(v.v_plus);
  o["v_minus"] = extended(v.v_minus);
  o["v"] = v.v ? Json(*v.v) : Json(nullptr);
  o["admissible"] = v.admissible;
  return o;
}

std::string csv_line(std::initializer_list<std::string> cells) {
  std::string s;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) s += ',';
    first = false;
    s += c;
  }
  return s + '\n';
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open input file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Artifact {
  std::string name;
  std::string text;
};

// Everything a subcommand produced, in emission order.
struct RunResult {
  std::vector<Artifact> artifacts;  // first one goes to stdout
  Json parameters = Json::object();
  std::vector<std::string> inputs;
  int exit_code = kExitOk;
  std::string diagnostic;
};

struct Common {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir;
  std::string format;
};

std::string resolve_format(const Common& c, const std::string& fallback) {
  return c.format.empty() ? fallback : c.format;
}

PreferenceSpec load_preferences(const std::string& path, RunResult& r) {
  if (path.empty()) return PreferenceSpec::root_gain_linear_loss();
  r.inputs.push_back(path);
  std::istringstream in(read_file(path));
  return parse_preferences(in);
}

ScenarioTree load_market(const std::string& path, RunResult& r) {
  r.inputs.push_back(path);
  std::istringstream in(read_file(path));
  return parse_market(in);
}

Json preference_json(const PreferenceSpec& p) {
  std::ostringstream os;
  write_preferences(os, p);
  Json o = Json::object();
  std::istringstream in(os.str());
  for (const auto& [k, v] : read_key_values(in)) o[k] = v;
  return o;
}

// ---------------------------------------------------------------------------

struct ValueArgs {
  std::string market;
  std::string pref;
  std::vector<double> theta;
  std::string strategy;
  double x0 = 0.0;
  double benchmark = 0.0;
};

PureStrategy parse_strategy(std::istream& in, const ScenarioTree& tree) {
  PureStrategy s = PureStrategy::zero(tree);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    long long id = -1;
    require(tag == "node" && static_cast<bool>(ls >> id) && id >= 0,
            "strategy line " + std::to_string(line_no) + ": expected 'node <id> <theta>...'");
    Vec theta;
    double v = 0.0;
    while (ls >> v) theta.push_back(v);
    require(ls.eof(), "strategy line " + std::to_string(line_no) + ": bad number");
    require(tree.internal_index(static_cast<NodeId>(id)).has_value(),
            "strategy line " + std::to_string(line_no) + ": node " + std::to_string(id) +
                " is not an internal node");
    s.allocation[static_cast<NodeId>(id)] = theta;
  }
  validate_strategy(tree, s);
  return s;
}

RunResult do_value(const ValueArgs& a, const Common& c) {
  RunResult r;
  const ScenarioTree tree = load_market(a.market, r);
  const PreferenceSpec pref = load_preferences(a.pref, r);
  require(a.theta.empty() != a.strategy.empty(), "value needs exactly one of --theta or --strategy");
  PureStrategy s;
  if (!a.strategy.empty()) {
    r.inputs.push_back(a.strategy);
    std::istringstream in(read_file(a.strategy));
    s = parse_strategy(in, tree);
  } else {
    require(a.theta.size() == static_cast<std::size_t>(tree.dim()),
            "--theta needs " + std::to_string(tree.dim()) + " values");
    s = PureStrategy::constant(tree, a.theta);
  }
  const ReferenceSpec ref = ReferenceSpec::constant(tree, a.benchmark);
  const CPTValue v = cpt_value(tree, s, a.x0, ref, pref);
  r.parameters["x0"] = a.x0;
  r.parameters["benchmark"] = a.benchmark;
  r.parameters["preferences"] = preference_json(pref);
  if (!a.theta.empty()) r.parameters["theta"] = vec_json(a.theta);
  if (resolve_format(c, "json") == "csv") {
    r.artifacts.push_back({"value.csv", csv_line({"v_plus", "v_minus", "v"}) +
                                            csv_line({v.v_plus.to_string(), v.v_minus.to_string(),
                                                      v.v ? format_double(*v.v) : "nan"})});
  } else {
    r.artifacts.push_back({"value.json", to_text(value_json(v))});
  }
  return r;
}

struct OptimizeArgs {
  std::string market;
  std::string pref;
  double x0 = 0.0;
  double benchmark = 0.0;
  std::size_t atoms = 1;
  std::optional<double> box;
  int multistart = 8;
  int max_doublings = 6;
};

RunResult do_optimize(const OptimizeArgs& a, const Common& c) {
  RunResult r;
  const ScenarioTree tree = load_market(a.market, r);
  const PreferenceSpec pref = load_preferences(a.pref, r);
  const ReferenceSpec ref = ReferenceSpec::constant(tree, a.benchmark);
  SearchConfig cfg;
  cfg.radius = a.box;
  cfg.multistart = a.multistart;
  cfg.max_doublings = a.max_doublings;
  cfg.seed = c.seed;
  const RandomizedSearchResult res = optimize_randomized(tree, pref, a.x0, ref, a.atoms, cfg);

  r.parameters["x0"] = a.x0;
  r.parameters["benchmark"] = a.benchmark;
  r.parameters["atoms"] = a.atoms;
  r.parameters["box"] = a.box ? Json(*a.box) : Json("default");
  r.parameters["multistart"] = a.multistart;
  r.parameters["max_doublings"] = a.max_doublings;
  r.parameters["preferences"] = preference_json(pref);

  if (resolve_format(c, "json") == "csv") {
    std::string text = "atom,weight,node,component,theta\n";
    for (std::size_t k = 0; k < res.strategy.atoms.size(); ++k) {
      const auto& [w, s] = res.strategy.atoms[k];
      for (const auto& [node, theta] : s.allocation) {
        for (std::size_t i = 0; i < theta.size(); ++i) {
          text += csv_line({std::to_string(k), format_double(w), std::to_string(node),
                            std::to_string(i), format_double(theta[i])});
        }
      }
    }
    r.artifacts.push_back({"optimize.csv", text});
    return r;
  }
  Json o = value_json(res.value);
  o["pure_v"] = res.pure.value.v ? Json(*res.pure.value.v) : Json(nullptr);
  o["condition_a"] = res.pure.condition_a;
  o["radius"] = res.radius;
  o["doublings"] = res.pure.doublings;
  o["evaluations"] = res.evaluations;
  if (a.atoms == 1) {
    o["strategy"] = strategy_json(res.pure.strategy);
  } else {
    Json atoms = Json::array();
    for (const auto& [w, s] : res.strategy.atoms) {
      atoms.push_back(Json{{"weight", w}, {"strategy", strategy_json(s)}});
    }
    o["atoms"] = atoms;
  }
  r.artifacts.push_back({"optimize.json", to_text(o)});
  return r;
}

struct LadderArgs {
  int n = 2;
  bool identity_gain = false;
  int multistart = 8;
  std::optional<int> perturbation_level;
};

RunResult do_ladder(const LadderArgs& a, const Common& c) {
  RunResult r;
  SearchConfig cfg;
  cfg.seed = c.seed;
  cfg.multistart = a.multistart;
  CoinGambleModel model;
  if (a.identity_gain) model.gain = Distortion::identity();
  const LadderResult lad = ladder(a.n, cfg, model);
  r.parameters["n"] = a.n;
  r.parameters["multistart"] = a.multistart;
  r.parameters["w_plus"] = a.identity_gain ? "identity" : "sqrt";

  if (resolve_format(c, "csv") == "csv") {
    std::string text = "n,M_n\n";
    for (std::size_t k = 0; k < lad.values.size(); ++k) {
      text += csv_line({std::to_string(k), format_double(lad.values[k])});
    }
    r.artifacts.push_back({"ladder.csv", text});
    return r;
  }
  Json levels = Json::array();
  for (std::size_t k = 0; k < lad.values.size(); ++k) {
    levels.push_back(Json{{"n", k},
                          {"M_n", lad.values[k]},
                          {"argmax", vec_json(lad.argmax[k])},
                          {"evaluations", lad.evaluations[k]}});
  }
  Json o;
  o["levels"] = levels;
  if (a.perturbation_level) {
    const double deltas[] = {0.0, 1e-6, 1e-5, 1e-4, 1e-3};
    const PerturbationTable t = perturbation_check(lad, *a.perturbation_level, deltas);
    Json rows = Json::array();
    for (const auto& row : t.rows) {
      rows.push_back(Json{{"delta", row.delta},
                          {"value", row.value},
                          {"v_plus", row.v_plus},
                          {"v_minus", row.v_minus},
                          {"slope", row.slope}});
    }
    o["perturbation"] = Json{{"level", t.level},       {"a", t.a},
                             {"mass_a", t.mass_a},     {"mass_above", t.mass_above},
                             {"derivative", t.derivative}, {"rows", rows}};
  }
  r.artifacts.push_back({"ladder.json", to_text(o)});
  return r;
}

struct IllposedArgs {
  std::string pref;
  double ell = 1.5;
  std::vector<double> n_list{10.0, 1e3, 1e6};
};

RunResult do_illposed(const IllposedArgs& a, const Common& c) {
  RunResult r;
  const PreferenceSpec pref =
      a.pref.empty()
          ? PreferenceSpec::power_family(0.9, 1.0, 1.0, Distortion::power(0.5), Distortion::identity())
          : load_preferences(a.pref, r);
  const IllposednessReport rep = two_step_example(pref, a.ell);
  const auto scan = truncation_scan(pref, a.ell, a.n_list);
  r.parameters["ell"] = a.ell;
  r.parameters["n"] = vec_json(a.n_list);
  r.parameters["preferences"] = preference_json(pref);

  std::string csv = "n,v_plus,v_minus,v\n";
  Json rows = Json::array();
  for (const auto& pt : scan) {
    csv += csv_line({format_double(pt.n), format_double(pt.v_plus), format_double(pt.v_minus),
                     format_double(pt.v)});
    rows.push_back(Json{{"n", pt.n}, {"v_plus", pt.v_plus}, {"v_minus", pt.v_minus}, {"v", pt.v}});
  }
  Json o;
  o["ell"] = rep.ell;
  o["v_plus"] = extended(rep.v_plus);
  o["v_minus"] = extended(rep.v_minus);
  o["head_plus"] = rep.head_plus;
  o["head_minus"] = rep.head_minus;
  o["exponent_plus"] = rep.exponent_plus;
  o["exponent_minus"] = rep.exponent_minus;
  o["verdict"] = to_string(rep.verdict);
  o["scan"] = rows;
  Artifact report{"illposed.json", to_text(o)};
  Artifact table{"illposed_scan.csv", csv};
  if (resolve_format(c, "json") == "csv") {
    r.artifacts = {table, report};
  } else {
    r.artifacts = {report, table};
  }
  return r;
}

RunResult do_check_wellposed(const std::string& pref_path, const Common& c) {
  RunResult r;
  const PreferenceSpec pref = load_preferences(pref_path, r);
  const ParamReport rep = check_conditions(pref);
  r.parameters["preferences"] = preference_json(pref);
  Json o;
  o["condition_a"] = rep.condition_a;
  o["condition_bulb"] = rep.condition_bulb;
  o["lambda_interval"] = rep.lambda_interval
                             ? Json::array({rep.lambda_interval->lo, rep.lambda_interval->hi})
                             : Json(nullptr);
  o["lambda"] = rep.lambda ? Json(*rep.lambda) : Json(nullptr);
  o["tk_pathology_p"] = rep.tk_pathology_p ? Json(*rep.tk_pathology_p) : Json(nullptr);
  if (resolve_format(c, "json") == "csv") {
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : ""; };
    std::string text = "key,value\n";
    text += csv_line({"condition_a", rep.condition_a ? "true" : "false"});
    text += csv_line({"condition_bulb", rep.condition_bulb ? "true" : "false"});
    text += csv_line({"lambda_lo",
                      rep.lambda_interval ? format_double(rep.lambda_interval->lo) : ""});
    text += csv_line({"lambda_hi",
                      rep.lambda_interval ? format_double(rep.lambda_interval->hi) : ""});
    text += csv_line({"lambda", opt(rep.lambda)});
    text += csv_line({"tk_pathology_p", opt(rep.tk_pathology_p)});
    r.artifacts.push_back({"wellposed.csv", text});
  } else {
    r.artifacts.push_back({"wellposed.json", to_text(o)});
  }
  return r;
}

struct MarcheArgs {
  std::string market;
  std::optional<double> target_pi;
  int samples = 256;
};

RunResult do_marche(const MarcheArgs& a, const Common& c) {
  RunResult r;
  const ScenarioTree tree = load_market(a.market, r);
  r.parameters["samples"] = a.samples;
  r.parameters["target_pi"] = a.target_pi ? Json(*a.target_pi) : Json(nullptr);

  const NoArbitrageResult na = check_no_arbitrage(tree);
  const NonRedundancyResult nr = check_non_redundancy(tree);
  Json o;
  o["no_arbitrage"] = Json{{"holds", na.holds},
                           {"node", na.node ? Json(*na.node) : Json(nullptr)},
                           {"direction", vec_json(na.direction)}};
  o["non_redundancy"] =
      Json{{"holds", nr.holds}, {"node", nr.node ? Json(*nr.node) : Json(nullptr)}};
  std::string csv = "node,kappa,pi,validated\n";
  if (na.holds) {
    CertificateOptions opts;
    opts.direction_samples = a.samples;
    opts.target_pi = a.target_pi;
    opts.seed = c.seed;
    const MarcheCertificate cert = marche_certificate(tree, opts);
    Json nodes = Json::array();
    for (const auto& [node, pair] : cert.per_node) {
      const bool ok = validate_certificate(tree, node, pair, a.samples, c.seed);
      nodes.push_back(Json{{"node", node}, {"kappa", pair.kappa}, {"pi", pair.pi}, {"validated", ok}});
      csv += csv_line({std::to_string(node), format_double(pair.kappa), format_double(pair.pi),
                       ok ? "true" : "false"});
    }
    o["certificate"] = Json{{"sampled", cert.sampled},
                            {"direction_samples", cert.direction_samples},
                            {"nodes", nodes}};
  } else {
    o["certificate"] = nullptr;
    r.exit_code = kExitValidation;
    r.diagnostic = "no-arbitrage fails at node " + std::to_string(*na.node);
  }
  if (resolve_format(c, "json") == "csv") {
    r.artifacts.push_back({"marche.csv", csv});
  } else {
    r.artifacts.push_back({"marche.json", to_text(o)});
  }
  return r;
}

RunResult do_self_test(const Common& c) {
  RunResult r;
  const std::uint64_t seed = c.seed_given ? c.seed : kSelfTestSeed;
  const SelfTestReport rep = run_self_test(seed);
  r.parameters["self_test_seed"] = seed;
  if (resolve_format(c, "json") == "csv") {
    std::string text = "name,statistic,threshold,passed\n";
    for (const auto& t : rep.cases) {
      text += csv_line({"\"" + t.name + "\"", format_double(t.statistic),
                        format_double(t.threshold), t.passed ? "true" : "false"});
    }
    r.artifacts.push_back({"self_test.csv", text});
  } else {
    Json cases = Json::array();
    for (const auto& t : rep.cases) {
      cases.push_back(Json{{"name", t.name},
                           {"statistic", t.statistic},
                           {"threshold", t.threshold},
                           {"passed", t.passed}});
    }
    r.artifacts.push_back(
        {"self_test.json", to_text(Json{{"seed", seed}, {"passed", rep.passed()}, {"cases", cases}})});
  }
  if (!rep.passed()) {
    r.exit_code = kExitInternal;
    r.diagnostic = "self-test failed";
  }
  return r;
}

// ---------------------------------------------------------------------------

void write_outputs(const std::string& subcommand, const std::vector<std::string>& args,
                   const Common& c, const RunResult& r) {
  fs::create_directories(c.out_dir);
  Json outputs = Json::array();
  for (const auto& art : r.artifacts) {
    const fs::path path = fs::path(c.out_dir) / art.name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InternalError("cannot write '" + path.string() + "'");
    f << art.text;
    outputs.push_back(Json{{"path", art.name}, {"fnv1a", fnv1a_hex(art.text)}});
  }
  Json inputs = Json::array();
  for (const auto& in : r.inputs) {
    inputs.push_back(Json{{"path", in}, {"fnv1a", fnv1a_hex(read_file(in))}});
  }
  Json argv = Json::array();
  for (const auto& a : args) argv.push_back(a);
  Json manifest;
  manifest["subcommand"] = subcommand;
  manifest["version"] = CPTLAB_VERSION;
  manifest["argv"] = argv;
  manifest["seed"] = c.seed;
  manifest["format"] = c.format.empty() ? "default" : c.format;
  manifest["parameters"] = r.parameters;
  manifest["inputs"] = inputs;
  manifest["outputs"] = outputs;
  std::ofstream f(fs::path(c.out_dir) / "manifest.json", std::ios::binary);
  if (!f) throw InternalError("cannot write the run manifest");
  f << to_text(manifest);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cumulative prospect theory portfolio objectives on finite scenario trees", "cptlab"};
  app.set_version_flag("--version", CPTLAB_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  auto* seed_opt = app.add_option("--seed", common.seed, "Seed for every random choice")
                       ->capture_default_str();
  app.add_option("--out", common.out_dir, "Directory for artifacts and manifest.json");
  app.add_option("--format", common.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));

  ValueArgs value;
  auto* value_cmd = app.add_subcommand("value", "CPT value of a strategy");
  value_cmd->add_option("--market", value.market, "Market file")->required();
  value_cmd->add_option("--pref", value.pref, "Preference key=value file");
  value_cmd->add_option("--theta", value.theta, "Constant allocation at every node");
  value_cmd->add_option("--strategy", value.strategy, "Strategy file (node <id> <theta>...)");
  value_cmd->add_option("--x0", value.x0, "Initial capital");
  value_cmd->add_option("--benchmark", value.benchmark, "Constant reference point B");

  OptimizeArgs opt;
  auto* opt_cmd = app.add_subcommand("optimize", "Maximize V over pure or randomized strategies");
  opt_cmd->add_option("--market", opt.market, "Market file")->required();
  opt_cmd->add_option("--pref", opt.pref, "Preference key=value file");
  opt_cmd->add_option("--x0", opt.x0, "Initial capital");
  opt_cmd->add_option("--benchmark", opt.benchmark, "Constant reference point B");
  opt_cmd->add_option("--atoms", opt.atoms, "Equal-weight atoms of the external randomization")
      ->check(CLI::PositiveNumber);
  opt_cmd->add_option("--box", opt.box, "Initial per-node box radius around the sub-hedge")
      ->check(CLI::PositiveNumber);
  opt_cmd->add_option("--multistart", opt.multistart, "Number of search starts")
      ->check(CLI::PositiveNumber);
  opt_cmd->add_option("--max-doublings", opt.max_doublings, "Box doublings on boundary hits")
      ->check(CLI::NonNegativeNumber);

  LadderArgs lad;
  auto* lad_cmd = app.add_subcommand("randomization-ladder", "Coin-gamble values M_0..M_n");
  lad_cmd->add_option("--n", lad.n, "Highest level (<= 12)");
  lad_cmd->add_flag("--identity-gain", lad.identity_gain, "Use w+ = identity");
  lad_cmd->add_option("--multistart", lad.multistart, "Starts per level")
      ->check(CLI::PositiveNumber);
  lad_cmd->add_option("--perturbation-level", lad.perturbation_level,
                      "Add the split-perturbation table for this level (json)");

  IllposedArgs ill;
  auto* ill_cmd = app.add_subcommand("illposed-demo", "Two-step ill-posedness construction");
  ill_cmd->add_option("--pref", ill.pref, "Preference key=value file");
  ill_cmd->add_option("--ell", ill.ell, "Pareto tail index");
  ill_cmd->add_option("--n", ill.n_list, "Truncation levels");

  std::string wp_pref;
  auto* wp_cmd = app.add_subcommand("check-wellposed", "Parameter conditions of a preference");
  wp_cmd->add_option("--pref", wp_pref, "Preference key=value file")->required();

  MarcheArgs marche;
  auto* marche_cmd = app.add_subcommand("marche-check", "No-arbitrage and (kappa, pi) certificate");
  marche_cmd->add_option("--market", marche.market, "Market file")->required();
  marche_cmd->add_option("--target-pi", marche.target_pi, "Maximize kappa subject to pi >= this");
  marche_cmd->add_option("--samples", marche.samples, "Direction samples for d >= 2")
      ->check(CLI::PositiveNumber);

  auto* toolkit_cmd = app.add_subcommand("toolkit", "Randomization toolkit");
  toolkit_cmd->require_subcommand(1);
  toolkit_cmd->fallthrough();
  auto* self_test_cmd = toolkit_cmd->add_subcommand("self-test", "Seeded statistical suite");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << CPTLAB_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }
  common.seed_given = seed_opt->count() > 0;

  std::string name;
  try {
    RunResult result;
    if (value_cmd->parsed()) {
      name = "value";
      result = do_value(value, common);
    } else if (opt_cmd->parsed()) {
      name = "optimize";
      result = do_optimize(opt, common);
    } else if (lad_cmd->parsed()) {
      name = "randomization-ladder";
      result = do_ladder(lad, common);
    } else if (ill_cmd->parsed()) {
      name = "illposed-demo";
      result = do_illposed(ill, common);
    } else if (wp_cmd->parsed()) {
      name = "check-wellposed";
      result = do_check_wellposed(wp_pref, common);
    } else if (marche_cmd->parsed()) {
      name = "marche-check";
      result = do_marche(marche, common);
    } else if (self_test_cmd->parsed()) {
      name = "toolkit self-test";
      result = do_self_test(common);
    } else {
      throw InternalError("no subcommand dispatched");
    }
    out << result.artifacts.front().text;
    if (!common.out_dir.empty()) write_outputs(name, args, common, result);
    if (!result.diagnostic.empty()) err << "validation failure: " << result.diagnostic << '\n';
    return result.exit_code;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace cptlab::cli
