// Scenario-driven front end: validate a model, run the individual-based
// simulator (single runs or seeded ensembles), integrate the deterministic
// limit, run the two jump-process chains, and compare outputs.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "devtree/analysis.hpp"
#include "devtree/deterministic.hpp"
#include "devtree/errors.hpp"
#include "devtree/io.hpp"
#include "devtree/jump.hpp"
#include "devtree/model.hpp"
#include "devtree/scenario.hpp"
#include "devtree/stochastic.hpp"

namespace {

using namespace devtree;

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Parse:
    case ErrorKind::Io:
      return 2;
    case ErrorKind::AbsorbingState:
    case ErrorKind::Explosion:
    case ErrorKind::Stiffness:
      return 3;
    default:
      return 1; // model-level failures
  }
}

struct CommonOpts {
  std::string scenario_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double horizon = 0.0;
  bool horizon_set = false;
  std::size_t grid_points = 0;
  std::size_t replicates = 0;
  bool events = false;
  double margin = 0.2;
  unsigned workers = 0;
  std::string format = "text";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_scenario = true) {
  if (with_scenario)
    cmd->add_option("scenario", o.scenario_path, "scenario JSON file")
        ->required();
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--seed", o.seed, "override the scenario seed")
      ->each([&o](const std::string&) { o.seed_set = true; });
  cmd->add_option("--horizon", o.horizon, "override the scenario horizon")
      ->each([&o](const std::string&) { o.horizon_set = true; });
  cmd->add_option("--grid", o.grid_points, "override the uniform grid size");
  cmd->add_option("--replicates", o.replicates,
                  "override the scenario replicate count");
  cmd->add_flag("--events", o.events, "also write the event log");
  cmd->add_option("--margin", o.margin,
                  "ratio threshold for the scale-separation checks");
  cmd->add_option("--workers", o.workers,
                  "parallel workers for ensembles (0 = hardware)");
  cmd->add_option("--format", o.format, "stdout format: text or json")
      ->check(CLI::IsMember({"text", "json"}));
}

std::string output_dir(const CommonOpts& o) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (const char* env = std::getenv("DEVTREE_OUT_DIR"); env && *env) return env;
  return ".";
}

Scenario load_scenario(CommonOpts& o) {
  Scenario s = parse_scenario_file(o.scenario_path);
  if (o.seed_set) s.seed = o.seed;
  if (o.horizon_set) {
    s.horizon = o.horizon;
    if (!s.grid.times.empty()) s.grid.times.clear(); // explicit grid no longer fits
  }
  if (o.grid_points >= 2) {
    s.grid.times.clear();
    s.grid.points = o.grid_points;
  }
  if (o.replicates >= 1) s.replicates = o.replicates;
  return s;
}

// Validation shared by every run-type subcommand: hard assumption failures
// abort with exit 1; scaling failures become warnings.
std::vector<std::string> validate_or_throw(const Scenario& s, double margin) {
  std::vector<std::string> warnings;
  const auto report = validate_assumptions(s.catalog);
  if (!report.passed())
    fail(ErrorKind::InvalidArgument,
         "model assumptions failed:\n" + report.to_text());
  for (const auto& w : report.warnings) warnings.push_back(w);
  const auto scaling = check_scaling(s.regime, margin);
  for (const auto& c : scaling.checks)
    if (!c.informational && !c.pass)
      warnings.push_back("scale separation '" + c.name + "' fails: ratio " +
                         std::to_string(c.ratio));
  return warnings;
}

int single_positive_trait(const Scenario& s, const char* what) {
  int found = -1;
  for (std::size_t i = 0; i < s.initial.size(); ++i) {
    if (s.initial[i] > 0.0) {
      if (found >= 0)
        fail(ErrorKind::InvalidArgument,
             std::string(what) + " starts from a single trait; the initial "
                                 "configuration has several");
      found = static_cast<int>(i);
    }
  }
  if (found < 0)
    fail(ErrorKind::InvalidArgument,
         std::string(what) + " needs one trait with positive initial density");
  return found;
}

nlohmann::json scaling_json(const ScalingReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"lhs", c.lhs},
                      {"rhs", c.rhs},
                      {"ratio", c.ratio},
                      {"pass", c.pass},
                      {"informational", c.informational},
                      {"note", c.note}});
  }
  return {{"margin", r.margin}, {"passed", r.passed()}, {"checks", checks}};
}

nlohmann::json assumptions_json(const AssumptionReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks)
    checks.push_back(
        {{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return {{"passed", r.passed()},
          {"checks", checks},
          {"warnings", r.warnings}};
}

RunSummary make_summary(const Scenario& s, std::vector<std::string> warnings) {
  RunSummary sum;
  sum.scenario_name = s.name;
  sum.digest = s.digest;
  sum.tool_version = kToolVersion;
  sum.stream_version = static_cast<int>(kStreamVersion);
  sum.warnings = std::move(warnings);
  return sum;
}

int run_validate(CommonOpts& o) {
  const Scenario s = load_scenario(o);
  const auto assumptions = validate_assumptions(s.catalog);
  const auto scaling = check_scaling(s.regime, o.margin);
  if (o.format == "json") {
    nlohmann::json j{{"scenario", s.name},
                     {"digest", s.digest},
                     {"assumptions", assumptions_json(assumptions)},
                     {"scaling", scaling_json(scaling)}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "scenario " << s.name << " (" << s.digest << ")\n"
              << assumptions.to_text() << scaling.to_text();
  }
  return assumptions.passed() ? 0 : 1;
}

int run_simulate(CommonOpts& o) {
  const auto t0 = std::chrono::steady_clock::now();
  Scenario s = load_scenario(o);
  auto warnings = validate_or_throw(s, o.margin);
  if (s.replicates > 1)
    warnings.push_back("replicates ignored by simulate; use ensemble");

  SimOptions opt;
  opt.horizon = s.horizon;
  opt.grid = s.grid;
  opt.record_events = o.events;
  const Trajectory traj =
      simulate(s.catalog, s.regime, s.initial, s.discovered, opt, s.seed);

  const std::string dir = output_dir(o);
  RunSummary sum = make_summary(s, std::move(warnings));
  sum.has_event_counts = true;
  sum.event_counts = traj.event_counts;

  // Summaries record basenames only: the summary sits next to its outputs,
  // and absolute paths would break byte-level reproducibility across dirs.
  const std::string traj_path = dir + "/" + s.name + "_traj.csv";
  write_text_atomic(traj_path, trajectory_csv(traj, s.catalog));
  sum.outputs.push_back(s.name + "_traj.csv");
  if (o.events) {
    const std::string ev_path = dir + "/" + s.name + "_events.csv";
    write_text_atomic(ev_path, events_csv(traj.events, s.catalog));
    sum.outputs.push_back(s.name + "_events.csv");
  }
  sum.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const std::string sum_path = dir + "/" + s.name + "_summary.json";
  write_text_atomic(sum_path, run_summary_json(sum));
  std::cout << "wrote " << traj_path << "\n";
  for (const auto& w : sum.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

int run_ensemble(CommonOpts& o) {
  const auto t0 = std::chrono::steady_clock::now();
  Scenario s = load_scenario(o);
  auto warnings = validate_or_throw(s, o.margin);

  SimOptions opt;
  opt.horizon = s.horizon;
  opt.grid = s.grid;
  const EnsembleStats stats =
      devtree::run_ensemble(s.catalog, s.regime, s.initial, s.discovered, opt,
                            s.replicates, s.seed, o.workers);

  const std::string dir = output_dir(o);
  RunSummary sum = make_summary(s, std::move(warnings));
  const std::string ens_path = dir + "/" + s.name + "_ensemble.csv";
  write_text_atomic(ens_path, ensemble_csv(stats, s.catalog));
  sum.outputs.push_back(s.name + "_ensemble.csv");
  sum.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const std::string sum_path = dir + "/" + s.name + "_summary.json";
  write_text_atomic(sum_path, run_summary_json(sum));
  std::cout << "wrote " << ens_path << " (" << s.replicates << " replicates)\n";
  for (const auto& w : sum.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

int run_ode(CommonOpts& o) {
  Scenario s = load_scenario(o);
  const auto warnings = validate_or_throw(s, o.margin);
  const auto sys = nearest_neighbor_system(s.catalog, s.regime.epsilon,
                                           s.regime.epsilon > 0.0);
  const auto grid = s.grid.materialize(s.horizon);
  const Integration sol = integrate(sys, s.initial, grid);

  std::vector<std::string> columns;
  for (const auto& t : s.catalog.traits) columns.push_back(t.id);
  const std::string dir = output_dir(o);
  const std::string path = dir + "/" + s.name + "_ode.csv";
  write_text_atomic(path, ode_csv(sol.times, sol.states, columns));
  std::cout << "wrote " << path << "\n";
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

int run_tss(CommonOpts& o) {
  Scenario s = load_scenario(o);
  const auto warnings = validate_or_throw(s, o.margin);
  const int start = single_positive_trait(s, "tss");
  const TssPath path = simulate_tss(s.catalog, start, s.horizon, s.seed);
  const std::string dir = output_dir(o);
  const std::string out = dir + "/" + s.name + "_tss.csv";
  write_text_atomic(out, tss_csv(path, s.catalog));
  std::cout << "wrote " << out << (path.absorbed ? " (absorbed)" : "") << "\n";
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

int run_tst(CommonOpts& o) {
  Scenario s = load_scenario(o);
  const auto warnings = validate_or_throw(s, o.margin);
  const int start = single_positive_trait(s, "tst");
  const TstPath path = simulate_tst(s.catalog, start, s.horizon, s.seed);
  const std::string dir = output_dir(o);
  const std::string out = dir + "/" + s.name + "_tst.json";
  write_text_atomic(out, tst_json(path, s.catalog));
  std::cout << "wrote " << out << (path.exhausted ? " (exhausted)" : "") << "\n";
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

struct CompareOpts {
  std::string stochastic_path;
  std::string ode_path;
  std::string target_tst_path;
  double delta = 1.0;
};

Trajectory trajectory_from_table(const NumericTable& table,
                                 const TraitCatalog& cat) {
  if (table.columns.size() != cat.size() + 1)
    fail(ErrorKind::GridMismatch,
         "trait count mismatch: table has " +
             std::to_string(table.columns.size() - 1) + ", catalog has " +
             std::to_string(cat.size()));
  for (std::size_t i = 0; i < cat.size(); ++i)
    if (table.columns[i + 1] != cat.traits[i].id)
      fail(ErrorKind::GridMismatch,
           "column '" + table.columns[i + 1] + "' does not match trait '" +
               cat.traits[i].id + "'");
  Trajectory traj;
  traj.times = table.times;
  traj.states = table.rows;
  return traj;
}

int run_compare(CommonOpts& o, CompareOpts& c) {
  Scenario s = load_scenario(o);
  const auto table = read_numeric_csv(c.stochastic_path);
  const Trajectory traj = trajectory_from_table(table, s.catalog);

  nlohmann::json result{{"scenario", s.name},
                        {"digest", s.digest},
                        {"stochastic", c.stochastic_path}};

  if (!c.ode_path.empty()) {
    const auto ode_table = read_numeric_csv(c.ode_path);
    Integration ode;
    ode.times = ode_table.times;
    ode.states = ode_table.rows;
    EnsembleStats pseudo;
    pseudo.times = traj.times;
    pseudo.mean = traj.states;
    pseudo.replicates = 1;
    const auto cmp = compare_to_ode(pseudo, ode);
    result["ode"] = {{"file", c.ode_path}, {"sup_gap", cmp.sup_gap}};
  }

  if (!c.target_tst_path.empty()) {
    const auto j = nlohmann::json::parse(read_text_file(c.target_tst_path));
    if (!j.contains("steps") || j["steps"].empty())
      fail(ErrorKind::Parse, "'" + c.target_tst_path + "' has no steps");
    const auto& last = j["steps"].back();
    Configuration target(s.catalog.size(), 0.0);
    const auto& ids = last["traits"];
    const auto& present = last["present"];
    const auto& masses = last["masses"];
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const int idx = s.catalog.find_trait(ids[i].get<std::string>());
      if (idx < 0)
        fail(ErrorKind::Parse, "unknown trait in target configuration");
      if (present[i].get<int>() != 0)
        target[static_cast<std::size_t>(idx)] = masses[i].get<double>();
    }
    const auto fix = measure_fixation_time(traj, target, c.delta, s.regime);
    nlohmann::json fj{{"target", c.target_tst_path},
                      {"delta", c.delta},
                      {"reached", fix.reached}};
    if (fix.reached) {
      fj["time"] = fix.time;
      if (std::isfinite(fix.time_over_log))
        fj["time_over_log_inv_eps"] = fix.time_over_log;
    }
    result["fixation"] = std::move(fj);
  }

  std::cout << result.dump(2) << "\n";
  if (!o.out_dir.empty()) {
    const std::string path = output_dir(o) + "/" + s.name + "_compare.json";
    write_text_atomic(path, result.dump(2) + "\n");
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"innovation-dynamics simulator and analysis toolkit"};
  app.require_subcommand(1);

  CommonOpts o;
  CompareOpts c;

  add_common(app.add_subcommand("validate",
                                "check model assumptions and scale separation"),
             o);
  add_common(app.add_subcommand("simulate", "one individual-based run"), o);
  add_common(app.add_subcommand("ensemble", "seeded replicate ensemble"), o);
  add_common(app.add_subcommand("ode", "integrate the deterministic limit"), o);
  add_common(app.add_subcommand("tss", "monomorphic substitution chain"), o);
  add_common(app.add_subcommand("tst", "substitution tree chain"), o);
  auto* cmp = app.add_subcommand("compare", "stochastic vs limit outputs");
  add_common(cmp, o);
  cmp->add_option("--stochastic", c.stochastic_path, "trajectory CSV")
      ->required();
  cmp->add_option("--ode", c.ode_path, "deterministic trajectory CSV");
  cmp->add_option("--target-tst", c.target_tst_path,
                  "TST path JSON; its final configuration is the fixation target");
  cmp->add_option("--delta", c.delta, "fixation TV tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("validate")) return run_validate(o);
    if (app.got_subcommand("simulate")) return run_simulate(o);
    if (app.got_subcommand("ensemble")) return run_ensemble(o);
    if (app.got_subcommand("ode")) return run_ode(o);
    if (app.got_subcommand("tss")) return run_tss(o);
    if (app.got_subcommand("tst")) return run_tst(o);
    if (app.got_subcommand("compare")) return run_compare(o, c);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
