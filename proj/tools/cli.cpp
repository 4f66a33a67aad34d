#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "equiflow/error.hpp"
#include "equiflow/format.hpp"
#include "equiflow/generator.hpp"
#include "equiflow/scenario.hpp"

namespace equiflow::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormatsHelp =
    "File formats (version tag \"equiflow/1\" in every JSON document):\n"
    "  network.json  nodes {id, layer, x, y, region?}, arcs {tail, head, kind, time_min, cost,\n"
    "                unsafety?, capacity_users_min?, flow_cap_veh_min?}, safety_threshold (null = none)\n"
    "  demand.json   operating_window_min, regions {id, population, budget},\n"
    "                demands {origin, destination, daily_users, region, bike_capable}\n"
    "  config.json   scenario parameters; missing fields take defaults\n"
    "  spec.json     grid-city generator parameters\n"
    "Every flag can also be set through EQUIFLOW_<FLAG> (e.g. EQUIFLOW_T_SUFF).\n"
    "Precedence: flag > environment > config file > default.\n";

/// Scenario fields that flags may override.
struct Overrides
{
  double n_amod_max = 0, t_suff = 0, gamma_r = 0, gamma_time = 0, safety_threshold = 0, window = 0, bin_width = 0;
  double feasibility_tol = 0;
  int max_iterations = 0;
  bool budget = true;
  std::string fare_policy, backend, external_command;
  std::vector<std::pair<CLI::Option*, std::function<void(ScenarioConfig&)>>> setters;

  void attach(CLI::App* app)
  {
    auto add = [&](const char* flag, const char* env, auto& var, const char* help, auto apply) {
      CLI::Option* o = app->add_option(flag, var, help)->envname(env);
      setters.emplace_back(o, apply);
    };
    add("--n-amod-max", "EQUIFLOW_N_AMOD_MAX", n_amod_max, "fleet size bound [vehicles]",
        [this](ScenarioConfig& c) { c.n_amod_max = n_amod_max; });
    add("--t-suff", "EQUIFLOW_T_SUFF", t_suff, "sufficiency threshold [min]",
        [this](ScenarioConfig& c) { c.t_suff_min = t_suff; });
    add("--gamma-r", "EQUIFLOW_GAMMA_R", gamma_r, "rebalancing regularization weight",
        [this](ScenarioConfig& c) { c.gamma_r = gamma_r; });
    add("--gamma-time", "EQUIFLOW_GAMMA_TIME", gamma_time, "travel-time weight under comm-suff",
        [this](ScenarioConfig& c) { c.gamma_time = gamma_time; });
    add("--safety-threshold", "EQUIFLOW_SAFETY_THRESHOLD", safety_threshold, "bike unsafety threshold",
        [this](ScenarioConfig& c) { c.safety_threshold = safety_threshold; });
    add("--operating-window", "EQUIFLOW_OPERATING_WINDOW", window, "operating window [min]",
        [this](ScenarioConfig& c) { c.operating_window_min = window; });
    add("--bin-width", "EQUIFLOW_BIN_WIDTH", bin_width, "histogram bin width [min]",
        [this](ScenarioConfig& c) { c.histogram_bin_min = bin_width; });
    add("--budget", "EQUIFLOW_BUDGET", budget, "enable per-demand budget rows (true/false)",
        [this](ScenarioConfig& c) { c.budget_enabled = budget; });
    add("--fare-policy", "EQUIFLOW_FARE_POLICY", fare_policy, "nominal | free-transit | free-all",
        [this](ScenarioConfig& c) {
          auto p = parse_fare_policy(fare_policy);
          if (!p) throw ConfigError("--fare-policy must be nominal, free-transit or free-all");
          c.fare_policy = *p;
        });
    add("--backend", "EQUIFLOW_BACKEND", backend, "embedded | external", [this](ScenarioConfig& c) {
      auto b = parse_backend(backend);
      if (!b) throw ConfigError("--backend must be embedded or external");
      c.solver.backend = *b;
    });
    add("--external-command", "EQUIFLOW_EXTERNAL_COMMAND", external_command,
        "external solver executable, called as CMD problem.txt index.json solution.txt",
        [this](ScenarioConfig& c) { c.solver.external_command = external_command; });
    add("--feasibility-tol", "EQUIFLOW_FEASIBILITY_TOL", feasibility_tol, "solver feasibility tolerance",
        [this](ScenarioConfig& c) { c.solver.feasibility_tol = feasibility_tol; });
    add("--max-iterations", "EQUIFLOW_MAX_ITERATIONS", max_iterations, "solver iteration limit",
        [this](ScenarioConfig& c) { c.solver.max_iterations = max_iterations; });
  }

  void apply(ScenarioConfig& cfg) const
  {
    for (const auto& [opt, set] : setters)
      if (opt->count() > 0) set(cfg);
    check_config(cfg);
  }
};

ObjectiveKind objective_from(const std::string& text)
{
  auto k = parse_objective_kind(text);
  if (!k) throw ConfigError("--objective must be util-eff or comm-suff");
  return *k;
}

void print_failure(const ScenarioOutcome& o, std::ostream& err)
{
  err << "solve " << to_string(o.kind) << ": " << to_string(o.solve.status);
  if (o.solve.suspect_family) err << " (suspect constraint family: " << to_string(*o.solve.suspect_family) << ")";
  if (!o.solve.message.empty()) err << ": " << o.solve.message;
  err << '\n';
}

void print_metrics(const MetricsReport& m, std::ostream& out)
{
  out << "avg_travel_time " << format_number(m.avg_travel_time) << " min\n";
  out << "commute_insufficiency " << format_number(m.commute_insufficiency) << " min^2\n";
}

int cmd_validate(const std::string& network_path, const std::string& demand_path, std::ostream& out)
{
  const Network net = load_network(network_path);
  std::vector<Violation> v = validate_network(net);
  if (!demand_path.empty()) {
    const DemandSet dem = load_demand(demand_path);
    auto more = check_demand_references(net, dem);
    v.insert(v.end(), more.begin(), more.end());
  }
  for (const Violation& x : v) out << x.subject << ": " << describe(x.rule) << ": " << x.message << '\n';
  if (v.empty()) out << "valid\n";
  return v.empty() ? kSuccess : kFailure;
}

int cmd_generate(const std::string& spec_path, std::uint64_t seed, const std::string& out_dir, std::ostream& out)
{
  const GridCitySpec spec = load_grid_spec(spec_path);
  auto [net, dem] = generate_grid_city(spec, seed);
  fs::create_directories(out_dir);
  write_text_file(fs::path(out_dir) / "network.json", network_to_json(net));
  write_text_file(fs::path(out_dir) / "demand.json", demand_to_json(dem));
  out << "generated " << net.node_count() << " nodes, " << net.arc_count() << " arcs, " << dem.demands.size()
      << " demands in " << out_dir << '\n';
  return kSuccess;
}

struct Inputs
{
  Network network;
  DemandSet demand;
  std::string demand_text;
};

Inputs load_inputs(const fs::path& network_path, const fs::path& demand_path, const ScenarioConfig& cfg)
{
  Inputs in;
  in.network = load_network(network_path);
  auto violations = validate_network(in.network);
  if (!violations.empty())
    throw InfeasibleStructure("network is invalid: " + violations.front().subject + ": " + violations.front().message);
  in.demand_text = read_text_file(demand_path);
  in.demand = parse_demand(in.demand_text, cfg.operating_window_min);
  auto refs = check_demand_references(in.network, in.demand);
  if (!refs.empty()) throw InfeasibleStructure("demand is invalid: " + refs.front().subject + ": " + refs.front().message);
  return in;
}

int cmd_solve(const std::string& network_path, const std::string& demand_path, const std::string& config_path,
              const std::string& objective, const std::string& out_dir, const Overrides& overrides, std::ostream& out,
              std::ostream& err)
{
  ScenarioConfig cfg = config_path.empty() ? ScenarioConfig{} : load_config(config_path);
  overrides.apply(cfg);
  const ObjectiveKind kind = objective_from(objective);
  const Inputs in = load_inputs(network_path, demand_path, cfg);
  const ScenarioOutcome o = run_scenario(in.network, in.demand, cfg, kind);
  write_scenario(out_dir, o, cfg, in.demand, in.demand_text);
  if (!o.ok()) {
    print_failure(o, err);
    return kFailure;
  }
  out << "status optimal (" << o.solve.iterations << " iterations)\n";
  print_metrics(*o.metrics, out);
  return kSuccess;
}

int cmd_batch(const std::string& config_dir, const std::string& out_dir, int jobs, std::ostream& out,
              std::ostream& err)
{
  const fs::path dir(config_dir);
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const fs::path p = entry.path();
    if (p.extension() != ".json" || p.filename() == "network.json" || p.filename() == "demand.json") continue;
    configs.push_back(p);
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) throw ConfigError(config_dir + ": no scenario configs found");

  struct Job
  {
    std::string name;
    ScenarioConfig cfg;
    ObjectiveKind kind;
    std::string status = "error";
    std::string avg = "", insuff = "";
    int iterations = 0;
    std::string message;
  };
  std::vector<Job> work;
  for (const fs::path& p : configs) {
    const ScenarioConfig cfg = load_config(p);
    for (ObjectiveKind k : {ObjectiveKind::util_eff, ObjectiveKind::comm_suff})
      work.push_back(Job{p.stem().string(), cfg, k, "error", "", "", 0, ""});
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      Job& job = work[i];
      try {
        const Inputs in = load_inputs(dir / "network.json", dir / "demand.json", job.cfg);
        const ScenarioOutcome o = run_scenario(in.network, in.demand, job.cfg, job.kind);
        write_scenario(fs::path(out_dir) / job.name / std::string(to_string(job.kind)), o, job.cfg, in.demand,
                       in.demand_text);
        job.status = std::string(to_string(o.solve.status));
        job.iterations = o.solve.iterations;
        if (o.ok()) {
          job.avg = format_number(o.metrics->avg_travel_time);
          job.insuff = format_number(o.metrics->commute_insufficiency);
        } else if (o.solve.suspect_family) {
          job.message = "suspect " + std::string(to_string(*o.solve.suspect_family));
        }
      } catch (const std::exception& e) {
        job.message = e.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(work.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "scenario,objective,status,avg_travel_time,commute_insufficiency,iterations\n";
  bool all_ok = true;
  for (const Job& j : work) {
    csv << j.name << ',' << to_string(j.kind) << ',' << j.status << ',' << j.avg << ',' << j.insuff << ','
        << j.iterations << '\n';
    if (j.status != "optimal") {
      all_ok = false;
      err << j.name << ' ' << to_string(j.kind) << ": " << j.status << (j.message.empty() ? "" : ": ") << j.message
          << '\n';
    }
  }
  fs::create_directories(out_dir);
  write_text_file(fs::path(out_dir) / "summary.csv", csv.str());
  out << "ran " << work.size() << " scenario solves; summary in " << (fs::path(out_dir) / "summary.csv").string()
      << '\n';
  return all_ok ? kSuccess : kFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"equiflow: intermodal mobility-on-demand flow planner with sufficiency objectives", "equiflow"};
  app.footer(kFormatsHelp);
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string("equiflow 0.1.0, formats ") + std::string(kFormatVersion));

  std::string network_path, demand_path, config_path, spec_path, out_dir, solution_dir, objective = "util-eff",
                                                                                 config_dir;
  std::uint64_t seed = 0;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  Overrides overrides;

  auto* validate = app.add_subcommand("validate", "check a network (and optionally a demand file)");
  validate->add_option("--network", network_path, "network.json")->required()->envname("EQUIFLOW_NETWORK");
  validate->add_option("--demand", demand_path, "demand.json")->envname("EQUIFLOW_DEMAND");

  auto* generate = app.add_subcommand("generate", "generate a synthetic grid city");
  generate->add_option("--spec", spec_path, "grid spec JSON")->required()->envname("EQUIFLOW_SPEC");
  generate->add_option("--seed", seed, "random seed")->envname("EQUIFLOW_SEED");
  generate->add_option("--out", out_dir, "output directory")->required()->envname("EQUIFLOW_OUT");

  auto* solve_cmd = app.add_subcommand("solve", "solve one scenario and write its output directory");
  solve_cmd->add_option("--network", network_path, "network.json")->required()->envname("EQUIFLOW_NETWORK");
  solve_cmd->add_option("--demand", demand_path, "demand.json")->required()->envname("EQUIFLOW_DEMAND");
  solve_cmd->add_option("--config", config_path, "config.json")->envname("EQUIFLOW_CONFIG");
  solve_cmd->add_option("--objective", objective, "util-eff | comm-suff")
      ->check(CLI::IsMember({"util-eff", "comm-suff"}))
      ->envname("EQUIFLOW_OBJECTIVE");
  solve_cmd->add_option("--out", out_dir, "output directory")->required()->envname("EQUIFLOW_OUT");
  overrides.attach(solve_cmd);

  auto* decompose_cmd = app.add_subcommand("decompose", "rebuild paths.csv and cycles.csv from a solution directory");
  decompose_cmd->add_option("--solution", solution_dir, "scenario output directory")
      ->required()
      ->envname("EQUIFLOW_SOLUTION");

  auto* report = app.add_subcommand("report", "rebuild every derived report from a solution directory");
  report->add_option("--solution", solution_dir, "scenario output directory")->required()->envname("EQUIFLOW_SOLUTION");

  auto* batch = app.add_subcommand("batch", "run every config in a directory under both objectives");
  batch->add_option("--config-dir", config_dir, "directory with network.json, demand.json and scenario configs")
      ->required()
      ->envname("EQUIFLOW_CONFIG_DIR");
  batch->add_option("--out", out_dir, "output directory")->required()->envname("EQUIFLOW_OUT");
  batch->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber)->envname("EQUIFLOW_JOBS");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << "equiflow 0.1.0, formats " << kFormatVersion << '\n';
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(network_path, demand_path, out);
    if (generate->parsed()) return cmd_generate(spec_path, seed, out_dir, out);
    if (solve_cmd->parsed())
      return cmd_solve(network_path, demand_path, config_path, objective, out_dir, overrides, out, err);
    if (decompose_cmd->parsed()) {
      const PathAssignment pa = write_decomposition(solution_dir);
      std::size_t paths = 0, cycles = 0;
      for (const auto& d : pa.demands) {
        paths += d.paths.size();
        cycles += d.cycles.size();
      }
      out << paths << " paths, " << cycles << " cycles\n";
      return kSuccess;
    }
    if (report->parsed()) {
      print_metrics(write_reports(solution_dir), out);
      return kSuccess;
    }
    if (batch->parsed()) return cmd_batch(config_dir, out_dir, jobs, out, err);
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kUsage;
  } catch (const PartitionError& e) {
    err << "schema error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const FileError& e) {
    err << "file error: " << e.what() << '\n';
    return kUsage;
  } catch (const SpecError& e) {
    err << "spec error: " << e.what() << '\n';
    return kUsage;
  } catch (const InfeasibleStructure& e) {
    err << "infeasible: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace equiflow::cli
