#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "qcdet/consensus.hpp"
#include "qcdet/error.hpp"
#include "qcdet/experiments.hpp"
#include "qcdet/graph.hpp"
#include "qcdet/models.hpp"

#ifndef QCDET_VERSION
#define QCDET_VERSION "unknown"
#endif

namespace qcdet::cli {
namespace {

using nlohmann::json;

// Thrown for malformed user input; mapped to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw UsageError("not a number: '" + s + "'");
  return v;
}

std::int64_t to_int(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw UsageError("not an integer: '" + s + "'");
  }
  if (used != s.size()) throw UsageError("not an integer: '" + s + "'");
  return v;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  for (const auto& item : split(text, ',')) values.push_back(to_double(item));
  if (values.empty()) throw UsageError("empty value list");
  return values;
}

std::vector<double> read_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open data file '" + path + "'");
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    for (const auto& item : split(token, ',')) {
      if (!item.empty()) values.push_back(to_double(item));
    }
  }
  if (values.empty()) throw UsageError("data file '" + path + "' holds no values");
  return values;
}

Graph make_graph(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw UsageError("graph must look like star:N, path:N, complete:N, random:N:M:SEED or file:PATH");
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (kind == "file") return read_edge_list_file(rest);
  if (kind == "random") {
    const auto parts = split(rest, ':');
    if (parts.size() != 3) throw UsageError("random graph needs random:N:M:SEED");
    return random_connected(static_cast<int>(to_int(parts[0])), to_int(parts[1]),
                            static_cast<std::uint64_t>(to_int(parts[2])));
  }
  const int n = static_cast<int>(to_int(rest));
  if (kind == "star") return star(n);
  if (kind == "path") return path(n);
  if (kind == "complete") return complete(n);
  throw UsageError("unknown graph kind '" + kind + "'");
}

HypothesisModel make_model(const std::string& spec) {
  if (spec.rfind("gauss:", 0) == 0) {
    const auto v = parse_values(spec.substr(6));
    if (v.size() != 3) throw UsageError("gaussian model needs gauss:MU1,MU2,VAR");
    return HypothesisModel::gaussian(v[0], v[1], v[2]);
  }
  if (spec.rfind("discrete:", 0) == 0) return read_probability_table_file(spec.substr(9));
  throw UsageError("model must be gauss:MU1,MU2,VAR or discrete:PATH");
}

CyclePolicy parse_policy(const std::string& s) {
  if (s == "accept-h1") return CyclePolicy::kAcceptH1;
  if (s == "reject-h1") return CyclePolicy::kRejectH1;
  throw UsageError("cycle policy must be accept-h1 or reject-h1");
}

Schedule parse_schedule(const std::string& s) {
  if (s == "fixed") return Schedule::kFixed;
  if (s == "decreasing") return Schedule::kDecreasing;
  throw UsageError("schedule must be fixed or decreasing");
}

RhoChoice parse_rho_choice(const std::string& s) {
  if (s == "recipe") return RhoChoice::kRecipe;
  if (s == "practical") return RhoChoice::kPractical;
  if (s == "fixed") return RhoChoice::kFixed;
  throw UsageError("rho choice must be recipe, practical or fixed");
}

CriterionSpec criterion_spec(const DetectParams& p) {
  CriterionSpec c;
  try {
    c.kind = CriterionSpec::parse_kind(p.criterion);
  } catch (const Error&) {
    throw UsageError("unknown criterion '" + p.criterion + "'");
  }
  c.delta = p.delta;
  c.pi1 = p.pi1;
  c.prior_adjusted = p.prior_adjusted;
  c.tau = p.tau;
  if (p.has_gamma) c.gamma = p.gamma;
  c.tau_star = p.tau_star;
  c.rho_choice = parse_rho_choice(p.rho_choice);
  c.rho_value = p.rho;
  c.cycle_policy = parse_policy(p.cycle_policy);
  return c;
}

RunOptions run_options(std::int64_t max_iter, int cycle_window) {
  RunOptions o;
  o.max_iter = max_iter;
  o.cycle_window = cycle_window;
  return o;
}

void write_manifest(const std::string& csv, json j) {
  std::ofstream out(manifest_path(csv));
  if (!out) throw std::runtime_error("cannot write manifest next to '" + csv + "'");
  out << j.dump(2) << '\n';
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

int execute_consensus(const RunManifest& manifest, const ConsensusParams& p, std::ostream& out) {
  const Graph graph = make_graph(p.graph);
  const DeltaQuantizer quantizer(p.a, p.big_delta, p.delta);
  RunOptions options = run_options(p.max_iter, p.cycle_window);
  std::ofstream trace_file;
  std::optional<TraceWriter> trace;
  if (!p.trace.empty()) {
    trace_file = open_csv(p.trace);
    trace.emplace(trace_file);
    options.observer = [&trace](const ConsensusState& s) { (*trace)(s); };
    write_manifest(p.trace, to_json(manifest));
  }
  const ConsensusOutcome outcome = run(graph, p.data, quantizer, p.rho, options);

  out << std::setprecision(17);
  out << "outcome=" << to_string(outcome.kind) << " iterations=" << outcome.iterations << " k0=" << outcome.k0;
  if (outcome.kind == OutcomeKind::kConverged) out << " level=" << outcome.level;
  if (outcome.kind == OutcomeKind::kCycled) out << " period=" << outcome.period << " match=" << to_string(outcome.match);
  out << '\n';
  if (outcome.kind == OutcomeKind::kExhausted) return kExitExhausted;
  if (p.bounds) {
    const BoundReport r = check_theorem3(outcome, graph, quantizer);
    out << "bounds=" << (r.ok() ? "ok" : "violated") << " mean=" << r.data_mean;
    if (outcome.kind == OutcomeKind::kConverged) {
      out << " level_error=" << r.level_error << " level_bound=" << r.level_bound;
    } else {
      out << " average_gap=" << r.average_gap << " average_bound=" << r.average_bound
          << " period_sums_equal=" << r.period_sums_equal << " proximity_max=" << r.proximity_max
          << " proximity_bound=" << r.proximity_bound;
    }
    out << '\n';
  }
  return kExitOk;
}

int execute_detect(const RunManifest& manifest, const DetectParams& p, std::ostream& out, std::ostream& err,
                   int threads) {
  if (p.n_values.empty()) throw UsageError("--n is empty");
  if (p.trials < 1) throw UsageError("--trials must be >= 1");
  MonteCarloSpec spec;
  spec.model = make_model(p.model);
  spec.topology = Topology::parse(p.topology);
  spec.criterion = criterion_spec(p);
  spec.pi1 = p.pi1;
  spec.trials = p.trials;
  spec.seed = p.seed;
  spec.two_stage = p.two_stage;
  spec.schedule = parse_schedule(p.schedule);
  spec.run = run_options(p.max_iter, p.cycle_window);
  spec.check_bounds = p.check_bounds;
  spec.threads = threads;

  json j = to_json(manifest);
  if (spec.criterion.kind == CriterionSpec::Kind::kNPExponential && p.has_gamma) {
    j["derived"]["tau"] = spec.model.tau_from_gamma(p.gamma);
  }
  // Surface bad parameters before any trial runs.
  for (int n : p.n_values) make_config(spec.criterion, spec.model, n, spec.topology.edge_count(n));

  const std::string csv = p.out.empty() ? default_output("detect.csv") : p.out;
  write_manifest(csv, j);
  auto file = open_csv(csv);
  write_sweep_csv_header(file);
  std::int64_t exhausted = 0;
  for (int n : p.n_values) {
    spec.n = n;
    const SweepResult r = monte_carlo(spec);
    write_sweep_csv_row(file, r);
    exhausted += r.exhausted;
    out << "n=" << n << " pe=" << r.empirical_pe << " centralized=" << r.centralized_pe << " cycles=" << r.cycle_count
        << " exhausted=" << r.exhausted << '\n';
  }
  out << "wrote " << csv << '\n';
  if (exhausted > 0) {
    err << "warning: " << exhausted << " exhausted trials excluded from rates\n";
    return kExitExhausted;
  }
  return kExitOk;
}

int execute_sweep_time(const RunManifest& manifest, const SweepTimeParams& p, std::ostream& out, std::ostream& err,
                       int threads) {
  if (p.n_values.empty()) throw UsageError("--n is empty");
  if (p.topologies.empty()) throw UsageError("--topologies is empty");
  if (p.trials < 1) throw UsageError("--trials must be >= 1");
  const HypothesisModel model = make_model(p.model);
  std::vector<Topology> topologies;
  for (const auto& t : p.topologies) topologies.push_back(Topology::parse(t));
  const Schedule schedule = parse_schedule(p.schedule);

  const std::string csv = p.out.empty() ? default_output("sweep-time.csv") : p.out;
  write_manifest(csv, to_json(manifest));
  const auto rows = convergence_time_sweep(model, topologies, p.n_values, p.trials, p.seed, schedule,
                                           run_options(p.max_iter, p.cycle_window), threads);
  auto file = open_csv(csv);
  write_sweep_csv_header(file);
  std::int64_t exhausted = 0;
  for (const auto& r : rows) {
    write_sweep_csv_row(file, r);
    exhausted += r.exhausted;
    out << r.topology << " n=" << r.n << " mean_time=" << r.mean_convergence_time << " cycles=" << r.cycle_count
        << '\n';
  }
  out << "wrote " << csv << '\n';
  if (exhausted > 0) {
    err << "warning: " << exhausted << " exhausted trials\n";
    return kExitExhausted;
  }
  return kExitOk;
}

constexpr const char* kFormats = R"(Output formats:
  detect / sweep-time CSV columns:
    n,m,topology,schedule,trials,decided,exhausted,h1_trials,h2_trials,type1_errors,type2_errors,
    empirical_pe,empirical_alpha,empirical_beta,centralized_pe,cycle_count,converged_count,
    mean_convergence_time,confidence_halfwidth,bound_violations
  consensus --trace CSV columns: k,i,x,alpha,q
  Each CSV is written with NAME.manifest.json holding {"subcommand","version","params"};
  `qcdet replay NAME.manifest.json` re-runs it and reproduces the CSV.
  Default output directory: $QCDET_OUT_DIR, else the working directory.
Exit codes: 0 success, 2 usage error, 3 exhausted runs present.)";

}  // namespace

json to_json(const RunManifest& manifest) {
  json j;
  j["subcommand"] = manifest.subcommand;
  j["version"] = manifest.version;
  std::visit([&](const auto& p) { j["params"] = p; }, manifest.params);
  return j;
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.subcommand = j.at("subcommand").get<std::string>();
  m.version = j.value("version", std::string{});
  const json& p = j.at("params");
  if (m.subcommand == "consensus") {
    m.params = p.get<ConsensusParams>();
  } else if (m.subcommand == "detect") {
    m.params = p.get<DetectParams>();
  } else if (m.subcommand == "sweep-time") {
    m.params = p.get<SweepTimeParams>();
  } else {
    throw UsageError("unknown subcommand in manifest: '" + m.subcommand + "'");
  }
  return m;
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open manifest '" + path + "'");
  try {
    return manifest_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw UsageError("malformed manifest '" + path + "': " + e.what());
  }
}

std::vector<int> parse_range(const std::string& text) {
  std::vector<int> values;
  if (text.empty()) throw UsageError("empty range");
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw UsageError("range must be start:stop:step");
    const auto start = to_int(parts[0]);
    const auto stop = to_int(parts[1]);
    const auto step = to_int(parts[2]);
    if (step <= 0) throw UsageError("range step must be positive");
    for (auto v = start; v <= stop; v += step) values.push_back(static_cast<int>(v));
  } else {
    for (const auto& item : split(text, ',')) values.push_back(static_cast<int>(to_int(item)));
  }
  if (values.empty()) throw UsageError("range '" + text + "' is empty");
  return values;
}

std::string manifest_path(const std::string& csv_path) {
  const auto slash = csv_path.find_last_of('/');
  const auto dot = csv_path.find_last_of('.');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return (has_ext ? csv_path.substr(0, dot) : csv_path) + ".manifest.json";
}

std::string default_output(const std::string& name) {
  const char* dir = std::getenv("QCDET_OUT_DIR");
  if (dir == nullptr || *dir == '\0') return name;
  std::string d(dir);
  if (d.back() != '/') d += '/';
  return d + name;
}

int execute(const RunManifest& manifest, std::ostream& out, std::ostream& err, int threads) {
  try {
    return std::visit(
        [&](const auto& p) -> int {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, ConsensusParams>) {
            return execute_consensus(manifest, p, out);
          } else if constexpr (std::is_same_v<T, DetectParams>) {
            return execute_detect(manifest, p, out, err, threads);
          } else {
            return execute_sweep_time(manifest, p, out, err, threads);
          }
        },
        manifest.params);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    // Parameter and input validation failures are usage errors.
    return e.kind() == ErrorKind::kUndecidable ? kExitExhausted : kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantized consensus detection: single runs, Monte Carlo detection sweeps and convergence-time sweeps",
               "qcdet"};
  app.footer(kFormats);
  app.require_subcommand(1);
  app.set_version_flag("--version", QCDET_VERSION);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores); results do not depend on it")
      ->check(CLI::NonNegativeNumber);

  // consensus
  ConsensusParams cp;
  std::string data_file;
  std::string inline_values;
  auto* consensus = app.add_subcommand("consensus", "Run one consensus instance");
  consensus->add_option("--graph", cp.graph, "star:N | path:N | complete:N | random:N:M:SEED | file:PATH")
      ->capture_default_str();
  auto* data_opt = consensus->add_option("--data", data_file, "File of whitespace or comma separated values");
  auto* values_opt = consensus->add_option("--values", inline_values, "Inline comma separated values");
  data_opt->excludes(values_opt);
  consensus->add_option("--a", cp.a, "Lower quantization level")->capture_default_str();
  consensus->add_option("--big-delta", cp.big_delta, "Quantization range")->capture_default_str();
  consensus->add_option("--delta", cp.delta, "Distance of the threshold below the upper level")->capture_default_str();
  consensus->add_option("--rho", cp.rho, "Step parameter")->capture_default_str();
  consensus->add_option("--max-iter", cp.max_iter)->capture_default_str();
  consensus->add_option("--cycle-window", cp.cycle_window)->capture_default_str();
  consensus->add_flag("--bounds", cp.bounds, "Print the error-bound report");
  consensus->add_option("--trace", cp.trace, "Per-iteration CSV output");

  // detect
  DetectParams dp;
  std::string dp_n = "10";
  double gamma = std::numeric_limits<double>::quiet_NaN();
  auto* detect = app.add_subcommand("detect", "Monte Carlo detection sweep over n");
  detect->add_option("--model", dp.model, "gauss:MU1,MU2,VAR | discrete:PATH")->capture_default_str();
  detect->add_option("--criterion", dp.criterion)
      ->check(CLI::IsMember({"np-const", "map", "np-exp", "finite-n"}))
      ->capture_default_str();
  detect->add_option("--delta", dp.delta, "np-const delta (omit for the Hoeffding schedule)");
  detect->add_option("--pi1", dp.pi1, "Prior of H1")->capture_default_str();
  detect->add_flag("--prior-adjusted", dp.prior_adjusted, "MAP threshold at (1/n) ln(pi2/pi1)");
  detect->add_option("--tau", dp.tau, "np-exp threshold parameter");
  auto* gamma_opt = detect->add_option("--gamma", gamma, "np-exp type-I exponent; tau is solved from it");
  detect->add_option("--tau-star", dp.tau_star, "finite-n threshold");
  auto* rho_opt = detect->add_option("--rho", dp.rho, "finite-n rho, or a fixed rho for other criteria");
  detect->add_option("--rho-choice", dp.rho_choice)
      ->check(CLI::IsMember({"recipe", "practical", "fixed"}))
      ->capture_default_str();
  detect->add_flag("--two-stage", dp.two_stage, "First pass with rho = 1/(4m); rerun with the recipe rho on a cycle");
  detect->add_option("--cycle-policy", dp.cycle_policy)
      ->check(CLI::IsMember({"accept-h1", "reject-h1"}))
      ->capture_default_str();
  detect->add_option("--schedule", dp.schedule)->check(CLI::IsMember({"fixed", "decreasing"}))->capture_default_str();
  detect->add_option("--graph", dp.topology, "star | path | complete | random:FRACTION | random:m=EDGES")
      ->capture_default_str();
  detect->add_option("--n", dp_n, "Node counts: N, N1,N2,... or start:stop:step")->capture_default_str();
  detect->add_option("--trials", dp.trials)->capture_default_str();
  detect->add_option("--seed", dp.seed)->capture_default_str();
  detect->add_option("--max-iter", dp.max_iter)->capture_default_str();
  detect->add_option("--cycle-window", dp.cycle_window)->capture_default_str();
  detect->add_flag("--check-bounds", dp.check_bounds, "Check error bounds on every trial");
  detect->add_option("--out", dp.out, "CSV path (default $QCDET_OUT_DIR/detect.csv)");

  // sweep-time
  SweepTimeParams sp;
  std::string sp_n = "10";
  std::string sp_topologies = "star";
  auto* sweep = app.add_subcommand("sweep-time", "Mean convergence time per topology and n with rho = 1/(4m)");
  sweep->add_option("--model", sp.model)->capture_default_str();
  sweep->add_option("--topologies", sp_topologies, "Comma separated topology tags")->capture_default_str();
  sweep->add_option("--n", sp_n, "Node counts: N, N1,N2,... or start:stop:step")->capture_default_str();
  sweep->add_option("--trials", sp.trials)->capture_default_str();
  sweep->add_option("--seed", sp.seed)->capture_default_str();
  sweep->add_option("--schedule", sp.schedule)->check(CLI::IsMember({"fixed", "decreasing"}))->capture_default_str();
  sweep->add_option("--max-iter", sp.max_iter)->capture_default_str();
  sweep->add_option("--cycle-window", sp.cycle_window)->capture_default_str();
  sweep->add_option("--out", sp.out, "CSV path (default $QCDET_OUT_DIR/sweep-time.csv)");

  // replay
  std::string replay_manifest;
  std::string replay_out;
  auto* replay = app.add_subcommand("replay", "Re-run a manifest");
  replay->add_option("manifest", replay_manifest, "Manifest JSON")->required();
  replay->add_option("--out", replay_out, "Override the CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  RunManifest manifest;
  manifest.version = QCDET_VERSION;
  try {
    if (consensus->parsed()) {
      if (data_file.empty() && inline_values.empty()) throw UsageError("consensus needs --data FILE or --values LIST");
      cp.data = data_file.empty() ? parse_values(inline_values) : read_values_file(data_file);
      manifest.subcommand = "consensus";
      manifest.params = cp;
    } else if (detect->parsed()) {
      dp.n_values = parse_range(dp_n);
      if (gamma_opt->count() > 0) {
        dp.has_gamma = true;
        dp.gamma = gamma;
      }
      if (rho_opt->count() > 0 && dp.criterion != "finite-n" && dp.rho_choice == "recipe") dp.rho_choice = "fixed";
      manifest.subcommand = "detect";
      manifest.params = dp;
    } else if (sweep->parsed()) {
      sp.n_values = parse_range(sp_n);
      sp.topologies.clear();
      for (const auto& t : split(sp_topologies, ',')) {
        if (!t.empty()) sp.topologies.push_back(t);
      }
      manifest.subcommand = "sweep-time";
      manifest.params = sp;
    } else {
      manifest = read_manifest(replay_manifest);
      if (!replay_out.empty()) {
        std::visit(
            [&](auto& p) {
              if constexpr (std::is_same_v<std::decay_t<decltype(p)>, ConsensusParams>) {
                p.trace = replay_out;
              } else {
                p.out = replay_out;
              }
            },
            manifest.params);
      }
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return execute(manifest, out, err, threads);
}

}  // namespace qcdet::cli
