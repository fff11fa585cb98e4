#include "qcdet/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "qcdet/error.hpp"
#include "qcdet/rng.hpp"

namespace qcdet {

namespace {

std::int64_t max_edges(int n) { return static_cast<std::int64_t>(n) * (n - 1) / 2; }

double map_threshold(int n, double pi1) { return std::log((1.0 - pi1) / pi1) / n; }

}  // namespace

double qfunc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double centralized_gaussian_pe(int n, double pi1) {
  if (n < 1) throw Error(ErrorKind::kInvalidParameter, "n must be >= 1");
  if (!(pi1 > 0.0 && pi1 < 1.0)) throw Error(ErrorKind::kInvalidParameter, "pi1 must lie in (0, 1)");
  const double pi2 = 1.0 - pi1;
  const double shift = 5.0 / n * std::log(pi2 / pi1);
  const double scale = std::sqrt(n / 10.0);
  return pi1 * qfunc((1.0 - shift) * scale) + pi2 * qfunc((1.0 + shift) * scale);
}

double gaussian_acceptance_probability(const HypothesisModel& model, Hypothesis h, int n, double threshold) {
  if (!model.is_gaussian()) throw Error(ErrorKind::kInvalidInput, "closed form needs a Gaussian pair");
  const double d = model.kl(Direction::kOneToTwo);
  const double mean = h == Hypothesis::kH1 ? d : -d;
  const double sd = std::sqrt(2.0 * d / n);
  return qfunc((threshold - mean) / sd);
}

double centralized_threshold_pe(const HypothesisModel& model, int n, double pi1, double threshold) {
  return pi1 * (1.0 - gaussian_acceptance_probability(model, Hypothesis::kH1, n, threshold)) +
         (1.0 - pi1) * gaussian_acceptance_probability(model, Hypothesis::kH2, n, threshold);
}

Topology Topology::parse(const std::string& tag) {
  Topology t;
  if (tag == "star") return t;
  if (tag == "path") {
    t.kind = Kind::kPath;
    return t;
  }
  if (tag == "complete") {
    t.kind = Kind::kComplete;
    return t;
  }
  if (tag.rfind("random:", 0) == 0) {
    const std::string arg = tag.substr(7);
    try {
      std::size_t used = 0;
      if (arg.rfind("m=", 0) == 0) {
        t.kind = Kind::kRandomEdges;
        t.edges = std::stoll(arg.substr(2), &used);
        if (used == arg.size() - 2 && t.edges > 0) return t;
      } else {
        t.kind = Kind::kRandomDensity;
        t.density = std::stod(arg, &used);
        if (used == arg.size() && t.density >= 0.0 && t.density <= 1.0) return t;
      }
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorKind::kInvalidInput, "unknown topology '" + tag + "'");
}

std::string Topology::tag() const {
  switch (kind) {
    case Kind::kStar: return "star";
    case Kind::kPath: return "path";
    case Kind::kComplete: return "complete";
    case Kind::kRandomDensity: {
      std::ostringstream os;
      os << "random:" << density;
      return os.str();
    }
    case Kind::kRandomEdges: return "random:m=" + std::to_string(edges);
  }
  return "?";
}

std::int64_t Topology::edge_count(int n) const {
  switch (kind) {
    case Kind::kStar:
    case Kind::kPath: return n - 1;
    case Kind::kComplete: return max_edges(n);
    case Kind::kRandomDensity:
      return std::clamp<std::int64_t>(std::llround(density * static_cast<double>(max_edges(n))), n - 1, max_edges(n));
    case Kind::kRandomEdges: return edges;
  }
  return 0;
}

Graph Topology::make(int n, std::uint64_t seed) const {
  switch (kind) {
    case Kind::kStar: return star(n);
    case Kind::kPath: return path(n);
    case Kind::kComplete: return complete(n);
    default: return random_connected(n, edge_count(n), seed);
  }
}

CriterionSpec::Kind CriterionSpec::parse_kind(const std::string& name) {
  if (name == "np-const") return Kind::kNPConstant;
  if (name == "map") return Kind::kMap;
  if (name == "np-exp") return Kind::kNPExponential;
  if (name == "finite-n") return Kind::kFiniteN;
  throw Error(ErrorKind::kInvalidInput, "unknown criterion '" + name + "'");
}

std::string CriterionSpec::kind_name(Kind kind) {
  switch (kind) {
    case Kind::kNPConstant: return "np-const";
    case Kind::kMap: return "map";
    case Kind::kNPExponential: return "np-exp";
    case Kind::kFiniteN: return "finite-n";
  }
  return "?";
}

DetectorConfig make_config(const CriterionSpec& spec, const HypothesisModel& model, int n, std::int64_t m) {
  DetectorConfig config = [&] {
    switch (spec.kind) {
      case CriterionSpec::Kind::kNPConstant: {
        const double d12 = model.kl(Direction::kOneToTwo);
        double delta = spec.delta;
        if (delta <= 0.0) {
          if (model.alphabet_size() < 2) {
            throw Error(ErrorKind::kInvalidParameter, "Hoeffding delta needs a finite alphabet; pass delta");
          }
          delta = hoeffding_delta(model.alphabet_size(), n, d12);
        }
        return np_constant_config(model, n, m, delta);
      }
      case CriterionSpec::Kind::kMap: return map_config(n, m, spec.pi1, 1.0 - spec.pi1, spec.prior_adjusted);
      case CriterionSpec::Kind::kNPExponential:
        return np_exponential_config(model, n, m, spec.gamma ? model.tau_from_gamma(*spec.gamma) : spec.tau);
      case CriterionSpec::Kind::kFiniteN: return finite_n_config(spec.tau_star, n, m, spec.rho_value);
    }
    throw Error(ErrorKind::kInvalidParameter, "unknown criterion");
  }();
  config.cycle_policy = spec.cycle_policy;
  if (spec.rho_choice == RhoChoice::kPractical) config.rho = practical_rho(m);
  if (spec.rho_choice == RhoChoice::kFixed) {
    if (!(spec.rho_value > 0.0)) throw Error(ErrorKind::kInvalidParameter, "fixed rho must be positive");
    config.rho = spec.rho_value;
  }
  return config;
}

int warmup_stage_count(int n) {
  if (n < 1) throw Error(ErrorKind::kInvalidParameter, "n must be >= 1");
  int stages = 0;
  std::int64_t power = 1;
  while (power < 4LL * n) {
    power *= 10;
    ++stages;
  }
  return stages;
}

ScheduledOutcome decreasing_rho_run(const Graph& graph, std::span<const double> data, const DeltaQuantizer& quantizer,
                                    const RunOptions& options) {
  const int n = graph.node_count();
  const auto m = static_cast<double>(graph.edge_count());
  const auto rho_at = [&](int stage) { return static_cast<double>(n) / (m * std::pow(10.0, stage)); };

  ScheduledOutcome out;
  auto state = init(graph, data, quantizer, rho_at(0));
  if (options.observer) options.observer(state);
  const int stages = warmup_stage_count(n);
  for (int s = 0; s < stages; ++s) {
    state.set_rho(rho_at(s));
    for (int it = 0; it < 50; ++it) {
      advance(state, graph, quantizer);
      if (options.observer) options.observer(state);
    }
    out.stages.push_back({rho_at(s), 50});
    out.warmup_iterations += 50;
  }
  state.set_rho(rho_at(stages));
  RunOptions final_options = options;
  if (final_options.observer) {
    // run_from reports its starting state again; skip that duplicate.
    final_options.observer = [first = true, inner = options.observer](const ConsensusState& s) mutable {
      if (first) {
        first = false;
        return;
      }
      inner(s);
    };
  }
  out.outcome = run_from(std::move(state), graph, quantizer, final_options);
  out.stages.push_back({rho_at(stages), out.outcome.iterations});
  out.total_iterations = out.warmup_iterations + out.outcome.iterations;
  return out;
}

namespace {

TrialRecord run_trial(const MonteCarloSpec& spec, std::int64_t trial, const Graph* fixed_graph,
                      const DetectorConfig& config) {
  std::mt19937_64 rng(derive_seed(spec.seed, 0, static_cast<std::uint64_t>(trial)));
  TrialRecord rec;
  rec.trial_id = trial;
  rec.truth = std::bernoulli_distribution(spec.pi1)(rng) ? Hypothesis::kH1 : Hypothesis::kH2;
  const std::uint64_t graph_seed = rng();
  const Graph graph = fixed_graph ? *fixed_graph : spec.topology.make(spec.n, graph_seed);

  const auto obs = spec.model.sample(rec.truth, spec.n, rng);
  std::vector<double> llr(obs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    llr[i] = spec.model.llr(obs[i]);
    total += llr[i];
  }
  rec.data_mean = total / spec.n;

  ConsensusOutcome terminal;
  if (spec.schedule == Schedule::kDecreasing) {
    auto sched = decreasing_rho_run(graph, llr, config.quantizer, spec.run);
    rec.rho_used = sched.outcome.final_state.rho();
    rec.iterations_to_terminal = sched.total_iterations;
    rec.cycled_first_pass = sched.outcome.kind == OutcomeKind::kCycled;
    terminal = std::move(sched.outcome);
  } else {
    auto det = detect(graph, llr, config, RunPolicy{spec.two_stage, spec.run});
    rec.rho_used = det.rho_used;
    rec.iterations_to_terminal = det.outcome.iterations;
    rec.cycled_first_pass = det.cycled_first_pass || (!spec.two_stage && det.outcome.kind == OutcomeKind::kCycled);
    terminal = std::move(det.outcome);
  }
  rec.outcome_kind = terminal.kind;
  rec.exhausted = terminal.kind == OutcomeKind::kExhausted;
  if (!rec.exhausted) {
    rec.decision = decide(terminal, config).accepted;
    if (spec.check_bounds) rec.bounds_ok = check_theorem3(terminal, graph, config.quantizer).ok();
  }
  return rec;
}

}  // namespace

SweepResult aggregate(const MonteCarloSpec& spec, std::span<const TrialRecord> records, std::int64_t m) {
  SweepResult res;
  res.n = spec.n;
  res.m = m;
  res.topology = spec.topology.tag();
  res.schedule = spec.schedule == Schedule::kDecreasing ? "decreasing" : (spec.two_stage ? "two-stage" : "fixed");
  res.trials = static_cast<std::int64_t>(records.size());
  double time_total = 0.0;
  for (const auto& r : records) {
    if (r.cycled_first_pass) ++res.cycle_count;
    if (r.exhausted) {
      ++res.exhausted;
      continue;
    }
    ++res.decided;
    if (!r.bounds_ok) ++res.bound_violations;
    if (r.outcome_kind == OutcomeKind::kConverged) {
      ++res.converged_count;
      time_total += static_cast<double>(r.iterations_to_terminal);
    }
    if (r.truth == Hypothesis::kH1) {
      ++res.h1_trials;
      if (r.decision != Hypothesis::kH1) ++res.type1_errors;
    } else {
      ++res.h2_trials;
      if (r.decision != Hypothesis::kH2) ++res.type2_errors;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto ratio = [nan](std::int64_t a, std::int64_t b) {
    return b > 0 ? static_cast<double>(a) / static_cast<double>(b) : nan;
  };
  res.empirical_pe = ratio(res.type1_errors + res.type2_errors, res.decided);
  res.empirical_alpha = ratio(res.type1_errors, res.h1_trials);
  res.empirical_beta = ratio(res.type2_errors, res.h2_trials);
  res.mean_convergence_time = res.converged_count > 0 ? time_total / static_cast<double>(res.converged_count) : nan;
  res.confidence_halfwidth =
      res.decided > 0 ? 1.96 * std::sqrt(res.empirical_pe * (1.0 - res.empirical_pe) / static_cast<double>(res.decided))
                      : nan;

  res.centralized_pe = nan;
  if (spec.model.is_gaussian()) {
    switch (spec.criterion.kind) {
      case CriterionSpec::Kind::kMap:
        res.centralized_pe = centralized_threshold_pe(spec.model, spec.n, spec.pi1, map_threshold(spec.n, spec.pi1));
        break;
      case CriterionSpec::Kind::kNPExponential: {
        const double tau = spec.criterion.gamma ? spec.model.tau_from_gamma(*spec.criterion.gamma) : spec.criterion.tau;
        res.centralized_pe = centralized_threshold_pe(spec.model, spec.n, spec.pi1, -tau);
        break;
      }
      case CriterionSpec::Kind::kFiniteN:
        res.centralized_pe = centralized_threshold_pe(spec.model, spec.n, spec.pi1, spec.criterion.tau_star);
        break;
      case CriterionSpec::Kind::kNPConstant:
        break;
    }
  }
  return res;
}

SweepResult monte_carlo(const MonteCarloSpec& spec, std::vector<TrialRecord>* records) {
  if (spec.trials < 1) throw Error(ErrorKind::kInvalidParameter, "trials must be >= 1");
  if (!(spec.pi1 > 0.0 && spec.pi1 < 1.0)) throw Error(ErrorKind::kInvalidParameter, "pi1 must lie in (0, 1)");
  const std::int64_t m = spec.topology.edge_count(spec.n);
  std::optional<Graph> fixed;
  if (!spec.topology.is_random()) fixed.emplace(spec.topology.make(spec.n, 0));
  const DetectorConfig config = make_config(spec.criterion, spec.model, spec.n, m);

  std::vector<TrialRecord> out(static_cast<std::size_t>(spec.trials));
  const Graph* fixed_ptr = fixed ? &*fixed : nullptr;
  int workers = spec.threads > 0 ? spec.threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = static_cast<int>(std::clamp<std::int64_t>(workers, 1, spec.trials));
  if (workers == 1) {
    for (std::int64_t t = 0; t < spec.trials; ++t) out[t] = run_trial(spec, t, fixed_ptr, config);
  } else {
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::int64_t t = next++; t < spec.trials && !failed; t = next++) {
            out[t] = run_trial(spec, t, fixed_ptr, config);
          }
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  SweepResult res = aggregate(spec, out, m);
  if (records) *records = std::move(out);
  return res;
}

std::vector<SweepResult> convergence_time_sweep(const HypothesisModel& model, const std::vector<Topology>& topologies,
                                                const std::vector<int>& n_values, std::int64_t trials,
                                                std::uint64_t seed, Schedule schedule, const RunOptions& run,
                                                int threads) {
  if (topologies.empty() || n_values.empty()) throw Error(ErrorKind::kInvalidParameter, "empty sweep grid");
  std::vector<SweepResult> results;
  for (std::size_t ti = 0; ti < topologies.size(); ++ti) {
    for (int n : n_values) {
      MonteCarloSpec spec;
      spec.model = model;
      spec.topology = topologies[ti];
      spec.n = n;
      spec.criterion.kind = CriterionSpec::Kind::kMap;
      spec.criterion.rho_choice = RhoChoice::kPractical;
      spec.pi1 = 0.5;
      spec.trials = trials;
      spec.seed = derive_seed(seed, ti + 1, static_cast<std::uint64_t>(n));
      spec.schedule = schedule;
      spec.run = run;
      spec.threads = threads;
      results.push_back(monte_carlo(spec));
    }
  }
  return results;
}

void write_sweep_csv_header(std::ostream& out) {
  out << "n,m,topology,schedule,trials,decided,exhausted,h1_trials,h2_trials,type1_errors,type2_errors,"
         "empirical_pe,empirical_alpha,empirical_beta,centralized_pe,cycle_count,converged_count,"
         "mean_convergence_time,confidence_halfwidth,bound_violations\n";
}

void write_sweep_csv_row(std::ostream& out, const SweepResult& r) {
  const auto old = out.precision(17);
  out << r.n << ',' << r.m << ',' << r.topology << ',' << r.schedule << ',' << r.trials << ',' << r.decided << ','
      << r.exhausted << ',' << r.h1_trials << ',' << r.h2_trials << ',' << r.type1_errors << ',' << r.type2_errors
      << ',' << r.empirical_pe << ',' << r.empirical_alpha << ',' << r.empirical_beta << ',' << r.centralized_pe
      << ',' << r.cycle_count << ',' << r.converged_count << ',' << r.mean_convergence_time << ','
      << r.confidence_halfwidth << ',' << r.bound_violations << '\n';
  out.precision(old);
}

}  // namespace qcdet
