#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcdet/consensus.hpp"
#include "qcdet/detect.hpp"
#include "qcdet/graph.hpp"
#include "qcdet/models.hpp"

namespace qcdet {

/// Standard normal upper tail, Q(x) = P(Z > x).
double qfunc(double x);

/// Optimal centralized Bayesian error for the N(1,10) vs N(-1,10) example:
///   pi1 Q((1 - (5/n) ln(pi2/pi1)) sqrt(n/10)) + pi2 Q((1 + (5/n) ln(pi2/pi1)) sqrt(n/10))
double centralized_gaussian_pe(int n, double pi1);

/// Centralized error of the test "mean LLR > threshold" for a Gaussian pair,
/// where the mean LLR is N(+D, 2D/n) under H1 and N(-D, 2D/n) under H2.
double centralized_threshold_pe(const HypothesisModel& model, int n, double pi1, double threshold);

/// P(mean LLR > threshold) under hypothesis h for a Gaussian pair.
double gaussian_acceptance_probability(const HypothesisModel& model, Hypothesis h, int n, double threshold);

// Network topology family; `make` builds an n-node instance.
struct Topology {
  enum class Kind { kStar, kPath, kComplete, kRandomDensity, kRandomEdges };
  Kind kind = Kind::kStar;
  double density = 0.0;      // kRandomDensity: fraction of n(n-1)/2, at least n-1 edges
  std::int64_t edges = 0;    // kRandomEdges

  // star | path | complete | random:<fraction> | random:m=<edges>
  static Topology parse(const std::string& tag);
  std::string tag() const;
  bool is_random() const noexcept { return kind == Kind::kRandomDensity || kind == Kind::kRandomEdges; }
  std::int64_t edge_count(int n) const;
  Graph make(int n, std::uint64_t seed) const;
};

// How each trial picks rho.
enum class RhoChoice {
  kRecipe,     // the criterion's own rho
  kPractical,  // 1 / (4m)
  kFixed,      // CriterionSpec::rho_value
};

enum class Schedule { kFixed, kDecreasing };

// Criterion with its parameters, resolved into a DetectorConfig per (n, m).
struct CriterionSpec {
  enum class Kind { kNPConstant, kMap, kNPExponential, kFiniteN };
  Kind kind = Kind::kMap;
  double delta = 0.0;            // np-const; <= 0 selects the Hoeffding schedule
  double pi1 = 0.5;              // map priors
  bool prior_adjusted = false;   // map
  double tau = 0.0;              // np-exp
  std::optional<double> gamma;   // np-exp: tau solved from gamma when set
  double tau_star = 0.0;         // finite-n
  RhoChoice rho_choice = RhoChoice::kRecipe;
  double rho_value = 0.0;        // finite-n rho, or the kFixed value
  CyclePolicy cycle_policy = CyclePolicy::kAcceptH1;

  static Kind parse_kind(const std::string& name);
  static std::string kind_name(Kind kind);
};

DetectorConfig make_config(const CriterionSpec& spec, const HypothesisModel& model, int n, std::int64_t m);

struct TrialRecord {
  std::int64_t trial_id = 0;
  Hypothesis truth = Hypothesis::kH1;
  OutcomeKind outcome_kind = OutcomeKind::kExhausted;
  bool exhausted = false;
  Hypothesis decision = Hypothesis::kH2;
  std::int64_t iterations_to_terminal = 0;
  double rho_used = 0.0;
  bool cycled_first_pass = false;
  double data_mean = 0.0;
  bool bounds_ok = true;  // check_theorem3 on the terminal run (when requested)
};

struct SweepResult {
  int n = 0;
  std::int64_t m = 0;  // edges of the last generated graph
  std::string topology;
  std::string schedule;
  std::int64_t trials = 0;
  std::int64_t decided = 0;
  std::int64_t exhausted = 0;
  std::int64_t h1_trials = 0;  // decided trials with H1 true
  std::int64_t h2_trials = 0;
  std::int64_t type1_errors = 0;
  std::int64_t type2_errors = 0;
  double empirical_pe = 0.0;
  double empirical_alpha = 0.0;
  double empirical_beta = 0.0;
  double centralized_pe = 0.0;  // NaN when no closed form applies
  std::int64_t cycle_count = 0;  // first-pass cycles
  std::int64_t converged_count = 0;
  double mean_convergence_time = 0.0;  // terminal-run iterations, converged trials only
  double confidence_halfwidth = 0.0;   // 95% binomial on empirical_pe
  std::int64_t bound_violations = 0;
};

struct MonteCarloSpec {
  HypothesisModel model = HypothesisModel::gaussian(1.0, -1.0, 10.0);
  Topology topology;
  int n = 10;
  CriterionSpec criterion;
  double pi1 = 0.5;  // prior used to draw the true hypothesis
  std::int64_t trials = 10'000;
  std::uint64_t seed = 1;
  bool two_stage = false;
  Schedule schedule = Schedule::kFixed;
  RunOptions run;
  bool check_bounds = false;
  int threads = 0;  // 0: hardware concurrency
};

// Trials are independent (seeded by trial index) and aggregated in trial order.
SweepResult monte_carlo(const MonteCarloSpec& spec, std::vector<TrialRecord>* records = nullptr);

SweepResult aggregate(const MonteCarloSpec& spec, std::span<const TrialRecord> records, std::int64_t m);

// Mean iterations to convergence with rho = 1/(4m) on the plain MAP quantizer,
// per (topology, n); cyclic runs are counted but left out of the mean.
std::vector<SweepResult> convergence_time_sweep(const HypothesisModel& model, const std::vector<Topology>& topologies,
                                                const std::vector<int>& n_values, std::int64_t trials,
                                                std::uint64_t seed, Schedule schedule = Schedule::kFixed,
                                                const RunOptions& run = {}, int threads = 0);

struct ScheduleStage {
  double rho = 0.0;
  std::int64_t iterations = 0;
};

struct ScheduledOutcome {
  ConsensusOutcome outcome;  // final stage
  std::vector<ScheduleStage> stages;
  std::int64_t warmup_iterations = 0;
  std::int64_t total_iterations = 0;
};

// Starts at rho = n/m and runs 50 iterations per stage while rho > 1/(4m),
// dividing rho by 10 between stages; then runs to a terminal state with the
// first rho <= 1/(4m). (x, alpha) carry over across stages.
ScheduledOutcome decreasing_rho_run(const Graph& graph, std::span<const double> data, const DeltaQuantizer& quantizer,
                                    const RunOptions& options = {});

// Number of warm-up stages: smallest s with 10^s >= 4n.
int warmup_stage_count(int n);

void write_sweep_csv_header(std::ostream& out);
void write_sweep_csv_row(std::ostream& out, const SweepResult& result);

}  // namespace qcdet
