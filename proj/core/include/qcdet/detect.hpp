#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qcdet/consensus.hpp"
#include "qcdet/graph.hpp"
#include "qcdet/models.hpp"
#include "qcdet/quantizer.hpp"

namespace qcdet {

// Neyman-Pearson with a constant type-I constraint: a = 0, big_delta = D(P1||P2).
struct NPConstant {
  double delta = 0.0;
};

// MAP: a = -1, big_delta = 2, threshold 0, or (1/n) ln(pi2/pi1) when prior-adjusted.
struct MapCriterion {
  double pi1 = 0.5;
  double pi2 = 0.5;
  bool prior_adjusted = false;
};

// Neyman-Pearson with an exponential type-I constraint, threshold at -tau.
struct NPExponential {
  double tau = 0.0;
};

// Finite-n LLR test with threshold tau_star and a caller-chosen rho < n / (4m).
struct FiniteN {
  double tau_star = 0.0;
  double rho = 0.0;
};

using Criterion = std::variant<NPConstant, MapCriterion, NPExponential, FiniteN>;

enum class CyclePolicy { kAcceptH1, kRejectH1 };

const char* criterion_name(const Criterion& criterion);
const char* to_string(CyclePolicy policy);

struct DetectorConfig {
  DeltaQuantizer quantizer;
  double rho;
  Criterion criterion;
  CyclePolicy cycle_policy = CyclePolicy::kAcceptH1;
};

DetectorConfig np_constant_config(const HypothesisModel& model, int n, std::int64_t m, double delta);

// |alphabet| * ln(n) / n, replaced by divergence / 2 when it reaches the divergence.
double hoeffding_delta(int alphabet_size, int n, double divergence);

DetectorConfig map_config(int n, std::int64_t m, double pi1, double pi2, bool prior_adjusted);

DetectorConfig np_exponential_config(const HypothesisModel& model, int n, std::int64_t m, double tau);

DetectorConfig finite_n_config(double tau_star, int n, std::int64_t m, double rho);

// 1 / (4m): first-pass rho of the two-stage strategy.
double practical_rho(std::int64_t m);

// Recomputes rho for a criterion from (n, m, model).
double recipe_rho(const Criterion& criterion, const HypothesisModel& model, int n, std::int64_t m);

struct Decision {
  Hypothesis accepted = Hypothesis::kH2;
  OutcomeKind outcome_kind = OutcomeKind::kConverged;
  bool per_node_consistent = true;
};

// Throws Error(kUndecidable) for an Exhausted outcome.
Decision decide(const ConsensusOutcome& outcome, const DetectorConfig& config);

struct RunPolicy {
  bool two_stage = false;
  RunOptions options;
};

struct Detection {
  bool exhausted = false;
  bool cycled_first_pass = false;
  int runs = 0;
  double rho_used = 0.0;
  std::int64_t iterations = 0;  // all passes
  Decision decision;            // meaningful only when !exhausted
  ConsensusOutcome outcome;     // terminal pass
};

// One detection on local LLR data. With two_stage the first pass uses
// practical_rho(m); a cycle there triggers a rerun with config.rho.
Detection detect(const Graph& graph, std::span<const double> llr, const DetectorConfig& config,
                 const RunPolicy& policy);

struct TournamentRound {
  int incumbent = 0;
  int challenger = 0;
  int winner = 0;
  Detection detection;
};

struct MultiDecision {
  int winner = 0;  // 0-based hypothesis index
  int consensus_runs = 0;
  std::vector<TournamentRound> rounds;
};

// Sequential pairwise MAP tournament over W >= 2 hypotheses. Round (w, w')
// runs consensus on ln(p_w(y_i) / p_w'(y_i)) with a = -1, big_delta = 2 and
// the threshold at (1/n) ln(pi_w' / pi_w) (kept inside (-1, 1)). Throws
// Error(kUndecidable) when a round exhausts.
MultiDecision multi_map(std::span<const double> observations, const std::vector<Distribution>& hypotheses,
                        const std::vector<double>& priors, const Graph& graph, const RunPolicy& policy);

}  // namespace qcdet
