#include "qcdet/detect.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qcdet/error.hpp"

namespace qcdet {

namespace {

void require_network(int n, std::int64_t m) {
  if (n < 2) throw Error(ErrorKind::kInvalidParameter, "n must be >= 2");
  const std::int64_t max_m = static_cast<std::int64_t>(n) * (n - 1) / 2;
  if (m < n - 1 || m > max_m) throw Error(ErrorKind::kInvalidParameter, "m must lie in [n-1, n(n-1)/2]");
}

void require_priors(double pi1, double pi2) {
  if (!(pi1 > 0.0) || !(pi2 > 0.0) || std::abs(pi1 + pi2 - 1.0) > 1e-12) {
    throw Error(ErrorKind::kInvalidParameter, "priors must be positive and sum to 1");
  }
}

double map_rho(int n) { return 1.0 / (12.0 * static_cast<double>(n) * n); }

double np_constant_rho(double delta, double divergence, int n, std::int64_t m) {
  return std::min(delta / (6.0 * n * divergence), static_cast<double>(n) / (4.0 * static_cast<double>(m)));
}

double np_exponential_rho(const HypothesisModel& model, int n) {
  const double span = model.kl(Direction::kOneToTwo) + model.kl(Direction::kTwoToOne);
  return 1.0 / (6.0 * static_cast<double>(n) * n * span);
}

}  // namespace

const char* criterion_name(const Criterion& criterion) {
  switch (criterion.index()) {
    case 0: return "np-const";
    case 1: return "map";
    case 2: return "np-exp";
    default: return "finite-n";
  }
}

const char* to_string(CyclePolicy policy) {
  return policy == CyclePolicy::kAcceptH1 ? "accept-h1" : "reject-h1";
}

DetectorConfig np_constant_config(const HypothesisModel& model, int n, std::int64_t m, double delta) {
  require_network(n, m);
  const double divergence = model.kl(Direction::kOneToTwo);
  if (!(delta > 0.0 && delta < divergence)) {
    throw Error(ErrorKind::kInvalidParameter, "delta must lie in (0, D(P1||P2))");
  }
  return {DeltaQuantizer(0.0, divergence, delta), np_constant_rho(delta, divergence, n, m), NPConstant{delta}};
}

double hoeffding_delta(int alphabet_size, int n, double divergence) {
  if (alphabet_size < 2 || n < 2) throw Error(ErrorKind::kInvalidParameter, "need alphabet_size >= 2 and n >= 2");
  const double value = alphabet_size * std::log(static_cast<double>(n)) / n;
  return value >= divergence ? divergence / 2.0 : value;
}

DetectorConfig map_config(int n, std::int64_t m, double pi1, double pi2, bool prior_adjusted) {
  require_network(n, m);
  require_priors(pi1, pi2);
  MapCriterion criterion{pi1, pi2, prior_adjusted};
  if (!prior_adjusted) return {DeltaQuantizer(-1.0, 2.0, 1.0), map_rho(n), criterion};
  if (n < 4) throw Error(ErrorKind::kInvalidParameter, "prior-adjusted MAP needs n >= 4");
  const double threshold = std::log(pi2 / pi1) / n;
  const double delta = 1.0 - threshold;
  if (!(delta > 0.0 && delta < 2.0)) {
    throw Error(ErrorKind::kInvalidParameter, "prior-adjusted delta falls outside (0, 2)");
  }
  return {DeltaQuantizer::with_threshold(-1.0, 2.0, threshold), map_rho(n), criterion};
}

DetectorConfig np_exponential_config(const HypothesisModel& model, int n, std::int64_t m, double tau) {
  require_network(n, m);
  const double d12 = model.kl(Direction::kOneToTwo);
  const double d21 = model.kl(Direction::kTwoToOne);
  if (!(tau > -d12 && tau < d21)) {
    throw Error(ErrorKind::kInvalidParameter, "tau must lie in (-D(P1||P2), D(P2||P1))");
  }
  return {DeltaQuantizer::with_threshold(-d21, d12 + d21, -tau), np_exponential_rho(model, n), NPExponential{tau}};
}

DetectorConfig finite_n_config(double tau_star, int n, std::int64_t m, double rho) {
  require_network(n, m);
  if (!std::isfinite(tau_star)) throw Error(ErrorKind::kInvalidParameter, "tau_star must be finite");
  if (!(rho > 0.0 && rho < static_cast<double>(n) / (4.0 * static_cast<double>(m)))) {
    throw Error(ErrorKind::kInvalidParameter, "rho must lie in (0, n / (4m))");
  }
  return {DeltaQuantizer::with_threshold(tau_star - 1.0, 2.0, tau_star), rho, FiniteN{tau_star, rho}};
}

double practical_rho(std::int64_t m) { return 1.0 / (4.0 * static_cast<double>(m)); }

double recipe_rho(const Criterion& criterion, const HypothesisModel& model, int n, std::int64_t m) {
  if (const auto* c = std::get_if<NPConstant>(&criterion)) {
    return np_constant_rho(c->delta, model.kl(Direction::kOneToTwo), n, m);
  }
  if (std::holds_alternative<MapCriterion>(criterion)) return map_rho(n);
  if (std::holds_alternative<NPExponential>(criterion)) return np_exponential_rho(model, n);
  return std::get<FiniteN>(criterion).rho;
}

Decision decide(const ConsensusOutcome& outcome, const DetectorConfig& config) {
  Decision d;
  d.outcome_kind = outcome.kind;
  switch (outcome.kind) {
    case OutcomeKind::kExhausted:
      throw Error(ErrorKind::kUndecidable, "consensus did not reach a terminal state");
    case OutcomeKind::kConverged: {
      d.accepted = outcome.upper ? Hypothesis::kH1 : Hypothesis::kH2;
      const auto bits = outcome.final_state.upper_bits();
      d.per_node_consistent = std::all_of(bits.begin(), bits.end(), [&](auto b) { return b == bits.front(); });
      break;
    }
    case OutcomeKind::kCycled:
      d.accepted = config.cycle_policy == CyclePolicy::kAcceptH1 ? Hypothesis::kH1 : Hypothesis::kH2;
      d.per_node_consistent = outcome.period >= 2;
      break;
  }
  return d;
}

Detection detect(const Graph& graph, std::span<const double> llr, const DetectorConfig& config,
                 const RunPolicy& policy) {
  Detection det;
  auto state = init(graph, llr, config.quantizer, config.rho);
  if (policy.two_stage) {
    det.rho_used = practical_rho(graph.edge_count());
    state.set_rho(det.rho_used);
    det.outcome = run_from(state, graph, config.quantizer, policy.options);
    det.runs = 1;
    det.iterations = det.outcome.iterations;
    if (det.outcome.kind != OutcomeKind::kCycled) {
      det.exhausted = det.outcome.kind == OutcomeKind::kExhausted;
      if (!det.exhausted) det.decision = decide(det.outcome, config);
      return det;
    }
    det.cycled_first_pass = true;
    state = init(graph, llr, config.quantizer, config.rho);
  }
  det.rho_used = config.rho;
  det.outcome = run_from(std::move(state), graph, config.quantizer, policy.options);
  ++det.runs;
  det.iterations += det.outcome.iterations;
  det.exhausted = det.outcome.kind == OutcomeKind::kExhausted;
  if (!det.exhausted) det.decision = decide(det.outcome, config);
  return det;
}

MultiDecision multi_map(std::span<const double> observations, const std::vector<Distribution>& hypotheses,
                        const std::vector<double>& priors, const Graph& graph, const RunPolicy& policy) {
  const std::size_t count = hypotheses.size();
  if (count < 2) throw Error(ErrorKind::kInvalidParameter, "need at least two hypotheses");
  if (priors.size() != count) throw Error(ErrorKind::kInvalidParameter, "one prior per hypothesis");
  double total = 0.0;
  for (double p : priors) {
    if (!(p > 0.0)) throw Error(ErrorKind::kInvalidParameter, "priors must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorKind::kInvalidParameter, "priors must sum to 1");
  const int n = graph.node_count();
  if (observations.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorKind::kInvalidInput, "one observation per node");
  }

  MultiDecision out;
  std::vector<double> llr(n);
  int incumbent = 0;
  for (int challenger = 1; challenger < static_cast<int>(count); ++challenger) {
    for (int i = 0; i < n; ++i) {
      llr[i] = log_density(hypotheses[incumbent], observations[i]) -
               log_density(hypotheses[challenger], observations[i]);
    }
    // Keep the threshold strictly inside (a, a + big_delta) = (-1, 1).
    const double edge = std::nextafter(1.0, 0.0);
    const double threshold = std::clamp(std::log(priors[challenger] / priors[incumbent]) / n, -edge, edge);
    DetectorConfig config{DeltaQuantizer::with_threshold(-1.0, 2.0, threshold), map_rho(n),
                          MapCriterion{priors[incumbent] / (priors[incumbent] + priors[challenger]),
                                       priors[challenger] / (priors[incumbent] + priors[challenger]), true}};
    TournamentRound round{incumbent, challenger, incumbent, detect(graph, llr, config, policy)};
    out.consensus_runs += round.detection.runs;
    if (round.detection.exhausted) {
      throw Error(ErrorKind::kUndecidable, "tournament round " + std::to_string(challenger) + " (" +
                                               std::to_string(incumbent) + " vs " + std::to_string(challenger) +
                                               ") exhausted after " + std::to_string(out.rounds.size()) +
                                               " completed rounds");
    }
    if (round.detection.decision.accepted == Hypothesis::kH2) incumbent = challenger;
    round.winner = incumbent;
    out.rounds.push_back(std::move(round));
  }
  out.winner = incumbent;
  return out;
}

}  // namespace qcdet
