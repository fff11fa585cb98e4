#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "qcdet/graph.hpp"
#include "qcdet/quantizer.hpp"

namespace qcdet {

// Full protocol state at iteration k: primal x, dual alpha, fixed local data r,
// step parameter rho, and the quantized snapshot Q(x^k).
//
// The dual increment of every step is rho * big_delta times an integer (each
// neighbor term Q(x_i) - Q(x_j) is 0 or +-big_delta), so alpha is kept as
// alpha_base + rho * big_delta * units with integer units. This keeps
// sum(alpha) free of accumulated rounding and makes a revisited discrete
// state reproduce x and alpha bit for bit.
class ConsensusState {
 public:
  ConsensusState() = default;

  int node_count() const noexcept { return static_cast<int>(x_.size()); }
  std::int64_t iteration() const noexcept { return k_; }
  double rho() const noexcept { return rho_; }
  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> alpha() const noexcept { return alpha_; }
  std::span<const double> data() const noexcept { return r_; }
  std::span<const double> quantized() const noexcept { return quantized_; }
  std::span<const std::uint8_t> upper_bits() const noexcept { return upper_; }
  // alpha = alpha_base + rho * big_delta * alpha_units, units exact.
  std::span<const std::int64_t> alpha_units() const noexcept { return alpha_units_; }

  // Changes rho for subsequent steps; x and alpha carry over unchanged.
  void set_rho(double rho);

  // (x, alpha) comparison, bit for bit.
  bool same_point(const ConsensusState& other) const noexcept;

 private:
  friend ConsensusState init(const Graph&, std::span<const double>, const DeltaQuantizer&, double);
  friend void advance(ConsensusState&, const Graph&, const DeltaQuantizer&);

  std::vector<double> x_;
  std::vector<double> alpha_;
  std::vector<double> r_;
  std::vector<double> quantized_;
  std::vector<std::uint8_t> upper_;
  std::vector<double> alpha_base_;
  std::vector<std::int64_t> alpha_units_;
  std::vector<double> scratch_;
  double rho_ = 0.0;
  std::int64_t k_ = 0;
};

// x = 0, alpha = 0, k = 0. Throws on length mismatch, rho <= 0 or non-finite data.
ConsensusState init(const Graph& graph, std::span<const double> data, const DeltaQuantizer& quantizer,
                    double rho);

// One synchronous iteration in place: every x_i from the k-snapshot of
// quantized values, then every alpha_i from the fresh (k+1)-snapshot.
// Neighbor sums run in ascending neighbor order.
void advance(ConsensusState& state, const Graph& graph, const DeltaQuantizer& quantizer);

// Value form of advance().
ConsensusState step(ConsensusState state, const Graph& graph, const DeltaQuantizer& quantizer);

double alpha_sum(const ConsensusState& state);

// 1e-9 * n * max(max_i |r_i|, big_delta)
double alpha_sum_tolerance(const ConsensusState& state, const DeltaQuantizer& quantizer);

enum class OutcomeKind { kConverged, kCycled, kExhausted };
enum class MatchType { kNone, kBitExact, kTolerance };

const char* to_string(OutcomeKind kind);
const char* to_string(MatchType match);

struct ConsensusOutcome {
  OutcomeKind kind = OutcomeKind::kExhausted;
  double level = 0.0;       // Converged only
  bool upper = false;       // Converged only: level == quantizer.upper()
  std::int64_t period = 0;  // Cycled only, >= 2
  std::int64_t iterations = 0;  // steps executed by this run
  std::int64_t k0 = -1;         // iteration at which the terminal regime was entered
  MatchType match = MatchType::kNone;
  ConsensusState final_state;
};

struct RunOptions {
  std::int64_t max_iter = 1'000'000;
  int cycle_window = 256;
  double cycle_tolerance = 1e-9;
  // Called with the initial state and after every step.
  std::function<void(const ConsensusState&)> observer;
  // Steps once past a convergence certificate and throws if (x, alpha) moved.
  bool verify_fixed_point = false;
};

ConsensusOutcome run(const Graph& graph, std::span<const double> data, const DeltaQuantizer& quantizer,
                     double rho, const RunOptions& options = {});

// Continues from an arbitrary state (used by rho schedules).
ConsensusOutcome run_from(ConsensusState state, const Graph& graph, const DeltaQuantizer& quantizer,
                          const RunOptions& options = {});

struct BoundReport {
  OutcomeKind kind = OutcomeKind::kExhausted;
  MatchType match = MatchType::kNone;
  double data_mean = 0.0;

  // Converged: |level - project(mean)| against (1 + 4 rho m / n) * (big_delta - delta)
  // at the lower level (<=) or (1 + 4 rho m / n) * delta at the upper level (<).
  bool level_bound_ok = true;
  double level_error = 0.0;
  double level_bound = 0.0;

  // Cycled.
  bool average_bound_ok = true;  // |mean - threshold| < 6 rho n big_delta
  double average_gap = 0.0;
  double average_bound = 0.0;
  bool period_sums_equal = true;  // per-node sums of Q over one period
  bool recurrence_ok = true;      // state after `period` steps equals the start
  bool proximity_ok = true;       // |x_i - threshold| < 3 rho n big_delta / (1 + 2 rho n)
  bool node_proximity_ok = true;  // same with the node's own degree, <=
  double proximity_max = 0.0;
  double proximity_bound = 0.0;

  bool ok() const noexcept {
    return level_bound_ok && average_bound_ok && period_sums_equal && proximity_ok && node_proximity_ok;
  }
};

// Throws Error(kNotApplicable) for an Exhausted outcome.
BoundReport check_theorem3(const ConsensusOutcome& outcome, const Graph& graph, const DeltaQuantizer& quantizer);

// CSV trace rows "k,i,x,alpha,q"; header written on construction.
class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out);
  void operator()(const ConsensusState& state);

 private:
  std::ostream* out_;
};

}  // namespace qcdet
