#include "qcdet/consensus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <ostream>
#include <string>

#include "qcdet/error.hpp"

namespace qcdet {

namespace {

void refresh_alpha(std::vector<double>& alpha, const std::vector<double>& base,
                   const std::vector<std::int64_t>& units, double scale) {
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    alpha[i] = base[i] + scale * static_cast<double>(units[i]);
  }
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::uint64_t hash_values(std::span<const double> x) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : x) h = mix(h, std::bit_cast<std::uint64_t>(v));
  return h;
}

std::uint64_t hash_units(std::span<const std::int64_t> units) {
  std::uint64_t h = 0x2545f4914f6cdd1dULL;
  for (std::int64_t u : units) h = mix(h, static_cast<std::uint64_t>(u));
  return h;
}

std::uint64_t hash_bits(std::span<const std::uint8_t> bits) {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  std::uint64_t word = 0;
  int filled = 0;
  for (std::uint8_t b : bits) {
    word = (word << 1) | b;
    if (++filled == 64) {
      h = mix(h, word);
      word = 0;
      filled = 0;
    }
  }
  return mix(h, word ^ static_cast<std::uint64_t>(bits.size()));
}

// -1 when mixed, else the common bit.
int common_bit(std::span<const std::uint8_t> bits) {
  const std::uint8_t first = bits.front();
  for (std::uint8_t b : bits) {
    if (b != first) return -1;
  }
  return first;
}

struct StateKey {
  std::uint64_t x_hash;
  std::uint64_t units_hash;
  std::uint64_t bit_hash;
};

StateKey key_of(const ConsensusState& s) {
  return {hash_values(s.x()), hash_units(s.alpha_units()), hash_bits(s.upper_bits())};
}

// Last `window` states, stored flat. Within one run alpha is a fixed base plus
// an exact integer ledger, so alpha recurs exactly or not at all; only x can
// carry floating-point drift and needs the tolerance fallback.
class StateRing {
 public:
  StateRing(int window, int n)
      : window_(window), n_(n), k_(window, -1), keys_(window), x_(static_cast<std::size_t>(window) * n),
        units_(x_.size()), bits_(x_.size()) {}

  void push(const ConsensusState& s, const StateKey& key) {
    const std::size_t slot = static_cast<std::size_t>(next_);
    k_[slot] = s.iteration();
    keys_[slot] = key;
    std::copy(s.x().begin(), s.x().end(), x_.begin() + slot * n_);
    std::copy(s.alpha_units().begin(), s.alpha_units().end(), units_.begin() + slot * n_);
    std::copy(s.upper_bits().begin(), s.upper_bits().end(), bits_.begin() + slot * n_);
    next_ = (next_ + 1) % window_;
  }

  struct Match {
    std::int64_t k = -1;
    MatchType type = MatchType::kNone;
  };

  // Most recent earlier state equal to s, skipping gap 1 (a period-1
  // recurrence is a fixed point and is reported by the convergence test).
  Match find(const ConsensusState& s, const StateKey& key, double tol) const {
    Match best;
    for (int slot = 0; slot < window_; ++slot) {
      const std::int64_t k = k_[slot];
      if (k < 0 || s.iteration() - k < 2 || k <= best.k) continue;
      if (keys_[slot].bit_hash != key.bit_hash || keys_[slot].units_hash != key.units_hash) continue;
      const auto off = static_cast<std::size_t>(slot) * n_;
      if (!std::equal(s.upper_bits().begin(), s.upper_bits().end(), bits_.begin() + off) ||
          !std::equal(s.alpha_units().begin(), s.alpha_units().end(), units_.begin() + off)) {
        continue;
      }
      if (keys_[slot].x_hash == key.x_hash && std::memcmp(s.x().data(), x_.data() + off, n_ * sizeof(double)) == 0) {
        best = {k, MatchType::kBitExact};
      } else if (within(s.x(), off, tol)) {
        best = {k, MatchType::kTolerance};
      }
    }
    return best;
  }

 private:
  bool within(std::span<const double> v, std::size_t off, double tol) const {
    double scale = 1.0;
    for (double a : v) scale = std::max(scale, std::abs(a));
    const double limit = tol * scale;
    for (int i = 0; i < n_; ++i) {
      if (std::abs(v[i] - x_[off + i]) > limit) return false;
    }
    return true;
  }

  int window_;
  int n_;
  int next_ = 0;
  std::vector<std::int64_t> k_;
  std::vector<StateKey> keys_;
  std::vector<double> x_;
  std::vector<std::int64_t> units_;
  std::vector<std::uint8_t> bits_;
};

}  // namespace

void ConsensusState::set_rho(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw Error(ErrorKind::kInvalidInput, "rho must be positive and finite");
  alpha_base_ = alpha_;
  std::fill(alpha_units_.begin(), alpha_units_.end(), 0);
  rho_ = rho;
}

bool ConsensusState::same_point(const ConsensusState& other) const noexcept {
  return x_.size() == other.x_.size() &&
         std::memcmp(x_.data(), other.x_.data(), x_.size() * sizeof(double)) == 0 &&
         std::memcmp(alpha_.data(), other.alpha_.data(), alpha_.size() * sizeof(double)) == 0;
}

ConsensusState init(const Graph& graph, std::span<const double> data, const DeltaQuantizer& quantizer,
                    double rho) {
  const auto n = static_cast<std::size_t>(graph.node_count());
  if (data.size() != n) {
    throw Error(ErrorKind::kInvalidInput,
                "data has " + std::to_string(data.size()) + " entries for " + std::to_string(n) + " nodes");
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) throw Error(ErrorKind::kInvalidInput, "rho must be positive and finite");
  for (double v : data) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kInvalidInput, "data must be finite");
  }
  ConsensusState s;
  s.x_.assign(n, 0.0);
  s.alpha_.assign(n, 0.0);
  s.alpha_base_.assign(n, 0.0);
  s.alpha_units_.assign(n, 0);
  s.r_.assign(data.begin(), data.end());
  s.scratch_.assign(n, 0.0);
  const bool up = quantizer.is_upper(0.0);
  s.upper_.assign(n, up ? 1 : 0);
  s.quantized_.assign(n, quantizer.level(up));
  s.rho_ = rho;
  s.k_ = 0;
  return s;
}

void advance(ConsensusState& s, const Graph& graph, const DeltaQuantizer& quantizer) {
  const int n = s.node_count();
  const double rho = s.rho_;
  const double lo = quantizer.lower();
  const double hi = quantizer.upper();

  for (int i = 0; i < n; ++i) {
    const auto nb = graph.neighbors(i);
    const int d = static_cast<int>(nb.size());
    int up_count = 0;
    for (int j : nb) up_count += s.upper_[j];
    const double neighbor_sum = static_cast<double>(d - up_count) * lo + static_cast<double>(up_count) * hi;
    const double own = static_cast<double>(d) * s.quantized_[i];
    s.scratch_[i] = (rho * own + rho * neighbor_sum - s.alpha_[i] + s.r_[i]) / (1.0 + 2.0 * rho * d);
  }
  s.x_.swap(s.scratch_);
  for (int i = 0; i < n; ++i) {
    const bool up = quantizer.is_upper(s.x_[i]);
    s.upper_[i] = up ? 1 : 0;
    s.quantized_[i] = up ? hi : lo;
  }
  // sum_j (Q(x_i) - Q(x_j)) = big_delta * (d * b_i - #upper neighbors)
  for (int i = 0; i < n; ++i) {
    const auto nb = graph.neighbors(i);
    std::int64_t up_count = 0;
    for (int j : nb) up_count += s.upper_[j];
    s.alpha_units_[i] += static_cast<std::int64_t>(nb.size()) * s.upper_[i] - up_count;
  }
  refresh_alpha(s.alpha_, s.alpha_base_, s.alpha_units_, rho * quantizer.big_delta());
  ++s.k_;
}

ConsensusState step(ConsensusState state, const Graph& graph, const DeltaQuantizer& quantizer) {
  if (state.node_count() != graph.node_count()) {
    throw Error(ErrorKind::kInvalidInput, "state and graph disagree on node count");
  }
  advance(state, graph, quantizer);
  return state;
}

double alpha_sum(const ConsensusState& state) {
  double total = 0.0;
  for (double a : state.alpha()) total += a;
  return total;
}

double alpha_sum_tolerance(const ConsensusState& state, const DeltaQuantizer& quantizer) {
  double scale = quantizer.big_delta();
  for (double r : state.data()) scale = std::max(scale, std::abs(r));
  return 1e-9 * state.node_count() * scale;
}

const char* to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::kConverged: return "converged";
    case OutcomeKind::kCycled: return "cycled";
    case OutcomeKind::kExhausted: return "exhausted";
  }
  return "unknown";
}

const char* to_string(MatchType match) {
  switch (match) {
    case MatchType::kNone: return "none";
    case MatchType::kBitExact: return "bit-exact";
    case MatchType::kTolerance: return "tolerance";
  }
  return "unknown";
}

ConsensusOutcome run(const Graph& graph, std::span<const double> data, const DeltaQuantizer& quantizer,
                     double rho, const RunOptions& options) {
  return run_from(init(graph, data, quantizer, rho), graph, quantizer, options);
}

ConsensusOutcome run_from(ConsensusState state, const Graph& graph, const DeltaQuantizer& quantizer,
                          const RunOptions& options) {
  if (state.node_count() != graph.node_count()) {
    throw Error(ErrorKind::kInvalidInput, "state and graph disagree on node count");
  }
  if (options.max_iter < 1) throw Error(ErrorKind::kInvalidParameter, "max_iter must be >= 1");
  if (options.cycle_window < 2) throw Error(ErrorKind::kInvalidParameter, "cycle_window must be >= 2");

  const std::int64_t start_k = state.iteration();
  StateRing ring(options.cycle_window, state.node_count());
  if (options.observer) options.observer(state);
  ring.push(state, key_of(state));

  ConsensusOutcome out;
  for (std::int64_t it = 1; it <= options.max_iter; ++it) {
    const int before = common_bit(state.upper_bits());
    advance(state, graph, quantizer);
    if (options.observer) options.observer(state);

    const int after = common_bit(state.upper_bits());
    if (before >= 0 && before == after) {
      if (options.verify_fixed_point) {
        ConsensusState probe = state;
        advance(probe, graph, quantizer);
        if (!probe.same_point(state)) {
          throw Error(ErrorKind::kInvalidInput, "convergence certificate fired but state moved");
        }
      }
      out.kind = OutcomeKind::kConverged;
      out.upper = after == 1;
      out.level = quantizer.level(out.upper);
      out.iterations = it;
      out.k0 = state.iteration() - 1;
      out.final_state = std::move(state);
      return out;
    }

    const StateKey key = key_of(state);
    const auto match = ring.find(state, key, options.cycle_tolerance);
    if (match.type != MatchType::kNone) {
      out.kind = OutcomeKind::kCycled;
      out.period = state.iteration() - match.k;
      out.iterations = it;
      out.k0 = match.k;
      out.match = match.type;
      out.final_state = std::move(state);
      return out;
    }
    ring.push(state, key);
  }
  out.kind = OutcomeKind::kExhausted;
  out.iterations = state.iteration() - start_k;
  out.final_state = std::move(state);
  return out;
}

BoundReport check_theorem3(const ConsensusOutcome& outcome, const Graph& graph, const DeltaQuantizer& quantizer) {
  if (outcome.kind == OutcomeKind::kExhausted) {
    throw Error(ErrorKind::kNotApplicable, "bounds apply only to converged or cycled outcomes");
  }
  const ConsensusState& fin = outcome.final_state;
  const double n = graph.node_count();
  const double m = static_cast<double>(graph.edge_count());
  const double rho = fin.rho();
  const double big_delta = quantizer.big_delta();
  const double thr = quantizer.threshold();

  BoundReport rep;
  rep.kind = outcome.kind;
  rep.match = outcome.match;
  double total = 0.0;
  for (double r : fin.data()) total += r;
  rep.data_mean = total / n;

  if (outcome.kind == OutcomeKind::kConverged) {
    const double spread = 1.0 + 4.0 * rho * m / n;
    rep.level_error = std::abs(outcome.level - quantizer.project(rep.data_mean));
    if (outcome.upper) {
      rep.level_bound = spread * quantizer.delta();
      rep.level_bound_ok = rep.level_error < rep.level_bound;
    } else {
      rep.level_bound = spread * (big_delta - quantizer.delta());
      rep.level_bound_ok = rep.level_error <= rep.level_bound;
    }
    return rep;
  }

  rep.average_gap = std::abs(rep.data_mean - thr);
  rep.average_bound = 6.0 * rho * n * big_delta;
  rep.average_bound_ok = rep.average_gap < rep.average_bound;
  rep.proximity_bound = 3.0 * rho * n * big_delta / (1.0 + 2.0 * rho * n);

  const int nodes = graph.node_count();
  std::vector<std::int64_t> upper_counts(nodes, 0);
  ConsensusState walk = fin;
  for (std::int64_t l = 0; l < outcome.period; ++l) {
    for (int i = 0; i < nodes; ++i) {
      const double dev = std::abs(walk.x()[i] - thr);
      rep.proximity_max = std::max(rep.proximity_max, dev);
      if (!(dev < rep.proximity_bound)) rep.proximity_ok = false;
      const double d = graph.degree(i);
      if (!(dev <= 3.0 * rho * d * big_delta / (1.0 + 2.0 * rho * d))) rep.node_proximity_ok = false;
      upper_counts[i] += walk.upper_bits()[i];
    }
    advance(walk, graph, quantizer);
  }
  rep.period_sums_equal =
      std::adjacent_find(upper_counts.begin(), upper_counts.end(), std::not_equal_to<>()) == upper_counts.end();
  rep.recurrence_ok = walk.same_point(fin);
  return rep;
}

TraceWriter::TraceWriter(std::ostream& out) : out_(&out) {
  out_->precision(17);
  *out_ << "k,i,x,alpha,q\n";
}

void TraceWriter::operator()(const ConsensusState& state) {
  const auto x = state.x();
  const auto alpha = state.alpha();
  const auto q = state.quantized();
  for (int i = 0; i < state.node_count(); ++i) {
    *out_ << state.iteration() << ',' << i << ',' << x[i] << ',' << alpha[i] << ',' << q[i] << '\n';
  }
}

}  // namespace qcdet
