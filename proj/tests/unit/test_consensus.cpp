#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "qcdet/consensus.hpp"
#include "qcdet/error.hpp"

using namespace qcdet;

namespace {

struct Instance {
  Graph graph;
  std::vector<double> data;
  DeltaQuantizer quantizer;
  double rho;
};

Instance random_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = std::uniform_int_distribution<int>(2, 30)(rng);
  const std::int64_t max_m = static_cast<std::int64_t>(n) * (n - 1) / 2;
  const std::int64_t m = std::uniform_int_distribution<std::int64_t>(n - 1, max_m)(rng);
  const double a = -2.0 + 4.0 * unit(rng);
  const double big_delta = 0.1 + 2.0 * unit(rng);
  const double delta = big_delta * (0.05 + 0.9 * unit(rng));
  const double rho = std::pow(10.0, -3.0 + 2.5 * unit(rng));
  std::vector<double> data(n);
  for (auto& r : data) r = a + big_delta * (-5.0 + 10.0 * unit(rng));
  return {random_connected(n, m, rng()), data, DeltaQuantizer(a, big_delta, delta), rho};
}

}  // namespace

TEST_CASE("init starts from zeros") {
  const Graph g = path(2);
  const DeltaQuantizer q(0.0, 2.0, 1.0);
  const std::vector<double> r{1.8, 0.2};
  const ConsensusState s = init(g, r, q, 0.5);
  CHECK(s.x()[0] == 0.0);
  CHECK(s.x()[1] == 0.0);
  CHECK(s.alpha()[0] == 0.0);
  CHECK(s.alpha()[1] == 0.0);
  CHECK(s.quantized()[0] == 0.0);
  CHECK(s.quantized()[1] == 0.0);
  CHECK(s.iteration() == 0);

  CHECK_THROWS_AS(init(g, r, q, 0.0), Error);
  CHECK_THROWS_AS(init(g, r, q, -1.0), Error);
  CHECK_THROWS_AS(init(g, std::vector<double>{1.0}, q, 0.5), Error);
  CHECK_THROWS_AS(init(g, std::vector<double>{1.0, NAN}, q, 0.5), Error);
}

TEST_CASE("an unchanged all-low snapshot certifies after one step") {
  const Graph g = path(2);
  const DeltaQuantizer q(0.0, 2.0, 1.0);
  const std::vector<double> r{1.8, 0.2};
  const ConsensusOutcome out = run(g, r, q, 0.5);
  CHECK(out.kind == OutcomeKind::kConverged);
  CHECK(out.iterations == 1);
  CHECK(out.level == 0.0);
}

TEST_CASE("one step on a two-node path") {
  const Graph g = path(2);
  const DeltaQuantizer q(0.0, 2.0, 1.0);
  const std::vector<double> r{1.8, 0.2};
  const ConsensusState s1 = step(init(g, r, q, 0.5), g, q);
  CHECK(s1.x()[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(s1.x()[1] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(s1.alpha()[0] == 0.0);
  CHECK(s1.alpha()[1] == 0.0);
  CHECK(s1.iteration() == 1);
}

TEST_CASE("equal quantized snapshots leave alpha unchanged") {
  const Graph g = complete(4);
  const DeltaQuantizer q(0.0, 2.0, 1.0);
  const std::vector<double> r{3.0, 4.0, 5.0, 6.0};
  ConsensusState s = init(g, r, q, 0.1);
  for (int k = 0; k < 50; ++k) {
    const ConsensusState before = s;
    advance(s, g, q);
    bool all_equal = true;
    for (int i = 0; i < 4; ++i) {
      all_equal = all_equal && before.quantized()[i] == before.quantized()[0] && s.quantized()[i] == before.quantized()[0];
    }
    if (all_equal) {
      for (int i = 0; i < 4; ++i) CHECK(s.alpha()[i] == before.alpha()[i]);
    }
  }
}

TEST_CASE("run converges at the upper level for data far above the threshold") {
  const Graph g = path(2);
  const DeltaQuantizer q(0.0, 2.0, 1.0);
  const std::vector<double> r{5.0, 5.0};
  RunOptions opts;
  opts.verify_fixed_point = true;
  const ConsensusOutcome out = run(g, r, q, 0.1, opts);
  REQUIRE(out.kind == OutcomeKind::kConverged);
  CHECK(out.level == 2.0);
  CHECK(out.upper);
  CHECK(out.iterations < 50);
  const BoundReport rep = check_theorem3(out, g, q);
  CHECK(rep.ok());
  CHECK(rep.level_bound_ok);
}

TEST_CASE("data deep below the threshold converges at a with non-negative slack") {
  const Graph g = path(2);
  const DeltaQuantizer q(0.0, 2.0, 1.0);
  const std::vector<double> r{0.3, 0.5};
  const ConsensusOutcome out = run(g, r, q, 0.1);
  REQUIRE(out.kind == OutcomeKind::kConverged);
  CHECK(out.level == 0.0);
  const BoundReport rep = check_theorem3(out, g, q);
  CHECK(rep.level_bound_ok);
  CHECK(rep.level_bound - rep.level_error >= 0.0);
}

TEST_CASE("max_iter of one exhausts and the bound check refuses it") {
  const Graph g = path(2);
  const DeltaQuantizer q(0.0, 2.0, 1.0);
  const std::vector<double> r{5.0, 5.0};
  RunOptions opts;
  opts.max_iter = 1;
  const ConsensusOutcome out = run(g, r, q, 0.5, opts);
  CHECK(out.kind == OutcomeKind::kExhausted);
  CHECK(out.iterations == 1);
  try {
    check_theorem3(out, g, q);
    FAIL("expected not-applicable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNotApplicable);
  }
}

TEST_CASE("run rejects bad options") {
  const Graph g = path(2);
  const DeltaQuantizer q(0.0, 2.0, 1.0);
  const std::vector<double> r{1.0, 1.0};
  RunOptions opts;
  opts.max_iter = 0;
  CHECK_THROWS_AS(run(g, r, q, 0.5, opts), Error);
  opts.max_iter = 10;
  opts.cycle_window = 1;
  CHECK_THROWS_AS(run(g, r, q, 0.5, opts), Error);
}

TEST_CASE("average at the threshold cycles around it") {
  const Graph g = path(2);
  const DeltaQuantizer q(0.0, 2.0, 1.0);
  const std::vector<double> r{0.0, 2.0};
  const double rho = 0.05;
  const ConsensusOutcome out = run(g, r, q, rho);
  REQUIRE(out.kind != OutcomeKind::kExhausted);
  const BoundReport rep = check_theorem3(out, g, q);
  CHECK(rep.ok());
  if (out.kind == OutcomeKind::kCycled) {
    CHECK(out.period >= 2);
    CHECK(rep.average_gap < 6.0 * rho * 2 * 2.0);
    CHECK(rep.period_sums_equal);
    CHECK(rep.recurrence_ok);
  }
}

TEST_CASE("a star instance with its average near the threshold cycles with period 2") {
  const Graph g = star(10);
  const DeltaQuantizer q(-1.0, 2.0, 1.0);
  const std::vector<double> r{-0.11588895026099619, -0.63172854738869044, 0.18728817636465273, -0.42658675733016738,
                              -0.53330196748816172, 0.3006658308223833,   0.21395289410559387, 0.9157506178424073,
                              -0.14935855945314852, 0.021036220887460155};
  const double rho = 1.0 / 36;
  const ConsensusOutcome out = run(g, r, q, rho);
  REQUIRE(out.kind == OutcomeKind::kCycled);
  CHECK(out.period == 2);
  CHECK(out.match == MatchType::kBitExact);
  const BoundReport rep = check_theorem3(out, g, q);
  CHECK(rep.ok());
  CHECK(rep.recurrence_ok);
  CHECK(rep.period_sums_equal);
  CHECK(rep.average_gap < 6.0 * rho * 10 * 2.0);
  CHECK(rep.proximity_max < 3.0 * rho * 10 * 2.0 / (1.0 + 2.0 * rho * 10));

  // Stepping a full period from the terminal state returns to it exactly.
  ConsensusState s = out.final_state;
  advance(s, g, q);
  advance(s, g, q);
  CHECK(s.same_point(out.final_state));
}

TEST_CASE("trajectories are deterministic") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const Instance in = random_instance(rng);
    RunOptions opts;
    opts.max_iter = 20'000;
    const ConsensusOutcome a = run(in.graph, in.data, in.quantizer, in.rho, opts);
    const ConsensusOutcome b = run(in.graph, in.data, in.quantizer, in.rho, opts);
    CHECK(a.kind == b.kind);
    CHECK(a.iterations == b.iterations);
    CHECK(a.period == b.period);
    CHECK(a.final_state.same_point(b.final_state));
  }
}

TEST_CASE("property: alpha sums to zero and theorem bounds hold on random runs") {
  std::mt19937_64 rng(77);
  int terminal = 0;
  for (int t = 0; t < 150; ++t) {
    const Instance in = random_instance(rng);
    RunOptions opts;
    opts.max_iter = 50'000;
    opts.verify_fixed_point = true;
    double worst = 0.0;
    double tol = 0.0;
    opts.observer = [&](const ConsensusState& s) {
      worst = std::max(worst, std::abs(alpha_sum(s)));
      tol = alpha_sum_tolerance(s, in.quantizer);
    };
    const ConsensusOutcome out = run(in.graph, in.data, in.quantizer, in.rho, opts);
    CHECK(worst <= tol);
    if (out.kind == OutcomeKind::kExhausted) continue;
    ++terminal;
    const BoundReport rep = check_theorem3(out, in.graph, in.quantizer);
    CHECK(rep.ok());
    if (out.kind == OutcomeKind::kCycled) CHECK(out.period >= 2);
    if (out.kind == OutcomeKind::kConverged) {
      for (double v : out.final_state.quantized()) CHECK(v == out.level);
    }
  }
  CHECK(terminal > 100);
}

TEST_CASE("set_rho keeps the point and run_from continues") {
  const Graph g = star(5);
  const DeltaQuantizer q(-1.0, 2.0, 1.0);
  const std::vector<double> r{0.4, -0.2, 0.9, -0.1, 0.3};
  ConsensusState s = init(g, r, q, 0.5);
  for (int k = 0; k < 7; ++k) advance(s, g, q);
  ConsensusState copy = s;
  copy.set_rho(0.01);
  CHECK(copy.same_point(s));
  CHECK(copy.rho() == 0.01);
  CHECK(std::abs(alpha_sum(copy)) <= alpha_sum_tolerance(copy, q));
  const ConsensusOutcome out = run_from(copy, g, q);
  CHECK(out.kind != OutcomeKind::kExhausted);
  CHECK(out.final_state.iteration() == 7 + out.iterations);
}

TEST_CASE("trace writer emits one row per node and iteration") {
  const Graph g = path(2);
  const DeltaQuantizer q(0.0, 2.0, 1.0);
  const std::vector<double> r{5.0, 5.0};
  std::ostringstream os;
  TraceWriter writer(os);
  RunOptions opts;
  opts.observer = std::ref(writer);
  const ConsensusOutcome out = run(g, r, q, 0.1, opts);
  std::istringstream lines(os.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "k,i,x,alpha,q");
  std::getline(lines, line);
  CHECK(line == "0,0,0,0,0");
  int rows = 1;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 2 * (out.iterations + 1));
}

TEST_CASE("outcome names") {
  CHECK(std::string(to_string(OutcomeKind::kConverged)) == "converged");
  CHECK(std::string(to_string(OutcomeKind::kCycled)) == "cycled");
  CHECK(std::string(to_string(OutcomeKind::kExhausted)) == "exhausted");
  CHECK(std::string(to_string(MatchType::kBitExact)) == "bit-exact");
}
