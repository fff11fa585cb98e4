#include <cmath>
#include <sstream>

#include "doctest.h"
#include "qcdet/error.hpp"
#include "qcdet/experiments.hpp"
#include "qcdet/rng.hpp"

using namespace qcdet;

TEST_CASE("qfunc") {
  CHECK(std::abs(qfunc(1.0) - 0.15865525393145707) < 1e-15);
  CHECK(std::abs(qfunc(2.0) - 0.022750131948179195) < 1e-15);
  CHECK(qfunc(0.0) == 0.5);
}

TEST_CASE("centralized gaussian error") {
  const struct {
    int n;
    double pi1;
    double pe;
  } rows[] = {{10, 0.5, 0.15865525393145707}, {20, 0.5, 0.07864960352514251},  {40, 0.5, 0.022750131948179195},
              {70, 0.5, 0.004075485796751346}, {100, 0.5, 0.000782701129001274}, {10, 0.1, 0.07006068585853906},
              {40, 0.1, 0.0122004439111652},   {100, 0.1, 0.00044587163029986967}};
  for (const auto& r : rows) CHECK(std::abs(centralized_gaussian_pe(r.n, r.pi1) - r.pe) < 1e-14);
  CHECK(centralized_gaussian_pe(10, 0.5) >= centralized_gaussian_pe(10, 0.1));

  const auto m = HypothesisModel::gaussian(1.0, -1.0, 10.0);
  CHECK(std::abs(centralized_threshold_pe(m, 40, 0.5, 0.0) - centralized_gaussian_pe(40, 0.5)) < 1e-14);
  CHECK(std::abs(centralized_threshold_pe(m, 10, 0.1, std::log(9.0) / 10) - centralized_gaussian_pe(10, 0.1)) < 1e-14);
}

TEST_CASE("sandwich reference probabilities") {
  const auto m = HypothesisModel::gaussian(1.0, -1.0, 10.0);
  const double lo = 0.0 + 4 * 0.001 * 19 / 20;
  const double hi = 0.0 - 12 * 0.001 * 20;
  CHECK(std::abs(gaussian_acceptance_probability(m, Hypothesis::kH1, 20, lo) - 0.9173314784028809) < 1e-12);
  CHECK(std::abs(gaussian_acceptance_probability(m, Hypothesis::kH1, 20, hi) - 0.999068576851009) < 1e-12);
  CHECK(std::abs(gaussian_acceptance_probability(m, Hypothesis::kH2, 20, lo) - 0.07478053024331387) < 1e-12);
  CHECK(std::abs(gaussian_acceptance_probability(m, Hypothesis::kH2, 20, hi) - 0.6113512946052392) < 1e-12);
}

TEST_CASE("topology tags") {
  CHECK(Topology::parse("star").kind == Topology::Kind::kStar);
  CHECK(Topology::parse("complete").edge_count(5) == 10);
  CHECK(Topology::parse("path").edge_count(5) == 4);
  const Topology r = Topology::parse("random:0.3");
  CHECK(r.edge_count(10) == 14);  // round(0.3 * 45)
  CHECK(r.edge_count(3) == 2);
  CHECK(r.tag() == "random:0.3");
  const Topology k = Topology::parse("random:m=12");
  CHECK(k.edge_count(10) == 12);
  CHECK(k.make(10, 4).edge_count() == 12);
  CHECK(Topology::parse(k.tag()).edges == 12);
  CHECK_THROWS_AS(Topology::parse("ring"), Error);
  CHECK_THROWS_AS(Topology::parse("random:1.5"), Error);
  CHECK_THROWS_AS(Topology::parse("random:m=x"), Error);
}

TEST_CASE("criterion names round trip") {
  for (auto kind : {CriterionSpec::Kind::kNPConstant, CriterionSpec::Kind::kMap, CriterionSpec::Kind::kNPExponential,
                    CriterionSpec::Kind::kFiniteN}) {
    CHECK(CriterionSpec::parse_kind(CriterionSpec::kind_name(kind)) == kind);
  }
  CHECK_THROWS_AS(CriterionSpec::parse_kind("bayes"), Error);
}

TEST_CASE("seed derivation is stable") {
  CHECK(derive_seed(1, 0, 0) == derive_seed(1, 0, 0));
  CHECK(derive_seed(1, 0, 0) != derive_seed(1, 0, 1));
  CHECK(derive_seed(1, 0, 0) != derive_seed(2, 0, 0));
}

TEST_CASE("monte carlo rates and reproducibility") {
  MonteCarloSpec spec;
  spec.n = 10;
  spec.trials = 400;
  spec.seed = 5;
  spec.two_stage = true;
  spec.check_bounds = true;
  std::vector<TrialRecord> records;
  const SweepResult a = monte_carlo(spec, &records);
  CHECK(records.size() == 400);
  CHECK(a.trials == 400);
  CHECK(a.exhausted == 0);
  CHECK(a.bound_violations == 0);
  CHECK(a.decided == a.h1_trials + a.h2_trials);
  const double p1 = static_cast<double>(a.h1_trials) / a.decided;
  const double p2 = static_cast<double>(a.h2_trials) / a.decided;
  CHECK(std::abs(a.empirical_pe - (p1 * a.empirical_alpha + p2 * a.empirical_beta)) < 1e-15);
  CHECK(a.empirical_pe >= 0.0);
  CHECK(a.empirical_pe <= 1.0);
  CHECK(a.cycle_count <= a.trials);
  for (const auto& r : records) {
    CHECK(r.iterations_to_terminal >= 1);
    if (r.cycled_first_pass) CHECK(r.rho_used == 1.0 / 1200);
  }

  spec.threads = 1;
  const SweepResult b = monte_carlo(spec);
  spec.threads = 4;
  const SweepResult c = monte_carlo(spec);
  std::ostringstream sa, sb, sc;
  write_sweep_csv_row(sa, a);
  write_sweep_csv_row(sb, b);
  write_sweep_csv_row(sc, c);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str() == sc.str());

  spec.trials = 1;
  std::vector<TrialRecord> one_a, one_b;
  monte_carlo(spec, &one_a);
  monte_carlo(spec, &one_b);
  REQUIRE(one_a.size() == 1);
  CHECK(one_a[0].data_mean == one_b[0].data_mean);
  CHECK(one_a[0].iterations_to_terminal == one_b[0].iterations_to_terminal);
}

TEST_CASE("csv header matches row width") {
  std::ostringstream h, r;
  write_sweep_csv_header(h);
  write_sweep_csv_row(r, SweepResult{});
  const auto commas = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
  CHECK(commas(h.str()) == commas(r.str()));
}

TEST_CASE("decreasing rho schedule") {
  CHECK(warmup_stage_count(100) == 3);
  CHECK(warmup_stage_count(10) == 2);
  CHECK(warmup_stage_count(25) == 2);
  CHECK(warmup_stage_count(250) == 3);
  CHECK(warmup_stage_count(2500) == 4);
  for (int n : {10, 20, 40, 80, 100}) {
    CHECK(warmup_stage_count(n) == static_cast<int>(std::ceil(std::log10(4.0 * n) - 1e-12)));
  }

  const Graph g = star(100);
  const auto model = HypothesisModel::gaussian(1.0, -1.0, 10.0);
  const auto xs = model.sample(Hypothesis::kH1, 100, std::uint64_t{9});
  std::vector<double> r(100);
  for (int i = 0; i < 100; ++i) r[i] = model.llr(xs[i]);
  const DeltaQuantizer q(-1.0, 2.0, 1.0);
  const ScheduledOutcome s = decreasing_rho_run(g, r, q);
  CHECK(s.warmup_iterations == 150);
  REQUIRE(s.stages.size() == 4);
  CHECK(s.stages[0].rho == doctest::Approx(100.0 / 99));
  CHECK(s.stages.back().rho <= 1.0 / (4 * 99));
  CHECK(s.total_iterations == 150 + s.outcome.iterations);
  REQUIRE(s.outcome.kind != OutcomeKind::kExhausted);
  CHECK(check_theorem3(s.outcome, g, q).ok());
}

TEST_CASE("convergence time sweep trends") {
  const auto model = HypothesisModel::gaussian(1.0, -1.0, 10.0);
  const auto rows = convergence_time_sweep(model, {Topology::parse("star"), Topology::parse("complete")}, {30}, 200, 3);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].topology == "star");
  CHECK(rows[0].mean_convergence_time >= rows[1].mean_convergence_time);
  CHECK(rows[0].converged_count + rows[0].cycle_count + rows[0].exhausted == 200);

  const auto tiny = convergence_time_sweep(model, {Topology::parse("path")}, {2}, 50, 3);
  CHECK(tiny[0].mean_convergence_time < 100);
}
