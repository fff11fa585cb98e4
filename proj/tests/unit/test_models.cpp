#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "qcdet/error.hpp"
#include "qcdet/models.hpp"

using namespace qcdet;

namespace {

HypothesisModel example() { return HypothesisModel::gaussian(1.0, -1.0, 10.0); }

std::vector<double> random_pmf(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> p(k);
  for (auto& v : p) v = u(rng);
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v /= s;
  return p;
}

}  // namespace

TEST_CASE("gaussian llr") {
  const auto m = example();
  CHECK(m.llr(5.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.llr(0.0) == 0.0);
  CHECK(m.llr(-2.5) == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("discrete llr and support") {
  const auto m = HypothesisModel::discrete({0.9, 0.1}, {0.5, 0.5});
  CHECK(m.llr(0.0) == doctest::Approx(std::log(1.8)));
  CHECK(m.llr(1.0) == doctest::Approx(std::log(0.2)));
  CHECK_THROWS_AS(m.llr(2.0), Error);
  CHECK_THROWS_AS(m.llr(0.5), Error);
  CHECK(m.alphabet_size() == 2);
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(HypothesisModel::discrete({0.5, 0.5}, {0.5, 0.5}), Error);
  CHECK_THROWS_AS(HypothesisModel::discrete({1.0, 0.0}, {0.5, 0.5}), Error);
  CHECK_THROWS_AS(HypothesisModel::discrete({0.6, 0.5}, {0.5, 0.5}), Error);
  CHECK_THROWS_AS(HypothesisModel::discrete({0.5, 0.5}, {0.2, 0.3, 0.5}), Error);
  CHECK_THROWS_AS(HypothesisModel::gaussian(1.0, 1.0, 10.0), Error);
  CHECK_THROWS_AS(HypothesisModel::gaussian(1.0, -1.0, 0.0), Error);
  CHECK_THROWS_AS(HypothesisModel::pair(Gaussian{1.0, 1.0}, Gaussian{0.0, 2.0}), Error);
  CHECK_THROWS_AS(HypothesisModel::pair(Gaussian{1.0, 1.0}, Discrete{{0.5, 0.5}}), Error);
}

TEST_CASE("kl divergences") {
  const auto g = example();
  CHECK(g.kl(Direction::kOneToTwo) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(g.kl(Direction::kTwoToOne) == doctest::Approx(0.2).epsilon(1e-14));
  const auto d = HypothesisModel::discrete({0.9, 0.1}, {0.5, 0.5});
  CHECK(std::abs(d.kl(Direction::kOneToTwo) - 0.3680642071684971) < 1e-14);
  CHECK(std::abs(d.kl(Direction::kTwoToOne) - 0.5108256237659907) < 1e-14);
}

TEST_CASE("sampling") {
  const auto g = example();
  const auto xs = g.sample(Hypothesis::kH1, 1'000'000, std::uint64_t{11});
  double mean = 0.0;
  double llr_mean = 0.0;
  double llr_sq = 0.0;
  for (double y : xs) {
    mean += y;
    const double l = g.llr(y);
    llr_mean += l;
    llr_sq += l * l;
  }
  const double count = static_cast<double>(xs.size());
  mean /= count;
  llr_mean /= count;
  const double llr_sd = std::sqrt(llr_sq / count - llr_mean * llr_mean);
  CHECK(std::abs(mean - 1.0) < 0.01);
  CHECK(std::abs(llr_mean - g.kl(Direction::kOneToTwo)) < 3.0 * llr_sd / std::sqrt(count));

  CHECK(g.sample(Hypothesis::kH2, 5, std::uint64_t{3}) == g.sample(Hypothesis::kH2, 5, std::uint64_t{3}));
  CHECK_THROWS_AS(g.sample(Hypothesis::kH1, 0, std::uint64_t{3}), Error);

  const auto d = HypothesisModel::discrete({0.9, 0.1}, {0.5, 0.5});
  const auto ds = d.sample(Hypothesis::kH1, 200'000, std::uint64_t{4});
  const double ones = std::count(ds.begin(), ds.end(), 1.0);
  CHECK(std::abs(ones / 200'000.0 - 0.1) < 0.005);
}

TEST_CASE("log_mgf") {
  const auto g = example();
  CHECK(g.log_mgf(0.5) == doctest::Approx(-0.05).epsilon(1e-14));
  CHECK_THROWS_AS(g.log_mgf(INFINITY), Error);
  const auto d = HypothesisModel::discrete({0.9, 0.1}, {0.5, 0.5});
  CHECK(std::abs(d.log_mgf(0.5) - (-0.11157177565710491)) < 1e-14);
  CHECK(d.log_mgf(0.5) <= 0.0);
}

TEST_CASE("property: log_mgf vanishes at 0 and 1") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 100; ++t) {
    const int k = std::uniform_int_distribution<int>(2, 8)(rng);
    const auto m = HypothesisModel::discrete(random_pmf(rng, k), random_pmf(rng, k));
    CHECK(std::abs(m.log_mgf(0.0)) <= 1e-12);
    CHECK(std::abs(m.log_mgf(1.0)) <= 1e-12);
    const double h = 1e-5;
    const double slope = (m.log_mgf(h) - m.log_mgf(-h)) / (2 * h);
    CHECK(std::abs(-slope - m.kl(Direction::kOneToTwo)) < 1e-6);
    CHECK(std::abs(m.chernoff() - m.chernoff_direct()) < 1e-8);
  }
}

TEST_CASE("rate function") {
  const auto g = example();
  CHECK(std::abs(g.rate_function(0.0) - 0.05) < 1e-10);
  CHECK(g.rate_function(-0.2 + 1e-6) < 1e-10);
  CHECK_THROWS_AS(g.rate_function(-0.2), Error);
  CHECK_THROWS_AS(g.rate_function(-1.0), Error);
  const double d12 = 0.2;
  const double v = 0.4;
  for (int i = 0; i < 50; ++i) {
    const double tau = -d12 + (i + 0.5) * (0.4 / 50);
    const double closed = (tau + d12) * (tau + d12) / (2 * v);
    CHECK(std::abs(g.rate_function(tau) - closed) < 1e-8);
  }

  const auto d = HypothesisModel::discrete({0.9, 0.1}, {0.5, 0.5});
  CHECK(std::abs(d.rate_function(0.0) - 0.11237744635283689) < 1e-9);
  CHECK(std::abs(d.rate_function(0.1) - 0.17164734918216776) < 1e-9);
  CHECK(std::abs(d.rate_function(-0.3) - 0.004906775442501482) < 1e-9);
  CHECK(d.rate_function(0.1) >= d.rate_function(0.0));
}

TEST_CASE("chernoff information") {
  const auto g = example();
  CHECK(std::abs(g.chernoff() - 0.05) < 1e-8);
  CHECK(std::abs(g.chernoff_direct() - 0.05) < 1e-8);
  const auto d = HypothesisModel::discrete({0.9, 0.1}, {0.5, 0.5});
  CHECK(std::abs(d.chernoff() - 0.11237744635283677) < 1e-8);
  CHECK(std::abs(d.chernoff_direct() - 0.11237744635283677) < 1e-10);
  const auto sym = HypothesisModel::discrete({0.9, 0.1}, {0.1, 0.9});
  const auto rev = HypothesisModel::discrete({0.1, 0.9}, {0.9, 0.1});
  CHECK(std::abs(sym.chernoff() - rev.chernoff()) < 1e-10);
  // Symmetric pair: the minimizer is 1/2, so C = -ln(2 sqrt(0.09)).
  CHECK(std::abs(sym.chernoff_direct() + std::log(2 * std::sqrt(0.09))) < 1e-10);
}

TEST_CASE("tau from gamma") {
  const auto g = example();
  const double tau = g.tau_from_gamma(0.02);
  CHECK(std::abs(tau - (-0.07350889359326485)) < 1e-8);
  CHECK(std::abs(g.rate_function(tau) - 0.02) < 1e-9);
  CHECK_THROWS_AS(g.tau_from_gamma(0.0), Error);
  CHECK_THROWS_AS(g.tau_from_gamma(0.2), Error);
}

TEST_CASE("probability table") {
  std::istringstream in("0 0.9 0.5\n1 0.1 0.5\n");
  const auto m = read_probability_table(in);
  CHECK(m.alphabet_size() == 2);
  CHECK(std::abs(m.kl(Direction::kOneToTwo) - 0.3680642071684971) < 1e-14);
  std::istringstream bad("0 0.9 0.5\n2 0.1 0.5\n");
  CHECK_THROWS_AS(read_probability_table(bad), Error);
  std::istringstream junk("0 x 0.5\n");
  CHECK_THROWS_AS(read_probability_table(junk), Error);
}
