#include "qcdet/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <sstream>

#include "qcdet/error.hpp"
#include "qcdet/optimize.hpp"

namespace qcdet {

namespace {

int symbol_of(const Discrete& d, double y) {
  if (!std::isfinite(y) || y != std::floor(y) || y < 0.0 || y >= static_cast<double>(d.pmf.size())) {
    throw Error(ErrorKind::kInvalidInput, "observation is not a symbol of the alphabet");
  }
  return static_cast<int>(y);
}

double log_sum_exp(const std::vector<double>& terms) {
  const double top = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc);
}

void validate_pmf(const std::vector<double>& pmf) {
  if (pmf.size() < 2) throw Error(ErrorKind::kInvalidInput, "alphabet needs at least 2 symbols");
  double total = 0.0;
  for (double p : pmf) {
    if (!std::isfinite(p) || p < 0.0) throw Error(ErrorKind::kInvalidInput, "probabilities must be finite and >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorKind::kInvalidInput, "probabilities must sum to 1");
}

double mean_diff_sq_over_var(const Gaussian& g1, const Gaussian& g2) {
  const double d = g1.mean - g2.mean;
  return d * d / g1.variance;
}

}  // namespace

double log_density(const Distribution& dist, double y) {
  if (const auto* g = std::get_if<Gaussian>(&dist)) {
    if (!std::isfinite(y)) throw Error(ErrorKind::kInvalidInput, "observation must be finite");
    const double z = y - g->mean;
    return -0.5 * z * z / g->variance - 0.5 * std::log(2.0 * std::numbers::pi * g->variance);
  }
  const auto& d = std::get<Discrete>(dist);
  const double p = d.pmf[symbol_of(d, y)];
  if (p <= 0.0) throw Error(ErrorKind::kInvalidInput, "symbol has zero probability");
  return std::log(p);
}

double draw(const Distribution& dist, std::mt19937_64& rng) {
  if (const auto* g = std::get_if<Gaussian>(&dist)) {
    std::normal_distribution<double> normal(g->mean, std::sqrt(g->variance));
    return normal(rng);
  }
  const auto& d = std::get<Discrete>(dist);
  std::discrete_distribution<int> pick(d.pmf.begin(), d.pmf.end());
  return static_cast<double>(pick(rng));
}

HypothesisModel::HypothesisModel(Distribution p1, Distribution p2) : p1_(std::move(p1)), p2_(std::move(p2)) {}

HypothesisModel HypothesisModel::gaussian(double mu1, double mu2, double variance) {
  return pair(Gaussian{mu1, variance}, Gaussian{mu2, variance});
}

HypothesisModel HypothesisModel::discrete(std::vector<double> pmf1, std::vector<double> pmf2) {
  return pair(Discrete{std::move(pmf1)}, Discrete{std::move(pmf2)});
}

HypothesisModel HypothesisModel::pair(const Distribution& p1, const Distribution& p2) {
  if (p1.index() != p2.index()) throw Error(ErrorKind::kInvalidInput, "distributions must be of the same family");
  HypothesisModel model(p1, p2);
  if (const auto* g1 = std::get_if<Gaussian>(&p1)) {
    const auto& g2 = std::get<Gaussian>(p2);
    if (!std::isfinite(g1->mean) || !std::isfinite(g2.mean)) throw Error(ErrorKind::kInvalidInput, "means must be finite");
    if (!(g1->variance > 0.0) || !std::isfinite(g1->variance) || g1->variance != g2.variance) {
      throw Error(ErrorKind::kInvalidInput, "Gaussian pair needs one common positive variance");
    }
    model.kl12_ = 0.5 * mean_diff_sq_over_var(*g1, g2);
    model.kl21_ = model.kl12_;
  } else {
    const auto& d1 = std::get<Discrete>(p1);
    const auto& d2 = std::get<Discrete>(p2);
    validate_pmf(d1.pmf);
    validate_pmf(d2.pmf);
    if (d1.pmf.size() != d2.pmf.size()) throw Error(ErrorKind::kInvalidInput, "alphabets differ in size");
    for (std::size_t s = 0; s < d1.pmf.size(); ++s) {
      if ((d1.pmf[s] > 0.0) != (d2.pmf[s] > 0.0)) {
        throw Error(ErrorKind::kInvalidInput, "distributions are not mutually absolutely continuous");
      }
      if (d1.pmf[s] > 0.0) {
        model.kl12_ += d1.pmf[s] * std::log(d1.pmf[s] / d2.pmf[s]);
        model.kl21_ += d2.pmf[s] * std::log(d2.pmf[s] / d1.pmf[s]);
      }
    }
  }
  if (!(model.kl12_ > 0.0) || !(model.kl21_ > 0.0) || !std::isfinite(model.kl12_) || !std::isfinite(model.kl21_)) {
    throw Error(ErrorKind::kInvalidInput, "divergences must be strictly positive and finite");
  }
  return model;
}

int HypothesisModel::alphabet_size() const noexcept {
  if (const auto* d = std::get_if<Discrete>(&p1_)) return static_cast<int>(d->pmf.size());
  return 0;
}

double HypothesisModel::llr(double y) const {
  if (const auto* g1 = std::get_if<Gaussian>(&p1_)) {
    if (!std::isfinite(y)) throw Error(ErrorKind::kInvalidInput, "observation must be finite");
    const auto& g2 = std::get<Gaussian>(p2_);
    return (g1->mean - g2.mean) * (2.0 * y - g1->mean - g2.mean) / (2.0 * g1->variance);
  }
  const auto& d1 = std::get<Discrete>(p1_);
  const auto& d2 = std::get<Discrete>(p2_);
  const int s = symbol_of(d1, y);
  if (d1.pmf[s] <= 0.0) throw Error(ErrorKind::kInvalidInput, "symbol outside the support");
  return std::log(d1.pmf[s] / d2.pmf[s]);
}

std::vector<double> HypothesisModel::sample(Hypothesis h, std::int64_t count, std::mt19937_64& rng) const {
  if (count < 1) throw Error(ErrorKind::kInvalidInput, "sample count must be >= 1");
  const Distribution& source = h == Hypothesis::kH1 ? p1_ : p2_;
  std::vector<double> out(static_cast<std::size_t>(count));
  if (const auto* g = std::get_if<Gaussian>(&source)) {
    std::normal_distribution<double> normal(g->mean, std::sqrt(g->variance));
    for (auto& y : out) y = normal(rng);
  } else {
    const auto& d = std::get<Discrete>(source);
    std::discrete_distribution<int> pick(d.pmf.begin(), d.pmf.end());
    for (auto& y : out) y = static_cast<double>(pick(rng));
  }
  return out;
}

std::vector<double> HypothesisModel::sample(Hypothesis h, std::int64_t count, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  return sample(h, count, rng);
}

double HypothesisModel::log_mgf(double lambda) const {
  if (!std::isfinite(lambda)) throw Error(ErrorKind::kInvalidInput, "lambda must be finite");
  if (is_gaussian()) {
    const double v = mean_diff_sq_over_var(std::get<Gaussian>(p1_), std::get<Gaussian>(p2_));
    return -lambda * kl12_ + 0.5 * lambda * lambda * v;
  }
  const auto& d1 = std::get<Discrete>(p1_);
  const auto& d2 = std::get<Discrete>(p2_);
  std::vector<double> terms;
  for (std::size_t s = 0; s < d1.pmf.size(); ++s) {
    if (d1.pmf[s] > 0.0) terms.push_back((1.0 - lambda) * std::log(d1.pmf[s]) + lambda * std::log(d2.pmf[s]));
  }
  return log_sum_exp(terms);
}

double HypothesisModel::log_affinity(double lambda) const {
  if (const auto* g1 = std::get_if<Gaussian>(&p1_)) {
    const auto& g2 = std::get<Gaussian>(p2_);
    const double d = g1->mean - g2.mean;
    return -lambda * (1.0 - lambda) * d * d / (2.0 * g1->variance);
  }
  const auto& d1 = std::get<Discrete>(p1_);
  const auto& d2 = std::get<Discrete>(p2_);
  std::vector<double> terms;
  for (std::size_t s = 0; s < d1.pmf.size(); ++s) {
    if (d1.pmf[s] > 0.0) terms.push_back(lambda * std::log(d1.pmf[s]) + (1.0 - lambda) * std::log(d2.pmf[s]));
  }
  return log_sum_exp(terms);
}

double HypothesisModel::rate_function(double tau) const {
  if (!std::isfinite(tau)) throw Error(ErrorKind::kInvalidInput, "tau must be finite");
  if (tau <= -kl12_) throw Error(ErrorKind::kOutOfDomain, "rate function needs tau > -D(P1||P2)");
  const auto objective = [this, tau](double lambda) { return lambda * tau - log_mgf(lambda); };
  return maximize_concave(objective).value;
}

double HypothesisModel::chernoff() const { return rate_function(0.0); }

double HypothesisModel::chernoff_direct() const {
  const auto neg = [this](double lambda) { return -log_affinity(lambda); };
  return golden_section_max(neg, 0.0, 1.0, 1e-12).value;
}

double HypothesisModel::tau_from_gamma(double gamma) const {
  if (!(gamma > 0.0 && gamma < kl21_)) {
    throw Error(ErrorKind::kInvalidParameter, "gamma must lie in (0, D(P2||P1))");
  }
  // Lambda*(-D12) = 0 and Lambda*(D21) = D21 > gamma; Lambda* is non-decreasing in between.
  const double lo = -kl12_ * (1.0 - 1e-12);
  const auto excess = [this, gamma](double tau) { return rate_function(tau) - gamma; };
  return bisect(excess, lo, kl21_, 1e-10);
}

HypothesisModel read_probability_table(std::istream& in) {
  std::vector<double> pmf1;
  std::vector<double> pmf2;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    long long index = 0;
    double a = 0.0;
    double b = 0.0;
    if (!(row >> index >> a >> b)) throw Error(ErrorKind::kInvalidInput, "probability table: malformed row '" + line + "'");
    if (index != static_cast<long long>(pmf1.size())) {
      throw Error(ErrorKind::kInvalidInput, "probability table: symbol indices must be 0, 1, 2, ...");
    }
    pmf1.push_back(a);
    pmf2.push_back(b);
  }
  return HypothesisModel::discrete(std::move(pmf1), std::move(pmf2));
}

HypothesisModel read_probability_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kInvalidInput, "cannot open probability table " + path);
  return read_probability_table(in);
}

}  // namespace qcdet
