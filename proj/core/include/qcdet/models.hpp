#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace qcdet {

struct Gaussian {
  double mean = 0.0;
  double variance = 1.0;
};

// Finite alphabet {0, ..., size-1}; observations are the symbol index as a double.
struct Discrete {
  std::vector<double> pmf;
};

using Distribution = std::variant<Gaussian, Discrete>;

double log_density(const Distribution& dist, double y);
double draw(const Distribution& dist, std::mt19937_64& rng);

enum class Hypothesis { kH1, kH2 };
enum class Direction { kOneToTwo, kTwoToOne };

// A pair of mutually absolutely continuous distributions (P1 under H1, P2
// under H2) with strictly positive, finite divergences in both directions.
// All quantities are in nats.
class HypothesisModel {
 public:
  // Common-variance Gaussian pair; requires mu1 != mu2 and variance > 0.
  static HypothesisModel gaussian(double mu1, double mu2, double variance);
  // Same alphabet, same support, each pmf summing to 1 within 1e-12, D > 0.
  static HypothesisModel discrete(std::vector<double> pmf1, std::vector<double> pmf2);
  static HypothesisModel pair(const Distribution& p1, const Distribution& p2);

  const Distribution& p1() const noexcept { return p1_; }
  const Distribution& p2() const noexcept { return p2_; }
  bool is_gaussian() const noexcept { return std::holds_alternative<Gaussian>(p1_); }
  // 0 for Gaussian pairs.
  int alphabet_size() const noexcept;

  // ln(p1(y) / p2(y)). Throws for a symbol outside the support.
  double llr(double y) const;

  // Throws for count < 1.
  std::vector<double> sample(Hypothesis h, std::int64_t count, std::mt19937_64& rng) const;
  std::vector<double> sample(Hypothesis h, std::int64_t count, std::uint64_t seed) const;

  double kl(Direction direction) const noexcept {
    return direction == Direction::kOneToTwo ? kl12_ : kl21_;
  }

  // Lambda(lambda) = ln E_P1[exp(-lambda * LLR)] = ln sum p1^(1-lambda) p2^lambda.
  double log_mgf(double lambda) const;

  // Lambda*(tau) = sup_lambda {lambda * tau - Lambda(lambda)}, numerically.
  // Throws Error(kOutOfDomain) for tau <= -D(P1||P2). May be +inf for a
  // discrete pair once tau exceeds the largest attainable -LLR.
  double rate_function(double tau) const;

  // Chernoff information as Lambda*(0).
  double chernoff() const;

  // -min over [0, 1] of ln integral p1^lambda p2^(1-lambda), evaluated from
  // the definition rather than through Lambda*.
  double chernoff_direct() const;

  // Smallest tau in (-D(P1||P2), D(P2||P1)) with Lambda*(tau) = gamma,
  // for gamma in (0, D(P2||P1)), by bisection to 1e-10 on Lambda*.
  double tau_from_gamma(double gamma) const;

 private:
  HypothesisModel(Distribution p1, Distribution p2);
  double log_affinity(double lambda) const;  // ln integral p1^lambda p2^(1-lambda)

  Distribution p1_;
  Distribution p2_;
  double kl12_ = 0.0;
  double kl21_ = 0.0;
};

// Text table, one row per symbol: "index p1 p2". Indices must be 0..k-1.
HypothesisModel read_probability_table(std::istream& in);
HypothesisModel read_probability_table_file(const std::string& path);

}  // namespace qcdet
