#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "qcdet/error.hpp"
#include "qcdet/quantizer.hpp"

using namespace qcdet;

TEST_CASE("project clamps onto [a, a + big_delta]") {
  const DeltaQuantizer q(0.0, 2.0, 0.5);
  CHECK(q.project(-1.0) == 0.0);
  CHECK(q.project(1.3) == 1.3);
  CHECK(q.project(7.0) == 2.0);
  CHECK_THROWS_AS(q.project(std::numeric_limits<double>::infinity()), Error);
  CHECK_THROWS_AS(q.project(std::nan("")), Error);
}

TEST_CASE("quantize is a threshold at a + big_delta - delta, ties go low") {
  const DeltaQuantizer q(0.0, 2.0, 0.5);
  CHECK(q.threshold() == 1.5);
  CHECK(q.quantize(1.5) == 0.0);
  CHECK(q.quantize(1.500001) == 2.0);

  const DeltaQuantizer map(-1.0, 2.0, 1.0);
  CHECK(map.threshold() == 0.0);
  CHECK(map.quantize(0.0) == -1.0);
  CHECK(map.quantize(0.1) == 1.0);
  CHECK_THROWS_AS(map.quantize(-std::numeric_limits<double>::infinity()), Error);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(DeltaQuantizer(0.0, 0.0, 0.5), Error);
  CHECK_THROWS_AS(DeltaQuantizer(0.0, 1.0, 0.0), Error);
  CHECK_THROWS_AS(DeltaQuantizer(0.0, 1.0, 1.0), Error);
  CHECK_THROWS_AS(DeltaQuantizer(std::nan(""), 1.0, 0.5), Error);
  CHECK_THROWS_AS(DeltaQuantizer::with_threshold(0.0, 1.0, 1.0), Error);

  const auto q = DeltaQuantizer::with_threshold(-0.2, 0.4, 0.1);
  CHECK(q.threshold() == 0.1);
  CHECK(q.delta() == doctest::Approx(0.1));
}

TEST_CASE("property: quantizer invariants over random inputs") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int cfg = 0; cfg < 20; ++cfg) {
    const double a = -5.0 + 10.0 * unit(rng);
    const double big_delta = 0.01 + 4.0 * unit(rng);
    const double delta = big_delta * (0.001 + 0.998 * unit(rng));
    const DeltaQuantizer q(a, big_delta, delta);
    CHECK(q.threshold() > q.lower());
    CHECK(q.threshold() < q.upper());
    std::normal_distribution<double> xs(q.threshold(), 3.0 * big_delta);
    double prev_x = -1e300;
    double prev_q = q.lower();
    std::vector<double> sample(50'000);
    for (auto& x : sample) x = xs(rng);
    std::sort(sample.begin(), sample.end());
    for (double x : sample) {
      const double out = q.quantize(x);
      CHECK((out == q.lower() || out == q.upper()));
      CHECK(std::abs(out - q.project(x)) < big_delta);
      // Composition identity: threshold applied to the projected value.
      const double projected = q.project(x);
      CHECK(out == (projected <= a + big_delta - delta ? a : a + big_delta));
      if (x >= prev_x) CHECK(out >= prev_q);
      CHECK(q.quantize(x) == out);
      prev_x = x;
      prev_q = out;
    }
  }
}
