#include "qcdet/quantizer.hpp"

#include <cmath>
#include <string>

#include "qcdet/error.hpp"

namespace qcdet {

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw Error(ErrorKind::kInvalidInput, std::string(what) + " must be finite");
}

}  // namespace

DeltaQuantizer::DeltaQuantizer(double a, double big_delta, double delta)
    : DeltaQuantizer(a, big_delta, delta, a + big_delta - delta) {}

DeltaQuantizer::DeltaQuantizer(double a, double big_delta, double delta, double threshold)
    : a_(a), big_delta_(big_delta), delta_(delta), threshold_(threshold), upper_(a + big_delta) {
  require_finite(a, "a");
  require_finite(big_delta, "big_delta");
  require_finite(delta, "delta");
  if (!(big_delta > 0.0)) throw Error(ErrorKind::kInvalidParameter, "big_delta must be positive");
  if (!(delta > 0.0 && delta < big_delta)) {
    throw Error(ErrorKind::kInvalidParameter, "delta must lie in (0, big_delta)");
  }
  if (!(threshold_ > a_ && threshold_ < upper_)) {
    throw Error(ErrorKind::kInvalidParameter, "threshold must lie strictly inside (a, a + big_delta)");
  }
}

DeltaQuantizer DeltaQuantizer::with_threshold(double a, double big_delta, double threshold) {
  require_finite(threshold, "threshold");
  return DeltaQuantizer(a, big_delta, a + big_delta - threshold, threshold);
}

double DeltaQuantizer::project(double x) const {
  require_finite(x, "x");
  if (x < a_) return a_;
  if (x > upper_) return upper_;
  return x;
}

double DeltaQuantizer::quantize(double x) const {
  require_finite(x, "x");
  return x <= threshold_ ? a_ : upper_;
}

}  // namespace qcdet
