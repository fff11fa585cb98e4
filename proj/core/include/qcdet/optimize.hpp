#pragma once

#include <functional>

namespace qcdet {

struct Extremum {
  double argument;
  double value;
};

// Golden-section search for the maximum of a unimodal f on [lo, hi].
Extremum golden_section_max(const std::function<double(double)>& f, double lo, double hi, double x_tol = 1e-10);

// Maximum of a concave f over the whole real line. The bracket starts at
// [lo, hi] and grows geometrically toward the ascending side until the
// interior point dominates both ends. Returns value = +inf when the
// bracket passes |x| = limit while still ascending.
Extremum maximize_concave(const std::function<double(double)>& f, double lo = -1.0, double hi = 2.0,
                          double limit = 1e9);

// Root of a monotone f on [lo, hi] (f(lo) and f(hi) of opposite sign) by
// bisection, stopping once |f(mid)| <= f_tol or the interval collapses.
double bisect(const std::function<double(double)>& f, double lo, double hi, double f_tol);

}  // namespace qcdet
