#include "qcdet/optimize.hpp"

#include <cmath>
#include <limits>

#include "qcdet/error.hpp"

namespace qcdet {

namespace {
const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;
}

Extremum golden_section_max(const std::function<double(double)>& f, double lo, double hi, double x_tol) {
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  while (hi - lo > x_tol * std::max(1.0, std::abs(lo) + std::abs(hi))) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = f(d);
    }
  }
  return fc >= fd ? Extremum{c, fc} : Extremum{d, fd};
}

Extremum maximize_concave(const std::function<double(double)>& f, double lo, double hi, double limit) {
  const double inf = std::numeric_limits<double>::infinity();
  double mid = 0.5 * (lo + hi);
  double flo = f(lo);
  double fmid = f(mid);
  double fhi = f(hi);
  while (fhi > fmid) {
    if (std::abs(hi) > limit) return {hi, inf};
    lo = mid;
    flo = fmid;
    mid = hi;
    fmid = fhi;
    hi = mid + 2.0 * (mid - lo);
    fhi = f(hi);
  }
  while (flo > fmid) {
    if (std::abs(lo) > limit) return {lo, inf};
    hi = mid;
    fhi = fmid;
    mid = lo;
    fmid = flo;
    lo = mid - 2.0 * (hi - mid);
    flo = f(lo);
  }
  return golden_section_max(f, lo, hi);
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double f_tol) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) throw Error(ErrorKind::kOutOfDomain, "bisect: no sign change on bracket");
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::abs(fm) <= f_tol || mid == lo || mid == hi) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace qcdet
