#pragma once

namespace qcdet {

// One-bit quantizer: projection onto [a, a + big_delta] followed by a
// threshold at a + big_delta - delta. Outputs are exactly lower() or upper().
class DeltaQuantizer {
 public:
  // Requires big_delta > 0 and 0 < delta < big_delta (all finite).
  DeltaQuantizer(double a, double big_delta, double delta);

  // Same quantizer, parameterized by its threshold. The threshold is stored
  // as given so callers can place it exactly; delta is derived.
  static DeltaQuantizer with_threshold(double a, double big_delta, double threshold);

  double a() const noexcept { return a_; }
  double big_delta() const noexcept { return big_delta_; }
  double delta() const noexcept { return delta_; }
  double threshold() const noexcept { return threshold_; }
  double lower() const noexcept { return a_; }
  double upper() const noexcept { return upper_; }

  double project(double x) const;
  double quantize(double x) const;

  // Unchecked hot-path form of quantize: true when x maps to upper().
  bool is_upper(double x) const noexcept { return x > threshold_; }
  double level(bool upper) const noexcept { return upper ? upper_ : a_; }

 private:
  DeltaQuantizer(double a, double big_delta, double delta, double threshold);

  double a_;
  double big_delta_;
  double delta_;
  double threshold_;
  double upper_;
};

}  // namespace qcdet
