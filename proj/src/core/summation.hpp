#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace plab {

// Neumaier compensated accumulator. Long reductions over grids stay accurate
// to a few ulps independently of the cell count, which the energy identities
// rely on (constant fields must reproduce closed forms to ~1e-12 relative).
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_dot(const std::vector<double>& a, const std::vector<double>& b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
  return s.value();
}

}  // namespace plab
