#include "augclust/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "augclust/error.hpp"

namespace augclust {

double finite_diff_check(const std::function<double(const Tensor&)>& f, const Tensor& x,
                         const Tensor& analytic_grad, double eps) {
  if (eps <= 0.0) throw ConfigError("finite_diff_check: eps must be positive");
  require_same_shape(x, analytic_grad, "finite_diff_check x/grad");
  Tensor probe = x;
  double max_err = 0.0;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const float orig = x.data[i];
    const float plus = static_cast<float>(orig + eps);
    const float minus = static_cast<float>(orig - eps);
    probe.data[i] = plus;
    const double f_plus = f(probe);
    probe.data[i] = minus;
    const double f_minus = f(probe);
    probe.data[i] = orig;
    if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
      throw NumericError("finite_diff_check: f returned a non-finite value at coordinate " + std::to_string(i));
    }
    // Use the step the float32 representation actually realized.
    const double step = static_cast<double>(plus) - static_cast<double>(minus);
    const double fd = (f_plus - f_minus) / step;
    const double an = static_cast<double>(analytic_grad.data[i]);
    const double denom = std::max({1.0, std::fabs(fd), std::fabs(an)});
    max_err = std::max(max_err, std::fabs(fd - an) / denom);
  }
  return max_err;
}

}  // namespace augclust
