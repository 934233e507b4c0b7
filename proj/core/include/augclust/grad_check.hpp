#pragma once

#include <functional>

#include "augclust/tensor.hpp"

namespace augclust {

/// Central-difference gradient verification oracle. Perturbs each coordinate
/// of x by +-eps, evaluates f, and returns
///   max_i |fd_i - analytic_i| / max(1, |fd_i|, |analytic_i|)
/// where fd_i = (f(x + eps e_i) - f(x - eps e_i)) / (2 eps). The step is
/// re-derived from the actually representable float32 perturbation.
double finite_diff_check(const std::function<double(const Tensor&)>& f, const Tensor& x,
                         const Tensor& analytic_grad, double eps = 1e-3);

}  // namespace augclust
