#pragma once

#include <vector>

#include "augclust/tensor.hpp"

namespace augclust {

/// Classical SGD with momentum; weight decay folded into the gradient:
///   v <- momentum * v + (grad + weight_decay * params)
///   params <- params - learning_rate * v
struct OptimizerState {
  float learning_rate = 0.05f;
  float momentum = 0.9f;
  float weight_decay = 0.0f;
  std::vector<Tensor> velocity;  // one per parameter slot, same shapes

  /// Allocates zero velocities mirroring the given parameter shapes.
  void attach(const std::vector<const Tensor*>& params);
  /// Applies one step to the parameter in the given slot.
  void step(std::size_t slot, Tensor& params, const Tensor& grad);
};

/// Single-tensor step with an explicit velocity buffer.
void sgd_step(Tensor& params, const Tensor& grad, Tensor& velocity, float learning_rate, float momentum,
              float weight_decay);

}  // namespace augclust
