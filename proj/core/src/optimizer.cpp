#include "augclust/optimizer.hpp"

#include "augclust/error.hpp"

namespace augclust {

void OptimizerState::attach(const std::vector<const Tensor*>& params) {
  velocity.clear();
  velocity.reserve(params.size());
  for (const Tensor* p : params) velocity.emplace_back(Tensor::zeros(p->shape));
}

void OptimizerState::step(std::size_t slot, Tensor& params, const Tensor& grad) {
  if (slot >= velocity.size()) throw StateError("optimizer step: slot out of range (attach first)");
  sgd_step(params, grad, velocity[slot], learning_rate, momentum, weight_decay);
}

void sgd_step(Tensor& params, const Tensor& grad, Tensor& velocity, float learning_rate, float momentum,
              float weight_decay) {
  require_same_shape(params, grad, "sgd_step params/grad");
  require_same_shape(params, velocity, "sgd_step params/velocity");
  float* p = params.data.data();
  const float* g = grad.data.data();
  float* v = velocity.data.data();
  const std::size_t n = params.data.size();
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = momentum * v[i] + (g[i] + weight_decay * p[i]);
    p[i] -= learning_rate * v[i];
  }
}

}  // namespace augclust
