#include "augclust/tensor.hpp"

#include <cmath>
#include <sstream>

#include "augclust/error.hpp"

namespace augclust {

std::int64_t shape_numel(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int e : shape) {
    if (e <= 0) throw DimensionError("tensor extents must be positive, got " + shape_to_string(shape));
    n *= e;
  }
  return n;
}

std::string shape_to_string(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
  data.assign(static_cast<std::size_t>(shape_numel(shape)), 0.0f);
}

Tensor::Tensor(std::vector<int> s, std::vector<float> values) : shape(std::move(s)), data(std::move(values)) {
  if (shape_numel(shape) != static_cast<std::int64_t>(data.size())) {
    throw DimensionError("tensor data length " + std::to_string(data.size()) + " does not match shape " +
                         shape_to_string(shape));
  }
}

Tensor Tensor::full(std::vector<int> s, float value) {
  Tensor t(std::move(s));
  t.fill(value);
  return t;
}

int Tensor::extent(int axis) const {
  if (axis < 0 || axis >= rank()) throw DimensionError("axis out of range for " + shape_str());
  return shape[static_cast<std::size_t>(axis)];
}

float& Tensor::at(int i, int j) {
  return data[static_cast<std::size_t>(i) * shape[1] + j];
}
float Tensor::at(int i, int j) const {
  return data[static_cast<std::size_t>(i) * shape[1] + j];
}
float& Tensor::at(int i, int j, int k) {
  return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
}
float Tensor::at(int i, int j, int k) const {
  return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
}
float& Tensor::at(int i, int j, int k, int l) {
  return data[((static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k) * shape[3] + l];
}
float Tensor::at(int i, int j, int k, int l) const {
  return data[((static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k) * shape[3] + l];
}

bool Tensor::all_finite() const {
  for (float v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::fill(float value) {
  for (float& v : data) v = value;
}

std::string Tensor::shape_str() const { return shape_to_string(shape); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shapes " + a.shape_str() + " and " + b.shape_str() + " differ");
  }
}

}  // namespace augclust
