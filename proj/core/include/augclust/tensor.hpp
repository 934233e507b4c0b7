#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace augclust {

/// Dense row-major float32 tensor: the carrier for images, activations,
/// network parameters and gradients. Training math runs in float32;
/// evaluation/metrics accumulate in double (see metrics/kmeans modules).
struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);
  Tensor(std::vector<int> s, std::vector<float> values);

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<int> s, float value);

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int extent(int axis) const;

  float& at(int i) { return data[static_cast<std::size_t>(i)]; }
  float at(int i) const { return data[static_cast<std::size_t>(i)]; }
  float& at(int i, int j);
  float at(int i, int j) const;
  float& at(int i, int j, int k);
  float at(int i, int j, int k) const;
  float& at(int i, int j, int k, int l);
  float at(int i, int j, int k, int l) const;

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;
  void fill(float value);

  std::string shape_str() const;
};

std::int64_t shape_numel(const std::vector<int>& shape);
std::string shape_to_string(const std::vector<int>& shape);

/// Throws DimensionError naming both shapes if they differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace augclust
