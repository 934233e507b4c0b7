#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "augclust/image.hpp"
#include "augclust/tensor.hpp"

namespace augclust {

struct ConvBlockSpec {
  int filters = 8;
  int kernel = 3;  // stride 1, padding kernel/2, followed by relu + 2x2 avg pool
};

/// Architecture of the small convolutional encoder. Default: two conv
/// blocks (8 then 16 filters) on a 32x32 RGB input, one FC layer to a
/// 64-dim embedding, L2-normalized.
struct EncoderConfig {
  int in_channels = 3;
  int input_size = 32;  // square input
  std::vector<ConvBlockSpec> blocks = {{8, 3}, {16, 3}};
  int embedding_dim = 64;
  /// L2-normalize the FC output so prototype similarities are cosines.
  /// Disable to reproduce raw-inner-product similarity.
  bool normalize_output = true;

  /// Spatial side length after all pool stages; throws ConfigError if any
  /// stage does not divide evenly.
  int final_spatial() const;
  /// Flattened feature count entering the FC layer.
  int flat_features() const;
  void validate() const;
};

struct ConvBlockParams {
  Tensor kernels;  // [F x C x k x k]
  Tensor bias;     // [F]
};

struct EncoderParams {
  EncoderConfig config;
  std::vector<ConvBlockParams> blocks;
  Tensor fc_weight;  // [d x flat]
  Tensor fc_bias;    // [d]

  /// Parameter slots in a fixed order (block kernels/bias pairs, then FC);
  /// gradients and optimizer velocities mirror this layout.
  std::vector<Tensor*> parameter_tensors();
  std::vector<const Tensor*> parameter_tensors() const;
};

/// He-initialized parameters (std = sqrt(2 / fan_in), zero biases),
/// deterministic for a given seed.
EncoderParams encoder_init(const EncoderConfig& config, std::uint64_t seed);

/// Per-call forward activations, kept for the backward pass.
struct EncodeCache {
  bool valid = false;
  Tensor input;                    // [C x H x W]
  std::vector<Tensor> pre_relu;    // conv output + bias, per block
  std::vector<Tensor> post_relu;   // per block
  std::vector<Tensor> post_pool;   // per block
  Tensor fc_out;                   // [d], before normalization
  double pre_norm = 0.0;           // ||fc_out||
  bool degenerate = false;         // pre-norm below the zero guard
};

/// Forward pass: conv -> relu -> 2x2 avg pool per block, flatten, FC, then
/// L2 normalization (when configured). If the pre-normalization norm is
/// below 1e-12 the first standard basis vector is returned instead.
Tensor encode(const EncoderParams& params, const Image& image);
Tensor encode(const EncoderParams& params, const Image& image, EncodeCache& cache);

/// Gradient slots matching EncoderParams::parameter_tensors order.
struct EncoderGrads {
  std::vector<Tensor> slots;

  static EncoderGrads zeros_like(const EncoderParams& params);
  void add(const EncoderGrads& other);
  void scale(float factor);
};

/// Backpropagates an upstream gradient w.r.t. the embedding through the
/// cached forward pass, accumulating into `grads`. The normalization
/// Jacobian (I - zz^T)/||z|| is applied first; a degenerate forward (zero
/// guard taken) contributes zero gradient.
void encode_backward(const EncoderParams& params, const EncodeCache& cache, const Tensor& upstream,
                     EncoderGrads& grads);

/// Checkpoint container (JSON): architecture, parameter tensors, prototype
/// bank, the training config that produced it, and the aspect tag.
struct Checkpoint {
  EncoderParams params;
  Tensor prototypes;              // [K x d]; may be empty
  std::string train_config_json;  // opaque to this module
  std::string pipeline_json;      // augmentation set description
  std::string aspect_tag;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace augclust
