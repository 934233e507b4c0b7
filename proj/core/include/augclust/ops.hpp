#pragma once

#include "augclust/tensor.hpp"

namespace augclust {

/// Standard matrix product of rank-2 tensors [m x k] . [k x p] -> [m x p].
Tensor matmul(const Tensor& a, const Tensor& b);

struct MatmulGrads {
  Tensor a;
  Tensor b;
};
/// Gradients of sum(upstream * (a.b)) w.r.t. both inputs:
/// dA = upstream . B^T, dB = A^T . upstream.
MatmulGrads matmul_backward(const Tensor& a, const Tensor& b, const Tensor& upstream);

struct Conv2dSpec {
  int stride = 1;
  int padding = 0;
};

/// Cross-correlation (no kernel flip) of input [C x H x W] with kernels
/// [F x C x kh x kw], zero padding. Output is [F x H' x W'] with
/// H' = floor((H + 2*padding - kh) / stride) + 1.
Tensor conv2d(const Tensor& input, const Tensor& kernels, const Conv2dSpec& spec = {});

struct Conv2dGrads {
  Tensor input;
  Tensor kernels;
};
Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& upstream,
                            const Conv2dSpec& spec = {});

/// Elementwise max(x, 0).
Tensor relu(const Tensor& x);
/// Passes upstream where x > 0, zero elsewhere (gradient at exactly 0 is 0).
Tensor relu_backward(const Tensor& x, const Tensor& upstream);

/// 2x2 average pooling with stride 2 over [C x H x W]; H and W must be even.
Tensor avg_pool2x2(const Tensor& input);
Tensor avg_pool2x2_backward(const std::vector<int>& input_shape, const Tensor& upstream);

/// Adds bias[f] to every spatial position of channel f; input [F x H x W].
void add_channel_bias(Tensor& t, const Tensor& bias);
/// Per-channel sum of upstream over spatial positions -> bias gradient [F].
Tensor channel_bias_backward(const Tensor& upstream);

}  // namespace augclust
