#include "augclust/ops.hpp"

#include <string>

#include "augclust/error.hpp"

namespace augclust {

namespace {

void require_rank(const Tensor& t, int rank, const char* what) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(what) + ": expected rank " + std::to_string(rank) + " tensor, got " +
                         t.shape_str());
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul lhs");
  require_rank(b, 2, "matmul rhs");
  if (a.shape[1] != b.shape[0]) {
    throw DimensionError("matmul: inner dimensions disagree, " + a.shape_str() + " x " + b.shape_str());
  }
  const int m = a.shape[0], k = a.shape[1], p = b.shape[1];
  Tensor out({m, p});
  const float* ad = a.data.data();
  const float* bd = b.data.data();
  float* od = out.data.data();
  for (int i = 0; i < m; ++i) {
    const float* arow = ad + static_cast<std::size_t>(i) * k;
    float* orow = od + static_cast<std::size_t>(i) * p;
    for (int l = 0; l < k; ++l) {
      const float av = arow[l];
      const float* brow = bd + static_cast<std::size_t>(l) * p;
      for (int j = 0; j < p; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

MatmulGrads matmul_backward(const Tensor& a, const Tensor& b, const Tensor& upstream) {
  require_rank(upstream, 2, "matmul upstream");
  if (upstream.shape[0] != a.shape[0] || upstream.shape[1] != b.shape[1]) {
    throw DimensionError("matmul backward: upstream " + upstream.shape_str() + " does not match product of " +
                         a.shape_str() + " x " + b.shape_str());
  }
  const int m = a.shape[0], k = a.shape[1], p = b.shape[1];
  MatmulGrads grads{Tensor({m, k}), Tensor({k, p})};
  // dA = upstream . B^T
  for (int i = 0; i < m; ++i) {
    for (int l = 0; l < k; ++l) {
      float acc = 0.0f;
      for (int j = 0; j < p; ++j) acc += upstream.at(i, j) * b.at(l, j);
      grads.a.at(i, l) = acc;
    }
  }
  // dB = A^T . upstream
  for (int l = 0; l < k; ++l) {
    for (int j = 0; j < p; ++j) {
      float acc = 0.0f;
      for (int i = 0; i < m; ++i) acc += a.at(i, l) * upstream.at(i, j);
      grads.b.at(l, j) = acc;
    }
  }
  return grads;
}

namespace {

struct ConvDims {
  int c, h, w, f, kh, kw, oh, ow;
};

ConvDims conv_dims(const Tensor& input, const Tensor& kernels, const Conv2dSpec& spec) {
  require_rank(input, 3, "conv2d input");
  require_rank(kernels, 4, "conv2d kernels");
  if (spec.stride <= 0) throw ConfigError("conv2d: stride must be positive");
  if (spec.padding < 0) throw ConfigError("conv2d: padding must be non-negative");
  ConvDims d{};
  d.c = input.shape[0];
  d.h = input.shape[1];
  d.w = input.shape[2];
  d.f = kernels.shape[0];
  d.kh = kernels.shape[2];
  d.kw = kernels.shape[3];
  if (kernels.shape[1] != d.c) {
    throw DimensionError("conv2d: kernel channels " + kernels.shape_str() + " do not match input " +
                         input.shape_str());
  }
  if (d.kh > d.h + 2 * spec.padding || d.kw > d.w + 2 * spec.padding) {
    throw DimensionError("conv2d: kernel " + kernels.shape_str() + " larger than padded input " + input.shape_str());
  }
  d.oh = (d.h + 2 * spec.padding - d.kh) / spec.stride + 1;
  d.ow = (d.w + 2 * spec.padding - d.kw) / spec.stride + 1;
  return d;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernels, const Conv2dSpec& spec) {
  const ConvDims d = conv_dims(input, kernels, spec);
  Tensor out({d.f, d.oh, d.ow});
  const int s = spec.stride, p = spec.padding;
  for (int f = 0; f < d.f; ++f) {
    for (int c = 0; c < d.c; ++c) {
      const float* in = input.data.data() + static_cast<std::size_t>(c) * d.h * d.w;
      const float* ker = kernels.data.data() + (static_cast<std::size_t>(f) * d.c + c) * d.kh * d.kw;
      float* op = out.data.data() + static_cast<std::size_t>(f) * d.oh * d.ow;
      for (int oy = 0; oy < d.oh; ++oy) {
        const int iy0 = oy * s - p;
        for (int ky = 0; ky < d.kh; ++ky) {
          const int iy = iy0 + ky;
          if (iy < 0 || iy >= d.h) continue;
          const float* irow = in + static_cast<std::size_t>(iy) * d.w;
          const float* krow = ker + static_cast<std::size_t>(ky) * d.kw;
          float* orow = op + static_cast<std::size_t>(oy) * d.ow;
          for (int ox = 0; ox < d.ow; ++ox) {
            const int ix0 = ox * s - p;
            float acc = 0.0f;
            for (int kx = 0; kx < d.kw; ++kx) {
              const int ix = ix0 + kx;
              if (ix < 0 || ix >= d.w) continue;
              acc += irow[ix] * krow[kx];
            }
            orow[ox] += acc;
          }
        }
      }
    }
  }
  return out;
}

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& upstream,
                            const Conv2dSpec& spec) {
  const ConvDims d = conv_dims(input, kernels, spec);
  require_rank(upstream, 3, "conv2d upstream");
  if (upstream.shape[0] != d.f || upstream.shape[1] != d.oh || upstream.shape[2] != d.ow) {
    throw DimensionError("conv2d backward: upstream " + upstream.shape_str() + " does not match output shape");
  }
  Conv2dGrads grads{Tensor(input.shape), Tensor(kernels.shape)};
  const int s = spec.stride, p = spec.padding;
  for (int f = 0; f < d.f; ++f) {
    const float* up = upstream.data.data() + static_cast<std::size_t>(f) * d.oh * d.ow;
    for (int c = 0; c < d.c; ++c) {
      const float* in = input.data.data() + static_cast<std::size_t>(c) * d.h * d.w;
      float* gin = grads.input.data.data() + static_cast<std::size_t>(c) * d.h * d.w;
      const float* ker = kernels.data.data() + (static_cast<std::size_t>(f) * d.c + c) * d.kh * d.kw;
      float* gker = grads.kernels.data.data() + (static_cast<std::size_t>(f) * d.c + c) * d.kh * d.kw;
      for (int oy = 0; oy < d.oh; ++oy) {
        const int iy0 = oy * s - p;
        const float* urow = up + static_cast<std::size_t>(oy) * d.ow;
        for (int ky = 0; ky < d.kh; ++ky) {
          const int iy = iy0 + ky;
          if (iy < 0 || iy >= d.h) continue;
          const float* irow = in + static_cast<std::size_t>(iy) * d.w;
          float* girow = gin + static_cast<std::size_t>(iy) * d.w;
          const float* krow = ker + static_cast<std::size_t>(ky) * d.kw;
          float* gkrow = gker + static_cast<std::size_t>(ky) * d.kw;
          for (int ox = 0; ox < d.ow; ++ox) {
            const int ix0 = ox * s - p;
            const float u = urow[ox];
            for (int kx = 0; kx < d.kw; ++kx) {
              const int ix = ix0 + kx;
              if (ix < 0 || ix >= d.w) continue;
              girow[ix] += u * krow[kx];
              gkrow[kx] += u * irow[ix];
            }
          }
        }
      }
    }
  }
  return grads;
}

Tensor relu(const Tensor& x) {
  Tensor out(x.shape);
  for (std::size_t i = 0; i < x.data.size(); ++i) out.data[i] = x.data[i] > 0.0f ? x.data[i] : 0.0f;
  return out;
}

Tensor relu_backward(const Tensor& x, const Tensor& upstream) {
  require_same_shape(x, upstream, "relu backward");
  Tensor out(x.shape);
  for (std::size_t i = 0; i < x.data.size(); ++i) out.data[i] = x.data[i] > 0.0f ? upstream.data[i] : 0.0f;
  return out;
}

Tensor avg_pool2x2(const Tensor& input) {
  require_rank(input, 3, "avg_pool2x2 input");
  const int c = input.shape[0], h = input.shape[1], w = input.shape[2];
  if (h % 2 != 0 || w % 2 != 0) {
    throw DimensionError("avg_pool2x2: spatial dims must be even, got " + input.shape_str());
  }
  Tensor out({c, h / 2, w / 2});
  for (int ch = 0; ch < c; ++ch) {
    const float* in = input.data.data() + static_cast<std::size_t>(ch) * h * w;
    float* op = out.data.data() + static_cast<std::size_t>(ch) * (h / 2) * (w / 2);
    for (int y = 0; y < h / 2; ++y) {
      const float* r0 = in + static_cast<std::size_t>(2 * y) * w;
      const float* r1 = r0 + w;
      for (int x = 0; x < w / 2; ++x) {
        op[static_cast<std::size_t>(y) * (w / 2) + x] = 0.25f * (r0[2 * x] + r0[2 * x + 1] + r1[2 * x] + r1[2 * x + 1]);
      }
    }
  }
  return out;
}

Tensor avg_pool2x2_backward(const std::vector<int>& input_shape, const Tensor& upstream) {
  if (input_shape.size() != 3) throw DimensionError("avg_pool2x2 backward: input shape must be rank 3");
  const int c = input_shape[0], h = input_shape[1], w = input_shape[2];
  require_rank(upstream, 3, "avg_pool2x2 upstream");
  if (upstream.shape[0] != c || upstream.shape[1] != h / 2 || upstream.shape[2] != w / 2) {
    throw DimensionError("avg_pool2x2 backward: upstream " + upstream.shape_str() + " does not match pooled shape");
  }
  Tensor out(input_shape);
  for (int ch = 0; ch < c; ++ch) {
    const float* up = upstream.data.data() + static_cast<std::size_t>(ch) * (h / 2) * (w / 2);
    float* op = out.data.data() + static_cast<std::size_t>(ch) * h * w;
    for (int y = 0; y < h / 2; ++y) {
      for (int x = 0; x < w / 2; ++x) {
        const float g = 0.25f * up[static_cast<std::size_t>(y) * (w / 2) + x];
        op[static_cast<std::size_t>(2 * y) * w + 2 * x] = g;
        op[static_cast<std::size_t>(2 * y) * w + 2 * x + 1] = g;
        op[static_cast<std::size_t>(2 * y + 1) * w + 2 * x] = g;
        op[static_cast<std::size_t>(2 * y + 1) * w + 2 * x + 1] = g;
      }
    }
  }
  return out;
}

void add_channel_bias(Tensor& t, const Tensor& bias) {
  if (t.rank() != 3 || bias.rank() != 1 || bias.shape[0] != t.shape[0]) {
    throw DimensionError("add_channel_bias: bias " + bias.shape_str() + " does not match " + t.shape_str());
  }
  const int f = t.shape[0];
  const std::size_t plane = static_cast<std::size_t>(t.shape[1]) * t.shape[2];
  for (int ch = 0; ch < f; ++ch) {
    float* p = t.data.data() + static_cast<std::size_t>(ch) * plane;
    const float b = bias.data[static_cast<std::size_t>(ch)];
    for (std::size_t i = 0; i < plane; ++i) p[i] += b;
  }
}

Tensor channel_bias_backward(const Tensor& upstream) {
  if (upstream.rank() != 3) throw DimensionError("channel_bias_backward: expected rank 3, got " + upstream.shape_str());
  const int f = upstream.shape[0];
  const std::size_t plane = static_cast<std::size_t>(upstream.shape[1]) * upstream.shape[2];
  Tensor out({f});
  for (int ch = 0; ch < f; ++ch) {
    const float* p = upstream.data.data() + static_cast<std::size_t>(ch) * plane;
    float acc = 0.0f;
    for (std::size_t i = 0; i < plane; ++i) acc += p[i];
    out.data[static_cast<std::size_t>(ch)] = acc;
  }
  return out;
}

}  // namespace augclust
