#include "augclust/encoder.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "augclust/error.hpp"
#include "augclust/ops.hpp"
#include "augclust/rng.hpp"

namespace augclust {

namespace {
constexpr double kNormGuard = 1e-12;
}

int EncoderConfig::final_spatial() const {
  int side = input_size;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (side % 2 != 0) {
      throw ConfigError("encoder config: spatial size " + std::to_string(side) + " not divisible by pool at block " +
                        std::to_string(i));
    }
    side /= 2;
  }
  return side;
}

int EncoderConfig::flat_features() const {
  const int side = final_spatial();
  const int channels = blocks.empty() ? in_channels : blocks.back().filters;
  return channels * side * side;
}

void EncoderConfig::validate() const {
  if (in_channels <= 0 || input_size <= 0 || embedding_dim <= 0) {
    throw ConfigError("encoder config: dimensions must be positive");
  }
  for (const auto& b : blocks) {
    if (b.filters <= 0) throw ConfigError("encoder config: block filter count must be positive");
    if (b.kernel <= 0 || b.kernel % 2 == 0) {
      throw ConfigError("encoder config: kernel size must be odd and positive");
    }
  }
  final_spatial();  // throws on bad pooling chain
  if (final_spatial() < 1) throw ConfigError("encoder config: input too small for pooling chain");
}

std::vector<Tensor*> EncoderParams::parameter_tensors() {
  std::vector<Tensor*> out;
  for (auto& b : blocks) {
    out.push_back(&b.kernels);
    out.push_back(&b.bias);
  }
  out.push_back(&fc_weight);
  out.push_back(&fc_bias);
  return out;
}

std::vector<const Tensor*> EncoderParams::parameter_tensors() const {
  std::vector<const Tensor*> out;
  for (const auto& b : blocks) {
    out.push_back(&b.kernels);
    out.push_back(&b.bias);
  }
  out.push_back(&fc_weight);
  out.push_back(&fc_bias);
  return out;
}

EncoderParams encoder_init(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  EncoderParams params;
  params.config = config;
  Rng rng = Rng::stream(seed, kSaltEncoderInit);

  int channels = config.in_channels;
  for (const auto& spec : config.blocks) {
    ConvBlockParams block;
    block.kernels = Tensor({spec.filters, channels, spec.kernel, spec.kernel});
    const double std_dev = std::sqrt(2.0 / (static_cast<double>(channels) * spec.kernel * spec.kernel));
    for (float& v : block.kernels.data) v = static_cast<float>(rng.normal(0.0, std_dev));
    block.bias = Tensor({spec.filters});
    params.blocks.push_back(std::move(block));
    channels = spec.filters;
  }

  const int flat = config.flat_features();
  params.fc_weight = Tensor({config.embedding_dim, flat});
  const double std_dev = std::sqrt(2.0 / static_cast<double>(flat));
  for (float& v : params.fc_weight.data) v = static_cast<float>(rng.normal(0.0, std_dev));
  params.fc_bias = Tensor({config.embedding_dim});
  return params;
}

Tensor encode(const EncoderParams& params, const Image& image) {
  EncodeCache cache;
  return encode(params, image, cache);
}

Tensor encode(const EncoderParams& params, const Image& image, EncodeCache& cache) {
  const EncoderConfig& cfg = params.config;
  if (image.pixels.rank() != 3 || image.pixels.shape[0] != cfg.in_channels ||
      image.height() != cfg.input_size || image.width() != cfg.input_size) {
    throw DimensionError("encode: image " + image.pixels.shape_str() + " does not match configured input [" +
                         std::to_string(cfg.in_channels) + "x" + std::to_string(cfg.input_size) + "x" +
                         std::to_string(cfg.input_size) + "]");
  }

  cache = EncodeCache{};
  cache.input = image.pixels;

  Tensor current = image.pixels;
  for (std::size_t i = 0; i < params.blocks.size(); ++i) {
    const auto& block = params.blocks[i];
    Conv2dSpec spec{1, cfg.blocks[i].kernel / 2};
    Tensor conv = conv2d(current, block.kernels, spec);
    add_channel_bias(conv, block.bias);
    cache.pre_relu.push_back(conv);
    Tensor activated = relu(conv);
    cache.post_relu.push_back(activated);
    current = avg_pool2x2(activated);
    cache.post_pool.push_back(current);
  }

  // Flatten is a no-op on the row-major buffer; FC: z = W . flat + b.
  const int d = cfg.embedding_dim;
  const int flat = cfg.flat_features();
  Tensor z({d});
  for (int i = 0; i < d; ++i) {
    const float* wrow = params.fc_weight.data.data() + static_cast<std::size_t>(i) * flat;
    float acc = params.fc_bias.data[static_cast<std::size_t>(i)];
    for (int j = 0; j < flat; ++j) acc += wrow[j] * current.data[static_cast<std::size_t>(j)];
    z.data[static_cast<std::size_t>(i)] = acc;
  }
  cache.fc_out = z;

  if (!cfg.normalize_output) {
    cache.pre_norm = 1.0;
    cache.valid = true;
    return z;
  }

  double norm_sq = 0.0;
  for (float v : z.data) norm_sq += static_cast<double>(v) * v;
  const double norm = std::sqrt(norm_sq);
  cache.pre_norm = norm;
  if (norm < kNormGuard) {
    // Degenerate all-zero activation: fall back to a fixed unit vector.
    cache.degenerate = true;
    cache.valid = true;
    Tensor e0({d});
    e0.data[0] = 1.0f;
    return e0;
  }
  Tensor out({d});
  for (int i = 0; i < d; ++i) out.data[static_cast<std::size_t>(i)] = static_cast<float>(z.data[static_cast<std::size_t>(i)] / norm);
  cache.valid = true;
  return out;
}

EncoderGrads EncoderGrads::zeros_like(const EncoderParams& params) {
  EncoderGrads g;
  for (const Tensor* t : params.parameter_tensors()) g.slots.emplace_back(Tensor::zeros(t->shape));
  return g;
}

void EncoderGrads::add(const EncoderGrads& other) {
  if (slots.size() != other.slots.size()) throw DimensionError("EncoderGrads::add: slot count mismatch");
  for (std::size_t i = 0; i < slots.size(); ++i) {
    require_same_shape(slots[i], other.slots[i], "EncoderGrads::add");
    for (std::size_t j = 0; j < slots[i].data.size(); ++j) slots[i].data[j] += other.slots[i].data[j];
  }
}

void EncoderGrads::scale(float factor) {
  for (auto& t : slots) {
    for (float& v : t.data) v *= factor;
  }
}

void encode_backward(const EncoderParams& params, const EncodeCache& cache, const Tensor& upstream,
                     EncoderGrads& grads) {
  const EncoderConfig& cfg = params.config;
  if (!cache.valid) throw StateError("encode_backward: cache was not produced by a matching encode call");
  if (cache.pre_relu.size() != params.blocks.size()) {
    throw StateError("encode_backward: cache does not match the parameter block structure");
  }
  if (upstream.rank() != 1 || upstream.shape[0] != cfg.embedding_dim) {
    throw DimensionError("encode_backward: upstream " + upstream.shape_str() + " does not match embedding dim");
  }
  if (grads.slots.size() != params.blocks.size() * 2 + 2) {
    throw StateError("encode_backward: gradient slots do not match parameters");
  }

  const int d = cfg.embedding_dim;
  Tensor dz({d});
  if (cfg.normalize_output) {
    if (cache.degenerate) return;  // zero gradient through the fallback
    // dL/dz = (g - zhat (zhat . g)) / ||z|| for zhat = z/||z||.
    const double norm = cache.pre_norm;
    double dot = 0.0;
    for (int i = 0; i < d; ++i) {
      dot += (static_cast<double>(cache.fc_out.data[static_cast<std::size_t>(i)]) / norm) *
             static_cast<double>(upstream.data[static_cast<std::size_t>(i)]);
    }
    for (int i = 0; i < d; ++i) {
      const double zhat = static_cast<double>(cache.fc_out.data[static_cast<std::size_t>(i)]) / norm;
      dz.data[static_cast<std::size_t>(i)] =
          static_cast<float>((static_cast<double>(upstream.data[static_cast<std::size_t>(i)]) - zhat * dot) / norm);
    }
  } else {
    dz = upstream;
  }

  // FC backward.
  const int flat = cfg.flat_features();
  const Tensor& fc_in = cache.post_pool.empty() ? cache.input : cache.post_pool.back();
  const std::size_t n_blocks = params.blocks.size();
  Tensor& g_fc_w = grads.slots[n_blocks * 2];
  Tensor& g_fc_b = grads.slots[n_blocks * 2 + 1];
  Tensor d_flat({flat});
  for (int i = 0; i < d; ++i) {
    const float gz = dz.data[static_cast<std::size_t>(i)];
    g_fc_b.data[static_cast<std::size_t>(i)] += gz;
    float* gw = g_fc_w.data.data() + static_cast<std::size_t>(i) * flat;
    const float* w = params.fc_weight.data.data() + static_cast<std::size_t>(i) * flat;
    for (int j = 0; j < flat; ++j) {
      gw[j] += gz * fc_in.data[static_cast<std::size_t>(j)];
      d_flat.data[static_cast<std::size_t>(j)] += gz * w[j];
    }
  }

  // Reshape the flat gradient to the last pooled activation and walk the
  // blocks backwards: pool -> relu -> conv.
  Tensor current(cache.post_pool.back().shape, std::move(d_flat.data));
  for (std::size_t bi = params.blocks.size(); bi-- > 0;) {
    const Tensor& activated = cache.post_relu[bi];
    Tensor d_act = avg_pool2x2_backward(activated.shape, current);
    Tensor d_pre = relu_backward(cache.pre_relu[bi], d_act);
    const Tensor& block_in = bi == 0 ? cache.input : cache.post_pool[bi - 1];
    Conv2dSpec spec{1, cfg.blocks[bi].kernel / 2};
    Conv2dGrads cg = conv2d_backward(block_in, params.blocks[bi].kernels, d_pre, spec);
    Tensor bias_grad = channel_bias_backward(d_pre);

    Tensor& g_k = grads.slots[bi * 2];
    Tensor& g_b = grads.slots[bi * 2 + 1];
    for (std::size_t j = 0; j < g_k.data.size(); ++j) g_k.data[j] += cg.kernels.data[j];
    for (std::size_t j = 0; j < g_b.data.size(); ++j) g_b.data[j] += bias_grad.data[j];
    current = std::move(cg.input);
  }
}

namespace {

using nlohmann::ordered_json;

ordered_json tensor_to_json(const Tensor& t) {
  ordered_json j;
  j["shape"] = t.shape;
  j["data"] = t.data;
  return j;
}

Tensor tensor_from_json(const ordered_json& j) {
  std::vector<int> shape = j.at("shape").get<std::vector<int>>();
  std::vector<float> data = j.at("data").get<std::vector<float>>();
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  const EncoderConfig& cfg = checkpoint.params.config;
  ordered_json j;
  j["format"] = "augclust-checkpoint";
  j["aspect"] = checkpoint.aspect_tag;
  ordered_json arch;
  arch["in_channels"] = cfg.in_channels;
  arch["input_size"] = cfg.input_size;
  arch["embedding_dim"] = cfg.embedding_dim;
  arch["normalize_output"] = cfg.normalize_output;
  ordered_json blocks = ordered_json::array();
  for (const auto& b : cfg.blocks) blocks.push_back({{"filters", b.filters}, {"kernel", b.kernel}});
  arch["blocks"] = blocks;
  j["architecture"] = arch;

  ordered_json tensors;
  for (std::size_t i = 0; i < checkpoint.params.blocks.size(); ++i) {
    tensors["block" + std::to_string(i) + ".kernels"] = tensor_to_json(checkpoint.params.blocks[i].kernels);
    tensors["block" + std::to_string(i) + ".bias"] = tensor_to_json(checkpoint.params.blocks[i].bias);
  }
  tensors["fc.weight"] = tensor_to_json(checkpoint.params.fc_weight);
  tensors["fc.bias"] = tensor_to_json(checkpoint.params.fc_bias);
  j["tensors"] = tensors;

  if (checkpoint.prototypes.numel() > 0) j["prototypes"] = tensor_to_json(checkpoint.prototypes);
  if (!checkpoint.train_config_json.empty()) j["train_config"] = ordered_json::parse(checkpoint.train_config_json);
  if (!checkpoint.pipeline_json.empty()) j["pipeline"] = ordered_json::parse(checkpoint.pipeline_json);

  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << j.dump(1) << "\n";
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError("cannot parse checkpoint " + path + ": " + e.what());
  }
  if (j.value("format", "") != std::string("augclust-checkpoint")) {
    throw InputError("not an encoder checkpoint: " + path);
  }

  Checkpoint ckpt;
  ckpt.aspect_tag = j.value("aspect", "");
  const auto& arch = j.at("architecture");
  EncoderConfig cfg;
  cfg.in_channels = arch.at("in_channels").get<int>();
  cfg.input_size = arch.at("input_size").get<int>();
  cfg.embedding_dim = arch.at("embedding_dim").get<int>();
  cfg.normalize_output = arch.at("normalize_output").get<bool>();
  cfg.blocks.clear();
  for (const auto& b : arch.at("blocks")) {
    cfg.blocks.push_back({b.at("filters").get<int>(), b.at("kernel").get<int>()});
  }
  cfg.validate();
  ckpt.params.config = cfg;

  const auto& tensors = j.at("tensors");
  for (std::size_t i = 0; i < cfg.blocks.size(); ++i) {
    ConvBlockParams block;
    block.kernels = tensor_from_json(tensors.at("block" + std::to_string(i) + ".kernels"));
    block.bias = tensor_from_json(tensors.at("block" + std::to_string(i) + ".bias"));
    ckpt.params.blocks.push_back(std::move(block));
  }
  ckpt.params.fc_weight = tensor_from_json(tensors.at("fc.weight"));
  ckpt.params.fc_bias = tensor_from_json(tensors.at("fc.bias"));

  if (j.contains("prototypes")) ckpt.prototypes = tensor_from_json(j.at("prototypes"));
  if (j.contains("train_config")) ckpt.train_config_json = j.at("train_config").dump();
  if (j.contains("pipeline")) ckpt.pipeline_json = j.at("pipeline").dump();

  // Shape sanity for the loaded tensors.
  for (std::size_t i = 0; i < cfg.blocks.size(); ++i) {
    const auto& k = ckpt.params.blocks[i].kernels;
    if (k.rank() != 4 || k.shape[0] != cfg.blocks[i].filters) {
      throw InputError("checkpoint tensor block" + std::to_string(i) + ".kernels has unexpected shape " +
                       k.shape_str());
    }
  }
  if (ckpt.params.fc_weight.rank() != 2 || ckpt.params.fc_weight.shape[0] != cfg.embedding_dim ||
      ckpt.params.fc_weight.shape[1] != cfg.flat_features()) {
    throw InputError("checkpoint fc.weight has unexpected shape " + ckpt.params.fc_weight.shape_str());
  }
  return ckpt;
}

}  // namespace augclust
