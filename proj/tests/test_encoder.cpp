#include <doctest.h>

#include <cmath>

#include "augclust/encoder.hpp"
#include "augclust/error.hpp"
#include "augclust/grad_check.hpp"
#include "augclust/rng.hpp"
#include "augclust/train.hpp"
#include "support/oracles.hpp"
#include "support/reference_net.hpp"

using namespace augclust;

namespace {

EncoderConfig toy_config() {
  EncoderConfig cfg;
  cfg.input_size = 8;
  cfg.blocks = {{4, 3}, {8, 3}};
  cfg.embedding_dim = 8;
  return cfg;
}

Image random_image(int size, Rng& rng) {
  Image image(size, size);
  for (float& v : image.pixels.data) v = static_cast<float>(rng.uniform());
  return image;
}

}  // namespace

TEST_SUITE_BEGIN("encoder");

TEST_CASE("encoder_init is deterministic per seed") {
  const EncoderParams a = encoder_init(toy_config(), 5);
  const EncoderParams b = encoder_init(toy_config(), 5);
  const EncoderParams c = encoder_init(toy_config(), 6);
  REQUIRE(a.blocks.size() == b.blocks.size());
  CHECK(a.blocks[0].kernels.data == b.blocks[0].kernels.data);
  CHECK(a.fc_weight.data == b.fc_weight.data);
  CHECK(a.blocks[0].kernels.data != c.blocks[0].kernels.data);
}

TEST_CASE("default config emits a 64-dim embedding on 32x32 input") {
  const EncoderParams params = encoder_init(EncoderConfig{}, 1);
  Rng rng(2);
  const Tensor emb = encode(params, random_image(32, rng));
  CHECK(emb.shape == std::vector<int>{64});
}

TEST_CASE("embeddings are unit-norm") {
  const EncoderParams params = encoder_init(toy_config(), 3);
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor emb = encode(params, random_image(8, rng));
    double norm_sq = 0.0;
    for (float v : emb.data) norm_sq += static_cast<double>(v) * v;
    CHECK(std::fabs(std::sqrt(norm_sq) - 1.0) < 1e-5);
  }
}

TEST_CASE("all-zero image with zero biases hits the normalization guard") {
  const EncoderParams params = encoder_init(toy_config(), 3);  // biases start at zero
  Image zero(8, 8);
  EncodeCache cache;
  const Tensor emb = encode(params, zero, cache);
  CHECK(cache.degenerate);
  CHECK(emb.data[0] == 1.0f);
  for (std::size_t i = 1; i < emb.data.size(); ++i) CHECK(emb.data[i] == 0.0f);

  // Backward through the guard contributes nothing.
  EncoderGrads grads = EncoderGrads::zeros_like(params);
  Tensor upstream({8});
  upstream.fill(1.0f);
  encode_backward(params, cache, upstream, grads);
  for (const auto& slot : grads.slots) {
    for (float v : slot.data) CHECK(v == 0.0f);
  }
}

TEST_CASE("encode is deterministic") {
  const EncoderParams params = encoder_init(toy_config(), 9);
  Rng rng(10);
  const Image image = random_image(8, rng);
  const Tensor a = encode(params, image);
  const Tensor b = encode(params, image);
  CHECK(a.data == b.data);
}

TEST_CASE("encode rejects mismatched input sizes") {
  const EncoderParams params = encoder_init(toy_config(), 9);
  Rng rng(10);
  CHECK_THROWS_AS(encode(params, random_image(16, rng)), DimensionError);
}

TEST_CASE("zero upstream gradient yields zero parameter gradients") {
  const EncoderParams params = encoder_init(toy_config(), 12);
  Rng rng(13);
  EncodeCache cache;
  encode(params, random_image(8, rng), cache);
  EncoderGrads grads = EncoderGrads::zeros_like(params);
  encode_backward(params, cache, Tensor({8}), grads);
  for (const auto& slot : grads.slots) {
    for (float v : slot.data) CHECK(v == 0.0f);
  }
}

TEST_CASE("backward requires a valid cache") {
  const EncoderParams params = encoder_init(toy_config(), 12);
  EncodeCache cache;  // never produced by encode
  EncoderGrads grads = EncoderGrads::zeros_like(params);
  CHECK_THROWS_AS(encode_backward(params, cache, Tensor({8}), grads), StateError);
}

TEST_CASE("normalization Jacobian annihilates the output direction") {
  // (I - zhat zhat^T) zhat = 0: feeding the embedding itself as upstream
  // gradient must produce zero parameter gradients.
  const EncoderParams params = encoder_init(toy_config(), 21);
  Rng rng(22);
  EncodeCache cache;
  const Tensor emb = encode(params, random_image(8, rng), cache);
  EncoderGrads grads = EncoderGrads::zeros_like(params);
  encode_backward(params, cache, emb, grads);
  for (const auto& slot : grads.slots) {
    for (float v : slot.data) CHECK(std::fabs(v) < 1e-6f);
  }
}

namespace {

/// Mean prototype NLL of a small batch as a function of one parameter slot.
/// The function under finite differences is the double-precision reference
/// forward (float32 relu kinks would otherwise dominate the check); the
/// analytic gradient under test comes from nll_loss_and_grad +
/// encode_backward over the float32 path.
struct ToyLossProbe {
  EncoderParams params;
  std::vector<Image> images;
  PrototypeBank bank;
  double tau = 0.9;

  double loss_with(const EncoderParams& p) const {
    std::vector<reference::DoubleImage> doubles;
    for (const Image& image : images) doubles.push_back(reference::to_double(image));
    std::vector<int> targets(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) targets[i] = static_cast<int>(i);
    return reference::nll_double(p, doubles, targets, bank, tau);
  }

  EncoderGrads analytic_grads() const {
    const int n = static_cast<int>(images.size());
    const int d = params.config.embedding_dim;
    Tensor embeddings({n, d});
    std::vector<EncodeCache> caches(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const Tensor emb = encode(params, images[static_cast<std::size_t>(i)], caches[static_cast<std::size_t>(i)]);
      for (int j = 0; j < d; ++j) embeddings.at(i, j) = emb.data[static_cast<std::size_t>(j)];
    }
    std::vector<int> targets(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) targets[static_cast<std::size_t>(i)] = i;
    const NllResult nll = nll_loss_and_grad(embeddings, targets, bank, tau);
    EncoderGrads grads = EncoderGrads::zeros_like(params);
    for (int i = 0; i < n; ++i) {
      Tensor upstream({d});
      for (int j = 0; j < d; ++j) upstream.data[static_cast<std::size_t>(j)] = nll.embedding_grads.at(i, j);
      encode_backward(params, caches[static_cast<std::size_t>(i)], upstream, grads);
    }
    return grads;
  }
};

}  // namespace

TEST_CASE("end-to-end gradient check on a 3-image toy net") {
  ToyLossProbe probe;
  probe.params = encoder_init(toy_config(), 31);
  Rng rng(32);
  for (int i = 0; i < 3; ++i) probe.images.push_back(random_image(8, rng));
  probe.bank = init_prototypes(3, 8, 33);

  const EncoderGrads analytic = probe.analytic_grads();
  std::vector<Tensor*> slots = probe.params.parameter_tensors();
  for (std::size_t s = 0; s < slots.size(); ++s) {
    Tensor original = *slots[s];
    auto f = [&](const Tensor& candidate) {
      EncoderParams p = probe.params;
      *p.parameter_tensors()[s] = candidate;
      return probe.loss_with(p);
    };
    const double err = finite_diff_check(f, original, analytic.slots[s], 1e-6);
    INFO("parameter slot ", s);
    CHECK(err < 1e-3);
  }
}

TEST_CASE("mean-batch loss gradient is the mean of per-image gradients") {
  const EncoderConfig cfg = toy_config();
  const EncoderParams params = encoder_init(cfg, 41);
  Rng rng(42);
  const Image x1 = random_image(8, rng);
  const Image x2 = random_image(8, rng);
  const PrototypeBank bank = init_prototypes(2, 8, 43);

  auto grads_for = [&](const std::vector<const Image*>& batch, const std::vector<int>& targets) {
    const int n = static_cast<int>(batch.size());
    Tensor embeddings({n, 8});
    std::vector<EncodeCache> caches(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const Tensor emb = encode(params, *batch[static_cast<std::size_t>(i)], caches[static_cast<std::size_t>(i)]);
      for (int j = 0; j < 8; ++j) embeddings.at(i, j) = emb.data[static_cast<std::size_t>(j)];
    }
    const NllResult nll = nll_loss_and_grad(embeddings, targets, bank, 1.0);
    EncoderGrads grads = EncoderGrads::zeros_like(params);
    for (int i = 0; i < n; ++i) {
      Tensor upstream({8});
      for (int j = 0; j < 8; ++j) upstream.data[static_cast<std::size_t>(j)] = nll.embedding_grads.at(i, j);
      encode_backward(params, caches[static_cast<std::size_t>(i)], upstream, grads);
    }
    return grads;
  };

  const EncoderGrads joint = grads_for({&x1, &x2}, {0, 1});
  EncoderGrads split = grads_for({&x1}, {0});
  const EncoderGrads second = grads_for({&x2}, {1});
  split.add(second);
  split.scale(0.5f);

  for (std::size_t s = 0; s < joint.slots.size(); ++s) {
    for (std::size_t i = 0; i < joint.slots[s].data.size(); ++i) {
      CHECK(joint.slots[s].data[i] == doctest::Approx(split.slots[s].data[i]).epsilon(1e-4));
    }
  }
}

TEST_CASE("checkpoint round trip preserves every tensor bit") {
  const std::string dir = oracles::make_temp_dir("ckpt");
  Checkpoint ckpt;
  ckpt.params = encoder_init(toy_config(), 55);
  ckpt.prototypes = init_prototypes(4, 8, 56).prototypes;
  TrainConfig cfg;
  cfg.encoder = toy_config();
  ckpt.train_config_json = train_config_to_json(cfg);
  ckpt.aspect_tag = "color";
  const std::string path = dir + "/checkpoint.json";
  save_checkpoint(path, ckpt);

  const Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.aspect_tag == "color");
  CHECK(loaded.params.fc_weight.data == ckpt.params.fc_weight.data);
  CHECK(loaded.params.blocks[1].kernels.data == ckpt.params.blocks[1].kernels.data);
  CHECK(loaded.prototypes.data == ckpt.prototypes.data);
  const TrainConfig restored = train_config_from_json(loaded.train_config_json);
  CHECK(restored.encoder.embedding_dim == 8);
}

TEST_SUITE_END();
