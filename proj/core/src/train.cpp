#include "augclust/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "augclust/error.hpp"
#include "augclust/optimizer.hpp"
#include "augclust/parallel.hpp"

namespace augclust {

PrototypeBank init_prototypes(int count, int dim, std::uint64_t seed, bool normalize) {
  if (count < 1 || dim < 1) throw ConfigError("init_prototypes: count and dim must be positive");
  Rng rng = Rng::stream(seed, kSaltPrototypes);
  PrototypeBank bank;
  bank.prototypes = Tensor({count, dim});
  for (int k = 0; k < count; ++k) {
    double norm_sq = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double v = rng.normal();
      bank.prototypes.at(k, j) = static_cast<float>(v);
      norm_sq += v * v;
    }
    if (normalize) {
      const double norm = std::sqrt(norm_sq);
      for (int j = 0; j < dim; ++j) bank.prototypes.at(k, j) = static_cast<float>(bank.prototypes.at(k, j) / norm);
    }
  }
  return bank;
}

namespace {

void renormalize_rows(Tensor& t) {
  const int rows = t.shape[0], cols = t.shape[1];
  for (int i = 0; i < rows; ++i) {
    float* row = t.data.data() + static_cast<std::size_t>(i) * cols;
    double norm_sq = 0.0;
    for (int j = 0; j < cols; ++j) norm_sq += static_cast<double>(row[j]) * row[j];
    const double norm = std::sqrt(norm_sq);
    if (norm < 1e-12) {
      row[0] = 1.0f;
      for (int j = 1; j < cols; ++j) row[j] = 0.0f;
      continue;
    }
    for (int j = 0; j < cols; ++j) row[j] = static_cast<float>(row[j] / norm);
  }
}

/// Row logits s[k] = p_k . e in double precision.
std::vector<double> similarity_logits(const float* embedding, const PrototypeBank& bank) {
  const int k_count = bank.count(), d = bank.dim();
  std::vector<double> logits(static_cast<std::size_t>(k_count), 0.0);
  for (int k = 0; k < k_count; ++k) {
    const float* proto = bank.prototypes.data.data() + static_cast<std::size_t>(k) * d;
    double acc = 0.0;
    for (int j = 0; j < d; ++j) acc += static_cast<double>(proto[j]) * embedding[j];
    logits[static_cast<std::size_t>(k)] = acc;
  }
  return logits;
}

/// Softmax of logits/tau with max subtraction; returns probabilities and
/// the log-sum-exp needed for the NLL.
void softmax_row(const std::vector<double>& logits, double tau, std::vector<double>& probs, double& log_z,
                 double& max_scaled) {
  const std::size_t k = logits.size();
  probs.resize(k);
  max_scaled = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) max_scaled = std::max(max_scaled, logits[i] / tau);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    probs[i] = std::exp(logits[i] / tau - max_scaled);
    sum += probs[i];
  }
  for (std::size_t i = 0; i < k; ++i) probs[i] /= sum;
  log_z = std::log(sum);
}

}  // namespace

Tensor class_probabilities(const Tensor& embedding, const PrototypeBank& bank, double temperature) {
  if (temperature <= 0.0) throw ConfigError("class_probabilities: temperature must be positive");
  if (embedding.rank() != 1 || embedding.shape[0] != bank.dim()) {
    throw DimensionError("class_probabilities: embedding " + embedding.shape_str() + " does not match prototype dim " +
                         std::to_string(bank.dim()));
  }
  const std::vector<double> logits = similarity_logits(embedding.data.data(), bank);
  std::vector<double> probs;
  double log_z = 0.0, max_scaled = 0.0;
  softmax_row(logits, temperature, probs, log_z, max_scaled);
  Tensor out({bank.count()});
  for (int k = 0; k < bank.count(); ++k) out.data[static_cast<std::size_t>(k)] = static_cast<float>(probs[static_cast<std::size_t>(k)]);
  return out;
}

NllResult nll_loss_and_grad(const Tensor& embeddings, const std::vector<int>& targets, const PrototypeBank& bank,
                            double temperature) {
  if (temperature <= 0.0) throw ConfigError("nll_loss_and_grad: temperature must be positive");
  if (embeddings.rank() != 2 || embeddings.shape[1] != bank.dim()) {
    throw DimensionError("nll_loss_and_grad: embeddings " + embeddings.shape_str() + " do not match prototype dim " +
                         std::to_string(bank.dim()));
  }
  const int batch = embeddings.shape[0];
  const int k_count = bank.count(), d = bank.dim();
  if (static_cast<int>(targets.size()) != batch) {
    throw InputError("nll_loss_and_grad: target count does not match batch size");
  }
  for (int t : targets) {
    if (t < 0 || t >= k_count) {
      throw InputError("nll_loss_and_grad: target " + std::to_string(t) + " outside [0, " + std::to_string(k_count) +
                       ")");
    }
  }

  NllResult result;
  result.embedding_grads = Tensor({batch, d});
  result.prototype_grads = Tensor({k_count, d});

  // dL/ds per row, kept in double until the matrix products.
  std::vector<double> dlogits(static_cast<std::size_t>(batch) * k_count);
  double loss_sum = 0.0;
  std::vector<double> probs;
  for (int i = 0; i < batch; ++i) {
    const float* row = embeddings.data.data() + static_cast<std::size_t>(i) * d;
    const std::vector<double> logits = similarity_logits(row, bank);
    double log_z = 0.0, max_scaled = 0.0;
    softmax_row(logits, temperature, probs, log_z, max_scaled);
    const int target = targets[static_cast<std::size_t>(i)];
    loss_sum += log_z + max_scaled - logits[static_cast<std::size_t>(target)] / temperature;
    const double scale = 1.0 / (static_cast<double>(batch) * temperature);
    double* drow = dlogits.data() + static_cast<std::size_t>(i) * k_count;
    for (int k = 0; k < k_count; ++k) {
      drow[k] = (probs[static_cast<std::size_t>(k)] - (k == target ? 1.0 : 0.0)) * scale;
    }
  }
  result.loss = loss_sum / static_cast<double>(batch);

  // demb = dlogits . P, dproto = dlogits^T . E, reduced in fixed order.
  for (int i = 0; i < batch; ++i) {
    const double* drow = dlogits.data() + static_cast<std::size_t>(i) * k_count;
    float* grow = result.embedding_grads.data.data() + static_cast<std::size_t>(i) * d;
    for (int k = 0; k < k_count; ++k) {
      const double g = drow[k];
      if (g == 0.0) continue;
      const float* proto = bank.prototypes.data.data() + static_cast<std::size_t>(k) * d;
      for (int j = 0; j < d; ++j) grow[j] += static_cast<float>(g * proto[j]);
    }
  }
  for (int i = 0; i < batch; ++i) {
    const double* drow = dlogits.data() + static_cast<std::size_t>(i) * k_count;
    const float* erow = embeddings.data.data() + static_cast<std::size_t>(i) * d;
    for (int k = 0; k < k_count; ++k) {
      const double g = drow[k];
      if (g == 0.0) continue;
      float* prow = result.prototype_grads.data.data() + static_cast<std::size_t>(k) * d;
      for (int j = 0; j < d; ++j) prow[j] += static_cast<float>(g * erow[j]);
    }
  }
  return result;
}

double nll_loss(const Tensor& embeddings, const std::vector<int>& targets, const PrototypeBank& bank,
                double temperature) {
  if (temperature <= 0.0) throw ConfigError("nll_loss: temperature must be positive");
  const int batch = embeddings.shape[0];
  const int d = bank.dim();
  double loss_sum = 0.0;
  std::vector<double> probs;
  for (int i = 0; i < batch; ++i) {
    const float* row = embeddings.data.data() + static_cast<std::size_t>(i) * d;
    const std::vector<double> logits = similarity_logits(row, bank);
    double log_z = 0.0, max_scaled = 0.0;
    softmax_row(logits, temperature, probs, log_z, max_scaled);
    loss_sum += log_z + max_scaled - logits[static_cast<std::size_t>(targets[static_cast<std::size_t>(i)])] / temperature;
  }
  return loss_sum / static_cast<double>(batch);
}

double prototype_accuracy(const Tensor& embeddings, const PrototypeBank& bank, double temperature) {
  if (temperature <= 0.0) throw ConfigError("prototype_accuracy: temperature must be positive");
  if (embeddings.rank() != 2) throw DimensionError("prototype_accuracy: embeddings must be rank 2");
  const int n = embeddings.shape[0];
  if (n != bank.count()) {
    throw StateError("prototype_accuracy: row count " + std::to_string(n) + " != prototype count " +
                     std::to_string(bank.count()));
  }
  const int d = bank.dim();
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const float* row = embeddings.data.data() + static_cast<std::size_t>(i) * d;
    const std::vector<double> logits = similarity_logits(row, bank);
    // argmax with ties to the smallest index; temperature rescaling cannot
    // change it.
    int best = 0;
    for (int k = 1; k < bank.count(); ++k) {
      if (logits[static_cast<std::size_t>(k)] > logits[static_cast<std::size_t>(best)]) best = k;
    }
    if (best == i) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

void TrainConfig::validate() const {
  if (temperature <= 0.0) throw ConfigError("train config: temperature must be positive");
  if (learning_rate < 0.0) throw ConfigError("train config: learning rate must be non-negative");
  if (weight_decay < 0.0) throw ConfigError("train config: weight decay must be non-negative");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("train config: momentum must lie in [0,1)");
  if (max_epochs < 1) throw ConfigError("train config: max_epochs must be positive");
  if (patience < 1) throw ConfigError("train config: patience must be positive");
  if (monitor_delta <= 0.0) throw ConfigError("train config: monitor_delta must be positive");
  encoder.validate();
}

const std::vector<double>& default_lr_grid() {
  static const std::vector<double> grid = {0.2, 0.1, 0.05, 0.01, 0.005, 0.0001};
  return grid;
}
const std::vector<double>& default_wd_grid() {
  static const std::vector<double> grid = {0.001, 0.0005, 0.0001, 0.00005};
  return grid;
}
const std::vector<double>& default_tau_grid() {
  static const std::vector<double> grid = {0.8, 0.85, 0.9, 0.95, 1.0};
  return grid;
}

namespace {
using nlohmann::ordered_json;
}

std::string train_config_to_json(const TrainConfig& config) {
  ordered_json j;
  j["temperature"] = config.temperature;
  j["learning_rate"] = config.learning_rate;
  j["weight_decay"] = config.weight_decay;
  j["momentum"] = config.momentum;
  j["max_epochs"] = config.max_epochs;
  j["patience"] = config.patience;
  j["monitor_delta"] = config.monitor_delta;
  j["monitor"] = config.monitor == Monitor::accuracy ? "accuracy" : "loss";
  j["subset_size"] = config.subset_size;
  j["batch_size"] = config.batch_size;
  j["seed"] = config.seed;
  // `workers` is intentionally omitted: it is an execution detail that must
  // not change results or the config hash.
  j["use_temperature"] = config.use_temperature;
  j["use_stable_opt"] = config.use_stable_opt;
  j["use_augmentation"] = config.use_augmentation;
  j["normalize"] = config.normalize;
  ordered_json enc;
  enc["in_channels"] = config.encoder.in_channels;
  enc["input_size"] = config.encoder.input_size;
  enc["embedding_dim"] = config.encoder.embedding_dim;
  ordered_json blocks = ordered_json::array();
  for (const auto& b : config.encoder.blocks) blocks.push_back({{"filters", b.filters}, {"kernel", b.kernel}});
  enc["blocks"] = blocks;
  j["encoder"] = enc;
  return j.dump();
}

TrainConfig train_config_from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw InputError(std::string("cannot parse train config: ") + e.what());
  }
  TrainConfig c;
  c.temperature = j.value("temperature", c.temperature);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.momentum = j.value("momentum", c.momentum);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.monitor_delta = j.value("monitor_delta", c.monitor_delta);
  const std::string monitor = j.value("monitor", "accuracy");
  if (monitor == "accuracy") {
    c.monitor = Monitor::accuracy;
  } else if (monitor == "loss") {
    c.monitor = Monitor::loss;
  } else {
    throw ConfigError("train config: monitor must be 'accuracy' or 'loss', got '" + monitor + "'");
  }
  c.subset_size = j.value("subset_size", c.subset_size);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.use_temperature = j.value("use_temperature", c.use_temperature);
  c.use_stable_opt = j.value("use_stable_opt", c.use_stable_opt);
  c.use_augmentation = j.value("use_augmentation", c.use_augmentation);
  c.normalize = j.value("normalize", c.normalize);
  if (j.contains("encoder")) {
    const auto& enc = j.at("encoder");
    c.encoder.in_channels = enc.value("in_channels", c.encoder.in_channels);
    c.encoder.input_size = enc.value("input_size", c.encoder.input_size);
    c.encoder.embedding_dim = enc.value("embedding_dim", c.encoder.embedding_dim);
    if (enc.contains("blocks")) {
      c.encoder.blocks.clear();
      for (const auto& b : enc.at("blocks")) {
        c.encoder.blocks.push_back({b.at("filters").get<int>(), b.value("kernel", 3)});
      }
    }
  }
  return c;
}

void TrainingLog::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write training log: " + path);
  out << "epoch,loss,prototype_accuracy,lr,tau,elapsed_ms\n";
  char buf[256];
  for (const auto& r : epochs) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%.3f\n", r.epoch, r.loss, r.accuracy, r.lr, r.tau,
                  r.elapsed_ms);
    out << buf;
  }
  if (!out) throw IoError("failed writing training log: " + path);
}

namespace {

/// Snapshot of the learnable state for best-epoch restoration.
struct ParamSnapshot {
  EncoderParams params;
  PrototypeBank bank;
};

}  // namespace

TrainResult train(const std::vector<Image>& dataset, const AugmentationPipeline& pipeline, const TrainConfig& config) {
  if (dataset.empty()) throw InputError("train: empty dataset");
  config.validate();
  pipeline.validate();
  const int n = static_cast<int>(dataset.size());
  const int workers = config.workers > 0 ? config.workers : default_workers();
  const double tau = config.use_temperature ? config.temperature : 1.0;

  EncoderConfig enc_cfg = config.encoder;
  enc_cfg.normalize_output = config.normalize;
  for (const Image& image : dataset) validate_image(image);

  // Dataset-level augmentation preparation (rotation angle selection,
  // per-image jitter palettes), then one concrete pipeline per image.
  std::vector<AugmentationPipeline> per_image;
  if (config.use_augmentation) {
    PreparedAugmentations prepared = prepare_augmentations(pipeline, dataset, config.seed);
    per_image.reserve(dataset.size());
    for (int i = 0; i < n; ++i) {
      AugmentationPipeline concrete = prepared.for_image(i);
      if (config.subset_size >= 0) {
        if (config.subset_size > concrete.candidate_count()) {
          throw ConfigError("train: subset_size exceeds the pipeline candidate count");
        }
        concrete.subset_size = config.subset_size;
      }
      per_image.push_back(std::move(concrete));
    }
  }

  EncoderParams params = encoder_init(enc_cfg, config.seed);
  const int d = enc_cfg.embedding_dim;
  PrototypeBank bank = init_prototypes(n, d, config.seed, config.normalize);

  OptimizerState optimizer;
  optimizer.learning_rate = static_cast<float>(config.learning_rate);
  optimizer.momentum = static_cast<float>(config.momentum);
  optimizer.weight_decay = static_cast<float>(config.weight_decay);
  std::vector<const Tensor*> slots;
  for (const Tensor* t : static_cast<const EncoderParams&>(params).parameter_tensors()) slots.push_back(t);
  slots.push_back(&bank.prototypes);
  optimizer.attach(slots);
  const std::size_t proto_slot = slots.size() - 1;

  const int batch_size = (config.batch_size <= 0 || config.batch_size > n) ? n : config.batch_size;
  std::vector<int> targets(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) targets[static_cast<std::size_t>(i)] = i;

  TrainResult result;
  TrainingLog& log = result.log;
  ParamSnapshot best;
  double best_monitor = 0.0;
  int stall = 0;

  std::vector<Image> augmented(dataset.size());
  std::vector<EncodeCache> caches(dataset.size());
  std::vector<EncoderGrads> image_grads(dataset.size());
  Tensor batch_embeddings;
  Tensor clean_embeddings({n, d});

  const auto t_start = std::chrono::steady_clock::now();
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    // Augment: a fresh subset per image per epoch, from a stream keyed on
    // (seed, epoch, image) so the draw is independent of scheduling.
    if (config.use_augmentation) {
      parallel_for(dataset.size(), workers, [&](std::size_t i) {
        Rng rng = Rng::stream(config.seed, kSaltAugment, static_cast<std::uint64_t>(epoch), i);
        const AugmentationPipeline& pipe = per_image[i];
        if (!config.use_stable_opt) {
          Image current = dataset[i];
          for (const auto& op : pipe.candidates) current = apply_augmentation(op, current, rng);
          augmented[i] = std::move(current);
        } else {
          augmented[i] = sample_and_compose(pipe, dataset[i], rng);
        }
      });
    }
    const std::vector<Image>& inputs = config.use_augmentation ? augmented : dataset;

    double epoch_loss = 0.0;
    for (int b0 = 0; b0 < n; b0 += batch_size) {
      const int b1 = std::min(n, b0 + batch_size);
      const int b = b1 - b0;

      batch_embeddings = Tensor({b, d});
      parallel_for(static_cast<std::size_t>(b), workers, [&](std::size_t bi) {
        const std::size_t i = static_cast<std::size_t>(b0) + bi;
        const Tensor emb = encode(params, inputs[i], caches[i]);
        std::copy(emb.data.begin(), emb.data.end(), batch_embeddings.data.begin() + bi * static_cast<std::size_t>(d));
      });

      std::vector<int> batch_targets(targets.begin() + b0, targets.begin() + b1);
      NllResult nll = nll_loss_and_grad(batch_embeddings, batch_targets, bank, tau);
      if (!std::isfinite(nll.loss)) {
        throw NumericError("training diverged (non-finite loss) at epoch " + std::to_string(epoch));
      }
      epoch_loss += nll.loss * b;

      // Per-image backward into private slots, then a fixed-order reduction:
      // results are identical for every worker count.
      parallel_for(static_cast<std::size_t>(b), workers, [&](std::size_t bi) {
        const std::size_t i = static_cast<std::size_t>(b0) + bi;
        Tensor upstream({d});
        std::copy(nll.embedding_grads.data.begin() + bi * static_cast<std::size_t>(d),
                  nll.embedding_grads.data.begin() + (bi + 1) * static_cast<std::size_t>(d), upstream.data.begin());
        image_grads[i] = EncoderGrads::zeros_like(params);
        encode_backward(params, caches[i], upstream, image_grads[i]);
      });
      EncoderGrads total = EncoderGrads::zeros_like(params);
      for (int bi = 0; bi < b; ++bi) total.add(image_grads[static_cast<std::size_t>(b0 + bi)]);

      std::vector<Tensor*> param_slots = params.parameter_tensors();
      for (std::size_t s = 0; s < param_slots.size(); ++s) optimizer.step(s, *param_slots[s], total.slots[s]);
      optimizer.step(proto_slot, bank.prototypes, nll.prototype_grads);
      if (config.normalize) renormalize_rows(bank.prototypes);
    }
    epoch_loss /= static_cast<double>(n);

    // Monitor on un-augmented images.
    parallel_for(dataset.size(), workers, [&](std::size_t i) {
      const Tensor emb = encode(params, dataset[i]);
      std::copy(emb.data.begin(), emb.data.end(), clean_embeddings.data.begin() + i * static_cast<std::size_t>(d));
    });
    const double accuracy = prototype_accuracy(clean_embeddings, bank, tau);
    const double monitor_value =
        config.monitor == Monitor::accuracy ? accuracy : nll_loss(clean_embeddings, targets, bank, tau);

    const double elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();
    log.epochs.push_back({epoch, epoch_loss, accuracy, config.learning_rate, tau, elapsed_ms});
    log.epochs_ran = epoch;

    const bool improved = config.monitor == Monitor::accuracy ? (epoch == 1 || monitor_value > best_monitor)
                                                              : (epoch == 1 || monitor_value < best_monitor);
    if (epoch == 1) {
      best_monitor = monitor_value;
      best = {params, bank};
      log.best_epoch = 1;
      stall = 0;
    } else {
      if (std::fabs(monitor_value - best_monitor) < config.monitor_delta) {
        ++stall;
      } else {
        stall = 0;
      }
      if (improved) {
        best_monitor = monitor_value;
        best = {params, bank};
        log.best_epoch = epoch;
      }
    }
    if (stall >= config.patience) break;
  }

  log.best_monitor = best_monitor;
  log.final_loss = log.epochs[static_cast<std::size_t>(log.best_epoch - 1)].loss;
  result.params = std::move(best.params);
  result.bank = std::move(best.bank);
  return result;
}

GridSearchResult grid_search(const std::vector<Image>& dataset, const AugmentationPipeline& pipeline,
                             const TrainConfig& base, const std::vector<double>& lr_grid,
                             const std::vector<double>& wd_grid, const std::vector<double>& tau_grid,
                             int grid_max_epochs) {
  if (lr_grid.empty() || wd_grid.empty() || tau_grid.empty()) {
    throw ConfigError("grid_search: all grids must be non-empty");
  }

  GridSearchResult out;
  bool have_best = false;
  double best_loss = 0.0;
  double best_accuracy = 0.0;
  for (double lr : lr_grid) {
    for (double wd : wd_grid) {
      for (double tau : tau_grid) {
        TrainConfig cfg = base;
        cfg.learning_rate = lr;
        cfg.weight_decay = wd;
        cfg.temperature = tau;
        if (grid_max_epochs > 0) cfg.max_epochs = grid_max_epochs;

        GridPoint point{lr, wd, tau, 0.0, 0.0, false};
        try {
          TrainResult run = train(dataset, pipeline, cfg);
          point.final_loss = run.log.final_loss;
          point.accuracy = run.log.epochs[static_cast<std::size_t>(run.log.best_epoch - 1)].accuracy;
          // Minimum final loss wins; ties go to higher accuracy, then to the
          // earlier grid point.
          const bool better = !have_best || point.final_loss < best_loss ||
                              (point.final_loss == best_loss && point.accuracy > best_accuracy);
          if (better) {
            out.config = cfg;
            out.result = std::move(run);
            best_loss = point.final_loss;
            best_accuracy = point.accuracy;
            have_best = true;
          }
        } catch (const NumericError&) {
          point.diverged = true;
        }
        out.points.push_back(point);
      }
    }
  }
  if (!have_best) throw NumericError("grid_search: every grid point diverged");
  return out;
}

double augmentation_sensitivity(const EncoderParams& params, const std::vector<Image>& dataset,
                                const AugmentationPipeline& pipeline, std::uint64_t seed) {
  if (dataset.empty()) throw InputError("augmentation_sensitivity: empty dataset");
  PreparedAugmentations prepared = prepare_augmentations(pipeline, dataset, seed);

  double total = 0.0;
  std::int64_t count = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Tensor base = encode(params, dataset[i]);
    const AugmentationPipeline concrete = prepared.for_image(static_cast<int>(i));
    for (std::size_t j = 0; j < concrete.candidates.size(); ++j) {
      Rng rng = Rng::stream(seed, kSaltSensitivity, i, j);
      const Image transformed = apply_augmentation(concrete.candidates[j], dataset[i], rng);
      const Tensor moved = encode(params, transformed);
      double dist_sq = 0.0;
      for (std::size_t v = 0; v < base.data.size(); ++v) {
        const double diff = static_cast<double>(moved.data[v]) - base.data[v];
        dist_sq += diff * diff;
      }
      total += std::sqrt(dist_sq);
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace augclust
