#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "augclust/augment.hpp"
#include "augclust/encoder.hpp"
#include "augclust/tensor.hpp"

namespace augclust {

/// The learnable anchors of the latent classes. During training K equals
/// the number of images (each image is its own class).
struct PrototypeBank {
  Tensor prototypes;  // [K x d]

  int count() const { return prototypes.rank() == 2 ? prototypes.shape[0] : 0; }
  int dim() const { return prototypes.rank() == 2 ? prototypes.shape[1] : 0; }
};

/// Random unit-norm rows (plain Gaussian rows when normalize is false);
/// deterministic for a given seed.
PrototypeBank init_prototypes(int count, int dim, std::uint64_t seed, bool normalize = true);

/// Softmax over prototype similarities divided by the temperature, computed
/// with max-logit subtraction. Output sums to 1.
Tensor class_probabilities(const Tensor& embedding, const PrototypeBank& bank, double temperature);

struct NllResult {
  double loss = 0.0;
  Tensor embedding_grads;  // [B x d]
  Tensor prototype_grads;  // [K x d]
};

/// Mean negative log-likelihood of each row's target class and its
/// gradients. The gradient w.r.t. the similarity logits is
/// (softmax - onehot) / (B * temperature), chained to embeddings via the
/// prototypes and to prototypes via the embeddings.
NllResult nll_loss_and_grad(const Tensor& embeddings, const std::vector<int>& targets, const PrototypeBank& bank,
                            double temperature);

/// Loss-only evaluation path (used by the monitor).
double nll_loss(const Tensor& embeddings, const std::vector<int>& targets, const PrototypeBank& bank,
                double temperature);

/// Fraction of rows whose most probable class is their own index; ties go
/// to the smallest index. Requires n == K.
double prototype_accuracy(const Tensor& embeddings, const PrototypeBank& bank, double temperature);

enum class Monitor { accuracy, loss };

struct TrainConfig {
  double temperature = 0.9;
  double learning_rate = 0.05;
  double weight_decay = 1e-4;
  double momentum = 0.9;
  int max_epochs = 1000;
  int patience = 20;          // epochs with an unchanged monitor before stopping
  double monitor_delta = 1e-4;
  Monitor monitor = Monitor::accuracy;
  int subset_size = -1;  // -1: use the pipeline's S
  int batch_size = 0;    // 0: full batch
  std::uint64_t seed = 1;
  int workers = 0;  // 0: default_workers(); not part of the model config hash

  // Ablation toggles.
  bool use_temperature = true;  // false fixes the temperature at 1
  bool use_stable_opt = true;   // false applies the full candidate list in order
  bool use_augmentation = true; // false feeds raw images

  /// Unit-norm embeddings and prototypes (cosine similarities). Disable for
  /// raw inner products.
  bool normalize = true;

  EncoderConfig encoder;

  void validate() const;
};

/// Hyperparameter grids searched in the experiments this implementation
/// mirrors.
const std::vector<double>& default_lr_grid();       // {0.2,0.1,0.05,0.01,0.005,0.0001}
const std::vector<double>& default_wd_grid();       // {0.001,0.0005,0.0001,0.00005}
const std::vector<double>& default_tau_grid();      // {0.8,0.85,0.9,0.95,1.0}

std::string train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const std::string& json_text);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;      // training loss on the augmented batch
  double accuracy = 0.0;  // prototype accuracy on un-augmented images
  double lr = 0.0;
  double tau = 0.0;
  double elapsed_ms = 0.0;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  int epochs_ran = 0;
  int best_epoch = 0;
  double best_monitor = 0.0;
  double final_loss = 0.0;  // training loss at the best-monitor epoch

  void write_csv(const std::string& path) const;
};

struct TrainResult {
  EncoderParams params;  // from the best-monitor epoch
  PrototypeBank bank;
  TrainingLog log;
};

/// Trains one encoder against one augmentation pipeline: per epoch each
/// image gets a freshly drawn augmentation subset, the batch is encoded,
/// the prototype NLL is descended with SGD (prototypes re-normalized after
/// each step), and the monitor is evaluated on un-augmented images. Stops
/// at max_epochs or when the monitor has not moved by monitor_delta for
/// `patience` consecutive epochs.
TrainResult train(const std::vector<Image>& dataset, const AugmentationPipeline& pipeline, const TrainConfig& config);

struct GridPoint {
  double learning_rate = 0.0;
  double weight_decay = 0.0;
  double temperature = 0.0;
  double final_loss = 0.0;
  double accuracy = 0.0;
  bool diverged = false;
};

struct GridSearchResult {
  TrainConfig config;    // the winning configuration
  TrainResult result;    // its trained encoder
  std::vector<GridPoint> points;
};

/// Trains one run per grid point and keeps the minimum final training
/// loss; ties broken by higher prototype accuracy, then by grid order.
/// Diverged runs are excluded; all-diverged is a numeric error.
GridSearchResult grid_search(const std::vector<Image>& dataset, const AugmentationPipeline& pipeline,
                             const TrainConfig& base, const std::vector<double>& lr_grid,
                             const std::vector<double>& wd_grid, const std::vector<double>& tau_grid,
                             int grid_max_epochs = 0);

/// Mean over images and candidate ops of ||f(g(x)) - f(x)||_2: how much the
/// encoder moves under a pipeline's transforms. Training against a pipeline
/// should make the encoder less sensitive to it than to the orthogonal one.
double augmentation_sensitivity(const EncoderParams& params, const std::vector<Image>& dataset,
                                const AugmentationPipeline& pipeline, std::uint64_t seed);

}  // namespace augclust
