#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "augclust/augment.hpp"
#include "augclust/dataset.hpp"
#include "augclust/train.hpp"

namespace augclust {

inline constexpr const char* kVersion = "0.1.0";

/// One clustering to produce: an augmentation pipeline plus the cluster
/// count (0 means "use the ground-truth label count of the matching
/// aspect").
struct AspectRun {
  AugmentationPipeline pipeline;
  int k = 0;
};

struct RunConfig {
  std::string manifest_path;
  std::string out_dir;
  std::vector<AspectRun> aspects;
  TrainConfig train;
  // Hyperparameter grids; singleton grids mean "no search".
  std::vector<double> lr_grid;
  std::vector<double> wd_grid;
  std::vector<double> tau_grid;
  int grid_max_epochs = 0;
};

struct AspectReport {
  std::string aspect;
  double nmi = 0.0;
  double rand_index = 0.0;
  int epochs_ran = 0;
  double final_loss = 0.0;
  std::string config_hash;
};

struct PipelineReport {
  std::vector<AspectReport> aspects;
  std::uint64_t seed = 0;
  std::string version = kVersion;

  std::string to_json() const;
};

struct EvalReport {
  std::string aspect;
  double nmi = 0.0;
  double rand_index = 0.0;
  int n = 0;
  int k_true = 0;
  int k_pred = 0;
};

std::string eval_report_to_json(const std::vector<EvalReport>& reports);

/// FNV-1a over the canonical train-config + pipeline JSON, hex encoded.
std::string config_hash(const TrainConfig& train, const AugmentationPipeline& pipeline);

// Stage functions shared by the pipeline and the individual subcommands so
// the two routes produce identical artifacts.

struct TrainStageResult {
  TrainResult result;
  TrainConfig effective;  // grid winner when a search ran
};
TrainStageResult stage_train(const std::vector<Image>& images, const AugmentationPipeline& pipeline,
                             const TrainConfig& base, const std::vector<double>& lr_grid,
                             const std::vector<double>& wd_grid, const std::vector<double>& tau_grid,
                             int grid_max_epochs);

EmbeddingMatrix stage_embed(const EncoderParams& params, const std::vector<Image>& images, int workers);

EvalReport stage_eval(const DatasetManifest& manifest, const std::string& aspect, const std::vector<int>& predicted);

/// Runs the whole flow for every configured aspect: train (with optional
/// grid search), embed un-augmented images, k-means, evaluate against the
/// matching ground truth, and write checkpoint/log/embeddings/clustering/
/// projection plus the combined report under out_dir/<aspect>/. All inputs
/// are validated before anything is written.
PipelineReport run_pipeline(const RunConfig& config);

}  // namespace augclust
