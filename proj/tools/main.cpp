// Command-line surface for the multiple-clustering pipeline: generate data,
// train one encoder per augmentation set, embed, cluster, evaluate, project.
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "augclust/dataset.hpp"
#include "augclust/error.hpp"
#include "augclust/metrics.hpp"
#include "augclust/pipeline.hpp"

namespace fs = std::filesystem;
using namespace augclust;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct TrainFlags {
  double temperature = 0.9;
  double learning_rate = 0.05;
  double weight_decay = 1e-4;
  double momentum = 0.9;
  int max_epochs = 1000;
  int patience = 20;
  double monitor_delta = 1e-4;
  std::string monitor = "accuracy";
  int subset_size = -1;
  int batch_size = 0;
  std::uint64_t seed = 1;
  int workers = 0;
  bool no_temperature = false;
  bool no_stable_opt = false;
  bool no_augmentation = false;
  bool raw_similarity = false;
  int embedding_dim = 64;
  int input_size = 32;

  std::vector<double> lr_grid;
  std::vector<double> wd_grid;
  std::vector<double> tau_grid;
  int grid_max_epochs = 0;

  // Option handles, used to tell explicit flags from defaults when a JSON
  // config file provides base values.
  std::map<std::string, CLI::Option*> options;

  void add_to(CLI::App* cmd) {
    options["temperature"] = cmd->add_option("--temperature", temperature, "Softmax temperature");
    options["learning_rate"] = cmd->add_option("--learning-rate", learning_rate, "SGD learning rate");
    options["weight_decay"] = cmd->add_option("--weight-decay", weight_decay, "SGD weight decay");
    options["momentum"] = cmd->add_option("--momentum", momentum, "SGD momentum");
    options["max_epochs"] = cmd->add_option("--max-epochs", max_epochs, "Training epoch cap");
    options["patience"] = cmd->add_option("--patience", patience, "Early-stopping patience (epochs)");
    options["monitor_delta"] = cmd->add_option("--monitor-delta", monitor_delta, "Monitor change threshold");
    options["monitor"] =
        cmd->add_option("--monitor", monitor, "Early-stopping monitor: accuracy|loss")->check(CLI::IsMember({"accuracy", "loss"}));
    options["subset_size"] = cmd->add_option("--subset-size", subset_size, "Augmentation subset size S (-1: pipeline's)");
    options["batch_size"] = cmd->add_option("--batch-size", batch_size, "Mini-batch size (0: full batch)");
    options["seed"] = cmd->add_option("--seed", seed, "Run seed");
    options["workers"] = cmd->add_option("--workers", workers, "Worker threads (0: auto)");
    options["no_temperature"] = cmd->add_flag("--no-temperature", no_temperature, "Ablation: fix temperature at 1");
    options["no_stable_opt"] =
        cmd->add_flag("--no-stable-opt", no_stable_opt, "Ablation: apply the full candidate list each epoch");
    options["no_augmentation"] = cmd->add_flag("--no-augmentation", no_augmentation, "Ablation: train on raw images");
    options["raw_similarity"] =
        cmd->add_flag("--raw-similarity", raw_similarity, "Raw inner products (skip L2 normalization)");
    options["embedding_dim"] = cmd->add_option("--embedding-dim", embedding_dim, "Embedding dimension d");
    options["input_size"] = cmd->add_option("--input-size", input_size, "Square input size");
    options["lr_grid"] = cmd->add_option("--lr-grid", lr_grid, "Learning-rate grid")->delimiter(',');
    options["wd_grid"] = cmd->add_option("--wd-grid", wd_grid, "Weight-decay grid")->delimiter(',');
    options["tau_grid"] = cmd->add_option("--tau-grid", tau_grid, "Temperature grid")->delimiter(',');
    options["grid_max_epochs"] = cmd->add_option("--grid-max-epochs", grid_max_epochs, "Epoch cap during grid search");
  }

  bool given(const std::string& name) const {
    auto it = options.find(name);
    return it != options.end() && it->second->count() > 0;
  }

  /// Folds config-file values (lowest precedence), then explicit flags, into
  /// a TrainConfig.
  TrainConfig merge(const nlohmann::json* file) const {
    TrainConfig cfg;
    if (file) {
      const auto& j = *file;
      cfg = train_config_from_json(j.dump());
      if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
    }
    if (given("temperature") || !file) cfg.temperature = temperature;
    if (given("learning_rate") || !file) cfg.learning_rate = learning_rate;
    if (given("weight_decay") || !file) cfg.weight_decay = weight_decay;
    if (given("momentum") || !file) cfg.momentum = momentum;
    if (given("max_epochs") || !file) cfg.max_epochs = max_epochs;
    if (given("patience") || !file) cfg.patience = patience;
    if (given("monitor_delta") || !file) cfg.monitor_delta = monitor_delta;
    if (given("monitor") || !file) cfg.monitor = monitor == "loss" ? Monitor::loss : Monitor::accuracy;
    if (given("subset_size") || !file) cfg.subset_size = subset_size;
    if (given("batch_size") || !file) cfg.batch_size = batch_size;
    if (given("seed") || !file) cfg.seed = seed;
    if (given("workers") || !file) cfg.workers = workers;
    if (given("no_temperature")) cfg.use_temperature = !no_temperature;
    if (given("no_stable_opt")) cfg.use_stable_opt = !no_stable_opt;
    if (given("no_augmentation")) cfg.use_augmentation = !no_augmentation;
    if (given("raw_similarity")) cfg.normalize = !raw_similarity;
    if (given("embedding_dim") || !file) cfg.encoder.embedding_dim = embedding_dim;
    if (given("input_size") || !file) cfg.encoder.input_size = input_size;
    cfg.encoder.normalize_output = cfg.normalize;
    return cfg;
  }

  std::vector<double> grid(const std::string& name, const std::vector<double>& flag_value,
                           const nlohmann::json* file) const {
    if (given(name)) return flag_value;
    if (file && file->contains(name)) return file->at(name).get<std::vector<double>>();
    return flag_value;
  }
};

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InputError("cannot parse config file " + path + ": " + e.what());
  }
  return j;
}

std::vector<AspectRun> build_aspect_runs(const std::vector<std::string>& presets,
                                         const std::vector<std::string>& k_specs, const nlohmann::json* file) {
  std::vector<std::string> names = presets;
  if (names.empty() && file && file->contains("aspects")) {
    for (const auto& a : file->at("aspects")) {
      names.push_back(a.is_string() ? a.get<std::string>() : a.at("preset").get<std::string>());
    }
  }
  if (names.empty()) names = {"color", "shape"};

  std::map<std::string, int> k_by_aspect;
  for (const auto& spec : k_specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError("--k expects <aspect>=<count>, got '" + spec + "'");
    k_by_aspect[spec.substr(0, eq)] = std::stoi(spec.substr(eq + 1));
  }
  if (file && file->contains("aspects")) {
    for (const auto& a : file->at("aspects")) {
      if (a.is_object() && a.contains("k")) {
        const std::string name = a.at("preset").get<std::string>();
        if (!k_by_aspect.count(resolve_pipeline(name).aspect_tag)) {
          k_by_aspect[resolve_pipeline(name).aspect_tag] = a.at("k").get<int>();
        }
      }
    }
  }

  std::vector<AspectRun> runs;
  for (const auto& name : names) {
    AspectRun run;
    run.pipeline = resolve_pipeline(name);
    auto it = k_by_aspect.find(run.pipeline.aspect_tag);
    run.k = it != k_by_aspect.end() ? it->second : 0;
    runs.push_back(std::move(run));
  }
  return runs;
}

void require_exists(const std::string& path, const char* what) {
  if (!fs::exists(path)) throw InputError(std::string(what) + " does not exist: " + path);
}

// ---- subcommand bodies ----

int cmd_gen_data(const SyntheticSpec& spec, const std::string& out_dir) {
  const DatasetManifest manifest = generate_synthetic(spec, out_dir);
  std::printf("wrote %d images and %s/manifest.json\n", manifest.size(), out_dir.c_str());
  return 0;
}

int cmd_train(const std::string& manifest_path, const std::string& pipeline_name, const std::string& out_dir,
              const TrainFlags& flags, const nlohmann::json* file) {
  require_exists(manifest_path, "manifest");
  const DatasetManifest manifest = load_manifest(manifest_path);
  const std::vector<Image> images = load_images(manifest);
  const AugmentationPipeline pipeline = resolve_pipeline(pipeline_name);
  TrainConfig cfg = flags.merge(file);
  cfg.encoder.input_size = images.front().height();

  TrainStageResult trained =
      stage_train(images, pipeline, cfg, flags.grid("lr_grid", flags.lr_grid, file),
                  flags.grid("wd_grid", flags.wd_grid, file), flags.grid("tau_grid", flags.tau_grid, file),
                  flags.grid_max_epochs);

  const fs::path aspect_dir = fs::path(out_dir) / pipeline.aspect_tag;
  std::error_code ec;
  fs::create_directories(aspect_dir, ec);
  if (ec) throw IoError("cannot create " + aspect_dir.string() + ": " + ec.message());

  Checkpoint ckpt;
  ckpt.params = trained.result.params;
  ckpt.prototypes = trained.result.bank.prototypes;
  ckpt.train_config_json = train_config_to_json(trained.effective);
  ckpt.pipeline_json = pipeline_to_json(pipeline);
  ckpt.aspect_tag = pipeline.aspect_tag;
  save_checkpoint((aspect_dir / "checkpoint.json").string(), ckpt);
  trained.result.log.write_csv((aspect_dir / "train_log.csv").string());
  std::printf("trained aspect '%s': %d epochs, final loss %.6f -> %s\n", pipeline.aspect_tag.c_str(),
              trained.result.log.epochs_ran, trained.result.log.final_loss, aspect_dir.string().c_str());
  return 0;
}

int cmd_embed(const std::string& manifest_path, const std::string& checkpoint_path, const std::string& out_path,
              int workers) {
  require_exists(manifest_path, "manifest");
  require_exists(checkpoint_path, "checkpoint");
  const DatasetManifest manifest = load_manifest(manifest_path);
  const std::vector<Image> images = load_images(manifest);
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const EmbeddingMatrix embeddings = stage_embed(ckpt.params, images, workers);
  export_embeddings(embeddings, manifest, out_path);
  std::printf("wrote %dx%d embeddings to %s\n", embeddings.rows, embeddings.cols, out_path.c_str());
  return 0;
}

int cmd_cluster(const std::string& embeddings_path, int k, std::uint64_t seed, const std::string& aspect,
                const std::string& out_path) {
  require_exists(embeddings_path, "embeddings file");
  std::vector<std::string> paths;
  const EmbeddingMatrix embeddings = import_embeddings(embeddings_path, &paths);
  ClusteringResult result = kmeans(embeddings, k, seed);
  result.aspect_tag = aspect;
  export_clustering(result.labels, paths, aspect, out_path);
  std::printf("clustered %d rows into k=%d (inertia %.6f) -> %s\n", embeddings.rows, k, result.inertia,
              out_path.c_str());
  return 0;
}

int cmd_eval(const std::string& clustering_path, const std::string& manifest_path, const std::string& out_path) {
  require_exists(clustering_path, "clustering file");
  require_exists(manifest_path, "manifest");
  const ClusteringCsv csv = import_clustering(clustering_path);
  const DatasetManifest manifest = load_manifest(manifest_path);
  if (static_cast<int>(csv.paths.size()) != manifest.size()) {
    throw InputError("clustering rows do not match the manifest size");
  }
  for (int i = 0; i < manifest.size(); ++i) {
    if (csv.paths[static_cast<std::size_t>(i)] != manifest.entries[static_cast<std::size_t>(i)].path) {
      throw InputError("clustering row " + std::to_string(i) + " is out of manifest order");
    }
  }
  const EvalReport report = stage_eval(manifest, csv.aspect, csv.predicted);
  std::ofstream out(out_path);
  if (!out) throw IoError("cannot write eval report: " + out_path);
  out << eval_report_to_json({report});
  std::printf("aspect '%s': nmi %.4f, rand index %.4f -> %s\n", report.aspect.c_str(), report.nmi, report.rand_index,
              out_path.c_str());
  return 0;
}

int cmd_project(const std::string& embeddings_path, const std::string& manifest_path,
                const std::string& clustering_path, const std::string& out_path) {
  require_exists(embeddings_path, "embeddings file");
  require_exists(manifest_path, "manifest");
  require_exists(clustering_path, "clustering file");
  const DatasetManifest manifest = load_manifest(manifest_path);
  const EmbeddingMatrix embeddings = import_embeddings(embeddings_path);
  const ClusteringCsv csv = import_clustering(clustering_path);
  ClusteringResult clustering;
  clustering.labels = csv.predicted;
  clustering.aspect_tag = csv.aspect;
  const PcaResult pca = pca_project(embeddings, 2);
  export_projection(pca, manifest, clustering, out_path);
  std::printf("wrote 2-D projection (%.1f%% + %.1f%% variance) to %s\n", 100.0 * pca.explained_variance[0],
              100.0 * pca.explained_variance[1], out_path.c_str());
  return 0;
}

int cmd_pipeline(const std::string& manifest_path, const std::string& out_dir,
                 const std::vector<std::string>& presets, const std::vector<std::string>& k_specs,
                 const TrainFlags& flags, const nlohmann::json* file) {
  RunConfig config;
  config.manifest_path = manifest_path;
  config.out_dir = out_dir;
  config.aspects = build_aspect_runs(presets, k_specs, file);
  config.train = flags.merge(file);
  config.lr_grid = flags.grid("lr_grid", flags.lr_grid, file);
  config.wd_grid = flags.grid("wd_grid", flags.wd_grid, file);
  config.tau_grid = flags.grid("tau_grid", flags.tau_grid, file);
  config.grid_max_epochs = flags.grid_max_epochs;

  require_exists(manifest_path, "manifest");
  {
    // Input size follows the data.
    const DatasetManifest manifest = load_manifest(manifest_path);
    const Image first = load_image(manifest.image_path(0));
    config.train.encoder.input_size = first.height();
  }

  const PipelineReport report = run_pipeline(config);
  for (const auto& a : report.aspects) {
    std::printf("aspect '%s': nmi %.4f, rand index %.4f (%d epochs)\n", a.aspect.c_str(), a.nmi, a.rand_index,
                a.epochs_ran);
  }
  std::printf("report: %s\n", (fs::path(out_dir) / "report.json").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Augmentation-guided multiple clustering"};
  app.require_subcommand(1);

  // gen-data
  SyntheticSpec spec;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic two-aspect dataset");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--shapes", spec.shapes, "Shape subset")->delimiter(',');
  gen->add_option("--colors", spec.colors, "Color subset")->delimiter(',');
  gen->add_option("--per-cell", spec.per_cell, "Images per (shape, color) cell");
  gen->add_option("--size", spec.image_size, "Image side length");
  gen->add_option("--position-jitter", spec.position_jitter, "Center jitter (fraction of size)");
  gen->add_option("--scale-jitter", spec.scale_jitter, "Relative size jitter");
  gen->add_option("--noise-std", spec.color_noise_std, "Per-pixel Gaussian noise std");
  gen->add_option("--seed", spec.seed, "Generator seed");

  // train
  std::string train_manifest, train_preset, train_aug_config, train_out, train_config_path;
  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train one encoder against an augmentation set");
  train_cmd->add_option("--manifest", train_manifest, "Dataset manifest")->required();
  train_cmd->add_option("--preset", train_preset, "Augmentation preset: color|shape|species");
  train_cmd->add_option("--aug-config", train_aug_config, "Augmentation pipeline JSON file");
  train_cmd->add_option("--out", train_out, "Output directory")->required();
  train_cmd->add_option("--config", train_config_path, "JSON config file (flags override)");
  train_flags.add_to(train_cmd);

  // embed
  std::string embed_manifest, embed_checkpoint, embed_out;
  int embed_workers = 0;
  auto* embed_cmd = app.add_subcommand("embed", "Embed all manifest images with a trained encoder");
  embed_cmd->add_option("--manifest", embed_manifest, "Dataset manifest")->required();
  embed_cmd->add_option("--checkpoint", embed_checkpoint, "Encoder checkpoint")->required();
  embed_cmd->add_option("--out", embed_out, "Output embeddings CSV")->required();
  embed_cmd->add_option("--workers", embed_workers, "Worker threads (0: auto)");

  // cluster
  std::string cluster_embeddings, cluster_aspect = "default", cluster_out;
  int cluster_k = 0;
  std::uint64_t cluster_seed = 1;
  auto* cluster_cmd = app.add_subcommand("cluster", "k-means over an embeddings CSV");
  cluster_cmd->add_option("--embeddings", cluster_embeddings, "Embeddings CSV")->required();
  cluster_cmd->add_option("--k", cluster_k, "Cluster count")->required();
  cluster_cmd->add_option("--seed", cluster_seed, "Seeding RNG seed");
  cluster_cmd->add_option("--aspect", cluster_aspect, "Aspect tag recorded in the output");
  cluster_cmd->add_option("--out", cluster_out, "Output clustering CSV")->required();

  // eval
  std::string eval_clustering, eval_manifest, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a clustering against manifest ground truth");
  eval_cmd->add_option("--clustering", eval_clustering, "Clustering CSV")->required();
  eval_cmd->add_option("--manifest", eval_manifest, "Dataset manifest")->required();
  eval_cmd->add_option("--out", eval_out, "Output JSON report")->required();

  // project
  std::string project_embeddings, project_manifest, project_clustering, project_out;
  auto* project_cmd = app.add_subcommand("project", "2-D PCA projection CSV for plotting");
  project_cmd->add_option("--embeddings", project_embeddings, "Embeddings CSV")->required();
  project_cmd->add_option("--manifest", project_manifest, "Dataset manifest")->required();
  project_cmd->add_option("--clustering", project_clustering, "Clustering CSV")->required();
  project_cmd->add_option("--out", project_out, "Output projection CSV")->required();

  // pipeline
  std::string pipe_manifest, pipe_out, pipe_config_path;
  std::vector<std::string> pipe_presets, pipe_k;
  TrainFlags pipe_flags;
  auto* pipe_cmd = app.add_subcommand("pipeline", "Full flow: train, embed, cluster, eval, project per aspect");
  pipe_cmd->add_option("--manifest", pipe_manifest, "Dataset manifest");
  pipe_cmd->add_option("--out", pipe_out, "Output directory");
  pipe_cmd->add_option("--preset", pipe_presets, "Augmentation presets or pipeline JSON files (repeatable)");
  pipe_cmd->add_option("--k", pipe_k, "Cluster count per aspect, as <aspect>=<count> (repeatable)");
  pipe_cmd->add_option("--config", pipe_config_path, "JSON config file (flags override)");
  pipe_flags.add_to(pipe_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(spec, gen_out);
    if (train_cmd->parsed()) {
      nlohmann::json file;
      const bool has_file = !train_config_path.empty();
      if (has_file) file = load_config_file(train_config_path);
      if (train_preset.empty() == train_aug_config.empty()) {
        std::fprintf(stderr, "error: exactly one of --preset / --aug-config is required\n");
        return kExitUsage;
      }
      const std::string pipeline_name = train_preset.empty() ? train_aug_config : train_preset;
      return cmd_train(train_manifest, pipeline_name, train_out, train_flags, has_file ? &file : nullptr);
    }
    if (embed_cmd->parsed()) return cmd_embed(embed_manifest, embed_checkpoint, embed_out, embed_workers);
    if (cluster_cmd->parsed()) {
      return cmd_cluster(cluster_embeddings, cluster_k, cluster_seed, cluster_aspect, cluster_out);
    }
    if (eval_cmd->parsed()) return cmd_eval(eval_clustering, eval_manifest, eval_out);
    if (project_cmd->parsed()) {
      return cmd_project(project_embeddings, project_manifest, project_clustering, project_out);
    }
    if (pipe_cmd->parsed()) {
      nlohmann::json file;
      bool has_file = !pipe_config_path.empty();
      if (has_file) file = load_config_file(pipe_config_path);
      if (pipe_manifest.empty() && has_file && file.contains("manifest")) {
        pipe_manifest = file.at("manifest").get<std::string>();
      }
      if (pipe_out.empty() && has_file && file.contains("out")) pipe_out = file.at("out").get<std::string>();
      if (pipe_manifest.empty() || pipe_out.empty()) {
        std::fprintf(stderr, "error: pipeline requires --manifest and --out (flags or config file)\n");
        return kExitUsage;
      }
      return cmd_pipeline(pipe_manifest, pipe_out, pipe_presets, pipe_k, pipe_flags, has_file ? &file : nullptr);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitUsage;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
