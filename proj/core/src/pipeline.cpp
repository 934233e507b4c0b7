#include "augclust/pipeline.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "augclust/error.hpp"
#include "augclust/metrics.hpp"
#include "augclust/parallel.hpp"

namespace fs = std::filesystem;

namespace augclust {

namespace {

using nlohmann::ordered_json;

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

/// Rethrows Error subclasses with stage context prepended, preserving the
/// concrete type so exit-code mapping still works.
template <typename E>
[[noreturn]] void rethrow_with_context(const E& e, const std::string& stage_name, const std::string& aspect) {
  throw E("[stage " + stage_name + ", aspect " + aspect + "] " + e.what());
}

template <typename Fn>
auto with_stage_context(const std::string& stage_name, const std::string& aspect, Fn&& fn) {
  try {
    return fn();
  } catch (const DimensionError& e) {
    rethrow_with_context(e, stage_name, aspect);
  } catch (const ConfigError& e) {
    rethrow_with_context(e, stage_name, aspect);
  } catch (const InputError& e) {
    rethrow_with_context(e, stage_name, aspect);
  } catch (const StateError& e) {
    rethrow_with_context(e, stage_name, aspect);
  } catch (const NumericError& e) {
    rethrow_with_context(e, stage_name, aspect);
  } catch (const IoError& e) {
    rethrow_with_context(e, stage_name, aspect);
  }
}

}  // namespace

std::string config_hash(const TrainConfig& train, const AugmentationPipeline& pipeline) {
  return fnv1a_hex(train_config_to_json(train) + pipeline_to_json(pipeline));
}

std::string PipelineReport::to_json() const {
  ordered_json j;
  ordered_json aspect_map;
  for (const auto& a : aspects) {
    ordered_json entry;
    entry["nmi"] = a.nmi;
    entry["rand_index"] = a.rand_index;
    entry["epochs_ran"] = a.epochs_ran;
    entry["final_loss"] = a.final_loss;
    entry["config_hash"] = a.config_hash;
    aspect_map[a.aspect] = entry;
  }
  j["aspects"] = aspect_map;
  j["seed"] = seed;
  j["version"] = version;
  return j.dump(1) + "\n";
}

std::string eval_report_to_json(const std::vector<EvalReport>& reports) {
  ordered_json j;
  for (const auto& r : reports) {
    ordered_json entry;
    entry["nmi"] = r.nmi;
    entry["rand_index"] = r.rand_index;
    entry["n"] = r.n;
    entry["k_true"] = r.k_true;
    entry["k_pred"] = r.k_pred;
    j[r.aspect] = entry;
  }
  return j.dump(1) + "\n";
}

TrainStageResult stage_train(const std::vector<Image>& images, const AugmentationPipeline& pipeline,
                             const TrainConfig& base, const std::vector<double>& lr_grid,
                             const std::vector<double>& wd_grid, const std::vector<double>& tau_grid,
                             int grid_max_epochs) {
  const std::vector<double> lrs = lr_grid.empty() ? std::vector<double>{base.learning_rate} : lr_grid;
  const std::vector<double> wds = wd_grid.empty() ? std::vector<double>{base.weight_decay} : wd_grid;
  const std::vector<double> taus = tau_grid.empty() ? std::vector<double>{base.temperature} : tau_grid;

  if (lrs.size() * wds.size() * taus.size() == 1) {
    TrainConfig cfg = base;
    cfg.learning_rate = lrs[0];
    cfg.weight_decay = wds[0];
    cfg.temperature = taus[0];
    return {train(images, pipeline, cfg), cfg};
  }
  GridSearchResult grid = grid_search(images, pipeline, base, lrs, wds, taus, grid_max_epochs);
  return {std::move(grid.result), grid.config};
}

EmbeddingMatrix stage_embed(const EncoderParams& params, const std::vector<Image>& images, int workers) {
  const int n = static_cast<int>(images.size());
  const int d = params.config.embedding_dim;
  EmbeddingMatrix out(n, d);
  std::vector<Tensor> rows(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t i) { rows[i] = encode(params, images[i]); });
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) out.at(i, j) = static_cast<double>(rows[static_cast<std::size_t>(i)].data[static_cast<std::size_t>(j)]);
  }
  return out;
}

EvalReport stage_eval(const DatasetManifest& manifest, const std::string& aspect, const std::vector<int>& predicted) {
  if (static_cast<int>(predicted.size()) != manifest.size()) {
    throw InputError("eval: " + std::to_string(predicted.size()) + " predictions vs manifest size " +
                     std::to_string(manifest.size()));
  }
  const std::vector<int> truth = manifest.label_ids(aspect);
  EvalReport report;
  report.aspect = aspect;
  report.n = manifest.size();
  report.k_true = manifest.label_count(aspect);
  std::vector<int> distinct = predicted;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  report.k_pred = static_cast<int>(distinct.size());
  report.nmi = nmi(truth, predicted);
  report.rand_index = rand_index(truth, predicted);
  return report;
}

PipelineReport run_pipeline(const RunConfig& config) {
  if (config.aspects.empty()) throw ConfigError("pipeline: no aspects configured");
  if (config.out_dir.empty()) throw ConfigError("pipeline: no output directory configured");

  // Fail fast: validate and load every input before writing anything.
  const DatasetManifest manifest = load_manifest(config.manifest_path);
  const std::vector<Image> images = load_images(manifest);
  for (const auto& run : config.aspects) {
    run.pipeline.validate();
    if (!manifest.has_aspect(run.pipeline.aspect_tag)) {
      throw InputError("pipeline: manifest has no ground truth for aspect '" + run.pipeline.aspect_tag + "'");
    }
  }

  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + config.out_dir + ": " + ec.message());

  PipelineReport report;
  report.seed = config.train.seed;

  for (const auto& run : config.aspects) {
    const std::string& aspect = run.pipeline.aspect_tag;
    const fs::path aspect_dir = fs::path(config.out_dir) / aspect;
    fs::create_directories(aspect_dir, ec);
    if (ec) throw IoError("cannot create output directory " + aspect_dir.string() + ": " + ec.message());

    TrainStageResult trained = with_stage_context("train", aspect, [&] {
      return stage_train(images, run.pipeline, config.train, config.lr_grid, config.wd_grid, config.tau_grid,
                         config.grid_max_epochs);
    });

    with_stage_context("checkpoint", aspect, [&] {
      Checkpoint ckpt;
      ckpt.params = trained.result.params;
      ckpt.prototypes = trained.result.bank.prototypes;
      ckpt.train_config_json = train_config_to_json(trained.effective);
      ckpt.pipeline_json = pipeline_to_json(run.pipeline);
      ckpt.aspect_tag = aspect;
      save_checkpoint((aspect_dir / "checkpoint.json").string(), ckpt);
      trained.result.log.write_csv((aspect_dir / "train_log.csv").string());
      return 0;
    });

    const EmbeddingMatrix embeddings = with_stage_context("embed", aspect, [&] {
      EmbeddingMatrix m = stage_embed(trained.result.params, images, config.train.workers);
      export_embeddings(m, manifest, (aspect_dir / "embeddings.csv").string());
      return m;
    });

    const int k = run.k > 0 ? run.k : manifest.label_count(aspect);
    const ClusteringResult clustering = with_stage_context("cluster", aspect, [&] {
      ClusteringResult c = kmeans(embeddings, k, config.train.seed);
      c.aspect_tag = aspect;
      export_clustering(c, manifest, (aspect_dir / "clustering.csv").string());
      return c;
    });

    const EvalReport eval = with_stage_context("eval", aspect, [&] {
      EvalReport r = stage_eval(manifest, aspect, clustering.labels);
      std::ofstream out(aspect_dir / "eval.json");
      if (!out) throw IoError("cannot write eval report");
      out << eval_report_to_json({r});
      return r;
    });

    with_stage_context("project", aspect, [&] {
      const PcaResult pca = pca_project(embeddings, 2);
      export_projection(pca, manifest, clustering, (aspect_dir / "projection.csv").string());
      return 0;
    });

    AspectReport aspect_report;
    aspect_report.aspect = aspect;
    aspect_report.nmi = eval.nmi;
    aspect_report.rand_index = eval.rand_index;
    aspect_report.epochs_ran = trained.result.log.epochs_ran;
    aspect_report.final_loss = trained.result.log.final_loss;
    aspect_report.config_hash = config_hash(trained.effective, run.pipeline);
    report.aspects.push_back(std::move(aspect_report));
  }

  std::ofstream out(fs::path(config.out_dir) / "report.json");
  if (!out) throw IoError("cannot write pipeline report");
  out << report.to_json();
  if (!out) throw IoError("failed writing pipeline report");
  return report;
}

}  // namespace augclust
