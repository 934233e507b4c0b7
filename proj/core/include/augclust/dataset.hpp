#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "augclust/image.hpp"
#include "augclust/kmeans.hpp"
#include "augclust/pca.hpp"

namespace augclust {

struct ManifestEntry {
  std::string path;                            // image path, relative to the manifest directory
  std::map<std::string, std::string> labels;   // aspect -> label
};

/// Dataset manifest with multi-aspect ground truth. Entry order is the
/// single source of truth for row alignment across embeddings, labels and
/// every export.
struct DatasetManifest {
  std::vector<std::string> aspects;
  std::vector<ManifestEntry> entries;
  std::string base_dir;  // directory the manifest was loaded from

  int size() const { return static_cast<int>(entries.size()); }
  bool has_aspect(const std::string& aspect) const;
  /// Ground-truth labels for one aspect as integer ids (stable mapping:
  /// label strings sorted lexicographically).
  std::vector<int> label_ids(const std::string& aspect) const;
  /// Number of distinct labels for one aspect.
  int label_count(const std::string& aspect) const;
  /// Absolute path of entry i.
  std::string image_path(int index) const;
};

/// Synthetic two-aspect dataset. The color aspect is a whole-image
/// luminance-matched tint; the shape aspect is one filled shape drawn as a
/// fixed luminance offset over that tint, with jittered position/scale and
/// clamped per-pixel Gaussian noise. The shape and color grids are crossed
/// evenly, which makes the two aspects statistically independent, and the
/// tint/offset split makes each aspect respond to exactly one augmentation
/// family (color ops re-tint, geometry ops move the shape).
struct SyntheticSpec {
  std::vector<std::string> shapes = {"circle", "square", "triangle", "cross"};
  std::vector<std::string> colors = {"red", "green", "blue", "yellow"};
  int per_cell = 8;
  int image_size = 32;
  double position_jitter = 0.10;  // center offset range, fraction of size
  double scale_jitter = 0.15;     // relative shape-size range
  double color_noise_std = 0.02;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Renders the images under out_dir/img/ and writes out_dir/manifest.json;
/// byte-identical output for identical specs.
DatasetManifest generate_synthetic(const SyntheticSpec& spec, const std::string& out_dir);

/// Background tint the generator uses for a named color (luminance-matched;
/// see dataset.cpp).
Rgb synthetic_color(const std::string& name);
/// Per-channel luminance offset of shape pixels over the tint.
float synthetic_shape_offset();

DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);
Image load_image(const std::string& path);
/// Loads and validates every image, in manifest order.
std::vector<Image> load_images(const DatasetManifest& manifest);

// CSV exports; numbers carry 9 significant digits (float32 round-trips
// exactly).
void export_embeddings(const EmbeddingMatrix& embeddings, const DatasetManifest& manifest, const std::string& path);
EmbeddingMatrix import_embeddings(const std::string& path, std::vector<std::string>* paths = nullptr);

void export_clustering(const ClusteringResult& result, const DatasetManifest& manifest, const std::string& path);
void export_clustering(const std::vector<int>& labels, const std::vector<std::string>& paths,
                       const std::string& aspect, const std::string& out_path);
struct ClusteringCsv {
  std::vector<std::string> paths;
  std::string aspect;
  std::vector<int> predicted;
};
ClusteringCsv import_clustering(const std::string& path);

/// Projection CSV: path, x, y, one <aspect>_true column per manifest
/// aspect, then the predicted label.
void export_projection(const PcaResult& pca, const DatasetManifest& manifest, const ClusteringResult& clustering,
                       const std::string& path);

}  // namespace augclust
