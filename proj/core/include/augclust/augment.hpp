#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "augclust/image.hpp"
#include "augclust/rng.hpp"

namespace augclust {

enum class AugKind { horizontal_flip, rotation, crop_resize, color_jitter, grayscale };

const char* aug_kind_name(AugKind kind);
AugKind aug_kind_from_name(const std::string& name);

/// One candidate transform. Rotation and color_jitter carry candidate
/// parameters that a dataset-level preparation step resolves: rotation
/// candidates are filtered by the pixel-difference variance heuristic, and
/// an empty jitter palette is filled with per-image dominant colors.
struct AugmentationOp {
  AugKind kind = AugKind::horizontal_flip;

  std::vector<int> rotation_angles;  // degrees, multiples of 90 in {90,180,270}
  int rotation_keep = 2;             // how many angles the selection heuristic keeps

  float min_scale = 0.5f;  // crop_resize: smallest crop side as a fraction

  std::vector<Rgb> palette;     // color_jitter target colors
  float jitter_strength = 0.5f;
  int palette_size = 3;         // dominant colors extracted per image when preparing

  static AugmentationOp horizontal_flip();
  static AugmentationOp rotation(std::vector<int> candidate_angles = {90, 180, 270}, int keep = 2);
  static AugmentationOp crop_resize(float min_scale = 0.5f);
  static AugmentationOp color_jitter(float strength = 0.5f, std::vector<Rgb> palette = {});
  static AugmentationOp grayscale();

  void validate() const;
};

/// Ordered candidate set {g_1..g_J} with the subset size S drawn per image
/// per epoch, plus the aspect the set is meant to expose.
struct AugmentationPipeline {
  std::string aspect_tag;
  std::vector<AugmentationOp> candidates;
  int subset_size = 0;  // S in [0, J]

  int candidate_count() const { return static_cast<int>(candidates.size()); }
  void validate() const;
};

/// Shipped presets: "color" keeps color while perturbing geometry
/// (rotation, flip, crop), "shape" keeps geometry while perturbing color
/// (rotation, flip, jitter, grayscale).
AugmentationPipeline color_preset();
AugmentationPipeline shape_preset();
/// Resolves a preset name ("color", "shape"/"species") or a JSON file path.
AugmentationPipeline resolve_pipeline(const std::string& name_or_path);

AugmentationPipeline pipeline_from_json(const std::string& json_text);
std::string pipeline_to_json(const AugmentationPipeline& pipeline);
AugmentationPipeline load_pipeline(const std::string& path);
void save_pipeline(const AugmentationPipeline& pipeline, const std::string& path);

/// Applies one transform. Output has the input's dimensions and components
/// clamped to [0,1]. Stochastic parameters are drawn from `rng`.
Image apply_augmentation(const AugmentationOp& op, const Image& image, Rng& rng);

/// Draws S candidates uniformly without replacement and applies them in
/// candidate-list order. Pure function of (pipeline, image, rng state).
Image sample_and_compose(const AugmentationPipeline& pipeline, const Image& image, Rng& rng);

/// k-means over the pixels in RGB space; centroids ordered by descending
/// cluster size. If the image has at most k distinct colors they are
/// returned directly (by descending pixel count).
std::vector<Rgb> extract_dominant_colors(const Image& image, int k, Rng& rng);

/// For each candidate angle: per-image mean absolute pixel difference
/// between the rotated and the original image, then the variance of those
/// values across the dataset. Returns the `keep` angles with the largest
/// variance, ties broken by ascending angle.
std::vector<int> select_rotation_angles(const std::vector<Image>& dataset, const std::vector<int>& candidates,
                                        int keep);

/// Dataset-level preparation: rotation candidates resolved by the variance
/// heuristic, and jitter ops without an explicit palette get the dataset's
/// dominant colors (extracted per image, pooled across the dataset, so a
/// jitter draw can recolor an image toward any image's colors).
/// Deterministic given the seed.
struct PreparedAugmentations {
  AugmentationPipeline pipeline;
  std::vector<std::vector<Rgb>> image_palettes;  // per-image dominants (pooling input)
  std::vector<Rgb> pooled_palette;               // shared jitter palette

  /// The concrete pipeline for one image (pooled palette injected).
  AugmentationPipeline for_image(int index) const;
};

PreparedAugmentations prepare_augmentations(const AugmentationPipeline& pipeline, const std::vector<Image>& dataset,
                                            std::uint64_t seed);

/// Axis-aligned rotation by a multiple of 90 degrees (square images only
/// for 90/270). Exposed for reuse by the angle-selection heuristic.
Image rotate_image(const Image& image, int angle_degrees);

}  // namespace augclust
