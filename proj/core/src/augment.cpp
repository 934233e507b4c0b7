#include "augclust/augment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <tuple>

#include <nlohmann/json.hpp>

#include "augclust/error.hpp"
#include "augclust/kmeans.hpp"

namespace augclust {

const char* aug_kind_name(AugKind kind) {
  switch (kind) {
    case AugKind::horizontal_flip:
      return "horizontal_flip";
    case AugKind::rotation:
      return "rotation";
    case AugKind::crop_resize:
      return "crop_resize";
    case AugKind::color_jitter:
      return "color_jitter";
    case AugKind::grayscale:
      return "grayscale";
  }
  return "unknown";
}

AugKind aug_kind_from_name(const std::string& name) {
  if (name == "horizontal_flip") return AugKind::horizontal_flip;
  if (name == "rotation") return AugKind::rotation;
  if (name == "crop_resize") return AugKind::crop_resize;
  if (name == "color_jitter") return AugKind::color_jitter;
  if (name == "grayscale") return AugKind::grayscale;
  throw ConfigError("unknown augmentation kind: " + name);
}

AugmentationOp AugmentationOp::horizontal_flip() { return AugmentationOp{AugKind::horizontal_flip}; }

AugmentationOp AugmentationOp::rotation(std::vector<int> candidate_angles, int keep) {
  AugmentationOp op;
  op.kind = AugKind::rotation;
  op.rotation_angles = std::move(candidate_angles);
  op.rotation_keep = keep;
  return op;
}

AugmentationOp AugmentationOp::crop_resize(float min_scale) {
  AugmentationOp op;
  op.kind = AugKind::crop_resize;
  op.min_scale = min_scale;
  return op;
}

AugmentationOp AugmentationOp::color_jitter(float strength, std::vector<Rgb> palette) {
  AugmentationOp op;
  op.kind = AugKind::color_jitter;
  op.jitter_strength = strength;
  op.palette = std::move(palette);
  return op;
}

AugmentationOp AugmentationOp::grayscale() { return AugmentationOp{AugKind::grayscale}; }

void AugmentationOp::validate() const {
  switch (kind) {
    case AugKind::rotation:
      for (int angle : rotation_angles) {
        if (angle != 90 && angle != 180 && angle != 270) {
          throw ConfigError("rotation angle must be one of {90,180,270}, got " + std::to_string(angle));
        }
      }
      if (rotation_keep < 1) throw ConfigError("rotation_keep must be positive");
      break;
    case AugKind::crop_resize:
      if (!(min_scale >= 0.5f && min_scale <= 1.0f)) {
        throw ConfigError("crop_resize min_scale must lie in [0.5, 1], got " + std::to_string(min_scale));
      }
      break;
    case AugKind::color_jitter:
      if (!(jitter_strength >= 0.0f && jitter_strength <= 1.0f)) {
        throw ConfigError("color_jitter strength must lie in [0,1], got " + std::to_string(jitter_strength));
      }
      if (palette_size < 1) throw ConfigError("color_jitter palette_size must be positive");
      break;
    default:
      break;
  }
}

void AugmentationPipeline::validate() const {
  if (subset_size < 0 || subset_size > candidate_count()) {
    throw ConfigError("pipeline subset_size " + std::to_string(subset_size) + " outside [0, " +
                      std::to_string(candidate_count()) + "]");
  }
  for (const auto& op : candidates) op.validate();
}

AugmentationPipeline color_preset() {
  AugmentationPipeline p;
  p.aspect_tag = "color";
  p.candidates = {AugmentationOp::rotation(), AugmentationOp::horizontal_flip(), AugmentationOp::crop_resize(0.5f)};
  p.subset_size = 2;
  return p;
}

AugmentationPipeline shape_preset() {
  AugmentationPipeline p;
  p.aspect_tag = "shape";
  p.candidates = {AugmentationOp::rotation(), AugmentationOp::horizontal_flip(), AugmentationOp::color_jitter(0.5f),
                  AugmentationOp::grayscale()};
  p.subset_size = 2;
  return p;
}

AugmentationPipeline resolve_pipeline(const std::string& name_or_path) {
  if (name_or_path == "color") return color_preset();
  if (name_or_path == "shape" || name_or_path == "species") return shape_preset();
  return load_pipeline(name_or_path);
}

namespace {

using nlohmann::ordered_json;

ordered_json op_to_json(const AugmentationOp& op) {
  ordered_json j;
  j["kind"] = aug_kind_name(op.kind);
  switch (op.kind) {
    case AugKind::rotation:
      j["angles"] = op.rotation_angles;
      j["keep"] = op.rotation_keep;
      break;
    case AugKind::crop_resize:
      j["min_scale"] = op.min_scale;
      break;
    case AugKind::color_jitter: {
      j["strength"] = op.jitter_strength;
      j["palette_size"] = op.palette_size;
      if (!op.palette.empty()) {
        ordered_json colors = ordered_json::array();
        for (const Rgb& c : op.palette) colors.push_back({c.r, c.g, c.b});
        j["palette"] = colors;
      }
      break;
    }
    default:
      break;
  }
  return j;
}

AugmentationOp op_from_json(const ordered_json& j) {
  AugmentationOp op;
  op.kind = aug_kind_from_name(j.at("kind").get<std::string>());
  switch (op.kind) {
    case AugKind::rotation:
      op.rotation_angles = j.value("angles", std::vector<int>{90, 180, 270});
      op.rotation_keep = j.value("keep", 2);
      break;
    case AugKind::crop_resize:
      op.min_scale = j.value("min_scale", 0.5f);
      break;
    case AugKind::color_jitter:
      op.jitter_strength = j.value("strength", 0.5f);
      op.palette_size = j.value("palette_size", 3);
      if (j.contains("palette")) {
        for (const auto& c : j.at("palette")) {
          op.palette.push_back({c.at(0).get<float>(), c.at(1).get<float>(), c.at(2).get<float>()});
        }
      }
      break;
    default:
      break;
  }
  op.validate();
  return op;
}

}  // namespace

std::string pipeline_to_json(const AugmentationPipeline& pipeline) {
  ordered_json j;
  j["aspect_tag"] = pipeline.aspect_tag;
  j["subset_size"] = pipeline.subset_size;
  ordered_json ops = ordered_json::array();
  for (const auto& op : pipeline.candidates) ops.push_back(op_to_json(op));
  j["ops"] = ops;
  return j.dump(1);
}

AugmentationPipeline pipeline_from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw InputError(std::string("cannot parse augmentation config: ") + e.what());
  }
  AugmentationPipeline p;
  p.aspect_tag = j.at("aspect_tag").get<std::string>();
  p.subset_size = j.at("subset_size").get<int>();
  for (const auto& op : j.at("ops")) p.candidates.push_back(op_from_json(op));
  p.validate();
  return p;
}

AugmentationPipeline load_pipeline(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open augmentation config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return pipeline_from_json(text);
}

void save_pipeline(const AugmentationPipeline& pipeline, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write augmentation config: " + path);
  out << pipeline_to_json(pipeline) << "\n";
}

Image rotate_image(const Image& image, int angle_degrees) {
  const int h = image.height(), w = image.width();
  if ((angle_degrees == 90 || angle_degrees == 270) && h != w) {
    throw DimensionError("rotation by " + std::to_string(angle_degrees) + " degrees requires a square image, got " +
                         image.pixels.shape_str());
  }
  Image out(h, w);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        float v;
        switch (angle_degrees) {
          case 90:  // clockwise: new(y,x) = old(H-1-x, y)
            v = image.at(c, h - 1 - x, y);
            break;
          case 180:
            v = image.at(c, h - 1 - y, w - 1 - x);
            break;
          case 270:
            v = image.at(c, x, w - 1 - y);
            break;
          default:
            throw ConfigError("rotation angle must be one of {90,180,270}, got " + std::to_string(angle_degrees));
        }
        out.at(c, y, x) = v;
      }
    }
  }
  return out;
}

namespace {

Image flip_horizontal(const Image& image) {
  const int h = image.height(), w = image.width();
  Image out(h, w);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) out.at(c, y, x) = image.at(c, y, w - 1 - x);
    }
  }
  return out;
}

/// Crop a window and bilinear-resize it back to the full size.
Image crop_and_resize(const Image& image, float min_scale, Rng& rng) {
  const int h = image.height(), w = image.width();
  const double scale = rng.uniform(static_cast<double>(min_scale), 1.0);
  const int ch = std::max(1, static_cast<int>(std::lround(scale * h)));
  const int cw = std::max(1, static_cast<int>(std::lround(scale * w)));
  const int top = rng.uniform_int(h - ch + 1);
  const int left = rng.uniform_int(w - cw + 1);

  Image out(h, w);
  // Half-pixel-center sampling of the crop window.
  for (int y = 0; y < h; ++y) {
    const double sy = (static_cast<double>(y) + 0.5) * ch / h - 0.5;
    const double syc = std::clamp(sy, 0.0, static_cast<double>(ch - 1));
    const int y0 = static_cast<int>(syc);
    const int y1 = std::min(y0 + 1, ch - 1);
    const double fy = syc - y0;
    for (int x = 0; x < w; ++x) {
      const double sx = (static_cast<double>(x) + 0.5) * cw / w - 0.5;
      const double sxc = std::clamp(sx, 0.0, static_cast<double>(cw - 1));
      const int x0 = static_cast<int>(sxc);
      const int x1 = std::min(x0 + 1, cw - 1);
      const double fx = sxc - x0;
      for (int c = 0; c < 3; ++c) {
        const double v00 = image.at(c, top + y0, left + x0);
        const double v01 = image.at(c, top + y0, left + x1);
        const double v10 = image.at(c, top + y1, left + x0);
        const double v11 = image.at(c, top + y1, left + x1);
        const double v = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) + fy * ((1.0 - fx) * v10 + fx * v11);
        out.at(c, y, x) = static_cast<float>(v);
      }
    }
  }
  return out;
}

Image jitter_colors(const Image& image, const AugmentationOp& op, Rng& rng) {
  if (op.palette.empty()) {
    throw ConfigError("color_jitter has an empty palette; prepare_augmentations attaches per-image dominant colors");
  }
  const Rgb target = op.palette[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(op.palette.size())))];
  const Rgb mean = mean_color(image);
  const float shift[3] = {op.jitter_strength * (target.r - mean.r), op.jitter_strength * (target.g - mean.g),
                          op.jitter_strength * (target.b - mean.b)};
  const int h = image.height(), w = image.width();
  Image out = image;
  for (int c = 0; c < 3; ++c) {
    float* p = out.pixels.data.data() + static_cast<std::size_t>(c) * h * w;
    for (int i = 0; i < h * w; ++i) p[i] = std::clamp(p[i] + shift[c], 0.0f, 1.0f);
  }
  return out;
}

Image to_grayscale(const Image& image) {
  const int h = image.height(), w = image.width();
  Image out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Rgb p = image.get(y, x);
      const float lum = 0.299f * p.r + 0.587f * p.g + 0.114f * p.b;
      out.set(y, x, {lum, lum, lum});
    }
  }
  return out;
}

}  // namespace

Image apply_augmentation(const AugmentationOp& op, const Image& image, Rng& rng) {
  op.validate();
  switch (op.kind) {
    case AugKind::horizontal_flip:
      return flip_horizontal(image);
    case AugKind::rotation: {
      if (op.rotation_angles.empty()) throw ConfigError("rotation has no candidate angles");
      const int angle =
          op.rotation_angles[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(op.rotation_angles.size())))];
      return rotate_image(image, angle);
    }
    case AugKind::crop_resize: {
      Image out = crop_and_resize(image, op.min_scale, rng);
      clamp01(out);
      return out;
    }
    case AugKind::color_jitter:
      return jitter_colors(image, op, rng);
    case AugKind::grayscale:
      return to_grayscale(image);
  }
  throw ConfigError("unhandled augmentation kind");
}

Image sample_and_compose(const AugmentationPipeline& pipeline, const Image& image, Rng& rng) {
  pipeline.validate();
  if (pipeline.subset_size == 0) return image;
  const std::vector<int> picked = rng.sample_indices(pipeline.candidate_count(), pipeline.subset_size);
  Image current = image;
  for (int idx : picked) {
    current = apply_augmentation(pipeline.candidates[static_cast<std::size_t>(idx)], current, rng);
  }
  return current;
}

std::vector<Rgb> extract_dominant_colors(const Image& image, int k, Rng& rng) {
  if (k < 1) throw ConfigError("extract_dominant_colors: k must be positive");
  const int h = image.height(), w = image.width();
  const int n = h * w;
  if (n == 0) throw InputError("extract_dominant_colors: empty image");

  // Count distinct colors first; a short palette is returned directly.
  std::map<std::tuple<float, float, float>, int> distinct;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Rgb p = image.get(y, x);
      distinct[{p.r, p.g, p.b}]++;
    }
  }
  if (static_cast<int>(distinct.size()) <= k) {
    std::vector<std::pair<std::tuple<float, float, float>, int>> items(distinct.begin(), distinct.end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<Rgb> colors;
    for (const auto& [key, count] : items) {
      colors.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key)});
    }
    return colors;
  }

  EmbeddingMatrix pixels(n, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Rgb p = image.get(y, x);
      pixels.at(y * w + x, 0) = p.r;
      pixels.at(y * w + x, 1) = p.g;
      pixels.at(y * w + x, 2) = p.b;
    }
  }
  const ClusteringResult clusters = kmeans(pixels, k, rng.next_u64());

  std::vector<std::int64_t> sizes(static_cast<std::size_t>(k), 0);
  for (int label : clusters.labels) sizes[static_cast<std::size_t>(label)]++;
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return sizes[static_cast<std::size_t>(a)] > sizes[static_cast<std::size_t>(b)]; });

  std::vector<Rgb> colors;
  for (int c : order) {
    colors.push_back({static_cast<float>(clusters.centroids.at(c, 0)), static_cast<float>(clusters.centroids.at(c, 1)),
                      static_cast<float>(clusters.centroids.at(c, 2))});
  }
  return colors;
}

std::vector<int> select_rotation_angles(const std::vector<Image>& dataset, const std::vector<int>& candidates,
                                        int keep) {
  if (dataset.empty()) throw InputError("select_rotation_angles: empty dataset");
  if (keep > static_cast<int>(candidates.size())) {
    throw ConfigError("select_rotation_angles: keep exceeds candidate count");
  }

  // Variance across images of the per-image mean absolute pixel difference.
  std::vector<double> variances(candidates.size(), 0.0);
  for (std::size_t a = 0; a < candidates.size(); ++a) {
    std::vector<double> diffs;
    diffs.reserve(dataset.size());
    for (const Image& image : dataset) {
      const Image rotated = rotate_image(image, candidates[a]);
      double acc = 0.0;
      for (std::size_t i = 0; i < image.pixels.data.size(); ++i) {
        acc += std::fabs(static_cast<double>(rotated.pixels.data[i]) - image.pixels.data[i]);
      }
      diffs.push_back(acc / static_cast<double>(image.pixels.data.size()));
    }
    double mean = 0.0;
    for (double v : diffs) mean += v;
    mean /= static_cast<double>(diffs.size());
    double var = 0.0;
    for (double v : diffs) var += (v - mean) * (v - mean);
    variances[a] = var / static_cast<double>(diffs.size());
  }

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (variances[a] != variances[b]) return variances[a] > variances[b];
    return candidates[a] < candidates[b];
  });

  std::vector<int> selected;
  for (int i = 0; i < keep; ++i) selected.push_back(candidates[order[static_cast<std::size_t>(i)]]);
  std::sort(selected.begin(), selected.end());
  return selected;
}

AugmentationPipeline PreparedAugmentations::for_image(int index) const {
  (void)index;
  AugmentationPipeline concrete = pipeline;
  if (!pooled_palette.empty()) {
    for (auto& op : concrete.candidates) {
      if (op.kind == AugKind::color_jitter && op.palette.empty()) op.palette = pooled_palette;
    }
  }
  return concrete;
}

PreparedAugmentations prepare_augmentations(const AugmentationPipeline& pipeline, const std::vector<Image>& dataset,
                                            std::uint64_t seed) {
  pipeline.validate();
  PreparedAugmentations prepared;
  prepared.pipeline = pipeline;

  bool needs_palettes = false;
  for (auto& op : prepared.pipeline.candidates) {
    if (op.kind == AugKind::rotation && op.rotation_keep < static_cast<int>(op.rotation_angles.size())) {
      op.rotation_angles = select_rotation_angles(dataset, op.rotation_angles, op.rotation_keep);
    }
    if (op.kind == AugKind::color_jitter && op.palette.empty()) needs_palettes = true;
  }

  // Dominant colors are extracted per image, then pooled into one shared
  // jitter palette. Pooling is what lets a jitter draw move an image toward
  // another image's colors; per-image palettes keep every image inside its
  // own color family and leave color features fully intact.
  if (needs_palettes) {
    int palette_size = 3;
    for (const auto& op : prepared.pipeline.candidates) {
      if (op.kind == AugKind::color_jitter && op.palette.empty()) palette_size = op.palette_size;
    }
    prepared.image_palettes.resize(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      Rng rng = Rng::stream(seed, kSaltPalette, i);
      prepared.image_palettes[i] = extract_dominant_colors(dataset[i], palette_size, rng);
      for (const Rgb& c : prepared.image_palettes[i]) prepared.pooled_palette.push_back(c);
    }
  }
  return prepared;
}

}  // namespace augclust
