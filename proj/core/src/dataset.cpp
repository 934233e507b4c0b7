#include "augclust/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "augclust/error.hpp"
#include "augclust/png_io.hpp"
#include "augclust/rng.hpp"

namespace fs = std::filesystem;

namespace augclust {

namespace {

// The color aspect is a whole-image tint; the shape aspect is a patch
// offset from that tint by a pure luminance step. The four tints sit on the
// 8-bit grid with matched luminance (0.299R+0.587G+0.114B equal to within
// 3e-4), so color lives only in chroma: grayscale maps every color class
// onto the same image, an additive color shift re-tints the whole image,
// and neither touches the shape's luminance contrast. A colored shape on a
// neutral background would instead leak color through its boundary
// contrast, which no additive perturbation can disturb.
Rgb named_color(const std::string& name) {
  if (name == "red") return {185.0f / 255.0f, 104.0f / 255.0f, 104.0f / 255.0f};
  if (name == "green") return {80.0f / 255.0f, 162.0f / 255.0f, 81.0f / 255.0f};
  if (name == "blue") return {119.0f / 255.0f, 119.0f / 255.0f, 200.0f / 255.0f};
  if (name == "yellow") return {138.0f / 255.0f, 137.0f / 255.0f, 57.0f / 255.0f};
  throw ConfigError("unknown synthetic color: " + name);
}

// Shape pixels are the tint brightened by 51/255 per channel (+0.2
// luminance exactly, integer-exact on the PNG grid).
constexpr float kShapeLuminanceOffset = 51.0f / 255.0f;

bool inside_shape(const std::string& shape, double px, double py, double cx, double cy, double radius) {
  const double dx = px - cx, dy = py - cy;
  if (shape == "circle") return dx * dx + dy * dy <= radius * radius;
  if (shape == "square") return std::fabs(dx) <= radius && std::fabs(dy) <= radius;
  if (shape == "triangle") {
    // Upward triangle: apex at cy - radius, base at cy + radius.
    const double t = (py - (cy - radius)) / (2.0 * radius);
    if (t < 0.0 || t > 1.0) return false;
    return std::fabs(dx) <= t * radius;
  }
  if (shape == "cross") {
    const double arm = radius / 3.0;
    return (std::fabs(dx) <= arm && std::fabs(dy) <= radius) || (std::fabs(dy) <= arm && std::fabs(dx) <= radius);
  }
  throw ConfigError("unknown synthetic shape: " + shape);
}

}  // namespace

Rgb synthetic_color(const std::string& name) { return named_color(name); }

float synthetic_shape_offset() { return kShapeLuminanceOffset; }

void SyntheticSpec::validate() const {
  if (shapes.size() < 2 || colors.size() < 2) {
    throw ConfigError("synthetic spec: need at least 2 shapes and 2 colors for two non-trivial aspects");
  }
  std::set<std::string> shape_set(shapes.begin(), shapes.end());
  std::set<std::string> color_set(colors.begin(), colors.end());
  if (shape_set.size() != shapes.size() || color_set.size() != colors.size()) {
    throw ConfigError("synthetic spec: duplicate shape or color names");
  }
  for (const auto& s : shapes) {
    if (s != "circle" && s != "square" && s != "triangle" && s != "cross") {
      throw ConfigError("unknown synthetic shape: " + s);
    }
  }
  for (const auto& c : colors) named_color(c);
  if (per_cell < 1) throw ConfigError("synthetic spec: per_cell must be positive");
  if (image_size < 8) throw ConfigError("synthetic spec: image_size must be at least 8");
  if (color_noise_std < 0.0) throw ConfigError("synthetic spec: noise std must be non-negative");
  if (position_jitter < 0.0 || scale_jitter < 0.0) throw ConfigError("synthetic spec: jitter must be non-negative");
}

DatasetManifest generate_synthetic(const SyntheticSpec& spec, const std::string& out_dir) {
  spec.validate();
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "img", ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

  DatasetManifest manifest;
  manifest.aspects = {"color", "shape"};
  manifest.base_dir = out_dir;

  const int size = spec.image_size;
  int index = 0;
  for (const auto& shape : spec.shapes) {
    for (const auto& color_name : spec.colors) {
      const Rgb color = named_color(color_name);
      for (int rep = 0; rep < spec.per_cell; ++rep, ++index) {
        Rng rng = Rng::stream(spec.seed, kSaltSynthetic, static_cast<std::uint64_t>(index));

        const double base_radius = 0.30 * size;
        const double radius = base_radius * (1.0 + rng.uniform(-spec.scale_jitter, spec.scale_jitter));
        const double cx = 0.5 * size + rng.uniform(-spec.position_jitter, spec.position_jitter) * size;
        const double cy = 0.5 * size + rng.uniform(-spec.position_jitter, spec.position_jitter) * size;

        const Rgb shape_color = {color.r + kShapeLuminanceOffset, color.g + kShapeLuminanceOffset,
                                 color.b + kShapeLuminanceOffset};
        Image image(size, size);
        for (int y = 0; y < size; ++y) {
          for (int x = 0; x < size; ++x) {
            const bool hit = inside_shape(shape, x + 0.5, y + 0.5, cx, cy, radius);
            image.set(y, x, hit ? shape_color : color);
          }
        }
        if (spec.color_noise_std > 0.0) {
          for (float& v : image.pixels.data) {
            v = std::clamp(v + static_cast<float>(rng.normal(0.0, spec.color_noise_std)), 0.0f, 1.0f);
          }
        }

        char name[64];
        std::snprintf(name, sizeof(name), "img/%04d.png", index);
        write_png((fs::path(out_dir) / name).string(), image);

        ManifestEntry entry;
        entry.path = name;
        entry.labels["color"] = color_name;
        entry.labels["shape"] = shape;
        manifest.entries.push_back(std::move(entry));
      }
    }
  }

  save_manifest(manifest, (fs::path(out_dir) / "manifest.json").string());
  return manifest;
}

bool DatasetManifest::has_aspect(const std::string& aspect) const {
  return std::find(aspects.begin(), aspects.end(), aspect) != aspects.end();
}

std::vector<int> DatasetManifest::label_ids(const std::string& aspect) const {
  if (!has_aspect(aspect)) throw InputError("manifest has no aspect '" + aspect + "'");
  std::set<std::string> names;
  for (const auto& e : entries) names.insert(e.labels.at(aspect));
  std::map<std::string, int> ids;
  int next = 0;
  for (const auto& name : names) ids[name] = next++;
  std::vector<int> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(ids.at(e.labels.at(aspect)));
  return out;
}

int DatasetManifest::label_count(const std::string& aspect) const {
  if (!has_aspect(aspect)) throw InputError("manifest has no aspect '" + aspect + "'");
  std::set<std::string> names;
  for (const auto& e : entries) names.insert(e.labels.at(aspect));
  return static_cast<int>(names.size());
}

std::string DatasetManifest::image_path(int index) const {
  const auto& rel = entries.at(static_cast<std::size_t>(index)).path;
  if (base_dir.empty()) return rel;
  return (fs::path(base_dir) / rel).string();
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  nlohmann::ordered_json j;
  j["aspects"] = manifest.aspects;
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const auto& e : manifest.entries) {
    nlohmann::ordered_json labels;
    for (const auto& aspect : manifest.aspects) labels[aspect] = e.labels.at(aspect);
    entries.push_back({{"path", e.path}, {"labels", labels}});
  }
  j["entries"] = entries;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << j.dump(1) << "\n";
  if (!out) throw IoError("failed writing manifest: " + path);
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest: " + path);
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InputError("cannot parse manifest " + path + ": " + e.what());
  }

  DatasetManifest manifest;
  manifest.base_dir = fs::path(path).parent_path().string();
  manifest.aspects = j.at("aspects").get<std::vector<std::string>>();
  if (manifest.aspects.empty()) throw InputError("manifest declares no aspects: " + path);

  const std::set<std::string> aspect_set(manifest.aspects.begin(), manifest.aspects.end());
  int index = 0;
  for (const auto& je : j.at("entries")) {
    ManifestEntry entry;
    entry.path = je.at("path").get<std::string>();
    for (const auto& [aspect, label] : je.at("labels").items()) {
      entry.labels[aspect] = label.get<std::string>();
    }
    std::set<std::string> keys;
    for (const auto& [aspect, label] : entry.labels) keys.insert(aspect);
    if (keys != aspect_set) {
      throw InputError("manifest entry " + std::to_string(index) + " (" + entry.path +
                       ") does not carry the declared aspect set");
    }
    manifest.entries.push_back(std::move(entry));
    ++index;
  }
  if (manifest.entries.empty()) throw InputError("manifest has no entries: " + path);

  for (int i = 0; i < manifest.size(); ++i) {
    const std::string p = manifest.image_path(i);
    if (!fs::exists(p)) throw InputError("manifest entry " + std::to_string(i) + " references a missing image: " + p);
  }
  return manifest;
}

Image load_image(const std::string& path) {
  Image image = read_png(path);
  validate_image(image);
  return image;
}

std::vector<Image> load_images(const DatasetManifest& manifest) {
  std::vector<Image> images;
  images.reserve(manifest.entries.size());
  for (int i = 0; i < manifest.size(); ++i) images.push_back(load_image(manifest.image_path(i)));
  return images;
}

namespace {

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

void export_embeddings(const EmbeddingMatrix& embeddings, const DatasetManifest& manifest, const std::string& path) {
  if (embeddings.rows != manifest.size()) {
    throw InputError("export_embeddings: " + std::to_string(embeddings.rows) + " rows vs manifest size " +
                     std::to_string(manifest.size()));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write embeddings: " + path);
  out << "path";
  for (int j = 0; j < embeddings.cols; ++j) out << ",e" << j;
  out << "\n";
  for (int i = 0; i < embeddings.rows; ++i) {
    out << manifest.entries[static_cast<std::size_t>(i)].path;
    for (int j = 0; j < embeddings.cols; ++j) out << "," << format_g9(embeddings.at(i, j));
    out << "\n";
  }
  if (!out) throw IoError("failed writing embeddings: " + path);
}

EmbeddingMatrix import_embeddings(const std::string& path, std::vector<std::string>* paths) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open embeddings: " + path);
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty embeddings file: " + path);
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "path") {
    throw InputError("unexpected embeddings header in " + path);
  }
  const int d = static_cast<int>(header.size()) - 1;

  std::vector<double> values;
  std::vector<std::string> row_paths;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != d + 1) {
      throw InputError("embeddings row with " + std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(d + 1));
    }
    row_paths.push_back(fields[0]);
    for (int j = 0; j < d; ++j) {
      // Embeddings are float32 upstream; snapping the parsed value through
      // float recovers the exact stored number from its 9-digit form.
      values.push_back(static_cast<double>(static_cast<float>(std::stod(fields[static_cast<std::size_t>(j) + 1]))));
    }
  }
  EmbeddingMatrix m(static_cast<int>(row_paths.size()), d);
  m.values = std::move(values);
  if (paths) *paths = std::move(row_paths);
  return m;
}

void export_clustering(const std::vector<int>& labels, const std::vector<std::string>& paths,
                       const std::string& aspect, const std::string& out_path) {
  if (labels.size() != paths.size()) {
    throw InputError("export_clustering: " + std::to_string(labels.size()) + " labels vs " +
                     std::to_string(paths.size()) + " paths");
  }
  std::ofstream out(out_path);
  if (!out) throw IoError("cannot write clustering: " + out_path);
  out << "path,aspect,predicted\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << paths[i] << "," << aspect << "," << labels[i] << "\n";
  }
  if (!out) throw IoError("failed writing clustering: " + out_path);
}

void export_clustering(const ClusteringResult& result, const DatasetManifest& manifest, const std::string& path) {
  if (static_cast<int>(result.labels.size()) != manifest.size()) {
    throw InputError("export_clustering: " + std::to_string(result.labels.size()) + " labels vs manifest size " +
                     std::to_string(manifest.size()));
  }
  std::vector<std::string> paths;
  paths.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) paths.push_back(e.path);
  export_clustering(result.labels, paths, result.aspect_tag, path);
}

ClusteringCsv import_clustering(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open clustering: " + path);
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty clustering file: " + path);
  if (split_csv_line(line) != std::vector<std::string>{"path", "aspect", "predicted"}) {
    throw InputError("unexpected clustering header in " + path);
  }
  ClusteringCsv csv;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) throw InputError("malformed clustering row in " + path);
    csv.paths.push_back(fields[0]);
    if (csv.aspect.empty()) {
      csv.aspect = fields[1];
    } else if (csv.aspect != fields[1]) {
      throw InputError("clustering file mixes aspects: " + path);
    }
    csv.predicted.push_back(std::stoi(fields[2]));
  }
  if (csv.paths.empty()) throw InputError("clustering file has no rows: " + path);
  return csv;
}

void export_projection(const PcaResult& pca, const DatasetManifest& manifest, const ClusteringResult& clustering,
                       const std::string& path) {
  if (pca.projection.rows != manifest.size() || static_cast<int>(clustering.labels.size()) != manifest.size()) {
    throw InputError("export_projection: row counts do not match the manifest");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write projection: " + path);
  out << "path,x,y";
  for (const auto& aspect : manifest.aspects) out << "," << aspect << "_true";
  out << ",predicted\n";
  for (int i = 0; i < manifest.size(); ++i) {
    const auto& entry = manifest.entries[static_cast<std::size_t>(i)];
    out << entry.path << "," << format_g9(pca.projection.at(i, 0)) << "," << format_g9(pca.projection.at(i, 1));
    for (const auto& aspect : manifest.aspects) out << "," << entry.labels.at(aspect);
    out << "," << clustering.labels[static_cast<std::size_t>(i)] << "\n";
  }
  if (!out) throw IoError("failed writing projection: " + path);
}

}  // namespace augclust
