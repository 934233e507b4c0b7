#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "augclust/dataset.hpp"
#include "augclust/error.hpp"
#include "augclust/metrics.hpp"
#include "augclust/png_io.hpp"
#include "augclust/rng.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace augclust;

namespace {

SyntheticSpec small_spec(std::uint64_t seed = 1) {
  SyntheticSpec spec;
  spec.shapes = {"circle", "square"};
  spec.colors = {"red", "blue"};
  spec.per_cell = 4;
  spec.image_size = 16;
  spec.seed = seed;
  return spec;
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE_BEGIN("dataset");

TEST_CASE("png round trip is exact at 8-bit resolution") {
  const std::string dir = oracles::make_temp_dir("png");
  Image img(8, 8);
  Rng rng(3);
  for (float& v : img.pixels.data) v = static_cast<float>(rng.uniform_int(256)) / 255.0f;
  write_png(dir + "/a.png", img);
  const Image back = read_png(dir + "/a.png");
  CHECK(back.pixels.data == img.pixels.data);
  CHECK_THROWS_AS(read_png(dir + "/missing.png"), IoError);
}

TEST_CASE("generate_synthetic produces the full factorial with balanced labels") {
  const std::string dir = oracles::make_temp_dir("gen");
  const DatasetManifest manifest = generate_synthetic(small_spec(), dir);
  CHECK(manifest.size() == 16);  // 2 shapes x 2 colors x 4

  std::map<std::string, int> color_counts, shape_counts;
  for (const auto& e : manifest.entries) {
    color_counts[e.labels.at("color")]++;
    shape_counts[e.labels.at("shape")]++;
  }
  for (const auto& [label, count] : color_counts) CHECK(count == 8);
  for (const auto& [label, count] : shape_counts) CHECK(count == 8);
}

TEST_CASE("zero noise means pixels are exactly shape color or background") {
  const std::string dir = oracles::make_temp_dir("nonoise");
  SyntheticSpec spec = small_spec();
  spec.color_noise_std = 0.0;
  spec.colors = {"red", "green"};
  const DatasetManifest manifest = generate_synthetic(spec, dir);
  const std::vector<Image> images = load_images(manifest);
  const float bg = 128.0f / 255.0f;
  for (int i = 0; i < manifest.size(); ++i) {
    const Rgb base = synthetic_color(manifest.entries[static_cast<std::size_t>(i)].labels.at("color"));
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        const Rgb p = images[static_cast<std::size_t>(i)].get(y, x);
        const bool is_bg = p.r == bg && p.g == bg && p.b == bg;
        const bool is_color = p.r == base.r && p.g == base.g && p.b == base.b;
        CHECK((is_bg || is_color));
      }
    }
  }
}

TEST_CASE("generator colors are luminance-matched so grayscale erases the color aspect") {
  float lum[4];
  int i = 0;
  for (const char* name : {"red", "green", "blue", "yellow"}) {
    const Rgb c = synthetic_color(name);
    lum[i++] = 0.299f * c.r + 0.587f * c.g + 0.114f * c.b;
  }
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) CHECK(std::fabs(lum[a] - lum[b]) < 1.5e-3f);
  }
}

TEST_CASE("same seed produces byte-identical images") {
  const std::string dir_a = oracles::make_temp_dir("det_a");
  const std::string dir_b = oracles::make_temp_dir("det_b");
  generate_synthetic(small_spec(9), dir_a);
  generate_synthetic(small_spec(9), dir_b);
  for (int i = 0; i < 16; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "/img/%04d.png", i);
    CHECK(file_bytes(dir_a + name) == file_bytes(dir_b + name));
  }
  CHECK(file_bytes(dir_a + "/manifest.json") == file_bytes(dir_b + "/manifest.json"));
}

TEST_CASE("synthetic aspects are statistically independent") {
  const std::string dir = oracles::make_temp_dir("indep");
  SyntheticSpec spec;  // full 4x4 grid
  spec.per_cell = 4;
  spec.image_size = 16;
  const DatasetManifest manifest = generate_synthetic(spec, dir);
  const double cross = nmi(manifest.label_ids("shape"), manifest.label_ids("color"));
  CHECK(cross < 0.05);
}

TEST_CASE("spec validation") {
  SyntheticSpec spec = small_spec();
  spec.shapes = {"circle"};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = small_spec();
  spec.shapes = {"circle", "hexagon"};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = small_spec();
  spec.per_cell = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("manifest round trip and validation errors") {
  const std::string dir = oracles::make_temp_dir("manifest");
  const DatasetManifest manifest = generate_synthetic(small_spec(), dir);
  const DatasetManifest loaded = load_manifest(dir + "/manifest.json");
  CHECK(loaded.size() == manifest.size());
  CHECK(loaded.aspects == std::vector<std::string>{"color", "shape"});
  CHECK(loaded.label_count("color") == 2);
  CHECK(loaded.entries[3].path == manifest.entries[3].path);

  // Mismatched aspect sets across entries.
  std::ofstream bad(dir + "/bad.json");
  bad << R"({"aspects":["color","shape"],"entries":[)"
      << R"({"path":"img/0000.png","labels":{"color":"red","shape":"circle"}},)"
      << R"({"path":"img/0001.png","labels":{"color":"red"}}]})";
  bad.close();
  CHECK_THROWS_AS(load_manifest(dir + "/bad.json"), InputError);

  std::ofstream empty(dir + "/empty.json");
  empty << R"({"aspects":["color"],"entries":[]})";
  empty.close();
  CHECK_THROWS_AS(load_manifest(dir + "/empty.json"), InputError);

  std::ofstream missing(dir + "/missing.json");
  missing << R"({"aspects":["color","shape"],"entries":[)"
          << R"({"path":"img/9999.png","labels":{"color":"red","shape":"circle"}}]})";
  missing.close();
  CHECK_THROWS_AS(load_manifest(dir + "/missing.json"), InputError);
}

TEST_CASE("manifest entry order defines row order, not file-system order") {
  const std::string dir = oracles::make_temp_dir("order");
  const DatasetManifest manifest = generate_synthetic(small_spec(), dir);

  // The same files listed in reversed order: rows must follow the manifest.
  DatasetManifest reversed = manifest;
  std::reverse(reversed.entries.begin(), reversed.entries.end());
  save_manifest(reversed, dir + "/reversed.json");
  const DatasetManifest loaded = load_manifest(dir + "/reversed.json");
  const std::vector<Image> images = load_images(loaded);
  const std::vector<Image> original = load_images(manifest);
  CHECK(images.front().pixels.data == original.back().pixels.data);

  EmbeddingMatrix trivial(loaded.size(), 2);
  for (int i = 0; i < loaded.size(); ++i) trivial.at(i, 0) = i;
  export_embeddings(trivial, loaded, dir + "/emb.csv");
  std::vector<std::string> paths;
  import_embeddings(dir + "/emb.csv", &paths);
  for (int i = 0; i < loaded.size(); ++i) CHECK(paths[static_cast<std::size_t>(i)] == loaded.entries[static_cast<std::size_t>(i)].path);
}

TEST_CASE("embeddings CSV round trip within float precision") {
  const std::string dir = oracles::make_temp_dir("emb");
  const DatasetManifest manifest = generate_synthetic(small_spec(), dir);
  Rng rng(77);
  EmbeddingMatrix emb(manifest.size(), 5);
  for (double& v : emb.values) v = static_cast<double>(static_cast<float>(rng.normal()));
  export_embeddings(emb, manifest, dir + "/emb.csv");

  std::ifstream in(dir + "/emb.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "path,e0,e1,e2,e3,e4");

  const EmbeddingMatrix back = import_embeddings(dir + "/emb.csv");
  REQUIRE(back.rows == emb.rows);
  REQUIRE(back.cols == emb.cols);
  for (std::size_t i = 0; i < emb.values.size(); ++i) {
    CHECK(std::fabs(back.values[i] - emb.values[i]) < 1e-7);
  }

  EmbeddingMatrix wrong(manifest.size() - 1, 5);
  CHECK_THROWS_AS(export_embeddings(wrong, manifest, dir + "/bad.csv"), InputError);
}

TEST_CASE("clustering CSV round trip") {
  const std::string dir = oracles::make_temp_dir("clust");
  const DatasetManifest manifest = generate_synthetic(small_spec(), dir);
  ClusteringResult result;
  result.aspect_tag = "color";
  for (int i = 0; i < manifest.size(); ++i) result.labels.push_back(i % 2);
  export_clustering(result, manifest, dir + "/clustering.csv");
  const ClusteringCsv back = import_clustering(dir + "/clustering.csv");
  CHECK(back.aspect == "color");
  CHECK(back.predicted == result.labels);
  CHECK(back.paths.size() == static_cast<std::size_t>(manifest.size()));
}

TEST_CASE("pca: collinear points load entirely on the first component") {
  EmbeddingMatrix points(5, 3);
  for (int i = 0; i < 5; ++i) {
    points.at(i, 0) = i * 1.0;
    points.at(i, 1) = i * 2.0;
    points.at(i, 2) = -i * 0.5;
  }
  const PcaResult pca = pca_project(points, 2);
  CHECK(pca.explained_variance[0] == doctest::Approx(1.0));
  CHECK(pca.explained_variance[1] == doctest::Approx(0.0));
}

TEST_CASE("pca: isotropic pair of directions splits variance evenly") {
  EmbeddingMatrix points(4, 2);
  points.at(0, 0) = 1.0;
  points.at(1, 0) = -1.0;
  points.at(2, 1) = 1.0;
  points.at(3, 1) = -1.0;
  const PcaResult pca = pca_project(points, 2);
  CHECK(pca.explained_variance[0] == doctest::Approx(0.5));
  CHECK(pca.explained_variance[1] == doctest::Approx(0.5));
}

TEST_CASE("pca matches the power-iteration oracle on random data") {
  Rng rng(91);
  EmbeddingMatrix points(10, 5);
  for (double& v : points.values) v = rng.normal();
  const PcaResult pca = pca_project(points, 2);
  const oracles::PowerPca oracle = oracles::pca_power_iteration(points, 2);

  // Compare projections coordinate by coordinate (same sign rule).
  std::vector<double> mean(5, 0.0);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 5; ++j) mean[static_cast<std::size_t>(j)] += points.at(i, j) / 10.0;
  }
  for (int i = 0; i < 10; ++i) {
    for (int comp = 0; comp < 2; ++comp) {
      double expected = 0.0;
      for (int j = 0; j < 5; ++j) {
        expected += (points.at(i, j) - mean[static_cast<std::size_t>(j)]) * oracle.components[static_cast<std::size_t>(comp)][static_cast<std::size_t>(j)];
      }
      CHECK(std::fabs(pca.projection.at(i, comp) - expected) < 1e-6);
    }
  }
  CHECK_THROWS_AS(pca_project(EmbeddingMatrix(1, 3), 2), InputError);
}

TEST_CASE("projection CSV carries truth columns per aspect") {
  const std::string dir = oracles::make_temp_dir("proj");
  const DatasetManifest manifest = generate_synthetic(small_spec(), dir);
  Rng rng(93);
  EmbeddingMatrix emb(manifest.size(), 4);
  for (double& v : emb.values) v = rng.normal();
  const PcaResult pca = pca_project(emb, 2);
  ClusteringResult clustering;
  clustering.aspect_tag = "color";
  for (int i = 0; i < manifest.size(); ++i) clustering.labels.push_back(i % 2);
  export_projection(pca, manifest, clustering, dir + "/projection.csv");

  std::ifstream in(dir + "/projection.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "path,x,y,color_true,shape_true,predicted");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) rows += line.empty() ? 0 : 1;
  CHECK(rows == manifest.size());
}

TEST_SUITE_END();
