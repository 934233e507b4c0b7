#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace augclust {

/// Row-major n x d matrix of embeddings in double precision (evaluation
/// side of the precision split). Row order matches the dataset manifest.
struct EmbeddingMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  EmbeddingMatrix() = default;
  EmbeddingMatrix(int n, int d) : rows(n), cols(d), values(static_cast<std::size_t>(n) * d, 0.0) {}

  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * cols + j]; }
  const double* row(int i) const { return values.data() + static_cast<std::size_t>(i) * cols; }
  double* row(int i) { return values.data() + static_cast<std::size_t>(i) * cols; }
};

struct ClusteringResult {
  std::vector<int> labels;              // per row, in [0, k)
  EmbeddingMatrix centroids;            // k x d
  double inertia = 0.0;                 // sum of squared distances to assigned centroids
  std::string aspect_tag;
  std::vector<double> inertia_history;  // recorded after every assignment step
  int iterations = 0;
};

struct KmeansOptions {
  int max_iters = 300;
  double tol = 1e-6;  // stop when the max centroid shift falls below this
};

/// Lloyd's algorithm with k-means++ seeding. Assignment ties go to the
/// lowest centroid index; an emptied cluster claims the point farthest from
/// its current centroid. Deterministic for a given (points, k, seed).
ClusteringResult kmeans(const EmbeddingMatrix& points, int k, std::uint64_t seed, const KmeansOptions& options = {});

}  // namespace augclust
