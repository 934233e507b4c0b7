#pragma once

#include <vector>

#include "augclust/kmeans.hpp"

namespace augclust {

struct PcaResult {
  EmbeddingMatrix projection;              // n x out_dim
  std::vector<double> explained_variance;  // fraction of total variance per component
  EmbeddingMatrix components;              // out_dim x d (rows are the eigenvectors)
};

/// Projects rows onto the top `out_dim` eigenvectors of the column
/// covariance (columns centered first). The sign of each component is fixed
/// so its largest-magnitude loading is positive, making the output
/// deterministic. Requires n >= 2 and d >= out_dim.
PcaResult pca_project(const EmbeddingMatrix& embeddings, int out_dim = 2);

}  // namespace augclust
