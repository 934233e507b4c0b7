#include "augclust/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "augclust/error.hpp"

namespace augclust {

namespace {

/// Cyclic Jacobi eigendecomposition of a symmetric matrix (row-major d x d).
/// Returns eigenvalues; eigenvectors end up in the columns of `vectors`.
std::vector<double> jacobi_eigen(std::vector<double> a, int d, std::vector<double>& vectors) {
  vectors.assign(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) vectors[static_cast<std::size_t>(i) * d + i] = 1.0;

  auto at = [&](std::vector<double>& m, int i, int j) -> double& { return m[static_cast<std::size_t>(i) * d + j]; };

  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) off += at(a, i, j) * at(a, i, j);
    }
    if (off < 1e-24) break;

    for (int p = 0; p < d - 1; ++p) {
      for (int q = p + 1; q < d; ++q) {
        const double apq = at(a, p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double app = at(a, p, p);
        const double aqq = at(a, q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double cos_v = 1.0 / std::sqrt(t * t + 1.0);
        const double sin_v = t * cos_v;

        for (int i = 0; i < d; ++i) {
          const double aip = at(a, i, p);
          const double aiq = at(a, i, q);
          at(a, i, p) = cos_v * aip - sin_v * aiq;
          at(a, i, q) = sin_v * aip + cos_v * aiq;
        }
        for (int i = 0; i < d; ++i) {
          const double api = at(a, p, i);
          const double aqi = at(a, q, i);
          at(a, p, i) = cos_v * api - sin_v * aqi;
          at(a, q, i) = sin_v * api + cos_v * aqi;
        }
        for (int i = 0; i < d; ++i) {
          const double vip = at(vectors, i, p);
          const double viq = at(vectors, i, q);
          at(vectors, i, p) = cos_v * vip - sin_v * viq;
          at(vectors, i, q) = sin_v * vip + cos_v * viq;
        }
      }
    }
  }

  std::vector<double> eigenvalues(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) eigenvalues[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i) * d + i];
  return eigenvalues;
}

}  // namespace

PcaResult pca_project(const EmbeddingMatrix& embeddings, int out_dim) {
  const int n = embeddings.rows, d = embeddings.cols;
  if (n < 2) throw InputError("pca_project: need at least 2 rows, got " + std::to_string(n));
  if (out_dim < 1 || out_dim > d) {
    throw InputError("pca_project: out_dim=" + std::to_string(out_dim) + " outside [1, d=" + std::to_string(d) + "]");
  }

  // Column means and centered data.
  std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) mean[static_cast<std::size_t>(j)] += embeddings.at(i, j);
  }
  for (double& m : mean) m /= static_cast<double>(n);

  // Covariance (population convention, divisor n).
  std::vector<double> cov(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) {
      const double va = embeddings.at(i, a) - mean[static_cast<std::size_t>(a)];
      for (int b = a; b < d; ++b) {
        cov[static_cast<std::size_t>(a) * d + b] += va * (embeddings.at(i, b) - mean[static_cast<std::size_t>(b)]);
      }
    }
  }
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      cov[static_cast<std::size_t>(a) * d + b] /= static_cast<double>(n);
      cov[static_cast<std::size_t>(b) * d + a] = cov[static_cast<std::size_t>(a) * d + b];
    }
  }

  std::vector<double> vectors;
  std::vector<double> eigenvalues = jacobi_eigen(cov, d, vectors);

  // Order components by descending eigenvalue (ties by original index).
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return eigenvalues[static_cast<std::size_t>(a)] > eigenvalues[static_cast<std::size_t>(b)];
  });

  double total_variance = 0.0;
  for (double ev : eigenvalues) total_variance += std::max(ev, 0.0);

  PcaResult result;
  result.projection = EmbeddingMatrix(n, out_dim);
  result.components = EmbeddingMatrix(out_dim, d);
  result.explained_variance.resize(static_cast<std::size_t>(out_dim), 0.0);

  for (int comp = 0; comp < out_dim; ++comp) {
    const int src = order[static_cast<std::size_t>(comp)];
    // Sign convention: largest-|loading| coordinate is positive.
    double best_abs = -1.0;
    double best_val = 1.0;
    for (int j = 0; j < d; ++j) {
      const double v = vectors[static_cast<std::size_t>(j) * d + src];
      if (std::fabs(v) > best_abs) {
        best_abs = std::fabs(v);
        best_val = v;
      }
    }
    const double sign = best_val < 0.0 ? -1.0 : 1.0;
    for (int j = 0; j < d; ++j) {
      result.components.at(comp, j) = sign * vectors[static_cast<std::size_t>(j) * d + src];
    }
    const double ev = std::max(eigenvalues[static_cast<std::size_t>(src)], 0.0);
    result.explained_variance[static_cast<std::size_t>(comp)] = total_variance > 0.0 ? ev / total_variance : 0.0;
  }

  for (int i = 0; i < n; ++i) {
    for (int comp = 0; comp < out_dim; ++comp) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) {
        acc += (embeddings.at(i, j) - mean[static_cast<std::size_t>(j)]) * result.components.at(comp, j);
      }
      result.projection.at(i, comp) = acc;
    }
  }
  return result;
}

}  // namespace augclust
