#include "augclust/kmeans.hpp"

#include <cmath>
#include <limits>

#include "augclust/error.hpp"
#include "augclust/rng.hpp"

namespace augclust {

namespace {

double sq_dist(const double* a, const double* b, int d) {
  double acc = 0.0;
  for (int i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

/// k-means++ seeding: first center uniform, then D^2-weighted draws.
EmbeddingMatrix seed_centroids(const EmbeddingMatrix& points, int k, Rng& rng) {
  const int n = points.rows, d = points.cols;
  EmbeddingMatrix centroids(k, d);
  std::vector<double> min_dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

  int first = rng.uniform_int(n);
  for (int j = 0; j < d; ++j) centroids.at(0, j) = points.at(first, j);

  for (int c = 1; c <= k; ++c) {
    // Refresh min distances against the center added last.
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double dist = sq_dist(points.row(i), centroids.row(c - 1), d);
      if (dist < min_dist[static_cast<std::size_t>(i)]) min_dist[static_cast<std::size_t>(i)] = dist;
      total += min_dist[static_cast<std::size_t>(i)];
    }
    if (c == k) break;
    int pick;
    if (total <= 0.0) {
      pick = rng.uniform_int(n);  // all points coincide with some center
    } else {
      const double target = rng.uniform() * total;
      double cumulative = 0.0;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        cumulative += min_dist[static_cast<std::size_t>(i)];
        if (cumulative >= target) {
          pick = i;
          break;
        }
      }
    }
    for (int j = 0; j < d; ++j) centroids.at(c, j) = points.at(pick, j);
  }
  return centroids;
}

}  // namespace

ClusteringResult kmeans(const EmbeddingMatrix& points, int k, std::uint64_t seed, const KmeansOptions& options) {
  const int n = points.rows, d = points.cols;
  if (n < 1) throw InputError("kmeans: empty embedding matrix");
  if (k < 1 || k > n) {
    throw InputError("kmeans: k=" + std::to_string(k) + " outside [1, n=" + std::to_string(n) + "]");
  }
  for (double v : points.values) {
    if (!std::isfinite(v)) throw NumericError("kmeans: non-finite embedding value");
  }

  Rng rng(mix64(seed ^ 0x6B6D65616E73ull));  // "kmeans"
  ClusteringResult result;
  result.centroids = seed_centroids(points, k, rng);
  result.labels.assign(static_cast<std::size_t>(n), 0);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);

  for (int iter = 0; iter < options.max_iters; ++iter) {
    // Assignment: nearest centroid, ties to the lowest index.
    double inertia = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (int c = 0; c < k; ++c) {
        const double dist = sq_dist(points.row(i), result.centroids.row(c), d);
        if (dist < best) {
          best = dist;
          best_c = c;
        }
      }
      result.labels[static_cast<std::size_t>(i)] = best_c;
      inertia += best;
    }
    result.inertia_history.push_back(inertia);
    result.inertia = inertia;
    result.iterations = iter + 1;
    if (result.inertia_history.size() >= 2) {
      const double prev = result.inertia_history[result.inertia_history.size() - 2];
      // Lloyd's objective is monotone; allow only float-rounding slack.
      if (inertia > prev + 1e-9 + 1e-12 * std::fabs(prev)) {
        throw NumericError("kmeans: inertia increased between iterations (" + std::to_string(prev) + " -> " +
                           std::to_string(inertia) + ")");
      }
    }

    // Repair empty clusters before the update: each one claims the point
    // currently farthest from its assigned centroid.
    counts.assign(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(result.labels[static_cast<std::size_t>(i)])]++;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      double worst = -1.0;
      int worst_i = -1;
      for (int i = 0; i < n; ++i) {
        const int owner = result.labels[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(owner)] < 2) continue;  // do not empty another cluster
        const double dist = sq_dist(points.row(i), result.centroids.row(owner), d);
        if (dist > worst) {
          worst = dist;
          worst_i = i;
        }
      }
      if (worst_i < 0) throw NumericError("kmeans: cannot repair empty cluster");
      counts[static_cast<std::size_t>(result.labels[static_cast<std::size_t>(worst_i)])]--;
      result.labels[static_cast<std::size_t>(worst_i)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      for (int j = 0; j < d; ++j) result.centroids.at(c, j) = points.at(worst_i, j);
    }

    // Update step: centroids move to the member means.
    EmbeddingMatrix next(k, d);
    for (int i = 0; i < n; ++i) {
      const int c = result.labels[static_cast<std::size_t>(i)];
      for (int j = 0; j < d; ++j) next.at(c, j) += points.at(i, j);
    }
    double max_shift_sq = 0.0;
    for (int c = 0; c < k; ++c) {
      const double inv = 1.0 / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      for (int j = 0; j < d; ++j) next.at(c, j) *= inv;
      max_shift_sq = std::max(max_shift_sq, sq_dist(next.row(c), result.centroids.row(c), d));
    }
    result.centroids = std::move(next);
    if (std::sqrt(max_shift_sq) < options.tol) break;
  }

  // Final assignment and inertia against the converged centroids.
  double inertia = 0.0;
  counts.assign(static_cast<std::size_t>(k), 0);
  for (int i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (int c = 0; c < k; ++c) {
      const double dist = sq_dist(points.row(i), result.centroids.row(c), d);
      if (dist < best) {
        best = dist;
        best_c = c;
      }
    }
    result.labels[static_cast<std::size_t>(i)] = best_c;
    counts[static_cast<std::size_t>(best_c)]++;
    inertia += best;
  }
  result.inertia_history.push_back(inertia);
  result.inertia = inertia;

  // No-empty-cluster contract on return.
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) continue;
    double worst = -1.0;
    int worst_i = -1;
    for (int i = 0; i < n; ++i) {
      const int owner = result.labels[static_cast<std::size_t>(i)];
      if (counts[static_cast<std::size_t>(owner)] < 2) continue;
      const double dist = sq_dist(points.row(i), result.centroids.row(owner), d);
      if (dist > worst) {
        worst = dist;
        worst_i = i;
      }
    }
    if (worst_i < 0) throw NumericError("kmeans: cannot repair empty cluster");
    result.inertia -= worst;
    counts[static_cast<std::size_t>(result.labels[static_cast<std::size_t>(worst_i)])]--;
    result.labels[static_cast<std::size_t>(worst_i)] = c;
    counts[static_cast<std::size_t>(c)] = 1;
    for (int j = 0; j < d; ++j) result.centroids.at(c, j) = points.at(worst_i, j);
    result.inertia_history.back() = result.inertia;
  }
  return result;
}

}  // namespace augclust
