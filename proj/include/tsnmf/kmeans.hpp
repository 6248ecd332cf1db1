#ifndef TSNMF_KMEANS_HPP
#define TSNMF_KMEANS_HPP

// Lloyd's k-means with k-means++ seeding and best-of-restarts selection.

#include <limits>
#include <vector>

#include "tsnmf/common.hpp"

namespace tsnmf {

struct KMeansResult {
  std::vector<int> labels;
  double inertia = 0.0;
  Matrix centers;  // k x d
};

namespace detail {

inline double sq_dist(const Matrix& points, Index i, const Matrix& centers, Index c) {
  return (points.row(i) - centers.row(c)).squaredNorm();
}

inline Matrix kmeanspp_seed(const Matrix& points, Index k, Rng& rng) {
  const Index n = points.rows();
  Matrix centers(k, points.cols());
  centers.row(0) = points.row(rng.index(n));
  Vector closest(n);
  for (Index i = 0; i < n; ++i) closest(i) = sq_dist(points, i, centers, 0);
  for (Index c = 1; c < k; ++c) {
    const double total = closest.sum();
    Index pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += closest(i);
        if (target < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.index(n);
    }
    centers.row(c) = points.row(pick);
    for (Index i = 0; i < n; ++i) closest(i) = std::min(closest(i), sq_dist(points, i, centers, c));
  }
  return centers;
}

inline KMeansResult lloyd(const Matrix& points, Matrix centers, int max_iters) {
  const Index n = points.rows();
  const Index k = centers.rows();
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  Vector dist(n);

  auto assign = [&] {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist(points, i, centers, 0);
      for (Index c = 1; c < k; ++c) {
        const double d = sq_dist(points, i, centers, c);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      dist(i) = best_d;
      if (labels[static_cast<std::size_t>(i)] != best) {
        labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    return changed;
  };

  assign();
  for (int iter = 0; iter < max_iters; ++iter) {
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    for (Index c = 0; c < k; ++c) {
      auto& count = counts[static_cast<std::size_t>(c)];
      if (count > 0) {
        centers.row(c) = sums.row(c) / static_cast<double>(count);
        continue;
      }
      // Empty cluster: take over the point farthest from its center, provided
      // its own cluster keeps at least one member.
      Index far = -1;
      for (Index i = 0; i < n; ++i) {
        const auto owner = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
        if (counts[owner] > 1 && (far < 0 || dist(i) > dist(far))) far = i;
      }
      if (far < 0) continue;
      const auto owner = static_cast<std::size_t>(labels[static_cast<std::size_t>(far)]);
      --counts[owner];
      sums.row(static_cast<Index>(owner)) -= points.row(far);
      centers.row(static_cast<Index>(owner)) = sums.row(static_cast<Index>(owner)) /
                                               static_cast<double>(counts[owner]);
      labels[static_cast<std::size_t>(far)] = static_cast<int>(c);
      count = 1;
      centers.row(c) = points.row(far);
      dist(far) = 0.0;
    }
    if (!assign()) break;
  }

  KMeansResult result;
  result.inertia = dist.sum();
  result.labels = std::move(labels);
  result.centers = std::move(centers);
  return result;
}

}  // namespace detail

/// Clusters the rows of `points` into k groups. Each restart seeds with
/// k-means++ from its own seed derived from `seed`; the lowest-inertia run wins
/// (earliest restart on ties).
inline KMeansResult kmeans(const Matrix& points, int k, int restarts = 10, int max_iters = 300,
                           std::uint64_t seed = 0) {
  const Index n = points.rows();
  require(n >= 1, "kmeans: no points");
  require(k >= 1, "kmeans: k must be positive");
  if (k > n) throw DimensionError("kmeans: k exceeds the number of points");
  require(restarts >= 1, "kmeans: restarts must be positive");

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int run = 0; run < restarts; ++run) {
    Rng rng(derive_seed(seed, run));
    KMeansResult candidate = detail::lloyd(points, detail::kmeanspp_seed(points, k, rng), max_iters);
    if (candidate.inertia < best.inertia) best = std::move(candidate);
  }
  return best;
}

/// Sum of squared distances from each point to the mean of its cluster.
inline double inertia(const Matrix& points, const std::vector<int>& labels, int k) {
  Matrix sums = Matrix::Zero(k, points.cols());
  Vector counts = Vector::Zero(k);
  for (Index i = 0; i < points.rows(); ++i) {
    sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
    counts(labels[static_cast<std::size_t>(i)]) += 1.0;
  }
  double total = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    total += (points.row(i) - sums.row(c) / counts(c)).squaredNorm();
  }
  return total;
}

}  // namespace tsnmf

#endif  // TSNMF_KMEANS_HPP
