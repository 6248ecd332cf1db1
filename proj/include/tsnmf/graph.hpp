#ifndef TSNMF_GRAPH_HPP
#define TSNMF_GRAPH_HPP

// Binary k-nearest-neighbor similarity graphs and their Laplacians.

#include <algorithm>
#include <numeric>
#include <vector>

#include "tsnmf/dataset.hpp"
#include "tsnmf/linalg.hpp"

namespace tsnmf {

/// Weights W, degrees D = diag(rowsum W) and Laplacian L = D - W.
struct Graph {
  Matrix weights;
  Vector degrees;
  Matrix laplacian;

  Index size() const { return weights.rows(); }
  Matrix degree_matrix() const { return degrees.asDiagonal(); }
};

/// Squared Euclidean distances between the columns of `features`; the result
/// is exactly symmetric.
inline Matrix pairwise_sq_distances(const Matrix& features) {
  const Index n = features.cols();
  const Vector norms = features.colwise().squaredNorm().transpose();
  Matrix lower = Matrix::Zero(n, n);
  lower.selfadjointView<Eigen::Lower>().rankUpdate(features.transpose());
  Matrix dist(n, n);
  for (Index j = 0; j < n; ++j) {
    dist(j, j) = 0.0;
    for (Index i = j + 1; i < n; ++i) {
      const double d2 = std::max(0.0, norms(i) + norms(j) - 2.0 * lower(i, j));
      dist(i, j) = d2;
      dist(j, i) = d2;
    }
  }
  return dist;
}

/// Binary k-NN graph on the columns of `features` (d x n). An edge joins i and
/// j when either is among the other's m nearest neighbors. Ties in distance go
/// to the smaller index; a sample is never its own neighbor.
inline Matrix knn_binary_graph(const Matrix& features, Index m_neighbors) {
  const Index n = features.cols();
  if (n < 2) throw DimensionError("knn_binary_graph: need at least two samples");
  require(m_neighbors >= 1 && m_neighbors <= n - 1,
          "knn_binary_graph: neighbor count must lie in [1, n-1]");

  const Matrix dist = pairwise_sq_distances(features);
  Matrix w = Matrix::Zero(n, n);
  std::vector<Index> order(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    Index pos = 0;
    for (Index j = 0; j < n; ++j)
      if (j != i) order[static_cast<std::size_t>(pos++)] = j;
    const auto from_i = dist.col(i);
    auto closer = [&](Index x, Index y) {
      const double dx = from_i(x), dy = from_i(y);
      return dx < dy || (dx == dy && x < y);
    };
    auto nth = order.begin() + (m_neighbors - 1);
    std::nth_element(order.begin(), nth, order.end(), closer);
    for (auto it = order.begin(); it != nth + 1; ++it) {
      w(i, *it) = 1.0;
      w(*it, i) = 1.0;
    }
  }
  return w;
}

/// Degree and Laplacian for a symmetric, zero-diagonal weight matrix.
inline Graph laplacian(Matrix weights) {
  require(weights.rows() == weights.cols(), "laplacian: weights must be square");
  if (weights.size() > 0) {
    if (asymmetry(weights) != 0.0) throw DimensionError("laplacian: weights must be symmetric");
    if (weights.diagonal().cwiseAbs().maxCoeff() != 0.0)
      throw DimensionError("laplacian: weights must have a zero diagonal");
    if (weights.minCoeff() < 0.0) throw DimensionError("laplacian: weights must be nonnegative");
  }
  Graph g;
  g.degrees = weights.rowwise().sum();
  g.laplacian = -weights;
  g.laplacian.diagonal() += g.degrees;
  g.weights = std::move(weights);
  return g;
}

/// Graph with no edges on n vertices.
inline Graph empty_graph(Index n) { return laplacian(Matrix::Zero(n, n)); }

enum class Side { right, left };

/// Flattened projected samples as columns: X_i P Pᵀ for the right side,
/// Q Qᵀ X_i for the left side.
inline Matrix projected_features(const Dataset2D& data, const OrthoBasis& basis, Side side) {
  const Index n = data.size();
  if (side == Side::right)
    require(basis.rows() == data.cols(), "projected_features: right basis needs b rows");
  else
    require(basis.rows() == data.rows(), "projected_features: left basis needs a rows");
  const Matrix projector = basis * basis.transpose();
  Matrix out(data.dim(), n);
  for (Index i = 0; i < n; ++i) {
    const Matrix projected = side == Side::right ? Matrix(data[i] * projector)
                                                 : Matrix(projector * data[i]);
    out.col(i) = flatten(projected);
  }
  return out;
}

/// Laplacian of the k-NN graph on projected samples. The neighbor count is
/// capped at n - 1; a single sample yields the empty graph.
inline Graph projected_graph(const Dataset2D& data, const OrthoBasis& basis, Side side,
                             Index m_neighbors) {
  const Index n = data.size();
  if (n < 2) return empty_graph(n);
  const Matrix features = projected_features(data, basis, side);
  return laplacian(knn_binary_graph(features, std::min(m_neighbors, n - 1)));
}

}  // namespace tsnmf

#endif  // TSNMF_GRAPH_HPP
