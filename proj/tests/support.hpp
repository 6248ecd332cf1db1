#ifndef TSNMF_TESTS_SUPPORT_HPP
#define TSNMF_TESTS_SUPPORT_HPP

// Random instances and independent reference implementations shared by the
// unit tests and the acceptance runner. The references deliberately avoid the
// library's fast paths: they loop over entries, form projectors explicitly and
// search exhaustively.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "tsnmf/tsnmf.hpp"

namespace tsnmf::testing {

/// Random data, centroids, bases and graphs with every V-step input frozen.
struct Instance {
  Dataset2D data;
  FactorModel model;
  IterationScratch scratch;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

inline Instance random_instance(std::uint64_t seed, Index n, Index a, Index b, Index k, Index r,
                                double lambda1, double lambda2, Index m_neighbors = 5) {
  Rng rng(seed);
  std::vector<Matrix> xs;
  for (Index i = 0; i < n; ++i) xs.push_back(rng.normal_matrix(a, b));
  Instance inst{Dataset2D(std::move(xs)), {}, {}, lambda1, lambda2};
  for (Index j = 0; j < k; ++j) inst.model.centroids.push_back(rng.normal_matrix(a, b));
  inst.model.coefficients = rng.uniform_matrix(n, k, 0.05, 1.0);
  inst.model.right = random_orthobasis(b, r, rng);
  inst.model.left = random_orthobasis(a, r, rng);
  inst.scratch.moments = moments(inst.data);
  inst.scratch.residuals = residuals(inst.data, inst.model.centroids, inst.model.coefficients);
  inst.scratch.gram = gram_terms(inst.data, inst.model.centroids, inst.model.right, inst.model.left);
  inst.scratch.graphs.right = projected_graph(inst.data, inst.model.right, Side::right, m_neighbors);
  inst.scratch.graphs.left = projected_graph(inst.data, inst.model.left, Side::left, m_neighbors);
  return inst;
}

// ---------------------------------------------------------------------------
// Linear algebra

/// det(M - x I) by Gaussian elimination with partial pivoting.
inline double shifted_det(const Matrix& m, double x) {
  const Index n = m.rows();
  std::vector<std::vector<double>> a(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a[i][j] = m(i, j) - (i == j ? x : 0.0);
  double det = 1.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < a.size(); ++i)
      if (std::abs(a[i][c]) > std::abs(a[piv][c])) piv = i;
    if (a[piv][c] == 0.0) return 0.0;
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t i = c + 1; i < a.size(); ++i) {
      const double f = a[i][c] / a[c][c];
      for (std::size_t j = c; j < a.size(); ++j) a[i][j] -= f * a[c][j];
    }
  }
  return det;
}

/// Eigenvalues of a small symmetric matrix with distinct spectrum, ascending:
/// sign changes of the characteristic polynomial on a fine grid inside the
/// Gershgorin interval, refined by bisection.
inline std::vector<double> charpoly_eigenvalues(const Matrix& m, int grid = 40000) {
  double radius = 0.0;
  for (Index i = 0; i < m.rows(); ++i) radius = std::max(radius, m.row(i).cwiseAbs().sum());
  radius += 1.0;
  std::vector<double> roots;
  double x0 = -radius, f0 = shifted_det(m, x0);
  for (int s = 1; s <= grid; ++s) {
    const double x1 = -radius + 2.0 * radius * s / grid;
    const double f1 = shifted_det(m, x1);
    if (f0 == 0.0) {
      roots.push_back(x0);
    } else if ((f0 < 0.0) != (f1 < 0.0) && f1 != 0.0) {
      double lo = x0, hi = x1, flo = f0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = shifted_det(m, mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

/// Random b x r matrix with orthonormal columns via classical Gram-Schmidt
/// (run twice for stability).
inline Matrix gram_schmidt_probe(Index rows, Index cols, Rng& rng) {
  Matrix q = rng.normal_matrix(rows, cols);
  for (int pass = 0; pass < 2; ++pass)
    for (Index j = 0; j < cols; ++j) {
      for (Index l = 0; l < j; ++l) q.col(j) -= q.col(l).dot(q.col(j)) * q.col(l);
      q.col(j).normalize();
    }
  return q;
}

// ---------------------------------------------------------------------------
// Graphs

/// k-NN union graph from entrywise distance loops and a full sort.
inline Matrix brute_force_knn(const Matrix& features, Index m) {
  const Index n = features.cols();
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    std::vector<std::pair<double, Index>> cand;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      double d = 0.0;
      for (Index t = 0; t < features.rows(); ++t) {
        const double diff = features(t, i) - features(t, j);
        d += diff * diff;
      }
      cand.emplace_back(d, j);
    }
    std::sort(cand.begin(), cand.end());
    for (Index s = 0; s < m; ++s) {
      w(i, cand[static_cast<std::size_t>(s)].second) = 1.0;
      w(cand[static_cast<std::size_t>(s)].second, i) = 1.0;
    }
  }
  return w;
}

/// ½ Σ_ij w_ij ‖v_i − v_j‖², the Laplacian quadratic form as a double sum.
inline double smoothness_double_sum(const Matrix& w, const Matrix& v) {
  double s = 0.0;
  for (Index i = 0; i < w.rows(); ++i)
    for (Index j = 0; j < w.cols(); ++j) s += 0.5 * w(i, j) * (v.row(i) - v.row(j)).squaredNorm();
  return s;
}

// ---------------------------------------------------------------------------
// Objective pieces

inline Matrix naive_residual(const Dataset2D& data, const FactorModel& m, Index i) {
  Matrix l = data[i];
  for (std::size_t j = 0; j < m.centroids.size(); ++j)
    l -= m.centroids[j] * m.coefficients(i, static_cast<Index>(j));
  return l;
}

/// Objective with explicit projectors, explicit second moments and the graph
/// term as a double sum over edges.
inline double naive_objective(const Dataset2D& data, const FactorModel& m, const Matrix& w_right,
                              const Matrix& w_left, double lambda1, double lambda2) {
  const Matrix pp = m.right * m.right.transpose();
  const Matrix qq = m.left * m.left.transpose();
  Matrix gp = Matrix::Zero(data.cols(), data.cols());
  Matrix gq = Matrix::Zero(data.rows(), data.rows());
  double recon = 0.0;
  for (Index i = 0; i < data.size(); ++i) {
    Matrix fit_right = Matrix::Zero(data.rows(), data.cols());
    Matrix fit_left = Matrix::Zero(data.rows(), data.cols());
    for (std::size_t j = 0; j < m.centroids.size(); ++j) {
      fit_right += m.centroids[j] * m.coefficients(i, static_cast<Index>(j)) * pp;
      fit_left += qq * m.centroids[j] * m.coefficients(i, static_cast<Index>(j));
    }
    recon += (data[i] * pp - fit_right).squaredNorm() + (qq * data[i] - fit_left).squaredNorm();
    gp += data[i].transpose() * data[i];
    gq += data[i] * data[i].transpose();
  }
  const double reward = (m.right.transpose() * gp * m.right).trace() +
                        (m.left.transpose() * gq * m.left).trace();
  const double smooth = smoothness_double_sum(w_right, m.coefficients) +
                        smoothness_double_sum(w_left, m.coefficients);
  return recon - lambda1 * reward + lambda2 * smooth;
}

/// The P-subproblem value Σ‖Λ_i P Pᵀ‖² − λ1 Tr(Pᵀ G_P P) with explicit
/// projectors.
inline double right_subproblem_value(const Dataset2D& data, const FactorModel& m,
                                     const Matrix& p, double lambda1) {
  const Matrix pp = p * p.transpose();
  double v = 0.0;
  for (Index i = 0; i < data.size(); ++i)
    v += (naive_residual(data, m, i) * pp).squaredNorm() - lambda1 * (data[i] * pp).squaredNorm();
  return v;
}

/// Σ‖Q Qᵀ Λ_i‖² − λ1 Tr(Qᵀ G_Q Q).
inline double left_subproblem_value(const Dataset2D& data, const FactorModel& m,
                                    const Matrix& q, double lambda1) {
  const Matrix qq = q * q.transpose();
  double v = 0.0;
  for (Index i = 0; i < data.size(); ++i)
    v += (qq * naive_residual(data, m, i)).squaredNorm() - lambda1 * (qq * data[i]).squaredNorm();
  return v;
}

/// Gram terms from flattened full-size projections X P Pᵀ and Q Qᵀ X.
inline GramTerms flatten_multiply_gram(const Dataset2D& data, const std::vector<Matrix>& us,
                                       const Matrix& p, const Matrix& q) {
  const Matrix pp = p * p.transpose();
  const Matrix qq = q * q.transpose();
  const Index d = data.dim();
  const auto k = static_cast<Index>(us.size());
  Matrix ur(d, k), ul(d, k), xr(d, data.size()), xl(d, data.size());
  for (Index j = 0; j < k; ++j) {
    const Matrix a = us[static_cast<std::size_t>(j)] * pp;
    const Matrix b = qq * us[static_cast<std::size_t>(j)];
    ur.col(j) = Eigen::Map<const Vector>(a.data(), d);
    ul.col(j) = Eigen::Map<const Vector>(b.data(), d);
  }
  for (Index i = 0; i < data.size(); ++i) {
    const Matrix a = data[i] * pp;
    const Matrix b = qq * data[i];
    xr.col(i) = Eigen::Map<const Vector>(a.data(), d);
    xl.col(i) = Eigen::Map<const Vector>(b.data(), d);
  }
  return {ur.transpose() * ur, ul.transpose() * ul, xr.transpose() * ur, xl.transpose() * ul};
}

/// vec(U) Vᵀ as a d x n matrix.
inline Matrix factor_product(const std::vector<Matrix>& us, const Matrix& v) {
  Matrix u(us.front().size(), static_cast<Index>(us.size()));
  for (std::size_t j = 0; j < us.size(); ++j)
    u.col(static_cast<Index>(j)) = Eigen::Map<const Vector>(us[j].data(), us[j].size());
  return u * v.transpose();
}

// ---------------------------------------------------------------------------
// Clustering

/// Best accuracy over every injective map between predicted clusters and
/// true classes.
inline double brute_force_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  auto relabel = [](const std::vector<int>& p) {
    std::vector<int> uniq(p.begin(), p.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    std::vector<int> out;
    for (int x : p) out.push_back(static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), x) - uniq.begin()));
    return std::make_pair(out, static_cast<int>(uniq.size()));
  };
  const auto [p, cp] = relabel(pred);
  const auto [t, ct] = relabel(truth);
  const int width = std::max(cp, ct);
  std::vector<int> perm(static_cast<std::size_t>(width));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (perm[static_cast<std::size_t>(p[i])] == t[i]) ++hits;
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(p.size());
}

inline double partition_inertia(const Matrix& points, const std::vector<int>& labels, int k) {
  double total = 0.0;
  for (int c = 0; c < k; ++c) {
    Vector mean = Vector::Zero(points.cols());
    int count = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) {
        mean += points.row(static_cast<Index>(i)).transpose();
        ++count;
      }
    if (count == 0) continue;
    mean /= count;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) total += (points.row(static_cast<Index>(i)).transpose() - mean).squaredNorm();
  }
  return total;
}

/// Minimum inertia over all nontrivial two-way partitions.
inline double exhaustive_two_means(const Matrix& points) {
  const Index n = points.rows();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << (n - 1)); ++mask) {
    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    for (Index i = 0; i < n - 1; ++i) labels[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
    best = std::min(best, partition_inertia(points, labels, 2));
  }
  return best;
}

/// Mutual information and entropies from explicit joint probabilities.
inline double reference_nmi(const std::vector<int>& pred, const std::vector<int>& truth) {
  const double n = static_cast<double>(pred.size());
  std::set<int> ps(pred.begin(), pred.end()), ts(truth.begin(), truth.end());
  if (ps.size() == 1 || ts.size() == 1) return ps.size() == 1 && ts.size() == 1 ? 1.0 : 0.0;
  auto prob = [&](auto pred_fn) {
    double c = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
      if (pred_fn(i)) c += 1.0;
    return c / n;
  };
  double mi = 0.0, hp = 0.0, ht = 0.0;
  for (int p : ps) {
    const double pp = prob([&](std::size_t i) { return pred[i] == p; });
    hp -= pp * std::log(pp);
    for (int t : ts) {
      const double pt = prob([&](std::size_t i) { return truth[i] == t; });
      const double pj = prob([&](std::size_t i) { return pred[i] == p && truth[i] == t; });
      if (pj > 0.0) mi += pj * std::log(pj / (pp * pt));
    }
  }
  for (int t : ts) {
    const double pt = prob([&](std::size_t i) { return truth[i] == t; });
    ht -= pt * std::log(pt);
  }
  return mi / std::sqrt(hp * ht);
}

inline std::vector<int> random_partition(Rng& rng, std::size_t n, int clusters) {
  std::vector<int> p(n);
  for (auto& x : p) x = static_cast<int>(rng.index(clusters));
  return p;
}

}  // namespace tsnmf::testing

#endif  // TSNMF_TESTS_SUPPORT_HPP
