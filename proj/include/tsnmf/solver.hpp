#ifndef TSNMF_SOLVER_HPP
#define TSNMF_SOLVER_HPP

// Two-dimensional Semi-NMF.
//
// Each sample X_i (a x b) is approximated, inside a rank-r projected subspace,
// by a nonnegative combination of k unconstrained 2D centroids U_j:
//
//   min  sum_i ||X_i P Pᵀ - sum_j U_j v_ij P Pᵀ||²  + sum_i ||Q Qᵀ X_i - sum_j Q Qᵀ U_j v_ij||²
//        - lambda1 (Tr(Pᵀ G_P P) + Tr(Qᵀ G_Q Q)) + lambda2 Tr(Vᵀ (L_P + L_Q) V)
//   s.t. V >= 0, PᵀP = QᵀQ = I_r
//
// with G_P = sum X_iᵀ X_i, G_Q = sum X_i X_iᵀ, and L_P, L_Q the Laplacians of
// k-NN graphs built on the right- and left-projected samples. The optimizer
// alternates eigen-updates for P and Q, a graph rebuild, one multiplicative
// update of V and a closed-form update of U.

#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "tsnmf/dataset.hpp"
#include "tsnmf/graph.hpp"
#include "tsnmf/kmeans.hpp"
#include "tsnmf/linalg.hpp"

namespace tsnmf {

struct SolverConfig {
  int k = 2;                  // number of centroids / clusters
  int r = 1;                  // projection rank on each side
  double lambda1 = 0.0;       // weight of the projected-energy reward
  double lambda2 = 0.0;       // weight of the graph smoothness penalty
  int t_max = 100;            // outer iteration cap
  double rel_tol = 1e-6;      // stop when |dF| / (1 + |F|) falls below this
  int m_neighbors = 5;        // k-NN graph neighbor count (capped at n - 1)
  double epsilon_div = 1e-10; // added to the multiplicative-update denominator
  std::uint64_t seed = 0;
  int kmeans_restarts = 10;   // restarts for the k-means used at initialization

  void validate(const Dataset2D& data) const {
    require(r >= 1 && r <= std::min(data.rows(), data.cols()),
            "SolverConfig: r must lie in [1, min(a, b)]");
    require(k >= 1, "SolverConfig: k must be positive");
    if (k > data.size()) throw DimensionError("SolverConfig: k exceeds the number of samples");
    require(t_max >= 1, "SolverConfig: t_max must be at least 1");
    require(lambda1 >= 0.0 && lambda2 >= 0.0, "SolverConfig: lambdas must be nonnegative");
    require(rel_tol >= 0.0, "SolverConfig: rel_tol must be nonnegative");
    require(m_neighbors >= 1, "SolverConfig: m_neighbors must be positive");
    require(epsilon_div >= 0.0, "SolverConfig: epsilon_div must be nonnegative");
    require(kmeans_restarts >= 1, "SolverConfig: kmeans_restarts must be positive");
  }
};

struct FactorModel {
  std::vector<Matrix> centroids;  // U: k matrices, a x b
  Matrix coefficients;            // V: n x k, nonnegative; row i represents sample i
  OrthoBasis right;               // P: b x r
  OrthoBasis left;                // Q: a x r

  Index k() const { return coefficients.cols(); }
};

/// Second moments G_P = sum X_iᵀ X_i (b x b) and G_Q = sum X_i X_iᵀ (a x a).
struct Moments {
  SymMatrix right;
  SymMatrix left;
};

/// Inner products of projected centroids and samples:
///   centroid_right(j,l) = <U_j P Pᵀ, U_l P Pᵀ>,   centroid_left(j,l) = <Q Qᵀ U_j, Q Qᵀ U_l>,
///   cross_right(i,j)    = <X_i P Pᵀ, U_j P Pᵀ>,   cross_left(i,j)    = <Q Qᵀ X_i, Q Qᵀ U_j>.
struct GramTerms {
  SymMatrix centroid_right;  // k x k
  SymMatrix centroid_left;   // k x k
  Matrix cross_right;        // n x k
  Matrix cross_left;         // n x k
};

struct GraphPair {
  Graph right;  // built on X_i P Pᵀ
  Graph left;   // built on Q Qᵀ X_i
};

/// Quantities derived once per outer iteration.
struct IterationScratch {
  std::vector<Matrix> residuals;  // X_i - sum_j U_j v_ij
  Moments moments;
  GramTerms gram;
  GraphPair graphs;
};

// ---------------------------------------------------------------------------
// Building blocks

inline Moments moments(const Dataset2D& data) {
  Moments m{SymMatrix::Zero(data.cols(), data.cols()), SymMatrix::Zero(data.rows(), data.rows())};
  for (const Matrix& x : data.samples()) {
    m.right.noalias() += x.transpose() * x;
    m.left.noalias() += x * x.transpose();
  }
  m.right = symmetrized(m.right);
  m.left = symmetrized(m.left);
  return m;
}

namespace detail {

inline void check_factors(const Dataset2D& data, const std::vector<Matrix>& centroids,
                          const Matrix& coefficients) {
  require(coefficients.rows() == data.size(), "coefficients must have one row per sample");
  require(static_cast<Index>(centroids.size()) == coefficients.cols(),
          "coefficients must have one column per centroid");
  for (const Matrix& u : centroids)
    require(u.rows() == data.rows() && u.cols() == data.cols(),
            "centroids must match the sample shape");
}

inline Matrix vectorize_or_empty(const std::vector<Matrix>& mats, Index d) {
  return mats.empty() ? Matrix(d, 0) : vectorize(mats);
}

}  // namespace detail

/// Λ_i = X_i - sum_j U_j v_ij.
inline std::vector<Matrix> residuals(const Dataset2D& data, const std::vector<Matrix>& centroids,
                                     const Matrix& coefficients) {
  detail::check_factors(data, centroids, coefficients);
  const Matrix flat = vectorize(data) -
                      detail::vectorize_or_empty(centroids, data.dim()) * coefficients.transpose();
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(data.size()));
  for (Index i = 0; i < data.size(); ++i)
    out.push_back(unflatten(flat.col(i), data.rows(), data.cols()));
  return out;
}

/// sum Λ_iᵀ Λ_i (b x b).
inline SymMatrix right_scatter(const std::vector<Matrix>& res) {
  require(!res.empty(), "right_scatter: no residuals");
  SymMatrix s = SymMatrix::Zero(res.front().cols(), res.front().cols());
  for (const Matrix& r : res) s.noalias() += r.transpose() * r;
  return symmetrized(s);
}

/// sum Λ_i Λ_iᵀ (a x a).
inline SymMatrix left_scatter(const std::vector<Matrix>& res) {
  require(!res.empty(), "left_scatter: no residuals");
  SymMatrix s = SymMatrix::Zero(res.front().rows(), res.front().rows());
  for (const Matrix& r : res) s.noalias() += r * r.transpose();
  return symmetrized(s);
}

/// Minimizer of Tr(Pᵀ (sum Λ_iᵀΛ_i - lambda1 G_P) P) over orthonormal b x r P.
inline OrthoBasis update_right_basis(const IterationScratch& scratch, double lambda1, Index r) {
  const SymMatrix target = right_scatter(scratch.residuals) - lambda1 * scratch.moments.right;
  return sym_eig_smallest(target, r);
}

/// Minimizer of Tr(Qᵀ (sum Λ_iΛ_iᵀ - lambda1 G_Q) Q) over orthonormal a x r Q.
inline OrthoBasis update_left_basis(const IterationScratch& scratch, double lambda1, Index r) {
  const SymMatrix target = left_scatter(scratch.residuals) - lambda1 * scratch.moments.left;
  return sym_eig_smallest(target, r);
}

inline GramTerms gram_terms(const Dataset2D& data, const std::vector<Matrix>& centroids,
                            const OrthoBasis& right, const OrthoBasis& left) {
  require(right.rows() == data.cols(), "gram_terms: right basis needs b rows");
  require(left.rows() == data.rows(), "gram_terms: left basis needs a rows");
  require(right.cols() == left.cols(), "gram_terms: bases must share the same rank");
  for (const Matrix& u : centroids)
    require(u.rows() == data.rows() && u.cols() == data.cols(),
            "gram_terms: centroids must match the sample shape");
  const Index n = data.size();
  const auto k = static_cast<Index>(centroids.size());
  const Index r = right.cols();

  // ||M P Pᵀ||_F = ||M P||_F, so inner products can be taken on the smaller
  // a x r (and r x b) projections.
  Matrix ur(data.rows() * r, k), ul(r * data.cols(), k);
  for (Index j = 0; j < k; ++j) {
    const Matrix& u = centroids[static_cast<std::size_t>(j)];
    ur.col(j) = flatten(u * right);
    ul.col(j) = flatten(left.transpose() * u);
  }
  Matrix xr(data.rows() * r, n), xl(r * data.cols(), n);
  for (Index i = 0; i < n; ++i) {
    xr.col(i) = flatten(data[i] * right);
    xl.col(i) = flatten(left.transpose() * data[i]);
  }
  GramTerms g;
  g.centroid_right = symmetrized(ur.transpose() * ur);
  g.centroid_left = symmetrized(ul.transpose() * ul);
  g.cross_right = xr.transpose() * ur;
  g.cross_left = xl.transpose() * ul;
  return g;
}

/// Full objective for the current factors, with the graphs held as given.
/// May be negative because of the lambda1 reward.
inline double objective_total(const Dataset2D& data, const FactorModel& model,
                              const GraphPair& graphs, double lambda1, double lambda2) {
  const std::vector<Matrix> res = residuals(data, model.centroids, model.coefficients);
  double recon = 0.0;
  double energy = 0.0;
  for (Index i = 0; i < data.size(); ++i) {
    const Matrix& l = res[static_cast<std::size_t>(i)];
    recon += (l * model.right).squaredNorm() + (model.left.transpose() * l).squaredNorm();
    energy += (data[i] * model.right).squaredNorm() + (model.left.transpose() * data[i]).squaredNorm();
  }
  const Matrix& v = model.coefficients;
  const double smooth =
      (v.transpose() * (graphs.right.laplacian + graphs.left.laplacian) * v).trace();
  return recon - lambda1 * energy + lambda2 * smooth;
}

/// The V-subproblem objective, written as its twelve sign-split trace terms.
/// Differs from objective_total only by a term independent of V.
inline double objective_v(const Matrix& v, const IterationScratch& s, double lambda2) {
  const GramTerms& g = s.gram;
  const auto [b1p, b1m] = posneg_split(g.cross_right);
  const auto [b2p, b2m] = posneg_split(g.cross_left);
  const auto [a1p, a1m] = posneg_split(g.centroid_right);
  const auto [a2p, a2m] = posneg_split(g.centroid_left);
  const Matrix& wp = s.graphs.right.weights;
  const Matrix& wq = s.graphs.left.weights;
  const Vector& dp = s.graphs.right.degrees;
  const Vector& dq = s.graphs.left.degrees;

  auto lin = [&](const Matrix& b) { return (v.transpose() * b).trace(); };
  auto quad = [&](const Matrix& a) { return (v * a * v.transpose()).trace(); };
  auto deg = [&](const Vector& d) { return (v.transpose() * d.asDiagonal() * v).trace(); };
  auto adj = [&](const Matrix& w) { return (v.transpose() * w * v).trace(); };

  return -2.0 * lin(b1p) + 2.0 * lin(b1m) + quad(a1p) - quad(a1m)
         - 2.0 * lin(b2p) + 2.0 * lin(b2m) + quad(a2p) - quad(a2m)
         + lambda2 * deg(dp) - lambda2 * adj(wp)
         + lambda2 * deg(dq) - lambda2 * adj(wq);
}

/// One multiplicative step on V with every other quantity frozen:
///   v_ij <- v_ij sqrt(num_ij / (den_ij + epsilon_div)),
///   num = B1⁺ + B2⁺ + V (A1⁻ + A2⁻) + lambda2 (W_P + W_Q) V,
///   den = B1⁻ + B2⁻ + V (A1⁺ + A2⁺) + lambda2 (D_P + D_Q) V.
inline Matrix update_coefficients(const Matrix& v, const IterationScratch& s, double lambda2,
                                  double epsilon_div = 1e-10) {
  require(v.rows() == s.gram.cross_right.rows() && v.cols() == s.gram.cross_right.cols(),
          "update_coefficients: V does not match the gram terms");
  if (v.size() > 0 && v.minCoeff() < 0.0)
    throw DimensionError("update_coefficients: V must be nonnegative");
  const GramTerms& g = s.gram;
  const auto [b1p, b1m] = posneg_split(g.cross_right);
  const auto [b2p, b2m] = posneg_split(g.cross_left);
  const auto [a1p, a1m] = posneg_split(g.centroid_right);
  const auto [a2p, a2m] = posneg_split(g.centroid_left);

  Matrix num = b1p + b2p + v * (a1m + a2m);
  Matrix den = b1m + b2m + v * (a1p + a2p);
  if (lambda2 != 0.0) {
    num.noalias() += lambda2 * ((s.graphs.right.weights + s.graphs.left.weights) * v);
    den += lambda2 * ((s.graphs.right.degrees + s.graphs.left.degrees).asDiagonal() * v);
  }
  Matrix out(v.rows(), v.cols());
  for (Index j = 0; j < v.cols(); ++j)
    for (Index i = 0; i < v.rows(); ++i)
      out(i, j) = v(i, j) == 0.0 ? 0.0 : v(i, j) * std::sqrt(num(i, j) / (den(i, j) + epsilon_div));
  return out;
}

/// ‖(-2B1 - 2B2 + 2V(A1 + A2) + 2 lambda2 (L_P + L_Q) V) ⊙ V‖_F; zero exactly
/// at points satisfying complementary slackness.
inline double kkt_residual(const Matrix& v, const IterationScratch& s, double lambda2) {
  const GramTerms& g = s.gram;
  const Matrix grad = -2.0 * (g.cross_right + g.cross_left) +
                      2.0 * v * (g.centroid_right + g.centroid_left) +
                      2.0 * lambda2 * (s.graphs.right.laplacian + s.graphs.left.laplacian) * v;
  return grad.cwiseProduct(v).norm();
}

namespace detail {

inline std::vector<Matrix> centroids_from_flat(const Matrix& flat, const Matrix& v, Index rows,
                                               Index cols) {
  const Matrix u = flat * v * spd_pinverse(symmetrized(v.transpose() * v));
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(u.cols()));
  for (Index j = 0; j < u.cols(); ++j) out.push_back(unflatten(u.col(j), rows, cols));
  return out;
}

}  // namespace detail

/// Closed-form centroids U_j = sum_i X_i (V (VᵀV)⁺)_ij. Independent of P and Q:
/// the same U minimizes both projected reconstruction terms.
inline std::vector<Matrix> update_centroids(const Dataset2D& data, const Matrix& v) {
  require(v.rows() == data.size(), "update_centroids: V needs one row per sample");
  return detail::centroids_from_flat(vectorize(data), v, data.rows(), data.cols());
}

struct NormalizedFactors {
  std::vector<Matrix> centroids;
  Matrix coefficients;
  int skipped_columns = 0;  // all-zero columns of V, left as they were
};

/// Rescales column j of V by 1/‖v_j‖² and centroid j by ‖v_j‖²; the product
/// vec(U) Vᵀ is unchanged.
inline NormalizedFactors normalize_factors(std::vector<Matrix> centroids, Matrix v) {
  require(static_cast<Index>(centroids.size()) == v.cols(),
          "normalize_factors: one centroid per column of V");
  NormalizedFactors out;
  for (Index j = 0; j < v.cols(); ++j) {
    const double sq = v.col(j).squaredNorm();
    if (sq == 0.0) {
      ++out.skipped_columns;
      continue;
    }
    v.col(j) /= sq;
    centroids[static_cast<std::size_t>(j)] *= sq;
  }
  out.centroids = std::move(centroids);
  out.coefficients = std::move(v);
  return out;
}

/// Starting point: P, Q from the leading eigenvectors of G_P, G_Q; V from
/// k-means indicators on the flattened samples plus 0.2; U by the closed form.
inline FactorModel initialize(const Dataset2D& data, const SolverConfig& config) {
  config.validate(data);
  const Moments m = moments(data);
  FactorModel model;
  model.right = sym_eig_largest(m.right, config.r);
  model.left = sym_eig_largest(m.left, config.r);
  const Matrix flat = vectorize(data);
  const KMeansResult km = kmeans(flat.transpose(), config.k, config.kmeans_restarts, 300,
                                 derive_seed(config.seed, 0x1417));
  model.coefficients = Matrix::Constant(data.size(), config.k, 0.2);
  for (Index i = 0; i < data.size(); ++i) model.coefficients(i, km.labels[static_cast<std::size_t>(i)]) += 1.0;
  model.centroids = detail::centroids_from_flat(flat, model.coefficients, data.rows(), data.cols());
  return model;
}

/// Snapshot passed to a fit observer after every outer iteration.
struct IterationReport {
  int iteration = 0;               // 1-based
  const FactorModel* model = nullptr;
  const IterationScratch* scratch = nullptr;
  Matrix coefficients_before;      // V entering the V-step
  double objective = 0.0;          // objective_total after the iteration
  double objective_v_before = 0.0; // objective_v around the V-step, same scratch
  double objective_v_after = 0.0;
};

/// Alternating optimizer. Owns the dataset-derived constants and the current
/// factors; `step` performs one outer iteration.
class Solver {
 public:
  Solver(const Dataset2D& data, SolverConfig config)
      : data_(&data), config_(config), flat_(vectorize(data)) {
    config_.validate(data);
    model_ = initialize(data, config_);
    scratch_.moments = moments(data);
    rebuild_graphs();
    objective_ = objective_total(data, model_, scratch_.graphs, config_.lambda1, config_.lambda2);
  }

  const FactorModel& model() const { return model_; }
  const IterationScratch& scratch() const { return scratch_; }
  const SolverConfig& config() const { return config_; }
  double objective() const { return objective_; }
  int iteration() const { return iteration_; }

  /// Updates P and Q, rebuilds both graphs, applies one V-step, then the
  /// closed-form U-step. Returns the new objective.
  double step(IterationReport* report = nullptr) {
    const Dataset2D& data = *data_;
    const Index r = config_.r;

    const Matrix fitted = flat_ - detail::vectorize_or_empty(model_.centroids, data.dim()) *
                                      model_.coefficients.transpose();
    scratch_.residuals.clear();
    for (Index i = 0; i < data.size(); ++i)
      scratch_.residuals.push_back(unflatten(fitted.col(i), data.rows(), data.cols()));
    model_.right = update_right_basis(scratch_, config_.lambda1, r);
    model_.left = update_left_basis(scratch_, config_.lambda1, r);

    rebuild_graphs();

    scratch_.gram = gram_terms(data, model_.centroids, model_.right, model_.left);
    if (report) {
      report->coefficients_before = model_.coefficients;
      report->objective_v_before = objective_v(model_.coefficients, scratch_, config_.lambda2);
    }
    model_.coefficients = update_coefficients(model_.coefficients, scratch_, config_.lambda2,
                                              config_.epsilon_div);
    if (report)
      report->objective_v_after = objective_v(model_.coefficients, scratch_, config_.lambda2);

    model_.centroids =
        detail::centroids_from_flat(flat_, model_.coefficients, data.rows(), data.cols());

    objective_ = objective_total(data, model_, scratch_.graphs, config_.lambda1, config_.lambda2);
    ++iteration_;
    if (report) {
      report->iteration = iteration_;
      report->model = &model_;
      report->scratch = &scratch_;
      report->objective = objective_;
    }
    return objective_;
  }

  FactorModel release() { return std::move(model_); }

 private:
  void rebuild_graphs() {
    scratch_.graphs.right = projected_graph(*data_, model_.right, Side::right, config_.m_neighbors);
    scratch_.graphs.left = projected_graph(*data_, model_.left, Side::left, config_.m_neighbors);
  }

  const Dataset2D* data_;
  SolverConfig config_;
  Matrix flat_;
  FactorModel model_;
  IterationScratch scratch_;
  double objective_ = 0.0;
  int iteration_ = 0;
};

struct FitResult {
  FactorModel model;           // normalized
  std::vector<double> trace;   // objective after each outer iteration
  int iterations = 0;
  bool converged = false;      // stopped on rel_tol rather than t_max
  int degenerate_columns = 0;  // zero columns of V skipped by normalization
};

using FitObserver = std::function<void(const IterationReport&)>;

inline FitResult fit(const Dataset2D& data, const SolverConfig& config,
                     const FitObserver& observer = {}) {
  Solver solver(data, config);
  FitResult result;
  double previous = solver.objective();
  for (int t = 0; t < config.t_max; ++t) {
    IterationReport report;
    const double current = solver.step(observer ? &report : nullptr);
    if (observer) observer(report);
    result.trace.push_back(current);
    if (std::abs(current - previous) / (1.0 + std::abs(current)) < config.rel_tol) {
      result.converged = true;
      break;
    }
    previous = current;
  }
  result.iterations = solver.iteration();
  FactorModel model = solver.release();
  NormalizedFactors norm = normalize_factors(std::move(model.centroids), std::move(model.coefficients));
  model.centroids = std::move(norm.centroids);
  model.coefficients = std::move(norm.coefficients);
  result.degenerate_columns = norm.skipped_columns;
  result.model = std::move(model);
  return result;
}

/// Cluster assignments from k-means on the rows of V.
inline std::vector<int> predict_labels(const FactorModel& model, int k, int restarts = 10,
                                       std::uint64_t seed = 0) {
  if (k > model.coefficients.rows())
    throw DimensionError("predict_labels: k exceeds the number of samples");
  return kmeans(model.coefficients, k, restarts, 300, seed).labels;
}

}  // namespace tsnmf

#endif  // TSNMF_SOLVER_HPP
