#ifndef TSNMF_BASELINES_HPP
#define TSNMF_BASELINES_HPP

// Comparison methods: vectorized Semi-NMF and 2DPCA. K-means lives in kmeans.hpp.

#include <vector>

#include "tsnmf/dataset.hpp"
#include "tsnmf/kmeans.hpp"
#include "tsnmf/linalg.hpp"

namespace tsnmf {

struct SemiNmfResult {
  Matrix basis;                // U: d x k, unconstrained
  Matrix coefficients;         // V: n x k, nonnegative
  std::vector<double> trace;   // ||Y - U Vᵀ||² after each iteration
};

/// Semi-NMF of a d x n data matrix Y (samples in columns): alternates the
/// least-squares basis U = Y V (VᵀV)⁺ and the multiplicative rule
///   V <- V ⊙ sqrt(((YᵀU)⁺ + V (UᵀU)⁻) / ((YᵀU)⁻ + V (UᵀU)⁺)).
/// V starts from k-means indicators plus 0.2.
inline SemiNmfResult seminmf_fit(const Matrix& y, int k, int t_max, std::uint64_t seed = 0,
                                 int kmeans_restarts = 10, double epsilon_div = 1e-10) {
  const Index n = y.cols();
  require(k >= 1 && k <= std::min(y.rows(), n), "seminmf_fit: k must lie in [1, min(d, n)]");
  require(t_max >= 1, "seminmf_fit: t_max must be at least 1");

  const KMeansResult km = kmeans(y.transpose(), k, kmeans_restarts, 300, seed);
  SemiNmfResult out;
  Matrix& v = out.coefficients;
  v = Matrix::Constant(n, k, 0.2);
  for (Index i = 0; i < n; ++i) v(i, km.labels[static_cast<std::size_t>(i)]) += 1.0;

  Matrix& u = out.basis;
  for (int t = 0; t < t_max; ++t) {
    u = y * v * spd_pinverse(symmetrized(v.transpose() * v));
    const auto [cross_p, cross_m] = posneg_split(y.transpose() * u);
    const auto [gram_p, gram_m] = posneg_split(symmetrized(u.transpose() * u));
    const Matrix num = cross_p + v * gram_m;
    const Matrix den = cross_m + v * gram_p;
    for (Index j = 0; j < k; ++j)
      for (Index i = 0; i < n; ++i)
        if (v(i, j) != 0.0) v(i, j) *= std::sqrt(num(i, j) / (den(i, j) + epsilon_div));
    out.trace.push_back((y - u * v.transpose()).squaredNorm());
  }
  return out;
}

struct TwoDpcaResult {
  OrthoBasis basis;       // b x r
  SymMatrix covariance;   // G_t
  bool degenerate = false;  // G_t vanished; the basis is an arbitrary orthonormal one
};

/// 2DPCA on the centered image scatter G_t = (1/n) sum (X_i - X̄)ᵀ (X_i - X̄);
/// returns its r leading eigenvectors.
inline TwoDpcaResult twodpca_fit(const Dataset2D& data, Index r) {
  require(data.size() >= 2, "twodpca_fit: need at least two samples");
  if (r < 1 || r > data.cols()) throw DimensionError("twodpca_fit: r must lie in [1, b]");
  Matrix mean = Matrix::Zero(data.rows(), data.cols());
  for (const Matrix& x : data.samples()) mean += x;
  mean /= static_cast<double>(data.size());
  SymMatrix g = SymMatrix::Zero(data.cols(), data.cols());
  for (const Matrix& x : data.samples()) {
    const Matrix c = x - mean;
    g.noalias() += c.transpose() * c;
  }
  g = symmetrized(g / static_cast<double>(data.size()));

  TwoDpcaResult out;
  out.covariance = g;
  double energy = 0.0;
  for (const Matrix& x : data.samples()) energy = std::max(energy, x.squaredNorm());
  out.degenerate = g.cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, energy);
  out.basis = sym_eig_largest(g, r);
  return out;
}

/// Flattened right projections X_i P, one sample per row (input for k-means).
inline Matrix twodpca_features(const Dataset2D& data, const OrthoBasis& basis) {
  require(basis.rows() == data.cols(), "twodpca_features: basis needs b rows");
  Matrix out(data.size(), data.rows() * basis.cols());
  for (Index i = 0; i < data.size(); ++i) out.row(i) = flatten(data[i] * basis).transpose();
  return out;
}

}  // namespace tsnmf

#endif  // TSNMF_BASELINES_HPP
