#ifndef TSNMF_DATA_HPP
#define TSNMF_DATA_HPP

// Experiment data preparation: class-subset sampling, entry removal and a
// synthetic generator with known cluster structure.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "tsnmf/dataset.hpp"
#include "tsnmf/linalg.hpp"

namespace tsnmf {

/// All samples of `n_classes` distinct labels chosen uniformly at random,
/// in their original order, relabeled 0..n_classes-1 by ascending old label.
inline Dataset2D sample_subset(const Dataset2D& data, int n_classes, std::uint64_t seed) {
  if (!data.has_labels()) throw DataError("sample_subset: dataset is unlabeled");
  const std::set<int> distinct(data.labels().begin(), data.labels().end());
  std::vector<int> classes(distinct.begin(), distinct.end());
  if (n_classes < 1 || n_classes > static_cast<int>(classes.size()))
    throw DataError("sample_subset: cannot draw " + std::to_string(n_classes) + " of " +
                    std::to_string(classes.size()) + " classes");
  Rng rng(seed);
  for (std::size_t i = 0; i < static_cast<std::size_t>(n_classes); ++i) {
    const auto j = i + static_cast<std::size_t>(rng.index(static_cast<Index>(classes.size() - i)));
    std::swap(classes[i], classes[j]);
  }
  classes.resize(static_cast<std::size_t>(n_classes));
  std::sort(classes.begin(), classes.end());

  std::vector<Matrix> samples;
  std::vector<int> labels;
  for (Index i = 0; i < data.size(); ++i) {
    const int label = data.labels()[static_cast<std::size_t>(i)];
    const auto it = std::lower_bound(classes.begin(), classes.end(), label);
    if (it == classes.end() || *it != label) continue;
    samples.push_back(data[i]);
    labels.push_back(static_cast<int>(it - classes.begin()));
  }
  return Dataset2D(std::move(samples), std::move(labels));
}

/// Sets exactly round(fraction * a * b) uniformly chosen entries of every
/// sample to zero.
inline Dataset2D corrupt(const Dataset2D& data, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0))
    throw DimensionError("corrupt: fraction must lie in [0, 1)");
  const Index d = data.dim();
  const auto removed = static_cast<Index>(std::llround(fraction * static_cast<double>(d)));
  Rng rng(seed);
  std::vector<Index> slots(static_cast<std::size_t>(d));
  std::vector<Matrix> samples;
  samples.reserve(data.samples().size());
  for (const Matrix& x : data.samples()) {
    Matrix y = x;
    std::iota(slots.begin(), slots.end(), Index{0});
    for (Index i = 0; i < removed; ++i) {
      const Index j = i + rng.index(d - i);
      std::swap(slots[static_cast<std::size_t>(i)], slots[static_cast<std::size_t>(j)]);
      y.data()[slots[static_cast<std::size_t>(i)]] = 0.0;
    }
    samples.push_back(std::move(y));
  }
  if (data.has_labels()) return Dataset2D(std::move(samples), data.labels());
  return Dataset2D(std::move(samples));
}

struct SynthOptions {
  int k = 3;
  int n_per = 50;
  Index rows = 10;
  Index cols = 10;
  double noise_sigma = 0.1;
  double jitter = 0.2;  // each sample is template * (1 + U(-jitter, jitter))
  std::uint64_t seed = 0;
};

/// Unit-norm rank-1 templates g_j h_jᵀ with mutually orthogonal g's and h's.
inline std::vector<Matrix> synth_templates(int k, Index rows, Index cols, Rng& rng) {
  if (k < 1 || k > std::min(rows, cols))
    throw DimensionError("synth_clusters: k must lie in [1, min(a, b)]");
  const OrthoBasis g = random_orthobasis(rows, k, rng);
  const OrthoBasis h = random_orthobasis(cols, k, rng);
  std::vector<Matrix> out;
  for (int j = 0; j < k; ++j) {
    Matrix t = g.col(j) * h.col(j).transpose();
    t /= t.norm();
    out.push_back(std::move(t));
  }
  return out;
}

/// k clusters of n_per noisy, rescaled copies of rank-1 templates; samples are
/// grouped by cluster and carry their true labels.
inline Dataset2D synth_clusters(const SynthOptions& opt) {
  require(opt.n_per >= 1 && opt.rows >= 1 && opt.cols >= 1, "synth_clusters: sizes must be positive");
  require(opt.noise_sigma >= 0.0 && opt.jitter >= 0.0, "synth_clusters: noise must be nonnegative");
  Rng rng(opt.seed);
  const std::vector<Matrix> templates = synth_templates(opt.k, opt.rows, opt.cols, rng);
  std::vector<Matrix> samples;
  std::vector<int> labels;
  for (int j = 0; j < opt.k; ++j)
    for (int s = 0; s < opt.n_per; ++s) {
      const double scale = opt.jitter > 0.0 ? 1.0 + rng.uniform(-opt.jitter, opt.jitter) : 1.0;
      Matrix x = templates[static_cast<std::size_t>(j)] * scale;
      if (opt.noise_sigma > 0.0) x += opt.noise_sigma * rng.normal_matrix(opt.rows, opt.cols);
      samples.push_back(std::move(x));
      labels.push_back(j);
    }
  return Dataset2D(std::move(samples), std::move(labels));
}

}  // namespace tsnmf

#endif  // TSNMF_DATA_HPP
