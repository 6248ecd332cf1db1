#ifndef TSNMF_METRICS_HPP
#define TSNMF_METRICS_HPP

// External clustering scores: accuracy under the best one-to-one label
// mapping, normalized mutual information and purity.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "tsnmf/common.hpp"

namespace tsnmf {

/// Cluster assignment per sample; labels are nonnegative.
using Partition = std::vector<int>;

/// Contingency counts between two partitions after compacting each label set
/// to 0..c-1 in ascending label order.
struct Contingency {
  std::vector<std::vector<long long>> counts;  // [pred cluster][truth class]
  std::vector<long long> pred_totals;
  std::vector<long long> truth_totals;
  long long n = 0;
};

namespace detail {

inline std::vector<int> compact(const Partition& p) {
  std::map<int, int> ids;
  for (int label : p) {
    if (label < 0) throw DimensionError("partition labels must be nonnegative");
    ids.emplace(label, 0);
  }
  int next = 0;
  for (auto& [label, id] : ids) id = next++;
  std::vector<int> out;
  out.reserve(p.size());
  for (int label : p) out.push_back(ids[label]);
  return out;
}

}  // namespace detail

inline Contingency contingency(const Partition& pred, const Partition& truth) {
  if (pred.size() != truth.size()) throw DimensionError("partitions differ in length");
  if (pred.empty()) throw DimensionError("partitions are empty");
  const std::vector<int> p = detail::compact(pred);
  const std::vector<int> t = detail::compact(truth);
  const auto cp = static_cast<std::size_t>(*std::max_element(p.begin(), p.end()) + 1);
  const auto ct = static_cast<std::size_t>(*std::max_element(t.begin(), t.end()) + 1);
  Contingency c;
  c.counts.assign(cp, std::vector<long long>(ct, 0));
  c.pred_totals.assign(cp, 0);
  c.truth_totals.assign(ct, 0);
  c.n = static_cast<long long>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto a = static_cast<std::size_t>(p[i]);
    const auto b = static_cast<std::size_t>(t[i]);
    ++c.counts[a][b];
    ++c.pred_totals[a];
    ++c.truth_totals[b];
  }
  return c;
}

/// Minimum-cost perfect matching on a square cost matrix (Kuhn-Munkres with
/// potentials, O(n³)). Returns the column assigned to each row.
inline std::vector<int> hungarian(const std::vector<std::vector<long long>>& cost) {
  const std::size_t n = cost.size();
  for (const auto& row : cost)
    if (row.size() != n) throw DimensionError("hungarian: cost matrix must be square");
  constexpr long long inf = std::numeric_limits<long long>::max() / 4;
  // 1-based arrays; column 0 is a virtual source.
  std::vector<long long> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<long long> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      long long delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const long long cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (std::size_t j = 1; j <= n; ++j)
    if (match[j] != 0) assignment[match[j] - 1] = static_cast<int>(j - 1);
  return assignment;
}

/// Fraction of samples correctly labeled under the best one-to-one mapping
/// from predicted clusters to true classes.
inline double clustering_accuracy(const Partition& pred, const Partition& truth) {
  const Contingency c = contingency(pred, truth);
  const std::size_t size = std::max(c.pred_totals.size(), c.truth_totals.size());
  std::vector<std::vector<long long>> cost(size, std::vector<long long>(size, 0));
  for (std::size_t a = 0; a < c.pred_totals.size(); ++a)
    for (std::size_t b = 0; b < c.truth_totals.size(); ++b) cost[a][b] = -c.counts[a][b];
  const std::vector<int> assignment = hungarian(cost);
  long long matched = 0;
  for (std::size_t a = 0; a < size; ++a) matched -= cost[a][static_cast<std::size_t>(assignment[a])];
  return static_cast<double>(matched) / static_cast<double>(c.n);
}

/// I(pred; truth) / sqrt(H(pred) H(truth)) with natural logarithms. When an
/// entropy vanishes the score is 1 if both partitions are single-cluster and 0
/// otherwise.
inline double nmi(const Partition& pred, const Partition& truth) {
  const Contingency c = contingency(pred, truth);
  const double n = static_cast<double>(c.n);
  auto entropy = [n](const std::vector<long long>& totals) {
    double h = 0.0;
    for (long long t : totals)
      if (t > 0) {
        const double p = static_cast<double>(t) / n;
        h -= p * std::log(p);
      }
    return h;
  };
  const double hp = entropy(c.pred_totals);
  const double ht = entropy(c.truth_totals);
  if (c.pred_totals.size() == 1 || c.truth_totals.size() == 1)
    return (c.pred_totals.size() == 1 && c.truth_totals.size() == 1) ? 1.0 : 0.0;
  double mi = 0.0;
  for (std::size_t a = 0; a < c.pred_totals.size(); ++a)
    for (std::size_t b = 0; b < c.truth_totals.size(); ++b) {
      const long long nab = c.counts[a][b];
      if (nab == 0) continue;
      const double pab = static_cast<double>(nab) / n;
      mi += pab * std::log(static_cast<double>(nab) * n /
                           (static_cast<double>(c.pred_totals[a]) *
                            static_cast<double>(c.truth_totals[b])));
    }
  return std::clamp(mi / std::sqrt(hp * ht), 0.0, 1.0);
}

/// (1/n) sum over predicted clusters of the largest true-class count inside it.
inline double purity(const Partition& pred, const Partition& truth) {
  const Contingency c = contingency(pred, truth);
  long long total = 0;
  for (const auto& row : c.counts) total += *std::max_element(row.begin(), row.end());
  return static_cast<double>(total) / static_cast<double>(c.n);
}

struct Scores {
  double acc = 0.0;
  double nmi = 0.0;
  double purity = 0.0;
};

inline Scores score(const Partition& pred, const Partition& truth) {
  return {clustering_accuracy(pred, truth), nmi(pred, truth), purity(pred, truth)};
}

}  // namespace tsnmf

#endif  // TSNMF_METRICS_HPP
