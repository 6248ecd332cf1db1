#ifndef TSNMF_DATASET_HPP
#define TSNMF_DATASET_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsnmf/common.hpp"

namespace tsnmf {

/// A collection of n equally sized a x b matrices with optional integer
/// class labels. Immutable once constructed; all shape checks happen here.
class Dataset2D {
 public:
  Dataset2D() = default;

  explicit Dataset2D(std::vector<Matrix> samples,
                     std::optional<std::vector<int>> labels = std::nullopt)
      : samples_(std::move(samples)), labels_(std::move(labels)) {
    if (samples_.empty()) throw DataError("dataset must contain at least one sample");
    const Index a = samples_.front().rows();
    const Index b = samples_.front().cols();
    if (a == 0 || b == 0) throw DataError("dataset samples must be nonempty matrices");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (samples_[i].rows() != a || samples_[i].cols() != b)
        throw DataError("sample " + std::to_string(i) + " is " +
                        std::to_string(samples_[i].rows()) + "x" +
                        std::to_string(samples_[i].cols()) + ", expected " +
                        std::to_string(a) + "x" + std::to_string(b));
    }
    if (labels_ && labels_->size() != samples_.size())
      throw DataError("label count " + std::to_string(labels_->size()) +
                      " does not match sample count " + std::to_string(samples_.size()));
  }

  Index size() const { return static_cast<Index>(samples_.size()); }
  Index rows() const { return samples_.empty() ? 0 : samples_.front().rows(); }
  Index cols() const { return samples_.empty() ? 0 : samples_.front().cols(); }
  Index dim() const { return rows() * cols(); }

  const Matrix& operator[](Index i) const { return samples_[static_cast<std::size_t>(i)]; }
  const std::vector<Matrix>& samples() const { return samples_; }

  bool has_labels() const { return labels_.has_value(); }
  const std::vector<int>& labels() const {
    if (!labels_) throw DataError("dataset has no labels");
    return *labels_;
  }

 private:
  std::vector<Matrix> samples_;
  std::optional<std::vector<int>> labels_;
};

/// Column-major flattening of one matrix.
inline Vector flatten(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

/// d x n matrix whose i-th column is flatten(mats[i]).
inline Matrix vectorize(const std::vector<Matrix>& mats) {
  require(!mats.empty(), "vectorize: empty input");
  const Index d = mats.front().size();
  Matrix out(d, static_cast<Index>(mats.size()));
  for (std::size_t i = 0; i < mats.size(); ++i) {
    require(mats[i].size() == d, "vectorize: inconsistent sizes");
    out.col(static_cast<Index>(i)) = flatten(mats[i]);
  }
  return out;
}

inline Matrix vectorize(const Dataset2D& data) { return vectorize(data.samples()); }

/// Inverse of `flatten` for an a x b shape.
inline Matrix unflatten(const Eigen::Ref<const Vector>& v, Index rows, Index cols) {
  require(v.size() == rows * cols, "unflatten: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

}  // namespace tsnmf

#endif  // TSNMF_DATASET_HPP
