#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "balance/error.hpp"

namespace balance {

using Label = std::uint32_t;

/// Row sums may deviate from one by at most this much before renormalization.
inline constexpr double kRowSumTolerance = 1e-6;

/// S x N x C class probabilities: prediction of each sampled hypothesis on
/// each data point. Rows are validated and renormalized on construction.
class PredictionTensor {
 public:
  PredictionTensor() = default;

  PredictionTensor(std::size_t num_hypotheses, std::size_t num_points, std::size_t num_classes,
                   std::vector<double> probs)
      : hypotheses_(num_hypotheses),
        points_(num_points),
        classes_(num_classes),
        probs_(std::move(probs)) {
    if (hypotheses_ < 1 || points_ < 1 || classes_ < 2) {
      throw FormatError("prediction tensor needs S >= 1, N >= 1, C >= 2");
    }
    if (probs_.size() != hypotheses_ * points_ * classes_) {
      throw FormatError("prediction tensor: data length " + std::to_string(probs_.size()) +
                        " does not match S*N*C = " +
                        std::to_string(hypotheses_ * points_ * classes_));
    }
    for (std::size_t offset = 0; offset < probs_.size(); offset += classes_) {
      double sum = 0.0;
      for (std::size_t c = 0; c < classes_; ++c) {
        const double p = probs_[offset + c];
        if (!(p >= 0.0 && p <= 1.0)) {
          throw FormatError("prediction tensor: probability outside [0,1] at flat index " +
                            std::to_string(offset + c));
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        throw FormatError("prediction tensor: row at flat index " + std::to_string(offset) +
                          " sums to " + std::to_string(sum));
      }
      // rows already normalized up to summation rounding are left bit-exact
      if (std::abs(sum - 1.0) > 4.0 * static_cast<double>(classes_) * std::numeric_limits<double>::epsilon()) {
        for (std::size_t c = 0; c < classes_; ++c) probs_[offset + c] /= sum;
      }
    }
  }

  std::size_t num_hypotheses() const noexcept { return hypotheses_; }
  std::size_t num_points() const noexcept { return points_; }
  std::size_t num_classes() const noexcept { return classes_; }

  std::span<const double> row(std::size_t hypothesis, std::size_t point) const noexcept {
    return {probs_.data() + (hypothesis * points_ + point) * classes_, classes_};
  }

  double prob(std::size_t hypothesis, std::size_t point, std::size_t label) const noexcept {
    return probs_[(hypothesis * points_ + point) * classes_ + label];
  }

  std::span<const double> data() const noexcept { return probs_; }

  friend bool operator==(const PredictionTensor&, const PredictionTensor&) = default;

 private:
  std::size_t hypotheses_ = 0;
  std::size_t points_ = 0;
  std::size_t classes_ = 0;
  std::vector<double> probs_;
};

/// Hard predictions, S x N_ref.
class LabelMatrix {
 public:
  LabelMatrix() = default;
  LabelMatrix(std::size_t rows, std::size_t cols, std::vector<Label> labels)
      : rows_(rows), cols_(cols), labels_(std::move(labels)) {
    if (labels_.size() != rows_ * cols_) throw std::invalid_argument("LabelMatrix: size mismatch");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const Label> row(std::size_t r) const noexcept {
    return {labels_.data() + r * cols_, cols_};
  }
  Label at(std::size_t r, std::size_t c) const noexcept { return labels_[r * cols_ + c]; }

  friend bool operator==(const LabelMatrix&, const LabelMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Label> labels_;
};

/// Index of the largest entry; ties go to the lowest index.
inline Label argmax_label(std::span<const double> row) noexcept {
  Label best = 0;
  for (std::size_t c = 1; c < row.size(); ++c) {
    if (row[c] > row[best]) best = static_cast<Label>(c);
  }
  return best;
}

inline LabelMatrix hard_labels(const PredictionTensor& tensor) {
  std::vector<Label> labels;
  labels.reserve(tensor.num_hypotheses() * tensor.num_points());
  for (std::size_t s = 0; s < tensor.num_hypotheses(); ++s) {
    for (std::size_t n = 0; n < tensor.num_points(); ++n) {
      labels.push_back(argmax_label(tensor.row(s, n)));
    }
  }
  return {tensor.num_hypotheses(), tensor.num_points(), std::move(labels)};
}

/// Normalized Hamming distance: fraction of positions where the rows differ.
inline double hamming_distance(std::span<const Label> a, std::span<const Label> b) {
  if (a.size() != b.size()) throw std::invalid_argument("hamming_distance: length mismatch");
  if (a.empty()) throw std::invalid_argument("hamming_distance: empty rows");
  std::size_t differ = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differ += (a[i] != b[i]) ? 1 : 0;
  return static_cast<double>(differ) / static_cast<double>(a.size());
}

}  // namespace balance
