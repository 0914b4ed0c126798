/*
 * Copyright 2026 The xfer Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef XFER_TYPES_HPP_
#define XFER_TYPES_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace xfer {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// m x k matrix of per-sample feature values, one row per sample.
// Invariants: m >= 2, k >= 1, every entry finite.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(RowMatrix values);

  Index sample_count() const { return values_.rows(); }
  Index dim() const { return values_.cols(); }
  const RowMatrix& values() const { return values_; }

 private:
  RowMatrix values_;
};

// Class index per sample. Classes are contiguous 0..C-1 and each occurs at
// least once; `original_values()[c]` is the raw label that became class c.
class LabelVector {
 public:
  // Remaps arbitrary non-negative raw labels onto 0..C-1 in ascending order.
  static LabelVector from_raw(std::span<const std::int64_t> raw);
  static LabelVector from_raw(std::span<const int> raw);

  // Takes labels that are already contiguous; throws DataError otherwise.
  LabelVector(std::vector<int> labels, int class_count);

  std::size_t size() const { return labels_.size(); }
  int class_count() const { return class_count_; }
  const std::vector<int>& labels() const { return labels_; }
  int operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<std::int64_t>& original_values() const {
    return original_;
  }
  // True when the raw labels were not already 0..C-1.
  bool remapped() const { return remapped_; }

 private:
  LabelVector with_original(std::vector<std::int64_t> original) &&;
  template <typename T>
  static LabelVector from_raw_impl(std::span<const T> raw);

  std::vector<int> labels_;
  int class_count_ = 0;
  std::vector<std::int64_t> original_;
  bool remapped_ = false;
};

// m images of H x W pixels with 1 or 3 channels, stored sample-major then
// row-major then channel.
class ImageLabelSet {
 public:
  ImageLabelSet(std::size_t count, std::size_t height, std::size_t width,
                std::size_t channels, std::vector<double> pixels);

  std::size_t count() const { return count_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  const std::vector<double>& pixels() const { return pixels_; }

  std::span<const double> pixel(std::size_t sample, std::size_t row,
                                std::size_t col) const {
    return {pixels_.data() + offset(sample, row, col), channels_};
  }

 private:
  std::size_t offset(std::size_t sample, std::size_t row,
                     std::size_t col) const {
    return ((sample * height_ + row) * width_ + col) * channels_;
  }

  std::size_t count_, height_, width_, channels_;
  std::vector<double> pixels_;
};

}  // namespace xfer

#endif  // XFER_TYPES_HPP_
