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

#ifndef XFER_DATA_IO_HPP_
#define XFER_DATA_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "xfer/types.hpp"

namespace xfer {

// ---------------------------------------------------------------------------
// CSV
//
// Comma separated, '.' decimal point, optional single header row, LF or CRLF
// line endings. Blank trailing lines are ignored.
// ---------------------------------------------------------------------------

// Reads a rectangular numeric table. Throws FormatError on ragged rows or an
// empty file and ParseError (with 1-based line/column) on bad cells.
Matrix read_csv_matrix(const std::filesystem::path& path, bool has_header);

FeatureMatrix read_feature_csv(const std::filesystem::path& path,
                               bool has_header = false);

// Writes with 17 significant digits so that values round-trip exactly.
void write_csv_matrix(const std::filesystem::path& path,
                      const Eigen::Ref<const Matrix>& values);

// One non-negative integer per line; non-contiguous labels are remapped
// (see LabelVector::original_values()).
LabelVector read_labels(const std::filesystem::path& path);
std::vector<std::int64_t> read_integer_lines(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path,
                  const std::vector<std::int64_t>& labels);

// ---------------------------------------------------------------------------
// XFT1 tensor container
//
//   bytes 0..3   "XFT1"
//   byte  4      dtype (0 = f32, 1 = f64, 2 = u8, 3 = i64)
//   byte  5      rank
//   rank x u64   dimensions, little endian
//   payload      row-major, little endian
// ---------------------------------------------------------------------------

enum class Dtype : std::uint8_t { kF32 = 0, kF64 = 1, kU8 = 2, kI64 = 3 };

struct Tensor {
  using Storage = std::variant<std::vector<float>, std::vector<double>,
                               std::vector<std::uint8_t>,
                               std::vector<std::int64_t>>;

  std::vector<std::uint64_t> shape;
  Storage data;

  Dtype dtype() const { return static_cast<Dtype>(data.index()); }
  std::size_t element_count() const;
  double as_double(std::size_t i) const;
};

// Maximum supported rank.
inline constexpr std::size_t kMaxTensorRank = 4;

Tensor read_tensor_binary(const std::filesystem::path& path);
void write_tensor_binary(const std::filesystem::path& path,
                         const Tensor& tensor);

// Rank-2 tensors become a FeatureMatrix; rank 3 (m x H x W) and rank 4
// (m x H x W x C) become an ImageLabelSet.
using TensorContent = std::variant<FeatureMatrix, ImageLabelSet>;
TensorContent read_tensor_content(const std::filesystem::path& path);

FeatureMatrix to_feature_matrix(const Tensor& tensor);
ImageLabelSet to_image_set(const Tensor& tensor);
Tensor from_matrix(const Eigen::Ref<const RowMatrix>& values,
                   Dtype dtype = Dtype::kF64);
Tensor from_images(const ImageLabelSet& images, Dtype dtype = Dtype::kF64);

// Reads features from either format, dispatching on the XFT1 magic.
FeatureMatrix read_features_any(const std::filesystem::path& path,
                                bool has_header = false);

}  // namespace xfer

#endif  // XFER_DATA_IO_HPP_
