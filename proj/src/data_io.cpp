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

#include "xfer/data_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string_view>

#include "xfer/error.hpp"

namespace xfer {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

FeatureMatrix::FeatureMatrix(RowMatrix values) : values_(std::move(values)) {
  if (values_.rows() < 2) {
    throw InsufficientSamplesError("feature matrix needs at least 2 samples, got " +
                                   std::to_string(values_.rows()));
  }
  if (values_.cols() < 1) {
    throw DataError("feature matrix has no columns");
  }
  if (!values_.allFinite()) {
    throw DataError("feature matrix contains NaN or Inf");
  }
}

template <typename T>
LabelVector LabelVector::from_raw_impl(std::span<const T> raw) {
  if (raw.empty()) throw DataError("label vector is empty");
  std::vector<std::int64_t> distinct(raw.begin(), raw.end());
  for (std::int64_t v : distinct) {
    if (v < 0) throw DataError("negative label " + std::to_string(v));
  }
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<int> labels(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    labels[i] = static_cast<int>(
        std::lower_bound(distinct.begin(), distinct.end(),
                         static_cast<std::int64_t>(raw[i])) -
        distinct.begin());
  }
  return LabelVector(std::move(labels), static_cast<int>(distinct.size()))
      .with_original(std::move(distinct));
}

LabelVector LabelVector::from_raw(std::span<const std::int64_t> raw) {
  return from_raw_impl(raw);
}

LabelVector LabelVector::from_raw(std::span<const int> raw) {
  return from_raw_impl(raw);
}

LabelVector::LabelVector(std::vector<int> labels, int class_count)
    : labels_(std::move(labels)), class_count_(class_count) {
  if (labels_.empty()) throw DataError("label vector is empty");
  if (class_count_ < 1) throw DataError("class count must be positive");
  std::vector<char> seen(static_cast<std::size_t>(class_count_), 0);
  for (int v : labels_) {
    if (v < 0 || v >= class_count_) {
      throw DataError("label " + std::to_string(v) + " outside [0, " +
                      std::to_string(class_count_) + ")");
    }
    seen[static_cast<std::size_t>(v)] = 1;
  }
  for (int c = 0; c < class_count_; ++c) {
    if (!seen[static_cast<std::size_t>(c)]) {
      throw DataError("class " + std::to_string(c) + " has no samples");
    }
  }
  original_.resize(static_cast<std::size_t>(class_count_));
  for (int c = 0; c < class_count_; ++c) original_[static_cast<std::size_t>(c)] = c;
}

LabelVector LabelVector::with_original(std::vector<std::int64_t> original) && {
  remapped_ = false;
  for (std::size_t c = 0; c < original.size(); ++c) {
    if (original[c] != static_cast<std::int64_t>(c)) remapped_ = true;
  }
  original_ = std::move(original);
  return std::move(*this);
}

ImageLabelSet::ImageLabelSet(std::size_t count, std::size_t height,
                             std::size_t width, std::size_t channels,
                             std::vector<double> pixels)
    : count_(count),
      height_(height),
      width_(width),
      channels_(channels),
      pixels_(std::move(pixels)) {
  if (count_ == 0 || height_ == 0 || width_ == 0) {
    throw DataError("image set has an empty dimension");
  }
  if (channels_ != 1 && channels_ != 3) {
    throw DataError("images must have 1 or 3 channels, got " +
                    std::to_string(channels_));
  }
  if (pixels_.size() != count_ * height_ * width_ * channels_) {
    throw DataError("image payload does not match its shape");
  }
  for (double v : pixels_) {
    if (!std::isfinite(v)) throw DataError("image contains NaN or Inf");
  }
}

// ---------------------------------------------------------------------------
// Text helpers
// ---------------------------------------------------------------------------

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

// Physical lines with the trailing '\r' of DOS endings removed. Trailing
// blank lines are dropped.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && lines.back().find_first_not_of(" \t") ==
                               std::string_view::npos) {
    lines.pop_back();
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view cell, double& out) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

Matrix read_csv_matrix(const std::filesystem::path& path, bool has_header) {
  const std::string text = slurp(path);
  const auto lines = split_lines(text);
  const std::size_t first = has_header ? 1 : 0;
  if (lines.size() <= first) {
    throw FormatError(path.string() + ": no rows", 0);
  }

  std::vector<double> cells;
  std::size_t columns = 0;
  for (std::size_t li = first; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    std::size_t count = 0;
    std::size_t pos = 0;
    const std::string_view line = lines[li];
    while (true) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string_view::npos) comma = line.size();
      const std::string_view cell = trim(line.substr(pos, comma - pos));
      double value = 0.0;
      if (!parse_double(cell, value)) {
        throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                             ", column " + std::to_string(count + 1) +
                             ": cannot parse '" + std::string(cell) +
                             "' as a finite number",
                         line_no, count + 1);
      }
      cells.push_back(value);
      ++count;
      if (comma == line.size()) break;
      pos = comma + 1;
    }
    if (columns == 0) {
      columns = count;
    } else if (count != columns) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                            " has " + std::to_string(count) +
                            " columns, expected " + std::to_string(columns),
                        line_no);
    }
  }
  const auto rows = static_cast<Index>(cells.size() / columns);
  return Eigen::Map<const RowMatrix>(cells.data(), rows,
                                     static_cast<Index>(columns));
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path,
                               bool has_header) {
  return FeatureMatrix(read_csv_matrix(path, has_header));
}

void write_csv_matrix(const std::filesystem::path& path,
                      const Eigen::Ref<const Matrix>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  char buf[40];
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index c = 0; c < values.cols(); ++c) {
      if (c) out.put(',');
      const int n = std::snprintf(buf, sizeof buf, "%.17g", values(r, c));
      out.write(buf, n);
    }
    out.put('\n');
  }
  if (!out) throw DataError("write failed for " + path.string());
}

std::vector<std::int64_t> read_integer_lines(const std::filesystem::path& path) {
  const std::string text = slurp(path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw FormatError(path.string() + ": no rows", 0);
  std::vector<std::int64_t> values;
  values.reserve(lines.size());
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string_view token = trim(lines[li]);
    std::int64_t v = 0;
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (token.empty() || ec != std::errc() || ptr != end || v < 0) {
      throw ParseError(path.string() + ": line " + std::to_string(li + 1) +
                           ": expected a non-negative integer, got '" +
                           std::string(token) + "'",
                       li + 1, 1);
    }
    values.push_back(v);
  }
  return values;
}

LabelVector read_labels(const std::filesystem::path& path) {
  const auto raw = read_integer_lines(path);
  return LabelVector::from_raw(std::span<const std::int64_t>(raw));
}

void write_labels(const std::filesystem::path& path,
                  const std::vector<std::int64_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::int64_t v : labels) out << v << '\n';
}

// ---------------------------------------------------------------------------
// XFT1
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'X', 'F', 'T', '1'};

std::size_t dtype_size(Dtype dtype) {
  switch (dtype) {
    case Dtype::kF32: return 4;
    case Dtype::kF64: return 8;
    case Dtype::kU8: return 1;
    case Dtype::kI64: return 8;
  }
  return 0;
}

template <typename Uint>
void put_le(std::string& out, Uint v) {
  for (std::size_t b = 0; b < sizeof(Uint); ++b) {
    out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
  }
}

template <typename Uint>
Uint get_le(const unsigned char* p) {
  Uint v = 0;
  for (std::size_t b = 0; b < sizeof(Uint); ++b) {
    v |= static_cast<Uint>(p[b]) << (8 * b);
  }
  return v;
}

template <typename T>
using UintOf = std::conditional_t<
    sizeof(T) == 1, std::uint8_t,
    std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;

template <typename T>
void append_payload(std::string& out, const std::vector<T>& values) {
  if constexpr (std::endian::native == std::endian::little) {
    const auto* bytes = reinterpret_cast<const char*>(values.data());
    out.append(bytes, values.size() * sizeof(T));
  } else {
    for (const T& v : values) put_le(out, std::bit_cast<UintOf<T>>(v));
  }
}

template <typename T>
std::vector<T> decode_payload(const unsigned char* p, std::size_t count) {
  std::vector<T> values(count);
  if constexpr (std::endian::native == std::endian::little) {
    if (count) std::memcpy(values.data(), p, count * sizeof(T));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      values[i] = std::bit_cast<T>(get_le<UintOf<T>>(p + i * sizeof(T)));
    }
  }
  return values;
}

}  // namespace

std::size_t Tensor::element_count() const {
  return std::visit([](const auto& v) { return v.size(); }, data);
}

double Tensor::as_double(std::size_t i) const {
  return std::visit([i](const auto& v) { return static_cast<double>(v[i]); },
                    data);
}

void write_tensor_binary(const std::filesystem::path& path,
                         const Tensor& tensor) {
  if (tensor.shape.empty() || tensor.shape.size() > kMaxTensorRank) {
    throw DataError("XFT1 supports ranks 1.." + std::to_string(kMaxTensorRank));
  }
  std::uint64_t expected = 1;
  for (auto d : tensor.shape) expected *= d;
  if (expected != tensor.element_count()) {
    throw DataError("tensor shape does not match its element count");
  }
  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(tensor.dtype()));
  out.push_back(static_cast<char>(tensor.shape.size()));
  for (auto d : tensor.shape) put_le<std::uint64_t>(out, d);
  std::visit([&out](const auto& v) { append_payload(out, v); }, tensor.data);

  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw DataError("write failed for " + path.string());
}

Tensor read_tensor_binary(const std::filesystem::path& path) {
  const std::string raw = slurp(path);
  const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data());
  const std::string name = path.string();
  if (raw.size() < 4 || std::memcmp(raw.data(), kMagic, 4) != 0) {
    throw BadMagicError(name + ": missing XFT1 magic");
  }
  if (raw.size() < 6) throw TruncatedError(name + ": header truncated");
  const unsigned dtype_code = bytes[4];
  if (dtype_code > 3) {
    throw UnsupportedDtypeError(name + ": unsupported dtype code " +
                                std::to_string(dtype_code));
  }
  const auto dtype = static_cast<Dtype>(dtype_code);
  const std::size_t rank = bytes[5];
  if (rank == 0 || rank > kMaxTensorRank) {
    throw DataError(name + ": unsupported rank " + std::to_string(rank));
  }
  const std::size_t header = 6 + 8 * rank;
  if (raw.size() < header) throw TruncatedError(name + ": header truncated");

  Tensor tensor;
  std::uint64_t count = 1;
  for (std::size_t d = 0; d < rank; ++d) {
    const auto dim = get_le<std::uint64_t>(bytes + 6 + 8 * d);
    if (dim != 0 && count > std::numeric_limits<std::uint64_t>::max() / 8 / dim) {
      throw DataError(name + ": declared shape is too large");
    }
    count *= dim;
    tensor.shape.push_back(dim);
  }
  const std::uint64_t payload = count * dtype_size(dtype);
  const std::uint64_t available = raw.size() - header;
  if (available < payload) {
    throw TruncatedError(name + ": payload has " +
                         std::to_string(available / dtype_size(dtype)) +
                         " values, header declares " + std::to_string(count));
  }
  if (available > payload) {
    throw DataError(name + ": " + std::to_string(available - payload) +
                    " trailing bytes after payload");
  }
  const unsigned char* p = bytes + header;
  const auto n = static_cast<std::size_t>(count);
  switch (dtype) {
    case Dtype::kF32: tensor.data = decode_payload<float>(p, n); break;
    case Dtype::kF64: tensor.data = decode_payload<double>(p, n); break;
    case Dtype::kU8: tensor.data = decode_payload<std::uint8_t>(p, n); break;
    case Dtype::kI64: tensor.data = decode_payload<std::int64_t>(p, n); break;
  }
  return tensor;
}

FeatureMatrix to_feature_matrix(const Tensor& tensor) {
  if (tensor.shape.size() != 2) {
    throw DataError("feature tensor must have rank 2, got rank " +
                    std::to_string(tensor.shape.size()));
  }
  RowMatrix values(static_cast<Index>(tensor.shape[0]),
                   static_cast<Index>(tensor.shape[1]));
  for (std::size_t i = 0; i < tensor.element_count(); ++i) {
    values.data()[i] = tensor.as_double(i);
  }
  return FeatureMatrix(std::move(values));
}

ImageLabelSet to_image_set(const Tensor& tensor) {
  const auto& s = tensor.shape;
  if (s.size() != 3 && s.size() != 4) {
    throw DataError("image tensor must have rank 3 or 4, got rank " +
                    std::to_string(s.size()));
  }
  std::vector<double> pixels(tensor.element_count());
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = tensor.as_double(i);
  return ImageLabelSet(s[0], s[1], s[2], s.size() == 4 ? s[3] : 1,
                       std::move(pixels));
}

TensorContent read_tensor_content(const std::filesystem::path& path) {
  const Tensor tensor = read_tensor_binary(path);
  if (tensor.shape.size() == 2) return to_feature_matrix(tensor);
  return to_image_set(tensor);
}

Tensor from_matrix(const Eigen::Ref<const RowMatrix>& values, Dtype dtype) {
  Tensor t;
  t.shape = {static_cast<std::uint64_t>(values.rows()),
             static_cast<std::uint64_t>(values.cols())};
  const std::size_t n = static_cast<std::size_t>(values.size());
  auto fill = [&](auto tag) {
    using T = decltype(tag);
    std::vector<T> v(n);
    for (Index r = 0; r < values.rows(); ++r) {
      for (Index c = 0; c < values.cols(); ++c) {
        v[static_cast<std::size_t>(r * values.cols() + c)] =
            static_cast<T>(values(r, c));
      }
    }
    t.data = std::move(v);
  };
  switch (dtype) {
    case Dtype::kF32: fill(float{}); break;
    case Dtype::kF64: fill(double{}); break;
    case Dtype::kU8: fill(std::uint8_t{}); break;
    case Dtype::kI64: fill(std::int64_t{}); break;
  }
  return t;
}

Tensor from_images(const ImageLabelSet& images, Dtype dtype) {
  Tensor t;
  t.shape = {images.count(), images.height(), images.width()};
  if (images.channels() != 1) t.shape.push_back(images.channels());
  const auto& px = images.pixels();
  auto fill = [&](auto tag) {
    using T = decltype(tag);
    t.data = std::vector<T>(px.begin(), px.end());
  };
  switch (dtype) {
    case Dtype::kF32: fill(float{}); break;
    case Dtype::kF64: fill(double{}); break;
    case Dtype::kU8: fill(std::uint8_t{}); break;
    case Dtype::kI64: fill(std::int64_t{}); break;
  }
  return t;
}

FeatureMatrix read_features_any(const std::filesystem::path& path,
                                bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0) {
    return to_feature_matrix(read_tensor_binary(path));
  }
  return read_feature_csv(path, has_header);
}

}  // namespace xfer
