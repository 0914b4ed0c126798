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

#ifndef XFER_PIXELWISE_HPP_
#define XFER_PIXELWISE_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xfer/stats.hpp"
#include "xfer/types.hpp"

namespace xfer {

inline constexpr int kDefaultPaletteColors = 16;
inline constexpr std::size_t kMaxPaletteFitPixels = 1'000'000;

struct PaletteOptions {
  int n_colors = kDefaultPaletteColors;
  int max_iter = 300;
  double tol = 1e-10;  // stop once no centroid moves further than this
  std::uint64_t seed = 0;
};

struct Palette {
  Matrix centroids;  // n_colors x channels, sorted lexicographically
  int n_colors = 0;
  double inertia = 0.0;  // final within-cluster sum of squares
  std::uint64_t seed = 0;
  std::vector<double> inertia_history;  // one entry per assignment sweep
  int iterations = 0;
};

// k-means with k-means++ seeding and Lloyd iterations on an N x channels
// matrix of pixel values. Throws DataError when there are fewer distinct
// values than colours.
Palette fit_palette(const RowMatrix& pixels, const PaletteOptions& options = {});

// Fits on every pixel of every image, or on a seeded uniform subsample of
// kMaxPaletteFitPixels pixels when there are more.
Palette fit_palette(const ImageLabelSet& images,
                    const PaletteOptions& options = {});

// Per-sample label maps, sample-major then row-major.
struct LabelMaps {
  std::size_t count = 0, height = 0, width = 0;
  std::vector<int> labels;

  int at(std::size_t sample, std::size_t row, std::size_t col) const {
    return labels[(sample * height + row) * width + col];
  }
};

// Nearest centroid in Euclidean distance; ties go to the lowest index.
LabelMaps quantize(const ImageLabelSet& images, const Palette& palette);
int nearest_centroid(const Matrix& centroids, std::span<const double> pixel);

struct PixelHScoreMap {
  Matrix scores;                   // H x W, zero where skipped
  std::vector<std::uint8_t> skipped;  // H x W row-major mask
  std::vector<std::string> warnings;

  bool is_skipped(Index row, Index col) const {
    return skipped[static_cast<std::size_t>(row * scores.cols() + col)] != 0;
  }
  std::size_t skipped_count() const;
};

// H-score of the features against the label at every pixel. The feature
// covariance and its inverse are shared across pixels. Pixels whose label is
// constant over the samples are skipped, as are pixels whose score fails (with
// a warning).
PixelHScoreMap pixel_hscores(const FeatureMatrix& features, const LabelMaps& maps,
                             InverseMode mode = InverseMode::pseudo());

// Mean over non-skipped pixels.
double aggregate(const PixelHScoreMap& map);

enum class HeatmapFormat { kPgm, kSvg };

struct HeatmapInfo {
  double min = 0.0;
  double max = 0.0;
  std::size_t skipped_count = 0;
  std::uint64_t seed = 0;
};

// Min-max normalized grey levels, lighter = higher. Skipped pixels are 0; a
// constant map renders every scored pixel at 128.
std::vector<std::uint8_t> heatmap_levels(const PixelHScoreMap& map,
                                         HeatmapInfo* info = nullptr);

// Writes the image (binary P5 PGM or one SVG rect per pixel) plus a JSON
// sidecar at `path` + ".json" holding {min, max, skipped_count, seed}.
HeatmapInfo export_heatmap(const PixelHScoreMap& map,
                           const std::filesystem::path& path,
                           HeatmapFormat format, std::uint64_t seed = 0);

struct GrayImage {
  std::size_t width = 0, height = 0;
  std::vector<std::uint8_t> levels;
};
GrayImage read_pgm(const std::filesystem::path& path);

}  // namespace xfer

#endif  // XFER_PIXELWISE_HPP_
