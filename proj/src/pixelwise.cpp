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

#include "xfer/pixelwise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "xfer/error.hpp"
#include "xfer/parallel.hpp"

namespace xfer {
namespace {

double squared_distance(const Matrix& centroids, Index c,
                        const double* pixel) {
  double d = 0.0;
  for (Index j = 0; j < centroids.cols(); ++j) {
    const double diff = centroids(c, j) - pixel[j];
    d += diff * diff;
  }
  return d;
}

int nearest(const Matrix& centroids, const double* pixel, double* distance) {
  int best = 0;
  double best_d = squared_distance(centroids, 0, pixel);
  for (Index c = 1; c < centroids.rows(); ++c) {
    const double d = squared_distance(centroids, c, pixel);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (distance != nullptr) *distance = best_d;
  return best;
}

Index distinct_rows(const RowMatrix& pixels, Index limit) {
  std::vector<Index> order = canonical_row_order(pixels);
  Index distinct = order.empty() ? 0 : 1;
  for (std::size_t i = 1; i < order.size() && distinct < limit; ++i) {
    if (pixels.row(order[i]) != pixels.row(order[i - 1])) ++distinct;
  }
  return distinct;
}

Matrix plus_plus_seeds(const RowMatrix& pixels, int n, std::mt19937_64& rng) {
  const Index count = pixels.rows();
  Matrix centroids(n, pixels.cols());
  std::uniform_int_distribution<Index> first(0, count - 1);
  centroids.row(0) = pixels.row(first(rng));
  std::vector<double> d2(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    d2[static_cast<std::size_t>(i)] =
        squared_distance(centroids, 0, pixels.row(i).data());
  }
  for (int c = 1; c < n; ++c) {
    std::discrete_distribution<Index> pick(d2.begin(), d2.end());
    const Index chosen = pick(rng);
    centroids.row(c) = pixels.row(chosen);
    for (Index i = 0; i < count; ++i) {
      auto& d = d2[static_cast<std::size_t>(i)];
      d = std::min(d, squared_distance(centroids, c, pixels.row(i).data()));
    }
  }
  return centroids;
}

double assign(const RowMatrix& pixels, const Matrix& centroids,
              std::vector<int>& labels, std::vector<double>& distances) {
  double inertia = 0.0;
  for (Index i = 0; i < pixels.rows(); ++i) {
    const auto s = static_cast<std::size_t>(i);
    labels[s] = nearest(centroids, pixels.row(i).data(), &distances[s]);
    inertia += distances[s];
  }
  return inertia;
}

}  // namespace

Palette fit_palette(const RowMatrix& pixels, const PaletteOptions& options) {
  const int n = options.n_colors;
  if (n < 2) throw DataError("n_colors must be at least 2");
  if (pixels.rows() == 0 || pixels.cols() == 0) {
    throw DataError("no pixels to fit a palette on");
  }
  if (!pixels.allFinite()) throw DataError("pixel values must be finite");
  const Index distinct = distinct_rows(pixels, n);
  if (distinct < n) {
    throw DataError("only " + std::to_string(distinct) +
                    " distinct pixel values for " + std::to_string(n) +
                    " colours; lower n_colors");
  }

  std::mt19937_64 rng(options.seed);
  Matrix centroids = plus_plus_seeds(pixels, n, rng);
  const auto count = static_cast<std::size_t>(pixels.rows());
  std::vector<int> labels(count);
  std::vector<double> distances(count);

  Palette palette;
  palette.n_colors = n;
  palette.seed = options.seed;
  // Recomputed means carry rounding error of order eps * |pixel|, so the
  // monotonicity check allows that much absolute slack per pixel.
  const double scale = std::max(1.0, pixels.cwiseAbs().maxCoeff());
  const double floor = static_cast<double>(pixels.rows()) * (1e-10 * scale) * (1e-10 * scale);
  auto record = [&palette, floor](double inertia) {
    if (!palette.inertia_history.empty()) {
      const double last = palette.inertia_history.back();
      if (inertia > last * (1.0 + 1e-12) + floor) {
        throw NumericalError("k-means inertia increased");
      }
    }
    palette.inertia_history.push_back(inertia);
  };

  for (int iter = 0; iter < options.max_iter; ++iter) {
    record(assign(pixels, centroids, labels, distances));
    palette.iterations = iter + 1;

    Matrix sums = Matrix::Zero(n, pixels.cols());
    std::vector<Index> members(static_cast<std::size_t>(n), 0);
    for (std::size_t i = 0; i < count; ++i) {
      sums.row(labels[i]) += pixels.row(static_cast<Index>(i));
      ++members[static_cast<std::size_t>(labels[i])];
    }
    Matrix updated = centroids;
    for (int c = 0; c < n; ++c) {
      const Index size = members[static_cast<std::size_t>(c)];
      if (size > 0) {
        updated.row(c) = sums.row(c) / static_cast<double>(size);
        continue;
      }
      // An empty cluster takes the pixel furthest from its centroid.
      const auto far = static_cast<std::size_t>(
          std::max_element(distances.begin(), distances.end()) -
          distances.begin());
      updated.row(c) = pixels.row(static_cast<Index>(far));
      distances[far] = 0.0;
    }
    const double shift = (updated - centroids).rowwise().norm().maxCoeff();
    centroids = std::move(updated);
    if (shift <= options.tol) break;
  }
  record(assign(pixels, centroids, labels, distances));

  std::vector<Index> order = canonical_row_order(centroids);
  palette.centroids.resize(n, pixels.cols());
  for (int c = 0; c < n; ++c) {
    palette.centroids.row(c) = centroids.row(order[static_cast<std::size_t>(c)]);
  }
  for (int a = 1; a < n; ++a) {
    if ((palette.centroids.row(a) - palette.centroids.row(a - 1)).norm() <=
        1e-12) {
      throw NumericalError("k-means produced coincident centroids");
    }
  }
  palette.inertia = palette.inertia_history.back();
  return palette;
}

Palette fit_palette(const ImageLabelSet& images, const PaletteOptions& options) {
  const std::size_t channels = images.channels();
  const std::size_t total = images.count() * images.height() * images.width();
  const double* data = images.pixels().data();
  std::vector<std::size_t> chosen;
  if (total > kMaxPaletteFitPixels) {
    std::vector<std::size_t> all(total);
    std::iota(all.begin(), all.end(), std::size_t{0});
    chosen.reserve(kMaxPaletteFitPixels);
    std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
    std::sample(all.begin(), all.end(), std::back_inserter(chosen),
                kMaxPaletteFitPixels, rng);
  } else {
    chosen.resize(total);
    std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  }
  RowMatrix pixels(static_cast<Index>(chosen.size()),
                   static_cast<Index>(channels));
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    for (std::size_t ch = 0; ch < channels; ++ch) {
      pixels(static_cast<Index>(i), static_cast<Index>(ch)) =
          data[chosen[i] * channels + ch];
    }
  }
  return fit_palette(pixels, options);
}

int nearest_centroid(const Matrix& centroids, std::span<const double> pixel) {
  if (static_cast<Index>(pixel.size()) != centroids.cols()) {
    throw DataError("pixel has " + std::to_string(pixel.size()) +
                    " channels, the palette has " +
                    std::to_string(centroids.cols()));
  }
  return nearest(centroids, pixel.data(), nullptr);
}

LabelMaps quantize(const ImageLabelSet& images, const Palette& palette) {
  if (static_cast<Index>(images.channels()) != palette.centroids.cols()) {
    throw DataError("image channels do not match the palette");
  }
  LabelMaps maps;
  maps.count = images.count();
  maps.height = images.height();
  maps.width = images.width();
  const std::size_t total = maps.count * maps.height * maps.width;
  maps.labels.resize(total);
  const double* data = images.pixels().data();
  for (std::size_t i = 0; i < total; ++i) {
    maps.labels[i] =
        nearest(palette.centroids, data + i * images.channels(), nullptr);
  }
  return maps;
}

std::size_t PixelHScoreMap::skipped_count() const {
  return static_cast<std::size_t>(
      std::count(skipped.begin(), skipped.end(), std::uint8_t{1}));
}

PixelHScoreMap pixel_hscores(const FeatureMatrix& features,
                             const LabelMaps& maps, InverseMode mode) {
  if (static_cast<std::size_t>(features.sample_count()) != maps.count) {
    throw DataError("features have " +
                    std::to_string(features.sample_count()) +
                    " samples, the label maps have " +
                    std::to_string(maps.count));
  }
  const HScorer scorer(features, mode);
  const std::size_t pixels = maps.height * maps.width;
  PixelHScoreMap out;
  out.scores = Matrix::Zero(static_cast<Index>(maps.height),
                            static_cast<Index>(maps.width));
  out.skipped.assign(pixels, 0);
  std::vector<std::optional<std::string>> notes(pixels);

  parallel_for(0, pixels, [&](std::size_t p) {
    const std::size_t row = p / maps.width;
    const std::size_t col = p % maps.width;
    std::vector<int> raw(maps.count);
    for (std::size_t s = 0; s < maps.count; ++s) raw[s] = maps.at(s, row, col);
    const LabelVector labels = LabelVector::from_raw(std::span<const int>(raw));
    if (labels.class_count() < 2) {
      out.skipped[p] = 1;
      return;
    }
    try {
      out.scores(static_cast<Index>(row), static_cast<Index>(col)) =
          scorer.value(labels);
    } catch (const Error& e) {
      out.skipped[p] = 1;
      notes[p] = "pixel (" + std::to_string(row) + ", " + std::to_string(col) +
                 ") skipped: " + e.what();
    }
  });

  for (auto& note : notes) {
    if (note) out.warnings.push_back(std::move(*note));
  }
  return out;
}

double aggregate(const PixelHScoreMap& map) {
  double sum = 0.0;
  std::size_t used = 0;
  for (Index r = 0; r < map.scores.rows(); ++r) {
    for (Index c = 0; c < map.scores.cols(); ++c) {
      if (map.is_skipped(r, c)) continue;
      sum += map.scores(r, c);
      ++used;
    }
  }
  if (used == 0) throw DegenerateTaskError("every pixel was skipped");
  return sum / static_cast<double>(used);
}

std::vector<std::uint8_t> heatmap_levels(const PixelHScoreMap& map,
                                         HeatmapInfo* info) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Index r = 0; r < map.scores.rows(); ++r) {
    for (Index c = 0; c < map.scores.cols(); ++c) {
      if (map.is_skipped(r, c)) continue;
      lo = std::min(lo, map.scores(r, c));
      hi = std::max(hi, map.scores(r, c));
    }
  }
  if (lo > hi) lo = hi = 0.0;

  std::vector<std::uint8_t> levels(map.skipped.size(), 0);
  for (Index r = 0; r < map.scores.rows(); ++r) {
    for (Index c = 0; c < map.scores.cols(); ++c) {
      if (map.is_skipped(r, c)) continue;
      const auto p = static_cast<std::size_t>(r * map.scores.cols() + c);
      if (hi > lo) {
        const double t = (map.scores(r, c) - lo) / (hi - lo);
        levels[p] = static_cast<std::uint8_t>(std::lround(255.0 * t));
      } else {
        levels[p] = 128;
      }
    }
  }
  if (info != nullptr) {
    info->min = lo;
    info->max = hi;
    info->skipped_count = map.skipped_count();
  }
  return levels;
}

HeatmapInfo export_heatmap(const PixelHScoreMap& map,
                           const std::filesystem::path& path,
                           HeatmapFormat format, std::uint64_t seed) {
  HeatmapInfo info;
  const std::vector<std::uint8_t> levels = heatmap_levels(map, &info);
  info.seed = seed;
  const auto height = static_cast<std::size_t>(map.scores.rows());
  const auto width = static_cast<std::size_t>(map.scores.cols());

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  if (format == HeatmapFormat::kPgm) {
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(levels.data()),
              static_cast<std::streamsize>(levels.size()));
  } else {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
        << height << "\" shape-rendering=\"crispEdges\">\n";
    for (std::size_t r = 0; r < height; ++r) {
      for (std::size_t c = 0; c < width; ++c) {
        const int g = levels[r * width + c];
        out << "<rect x=\"" << c << "\" y=\"" << r
            << "\" width=\"1\" height=\"1\" fill=\"rgb(" << g << ',' << g
            << ',' << g << ")\"/>\n";
      }
    }
    out << "</svg>\n";
  }
  if (!out) throw DataError("failed writing " + path.string());

  nlohmann::ordered_json sidecar;
  sidecar["min"] = info.min;
  sidecar["max"] = info.max;
  sidecar["skipped_count"] = info.skipped_count;
  sidecar["seed"] = info.seed;
  std::ofstream side(path.string() + ".json");
  if (!side) throw DataError("cannot write " + path.string() + ".json");
  side << sidecar.dump(2) << '\n';
  return info;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string magic;
  int maxval = 0;
  GrayImage image;
  in >> magic >> image.width >> image.height >> maxval;
  if (magic != "P5" || maxval != 255 || !in) {
    throw FormatError("not an 8-bit binary PGM: " + path.string(), 1);
  }
  in.get();
  image.levels.resize(image.width * image.height);
  in.read(reinterpret_cast<char*>(image.levels.data()),
          static_cast<std::streamsize>(image.levels.size()));
  if (in.gcount() != static_cast<std::streamsize>(image.levels.size())) {
    throw TruncatedError("PGM payload is short: " + path.string());
  }
  return image;
}

}  // namespace xfer
