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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>

#include "xfer/curriculum.hpp"
#include "xfer/data_io.hpp"
#include "xfer/error.hpp"
#include "xfer/exponent.hpp"
#include "xfer/parallel.hpp"
#include "xfer/pixelwise.hpp"
#include "xfer/transfer.hpp"

namespace xfer::cli {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Json optional_number(double value) {
  return std::isfinite(value) ? Json(value) : Json(nullptr);
}

Report start(const std::string& command, const CommonOptions& common) {
  set_thread_count(common.threads);
  Report report(command, XFER_VERSION);
  common.record(report.config());
  return report;
}

FeatureMatrix load_features(Report& report, const std::string& role,
                            const std::string& path, bool header) {
  report.add_input(role, path);
  return read_features_any(path, header);
}

LabelVector load_labels(Report& report, const std::string& role,
                        const std::string& path) {
  report.add_input(role, path);
  LabelVector labels = read_labels(path);
  if (labels.remapped()) {
    report.warn(path + ": labels remapped onto 0.." +
                std::to_string(labels.class_count() - 1));
  }
  return labels;
}

// "id=path" or a bare path, whose stem becomes the id.
std::pair<std::string, std::string> split_id(const std::string& entry) {
  const auto eq = entry.find('=');
  if (eq == std::string::npos) {
    return {std::filesystem::path(entry).stem().string(), entry};
  }
  return {entry.substr(0, eq), entry.substr(eq + 1)};
}

DenominatorParams load_params(Report& report, DenominatorMode mode,
                              const std::string& inputs,
                              const std::string& target_features,
                              bool header) {
  DenominatorParams params;
  if (mode == DenominatorMode::kExactDiscrete) {
    if (inputs.empty()) throw DataError("exact-discrete mode needs --inputs");
    report.add_input("inputs", inputs);
    params.input_symbols = read_integer_lines(inputs);
  } else if (mode == DenominatorMode::kProxySelf) {
    if (target_features.empty()) {
      throw DataError("proxy-self mode needs --target-features");
    }
    params.target_features =
        load_features(report, "target_features", target_features, header);
  }
  return params;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxx > 0 && syy > 0 ? sxy / std::sqrt(sxx * syy) : kNaN;
}

Vector json_vector(const Json& node, const char* key) {
  if (!node.contains(key) || !node[key].is_array()) {
    throw DataError(std::string("pair file lacks the array '") + key + "'");
  }
  const auto& array = node[key];
  Vector v(static_cast<Index>(array.size()));
  for (std::size_t i = 0; i < array.size(); ++i) {
    if (!array[i].is_number()) {
      throw DataError(std::string("'") + key + "' must hold numbers");
    }
    v(static_cast<Index>(i)) = array[i].get<double>();
  }
  return v;
}

LocalPair load_pair(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  Json node;
  try {
    node = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
  if (!node.contains("epsilon") || !node["epsilon"].is_number()) {
    throw DataError(path + ": 'epsilon' must be a number");
  }
  return LocalPair(json_vector(node, "p0"), json_vector(node, "p1"),
                   json_vector(node, "p2"), node["epsilon"].get<double>());
}

Json ranking_json(const SourceRanking& ranking) {
  Json entries = Json::array();
  for (const auto& e : ranking.entries) {
    entries.push_back({{"task_id", e.task_id},
                       {"hscore", e.hscore},
                       {"transferability", e.transferability
                                               ? Json(*e.transferability)
                                               : Json(nullptr)},
                       {"rank", e.rank}});
  }
  return entries;
}

}  // namespace

InverseMode CommonOptions::inverse_mode() const {
  if (ridge) return InverseMode::ridge(*ridge);
  return InverseMode::pseudo(pinv_tol.value_or(1e-10));
}

void CommonOptions::record(Json& config) const {
  config["threads"] = threads;
  config["inverse"] = inverse_mode().describe();
  config["seed"] = seed;
  config["header"] = header;
}

Report run_hscore(const HScoreOptions& options) {
  Report report = start("hscore", options.common);
  const FeatureMatrix features =
      load_features(report, "features", options.features, options.common.header);
  const LabelVector labels = load_labels(report, "labels", options.labels);
  const HScoreReport result =
      h_score(features, labels, options.common.inverse_mode());
  auto& body = report.body();
  body["hscore"] = result.value;
  body["samples"] = features.sample_count();
  body["feature_dim"] = features.dim();
  body["classes"] = labels.class_count();
  body["effective_rank"] = result.effective_rank;
  body["regularization"] = result.regularization;
  return report;
}

Report run_transfer(const TransferOptions& options) {
  Report report = start("transfer", options.common);
  const DenominatorMode mode = parse_denominator_mode(options.mode);
  report.config()["mode"] = to_string(mode);
  const TaskFeatureSet source{
      options.source_id,
      load_features(report, "features", options.features, options.common.header)};
  const LabelVector labels = load_labels(report, "labels", options.labels);
  const DenominatorParams params =
      load_params(report, mode, options.inputs, options.target_features,
                  options.common.header);
  const TransferabilityScore score = transferability(
      source, labels, mode, params, options.common.inverse_mode());
  if (score.exceeds_one) {
    report.warn("transferability exceeds 1; reported unclamped");
  }
  auto& body = report.body();
  body["source"] = source.task_id;
  body["mode"] = to_string(mode);
  body["numerator"] = score.numerator;
  body["denominator"] = score.denominator;
  body["denominator_dim"] = score.denominator_dim;
  body["transferability"] = score.value;
  body["exceeds_one"] = score.exceeds_one;
  body["caveat"] = kLinearHeadCaveat;
  return report;
}

Report run_rank(const RankOptions& options, bool pairs) {
  Report report = start(pairs ? "rank2" : "rank", options.common);
  std::vector<TaskFeatureSet> candidates;
  std::map<std::string, Index> dims;
  for (const auto& entry : options.candidates) {
    auto [id, path] = split_id(entry);
    candidates.push_back(
        {id, load_features(report, "candidate:" + id, path, options.common.header)});
    dims[id] = candidates.back().features.dim();
  }
  const LabelVector labels = load_labels(report, "labels", options.labels);
  const InverseMode inverse = options.common.inverse_mode();
  SourceRanking ranking = pairs ? rank_pairs(candidates, labels, inverse)
                                : select_source(candidates, labels, inverse);

  Json mode = nullptr;
  if (!options.mode.empty()) {
    const DenominatorMode parsed = parse_denominator_mode(options.mode);
    mode = to_string(parsed);
    const DenominatorParams params =
        load_params(report, parsed, options.inputs, options.target_features,
                    options.common.header);
    std::map<int, double> denominators;
    for (auto& entry : ranking.entries) {
      int dim = 0;
      if (pairs) {
        const auto plus = entry.task_id.find('+');
        dim = static_cast<int>(dims.at(entry.task_id.substr(0, plus)) +
                               dims.at(entry.task_id.substr(plus + 1)));
      } else {
        dim = static_cast<int>(dims.at(entry.task_id));
      }
      auto it = denominators.find(dim);
      if (it == denominators.end()) {
        it = denominators
                 .emplace(dim, transfer_denominator(labels, dim, parsed, params,
                                                    inverse))
                 .first;
      }
      entry.transferability = entry.hscore / it->second;
    }
  }
  report.config()["mode"] = mode;

  const std::string target =
      options.target_id.empty()
          ? std::filesystem::path(options.labels).stem().string()
          : options.target_id;
  auto& body = report.body();
  body["target"] = target;
  body["mode"] = mode;
  body["entries"] = ranking_json(ranking);
  body["caveat"] = kLinearHeadCaveat;
  return report;
}

Report run_pixelwise(const PixelwiseOptions& options) {
  Report report = start("pixelwise", options.common);
  std::string format = options.format;
  if (format.empty()) {
    format = std::filesystem::path(options.heatmap).extension() == ".svg" ? "svg"
                                                                          : "pgm";
  }
  report.config()["n_colors"] = options.n_colors;
  report.config()["max_iter"] = options.max_iter;
  report.config()["format"] = format;

  const FeatureMatrix features =
      load_features(report, "features", options.features, options.common.header);
  report.add_input("images", options.images);
  TensorContent content = read_tensor_content(options.images);
  if (!std::holds_alternative<ImageLabelSet>(content)) {
    throw DataError(options.images + ": expected an m x H x W [x C] tensor");
  }
  const ImageLabelSet& images = std::get<ImageLabelSet>(content);
  const auto& px = images.pixels();
  if (std::all_of(px.begin(), px.end(), [&](double v) { return v == px[0]; })) {
    throw DegenerateTaskError(
        "degenerate task: every ground-truth pixel has the same value; no pixel carries a label");
  }
  const std::size_t total = images.count() * images.height() * images.width();
  if (total > kMaxPaletteFitPixels) {
    report.warn("palette fit on a seeded subsample of " +
                std::to_string(kMaxPaletteFitPixels) + " of " +
                std::to_string(total) + " pixels");
  }

  PaletteOptions palette_options;
  palette_options.n_colors = options.n_colors;
  palette_options.max_iter = options.max_iter;
  palette_options.seed = options.common.seed;
  const Palette palette = fit_palette(images, palette_options);
  const LabelMaps maps = quantize(images, palette);
  PixelHScoreMap map =
      pixel_hscores(features, maps, options.common.inverse_mode());
  for (const auto& w : map.warnings) report.warn(w);
  const double mean = aggregate(map);

  // Column halves; the middle column of an odd width belongs to neither.
  const Index width = map.scores.cols();
  double sums[2] = {0, 0};
  std::size_t counts[2] = {0, 0};
  for (Index r = 0; r < map.scores.rows(); ++r) {
    for (Index c = 0; c < width; ++c) {
      if (map.is_skipped(r, c)) continue;
      if (2 * c + 1 < width) {
        sums[0] += map.scores(r, c);
        ++counts[0];
      } else if (2 * c + 1 > width) {
        sums[1] += map.scores(r, c);
        ++counts[1];
      }
    }
  }
  const double left = counts[0] ? sums[0] / static_cast<double>(counts[0]) : kNaN;
  const double right = counts[1] ? sums[1] / static_cast<double>(counts[1]) : kNaN;

  Json scores = Json::array();
  for (Index r = 0; r < map.scores.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < width; ++c) {
      row.push_back(map.is_skipped(r, c) ? Json(nullptr) : Json(map.scores(r, c)));
    }
    scores.push_back(row);
  }

  auto& body = report.body();
  body["aggregate"] = mean;
  body["height"] = map.scores.rows();
  body["width"] = width;
  body["skipped_count"] = map.skipped_count();
  body["region_means"] = {{"left", optional_number(left)},
                          {"right", optional_number(right)},
                          {"left_right_ratio", optional_number(left / right)}};
  body["palette"] = {{"n_colors", palette.n_colors},
                     {"centroids", matrix_json(palette.centroids)},
                     {"inertia", palette.inertia},
                     {"iterations", palette.iterations}};
  body["scores"] = scores;
  if (!options.heatmap.empty()) {
    const HeatmapInfo info = export_heatmap(
        map, options.heatmap,
        format == "svg" ? HeatmapFormat::kSvg : HeatmapFormat::kPgm,
        options.common.seed);
    body["heatmap"] = {{"path", options.heatmap},
                       {"format", format},
                       {"min", info.min},
                       {"max", info.max}};
  }
  return report;
}

Report run_curriculum(const CurriculumOptions& options) {
  Report report = start("curriculum", options.common);
  std::vector<CurriculumTask> tasks;
  for (const auto& entry : options.tasks) {
    const auto eq = entry.find('=');
    const auto comma = entry.rfind(',');
    if (eq == std::string::npos || comma == std::string::npos || comma < eq) {
      throw DataError("task '" + entry + "' is not of the form id=features,labels");
    }
    const std::string id = entry.substr(0, eq);
    tasks.push_back(
        {id,
         load_features(report, "features:" + id, entry.substr(eq + 1, comma - eq - 1),
                       options.common.header),
         load_labels(report, "labels:" + id, entry.substr(comma + 1))});
  }
  const TransferabilityMatrix tm =
      transferability_matrix(tasks, options.common.inverse_mode());
  const double alpha =
      options.alpha_percentile
          ? percentile_threshold(tm.m, *options.alpha_percentile)
          : options.alpha.value_or(0.0);
  report.config()["alpha"] = options.alpha ? Json(*options.alpha) : Json(nullptr);
  report.config()["alpha_percentile"] = options.alpha_percentile
                                            ? Json(*options.alpha_percentile)
                                            : Json(nullptr);

  const TaskGraph graph = build_graph(tm.m, alpha);
  const CurriculumForest forest = orient_edges(spanning_forest(graph), tm.m);
  const Dendrogram dendrogram = cluster_tasks(tm.raw.transpose());

  auto& body = report.body();
  body["task_ids"] = tm.task_ids;
  body["raw_hscores"] = matrix_json(tm.raw);
  body["transferability"] = matrix_json(tm.m);
  body["graph_edges"] = graph.edge_count();
  const Json planned = curriculum_json(forest, alpha, tm.task_ids);
  for (auto it = planned.begin(); it != planned.end(); ++it) {
    body[it.key()] = it.value();
  }
  body["dendrogram"] = dendrogram_json(dendrogram, tm.task_ids);
  if (!options.dot.empty()) {
    std::ofstream out(options.dot);
    if (!out) throw DataError("cannot write " + options.dot);
    out << forest_dot(forest, tm.task_ids);
  }
  return report;
}

Report run_validate_exponent(const ExponentOptions& options) {
  Report report = start("validate-exponent", options.common);
  report.add_input("pair", options.pair);
  const LocalPair pair = load_pair(options.pair);
  for (const auto& w : pair.warnings()) report.warn(w);

  Matrix table;
  if (!options.features.empty()) {
    report.add_input("features", options.features);
    table = read_csv_matrix(options.features, options.common.header);
    if (table.rows() != pair.p0.size()) {
      throw DataError(options.features + " has " + std::to_string(table.rows()) +
                      " rows for an alphabet of " + std::to_string(pair.p0.size()));
    }
  } else {
    std::mt19937_64 rng(options.common.seed);
    std::normal_distribution<double> normal;
    table.resize(pair.p0.size(), options.random_features);
    for (Index c = 0; c < table.cols(); ++c) {
      for (Index r = 0; r < table.rows(); ++r) table(r, c) = normal(rng);
    }
  }
  report.config()["features"] =
      options.features.empty() ? Json("random") : Json(options.features);
  report.config()["random_features"] = options.random_features;
  report.config()["trials"] = options.trials;
  report.config()["sizes"] = options.sizes;
  report.config()["simulate"] = options.simulate;

  SimulationOptions sim;
  sim.sample_sizes = options.sizes;
  sim.trials = options.trials;
  sim.seed = options.common.seed;

  Json rows = Json::array();
  std::vector<double> ratios, hscores, slopes;
  double optimal = 0.0;
  for (Index c = 0; c < table.cols(); ++c) {
    const Matrix column = table.col(c);
    const ExponentReport exponent = mismatched_exponent(column, pair);
    const double h = pair_h_score(column, pair);
    optimal = exponent.optimal;
    const double ratio = h > 0.0 ? exponent.predicted / h : kNaN;
    if (std::isfinite(ratio)) ratios.push_back(ratio);
    hscores.push_back(h);
    Json row = {{"feature", c},
                {"predicted_exponent", exponent.predicted},
                {"hscore", h},
                {"ratio", optional_number(ratio)}};
    if (options.simulate) {
      const SimulationResult result = simulate_error_rate(column, pair.p1, pair.p2, sim);
      slopes.push_back(result.slope);
      row["simulated_slope"] = result.slope;
      Json sizes = Json::array();
      for (const auto& s : result.sizes) {
        sizes.push_back({{"m", s.sample_size},
                         {"error_rate", s.error_rate},
                         {"used_in_fit", s.used_in_fit}});
      }
      row["error_rates"] = sizes;
    }
    rows.push_back(row);
  }

  double spread = kNaN;
  if (!ratios.empty()) {
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    double mean = 0.0;
    for (double r : ratios) mean += r / static_cast<double>(ratios.size());
    spread = mean != 0.0 ? (*hi - *lo) / std::abs(mean) : kNaN;
  }

  auto& body = report.body();
  body["epsilon"] = pair.epsilon;
  body["optimal_exponent"] = optimal;
  body["features"] = rows;
  body["ratio_spread"] = optional_number(spread);
  body["proportional"] = std::isfinite(spread) && spread <= 1e-6;
  if (options.simulate) {
    body["slope_hscore_pearson"] = optional_number(pearson(slopes, hscores));
  }
  return report;
}

}  // namespace xfer::cli
