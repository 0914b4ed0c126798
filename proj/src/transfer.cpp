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

#include "xfer/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "xfer/dtm.hpp"
#include "xfer/error.hpp"
#include "xfer/parallel.hpp"

namespace xfer {
namespace {

void check_rows(const std::vector<TaskFeatureSet>& candidates, std::size_t m) {
  std::string offenders;
  for (const auto& c : candidates) {
    if (static_cast<std::size_t>(c.features.sample_count()) != m) {
      if (!offenders.empty()) offenders += ", ";
      offenders += c.task_id + " (" + std::to_string(c.features.sample_count()) + ")";
    }
  }
  if (!offenders.empty()) {
    throw DataError("candidates disagree with the target's " + std::to_string(m) +
                    " samples: " + offenders);
  }
}

void sort_and_rank(std::vector<RankingEntry>& entries) {
  std::sort(entries.begin(), entries.end(),
            [](const RankingEntry& a, const RankingEntry& b) {
              if (a.hscore != b.hscore) return a.hscore > b.hscore;
              return a.task_id < b.task_id;
            });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].rank = static_cast<int>(i) + 1;
  }
}

// Features must be functions of the input; with a discrete input this
// means rows sharing a symbol must coincide.
void check_function_of_symbols(const FeatureMatrix& features,
                               const std::vector<std::int64_t>& symbols) {
  std::map<std::int64_t, Index> first;
  const RowMatrix& v = features.values();
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const auto [it, inserted] = first.emplace(symbols[i], static_cast<Index>(i));
    if (inserted) continue;
    const auto a = v.row(it->second);
    const auto b = v.row(static_cast<Index>(i));
    const double tol = 1e-9 * (1.0 + a.cwiseAbs().maxCoeff());
    if ((a - b).cwiseAbs().maxCoeff() > tol) {
      throw DataError("exact-discrete mode needs features that are a function of "
                      "the input symbol; samples " + std::to_string(it->second) +
                      " and " + std::to_string(i) + " share symbol " +
                      std::to_string(symbols[i]) + " but differ");
    }
  }
}

}  // namespace

const char* to_string(DenominatorMode mode) {
  switch (mode) {
    case DenominatorMode::kExactDiscrete: return "exact-discrete";
    case DenominatorMode::kProxySelf: return "proxy-self";
    case DenominatorMode::kBoundK: return "bound-k";
  }
  return "?";
}

DenominatorMode parse_denominator_mode(const std::string& text) {
  if (text == "exact-discrete" || text == "exact_discrete") {
    return DenominatorMode::kExactDiscrete;
  }
  if (text == "proxy-self" || text == "proxy_self") return DenominatorMode::kProxySelf;
  if (text == "bound-k" || text == "bound_k") return DenominatorMode::kBoundK;
  throw DataError("unknown denominator mode '" + text + "'");
}

double transfer_denominator(const LabelVector& target_labels, int source_dim,
                            DenominatorMode mode,
                            const DenominatorParams& params,
                            InverseMode inverse, int* used_dim) {
  double denominator = 0.0;
  int dim = 0;
  switch (mode) {
    case DenominatorMode::kExactDiscrete: {
      const auto& symbols = params.input_symbols;
      if (symbols.size() != target_labels.size()) {
        throw DataError("exact-discrete mode needs one input symbol per sample (" +
                        std::to_string(symbols.size()) + " given, " +
                        std::to_string(target_labels.size()) + " samples)");
      }
      std::vector<std::int64_t> y(target_labels.labels().begin(),
                                  target_labels.labels().end());
      const SpectralDecomposition sd = spectral(dtm(empirical_joint(symbols, y)));
      dim = static_cast<int>(std::min<Index>(source_dim, sd.rank()));
      denominator = sd.singular_values.head(dim).squaredNorm();
      break;
    }
    case DenominatorMode::kProxySelf: {
      if (!params.target_features) {
        throw DataError("proxy-self mode needs the target task's own features");
      }
      dim = static_cast<int>(params.target_features->dim());
      denominator = h_score(*params.target_features, target_labels, inverse).value;
      break;
    }
    case DenominatorMode::kBoundK:
      dim = std::min(source_dim, target_labels.class_count() - 1);
      denominator = dim;
      break;
  }
  if (!(denominator > 0.0)) {
    throw DegenerateTaskError(std::string("target task is degenerate: ") +
                              to_string(mode) + " denominator is zero");
  }
  if (used_dim) *used_dim = dim;
  return denominator;
}

TransferabilityScore transferability(const TaskFeatureSet& source,
                                     const LabelVector& target_labels,
                                     DenominatorMode mode,
                                     const DenominatorParams& params,
                                     InverseMode inverse) {
  if (static_cast<std::size_t>(source.features.sample_count()) !=
      target_labels.size()) {
    throw DataError(source.task_id + " has " +
                    std::to_string(source.features.sample_count()) +
                    " samples, the target has " +
                    std::to_string(target_labels.size()));
  }
  if (mode == DenominatorMode::kExactDiscrete &&
      params.input_symbols.size() == target_labels.size()) {
    check_function_of_symbols(source.features, params.input_symbols);
  }
  TransferabilityScore score;
  score.mode = mode;
  score.denominator =
      transfer_denominator(target_labels, static_cast<int>(source.features.dim()),
                           mode, params, inverse, &score.denominator_dim);
  score.numerator = h_score(source.features, target_labels, inverse).value;
  score.value = score.numerator / score.denominator;
  score.exceeds_one = score.value > 1.0 + 1e-6;
  return score;
}

SourceRanking select_source(const std::vector<TaskFeatureSet>& candidates,
                            const LabelVector& target_labels,
                            InverseMode inverse) {
  if (candidates.empty()) throw DataError("no candidate source tasks");
  check_rows(candidates, target_labels.size());
  SourceRanking ranking;
  ranking.entries.resize(candidates.size());
  parallel_for(0, candidates.size(), [&](std::size_t i) {
    ranking.entries[i].task_id = candidates[i].task_id;
    ranking.entries[i].hscore =
        h_score(candidates[i].features, target_labels, inverse).value;
  });
  sort_and_rank(ranking.entries);
  return ranking;
}

TaskFeatureSet concat_features(const TaskFeatureSet& a, const TaskFeatureSet& b) {
  if (a.features.sample_count() != b.features.sample_count()) {
    throw DataError("cannot concatenate " + a.task_id + " (" +
                    std::to_string(a.features.sample_count()) + " samples) with " +
                    b.task_id + " (" + std::to_string(b.features.sample_count()) +
                    " samples)");
  }
  RowMatrix joined(a.features.sample_count(), a.features.dim() + b.features.dim());
  joined << a.features.values(), b.features.values();
  return {a.task_id + "+" + b.task_id, FeatureMatrix(std::move(joined))};
}

SourceRanking rank_pairs(const std::vector<TaskFeatureSet>& candidates,
                         const LabelVector& target_labels, InverseMode inverse) {
  if (candidates.size() < 2) throw DataError("pair ranking needs >= 2 candidates");
  check_rows(candidates, target_labels.size());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::size_t j = i + 1; j < candidates.size(); ++j) pairs.emplace_back(i, j);
  }
  SourceRanking ranking;
  ranking.entries.resize(pairs.size());
  parallel_for(0, pairs.size(), [&](std::size_t p) {
    const TaskFeatureSet joined =
        concat_features(candidates[pairs[p].first], candidates[pairs[p].second]);
    ranking.entries[p].task_id = joined.task_id;
    ranking.entries[p].hscore = h_score(joined.features, target_labels, inverse).value;
  });
  sort_and_rank(ranking.entries);
  return ranking;
}

void attach_transferability(SourceRanking& ranking, double denominator) {
  for (auto& e : ranking.entries) e.transferability = e.hscore / denominator;
}

}  // namespace xfer
