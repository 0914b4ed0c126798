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

#ifndef XFER_TRANSFER_HPP_
#define XFER_TRANSFER_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xfer/stats.hpp"
#include "xfer/types.hpp"

namespace xfer {

// Source-encoder features evaluated on the target task's inputs. All sets
// compared against one target share rows.
struct TaskFeatureSet {
  std::string task_id;
  FeatureMatrix features;
};

enum class DenominatorMode { kExactDiscrete, kProxySelf, kBoundK };

const char* to_string(DenominatorMode mode);
DenominatorMode parse_denominator_mode(const std::string& text);

// Mode-specific inputs for the denominator.
struct DenominatorParams {
  // exact_discrete: discrete input symbol of every sample.
  std::vector<std::int64_t> input_symbols;
  // proxy_self: the target task's own trained features.
  std::optional<FeatureMatrix> target_features;
};

struct TransferabilityScore {
  double numerator = 0.0;    // H_T(f_S)
  double denominator = 0.0;  // H_T(f_opt) or its stand-in
  double value = 0.0;
  DenominatorMode mode = DenominatorMode::kProxySelf;
  int denominator_dim = 0;   // feature budget used for the denominator
  bool exceeds_one = false;  // reported unclamped
};

// Scores are exact only when the transfer head is a linear layer.
inline constexpr const char* kLinearHeadCaveat =
    "transferability is exact for linear transfer heads only; with nonlinear "
    "fine-tuning compare scores relatively";

TransferabilityScore transferability(const TaskFeatureSet& source,
                                     const LabelVector& target_labels,
                                     DenominatorMode mode,
                                     const DenominatorParams& params,
                                     InverseMode inverse = InverseMode::pseudo());

struct RankingEntry {
  std::string task_id;
  double hscore = 0.0;
  std::optional<double> transferability;
  int rank = 0;  // 1-based
};

// Descending by H-score, ties by task_id.
struct SourceRanking {
  std::vector<RankingEntry> entries;
};

// Ranks by the raw H-score on the target; the shared denominator is not
// needed for the argmax.
SourceRanking select_source(const std::vector<TaskFeatureSet>& candidates,
                            const LabelVector& target_labels,
                            InverseMode inverse = InverseMode::pseudo());

// Columns of a followed by columns of b; task_id "a+b".
TaskFeatureSet concat_features(const TaskFeatureSet& a, const TaskFeatureSet& b);

// Every unordered pair scored by the H-score of its concatenation.
SourceRanking rank_pairs(const std::vector<TaskFeatureSet>& candidates,
                         const LabelVector& target_labels,
                         InverseMode inverse = InverseMode::pseudo());

// Fills `transferability` on every entry by dividing by `denominator`.
void attach_transferability(SourceRanking& ranking, double denominator);

// Denominator alone, for attaching to rankings.
double transfer_denominator(const LabelVector& target_labels, int source_dim,
                            DenominatorMode mode,
                            const DenominatorParams& params,
                            InverseMode inverse, int* used_dim = nullptr);

}  // namespace xfer

#endif  // XFER_TRANSFER_HPP_
