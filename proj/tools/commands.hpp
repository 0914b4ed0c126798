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

#ifndef XFER_TOOLS_COMMANDS_HPP_
#define XFER_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "report.hpp"
#include "xfer/stats.hpp"

namespace xfer::cli {

struct CommonOptions {
  std::size_t threads = 0;  // 0 = XFER_THREADS or hardware concurrency
  std::optional<double> pinv_tol;
  std::optional<double> ridge;
  std::uint64_t seed = 0;
  bool header = false;  // CSV inputs carry a header row
  std::string output;   // stdout when empty

  InverseMode inverse_mode() const;
  void record(Json& config) const;
};

struct HScoreOptions {
  CommonOptions common;
  std::string features;
  std::string labels;
};

struct TransferOptions {
  CommonOptions common;
  std::string features;
  std::string labels;
  std::string source_id = "source";
  std::string mode = "proxy-self";
  std::string inputs;           // exact-discrete
  std::string target_features;  // proxy-self
};

struct RankOptions {
  CommonOptions common;
  std::vector<std::string> candidates;  // "id=path" or "path"
  std::string labels;
  std::string target_id;
  std::string mode;  // empty: ranking only
  std::string inputs;
  std::string target_features;
};

struct PixelwiseOptions {
  CommonOptions common;
  std::string features;
  std::string images;
  int n_colors = 16;
  int max_iter = 300;
  std::string heatmap;
  std::string format;  // pgm or svg; inferred from the heatmap extension
};

struct CurriculumOptions {
  CommonOptions common;
  std::vector<std::string> tasks;  // "id=features,labels"
  std::optional<double> alpha;
  std::optional<double> alpha_percentile;
  std::string dot;
};

struct ExponentOptions {
  CommonOptions common;
  std::string pair;
  std::string features;  // |X| x n table, one 1-d feature per column
  int random_features = 20;
  std::int64_t trials = 100000;
  std::vector<int> sizes{1000, 1250, 1500, 1750, 2000};
  bool simulate = true;
};

Report run_hscore(const HScoreOptions& options);
Report run_transfer(const TransferOptions& options);
Report run_rank(const RankOptions& options, bool pairs);
Report run_pixelwise(const PixelwiseOptions& options);
Report run_curriculum(const CurriculumOptions& options);
Report run_validate_exponent(const ExponentOptions& options);

}  // namespace xfer::cli

#endif  // XFER_TOOLS_COMMANDS_HPP_
