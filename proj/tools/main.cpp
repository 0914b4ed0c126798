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

// Command-line front end. Exit codes: 0 success, 1 usage, 2 data error,
// 3 numerical error. Stdout carries only the JSON document.

#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "commands.hpp"
#include "report.hpp"
#include "xfer/error.hpp"

namespace {

using namespace xfer::cli;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

void add_common(CLI::App* sub, CommonOptions& common) {
  sub->add_option("--threads", common.threads,
                  "Worker threads, 0 = XFER_THREADS or all cores");
  auto* tol = sub->add_option("--pinv-tol", common.pinv_tol,
                              "Pseudo-inverse cutoff relative to the largest "
                              "covariance eigenvalue (default 1e-10)")
                  ->check(CLI::PositiveNumber);
  auto* ridge = sub->add_option("--ridge", common.ridge,
                                "Invert cov(f) + lambda I instead")
                    ->check(CLI::PositiveNumber);
  tol->excludes(ridge);
  sub->add_option("--seed", common.seed, "Random seed");
  sub->add_flag("--header", common.header, "CSV inputs start with a header row");
  sub->add_option("-o,--output", common.output, "Write the JSON here, not stdout");
}

void add_mode_inputs(CLI::App* sub, std::string& inputs,
                     std::string& target_features) {
  sub->add_option("--inputs", inputs,
                  "Discrete input symbol per sample (exact-discrete)");
  sub->add_option("--target-features", target_features,
                  "Target task's own features (proxy-self)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transferability of learned features via H-scores", "xfer"};
  app.set_version_flag("--version", std::string("xfer ") + XFER_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "",
                 "JSON file supplying any flag; command-line flags win");
  app.config_formatter(std::make_shared<JsonConfig>(&app));

  const auto modes =
      CLI::IsMember({"exact-discrete", "proxy-self", "bound-k"});

  HScoreOptions hs;
  auto* hscore = app.add_subcommand("hscore", "H-score of features on labels");
  add_common(hscore, hs.common);
  hscore->add_option("--features", hs.features, "m x k features (CSV or XFT1)")
      ->required();
  hscore->add_option("--labels", hs.labels, "One integer label per line")
      ->required();

  TransferOptions tr;
  auto* transfer = app.add_subcommand("transfer", "Transferability of one source");
  add_common(transfer, tr.common);
  transfer->add_option("--features", tr.features,
                       "Source features on the target inputs")
      ->required();
  transfer->add_option("--labels", tr.labels, "Target labels")->required();
  transfer->add_option("--source-id", tr.source_id, "Name of the source");
  transfer->add_option("--mode", tr.mode, "Denominator mode")
      ->check(modes)
      ->capture_default_str();
  add_mode_inputs(transfer, tr.inputs, tr.target_features);

  RankOptions rk, rk2;
  CLI::App* rankers[2];
  for (int pairs = 0; pairs < 2; ++pairs) {
    RankOptions& o = pairs ? rk2 : rk;
    auto* sub = app.add_subcommand(
        pairs ? "rank2" : "rank",
        pairs ? "Rank every pair of sources by concatenated H-score"
              : "Rank sources by H-score");
    add_common(sub, o.common);
    sub->add_option("--candidate", o.candidates,
                    "Candidate features as id=path (repeatable)")
        ->required()
        ->expected(1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    sub->add_option("--labels", o.labels, "Target labels")->required();
    sub->add_option("--target-id", o.target_id, "Target name in the output");
    sub->add_option("--mode", o.mode,
                    "Also report transferability with this denominator")
        ->check(modes);
    add_mode_inputs(sub, o.inputs, o.target_features);
    rankers[pairs] = sub;
  }

  PixelwiseOptions px;
  auto* pixelwise =
      app.add_subcommand("pixelwise", "Per-pixel H-scores on image labels");
  add_common(pixelwise, px.common);
  pixelwise->add_option("--features", px.features, "m x k features")->required();
  pixelwise->add_option("--images", px.images,
                        "XFT1 ground truth, m x H x W or m x H x W x C")
      ->required();
  pixelwise->add_option("--n-colors", px.n_colors, "Palette size")
      ->check(CLI::Range(2, 1 << 16))
      ->capture_default_str();
  pixelwise->add_option("--max-iter", px.max_iter, "k-means iterations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  pixelwise->add_option("--heatmap", px.heatmap, "Heatmap output path");
  pixelwise->add_option("--format", px.format, "Heatmap format")
      ->check(CLI::IsMember({"pgm", "svg"}));

  CurriculumOptions cu;
  auto* curriculum =
      app.add_subcommand("curriculum", "Task graph, spanning forest, clusters");
  add_common(curriculum, cu.common);
  curriculum->add_option("--task", cu.tasks,
                         "Task as id=features,labels (repeatable, >= 2)")
      ->required()
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  auto* alpha = curriculum->add_option("--alpha", cu.alpha, "Edge threshold")
                    ->check(CLI::NonNegativeNumber);
  auto* pct = curriculum
                  ->add_option("--alpha-percentile", cu.alpha_percentile,
                               "Threshold at this percentile of pair maxima")
                  ->check(CLI::Range(0.0, 100.0));
  alpha->excludes(pct);
  curriculum->add_option("--dot", cu.dot, "Write the oriented forest as DOT");

  ExponentOptions ex;
  auto* exponent = app.add_subcommand(
      "validate-exponent", "Check error exponents against H-scores");
  add_common(exponent, ex.common);
  exponent->add_option("--pair", ex.pair, "JSON with p0, p1, p2, epsilon")
      ->required();
  exponent->add_option("--features", ex.features,
                       "CSV, one 1-d feature per column over the alphabet");
  exponent->add_option("--random-features", ex.random_features,
                       "Random features to draw without --features")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  exponent->add_option("--trials", ex.trials, "Monte-Carlo trials per size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  exponent->add_option("--sizes", ex.sizes, "Sample sizes")
      ->delimiter(',')
      ->capture_default_str();
  exponent->add_flag("!--no-simulation", ex.simulate,
                     "Skip the Monte-Carlo check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (hscore->parsed()) {
      emit(to_text(run_hscore(hs).document()), hs.common.output);
    } else if (transfer->parsed()) {
      emit(to_text(run_transfer(tr).document()), tr.common.output);
    } else if (rankers[0]->parsed()) {
      emit(to_text(run_rank(rk, false).document()), rk.common.output);
    } else if (rankers[1]->parsed()) {
      emit(to_text(run_rank(rk2, true).document()), rk2.common.output);
    } else if (pixelwise->parsed()) {
      emit(to_text(run_pixelwise(px).document()), px.common.output);
    } else if (curriculum->parsed()) {
      emit(to_text(run_curriculum(cu).document()), cu.common.output);
    } else if (exponent->parsed()) {
      emit(to_text(run_validate_exponent(ex).document()), ex.common.output);
    }
  } catch (const xfer::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.category() == xfer::Error::Category::kData ? kExitData
                                                        : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
