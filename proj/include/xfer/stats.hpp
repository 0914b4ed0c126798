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

#ifndef XFER_STATS_HPP_
#define XFER_STATS_HPP_

#include <string>
#include <vector>

#include "xfer/types.hpp"

namespace xfer {

// How cov(f(X)) is inverted. Pseudo zeroes eigenvalues below
// tolerance * lambda_max; ridge inverts (A + lambda I).
struct InverseMode {
  enum class Kind { kPseudo, kRidge };

  Kind kind = Kind::kPseudo;
  double parameter = 1e-10;

  static InverseMode pseudo(double tolerance = 1e-10) {
    return {Kind::kPseudo, tolerance};
  }
  static InverseMode ridge(double lambda) { return {Kind::kRidge, lambda}; }

  std::string describe() const;
};

struct ClassStats {
  Vector priors;        // C, empirical class frequencies
  Matrix class_means;   // C x k, row y is E[f(X) | Y = y]
  Vector global_mean;   // k
  std::vector<Index> counts;
};

struct HScoreReport {
  double value = 0.0;
  Matrix feature_cov;   // cov(f(X))
  Matrix between_cov;   // cov(E[f(X) | Y])
  Index effective_rank = 0;
  std::string regularization;
};

// (1/m) sum_i (f_i - mu)(f_i - mu)^T. Rows are accumulated in a canonical
// (lexicographic) order so the result is bit-identical under any permutation
// of the samples.
Matrix sample_covariance(const FeatureMatrix& features);

ClassStats class_conditional_stats(const FeatureMatrix& features,
                                   const LabelVector& labels);

// sum_y P(y) (mu_y - mu)(mu_y - mu)^T
Matrix between_class_covariance(const ClassStats& stats);

Matrix regularized_inverse(const Matrix& psd, InverseMode mode);

// Eigen-decomposed inverse of a PSD matrix: inverse = whitener * whitener^T.
struct SpectralInverse {
  Matrix inverse;
  Matrix whitener;  // k x r
  Index rank = 0;
};
SpectralInverse spectral_inverse(const Matrix& psd, InverseMode mode);

// tr(cov(f)^+ cov(E[f|Y])) with covariance normalization 1/m. Requires more
// samples than classes.
HScoreReport h_score(const FeatureMatrix& features, const LabelVector& labels,
                     InverseMode mode = InverseMode::pseudo());

// H-score from precomputed population moments. `class_means` rows are the
// conditional means, weighted by `priors`; `mean` is E[f(X)].
HScoreReport h_score_from_moments(const Matrix& feature_cov,
                                  const Matrix& class_means,
                                  const Vector& priors, const Vector& mean,
                                  InverseMode mode);

// Scores many label vectors against one fixed feature matrix. The canonical
// order, feature covariance and its inverse are computed once; each value()
// call then costs O(mk + Ckr). The scorer keeps a reference to `features`,
// which must outlive it.
class HScorer {
 public:
  HScorer(const FeatureMatrix& features, InverseMode mode);

  HScoreReport report(const LabelVector& labels) const;
  double value(const LabelVector& labels) const;

  Index sample_count() const { return static_cast<Index>(order_.size()); }
  Index effective_rank() const { return inverse_.rank; }
  const Matrix& feature_cov() const { return cov_; }

 private:
  ClassStats stats(const LabelVector& labels) const;
  void check_labels(const LabelVector& labels) const;

  const FeatureMatrix* features_;
  InverseMode mode_;
  std::vector<Index> order_;
  Vector mean_;
  Matrix cov_;
  SpectralInverse inverse_;
};

// Canonical row order: lexicographic on values, sign bit as the tie-break.
std::vector<Index> canonical_row_order(const RowMatrix& values);

}  // namespace xfer

#endif  // XFER_STATS_HPP_
