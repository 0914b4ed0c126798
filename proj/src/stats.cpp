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

#include "xfer/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "xfer/error.hpp"

namespace xfer {
namespace {

constexpr Index kCovarianceBlock = 512;

Vector ordered_mean(const RowMatrix& values, const std::vector<Index>& order) {
  Vector sum = Vector::Zero(values.cols());
  for (Index i : order) sum += values.row(i).transpose();
  return sum / static_cast<double>(order.size());
}

Matrix ordered_covariance(const RowMatrix& values,
                          const std::vector<Index>& order, const Vector& mean) {
  const Index k = values.cols();
  const auto m = static_cast<Index>(order.size());
  Matrix cov = Matrix::Zero(k, k);
  Matrix block(k, std::min(kCovarianceBlock, m));
  for (Index start = 0; start < m; start += kCovarianceBlock) {
    const Index n = std::min(kCovarianceBlock, m - start);
    for (Index j = 0; j < n; ++j) {
      block.col(j) = values.row(order[static_cast<std::size_t>(start + j)])
                         .transpose() - mean;
    }
    cov.selfadjointView<Eigen::Lower>().rankUpdate(block.leftCols(n));
  }
  Matrix full = cov.selfadjointView<Eigen::Lower>();
  return full / static_cast<double>(m);
}

ClassStats ordered_class_stats(const RowMatrix& values,
                               const std::vector<Index>& order,
                               const LabelVector& labels, const Vector& mean) {
  const int classes = labels.class_count();
  ClassStats stats;
  stats.class_means = Matrix::Zero(classes, values.cols());
  stats.counts.assign(static_cast<std::size_t>(classes), 0);
  for (Index i : order) {
    const int y = labels[static_cast<std::size_t>(i)];
    stats.class_means.row(y) += values.row(i);
    ++stats.counts[static_cast<std::size_t>(y)];
  }
  const auto m = static_cast<double>(order.size());
  stats.priors.resize(classes);
  for (int y = 0; y < classes; ++y) {
    const auto count = stats.counts[static_cast<std::size_t>(y)];
    if (count == 0) {
      throw DataError("class " + std::to_string(y) + " has no samples");
    }
    stats.class_means.row(y) /= static_cast<double>(count);
    stats.priors(y) = static_cast<double>(count) / m;
  }
  stats.global_mean = mean;
  return stats;
}

void check_consistent(const FeatureMatrix& features, const LabelVector& labels) {
  if (static_cast<Index>(labels.size()) != features.sample_count()) {
    throw DataError("features have " + std::to_string(features.sample_count()) +
                    " samples but labels have " + std::to_string(labels.size()));
  }
}

// Between-class term evaluated through the whitener:
// sum_y P(y) |W^T (mu_y - mu)|^2 == tr(A^+ cov(E[f|Y])), and is >= 0 by
// construction.
double whitened_between(const SpectralInverse& inv, const Matrix& class_means,
                        const Vector& priors, const Vector& mean) {
  double value = 0.0;
  for (Index y = 0; y < class_means.rows(); ++y) {
    const Vector d = class_means.row(y).transpose() - mean;
    value += priors(y) * (inv.whitener.transpose() * d).squaredNorm();
  }
  return value;
}

}  // namespace

std::string InverseMode::describe() const {
  char digits[32];
  const auto end = std::to_chars(digits, digits + sizeof digits, parameter).ptr;
  const std::string value(digits, end);
  return kind == Kind::kPseudo ? "pseudo-inverse, relative tolerance " + value
                               : "ridge, lambda " + value;
}

std::vector<Index> canonical_row_order(const RowMatrix& values) {
  std::vector<Index> order(static_cast<std::size_t>(values.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  const Index k = values.cols();
  std::sort(order.begin(), order.end(), [&values, k](Index a, Index b) {
    const double* ra = values.data() + a * k;
    const double* rb = values.data() + b * k;
    for (Index j = 0; j < k; ++j) {
      if (ra[j] < rb[j]) return true;
      if (rb[j] < ra[j]) return false;
      const bool sa = std::signbit(ra[j]);
      const bool sb = std::signbit(rb[j]);
      if (sa != sb) return sa;
    }
    return false;
  });
  return order;
}

Matrix sample_covariance(const FeatureMatrix& features) {
  const auto order = canonical_row_order(features.values());
  return ordered_covariance(features.values(), order,
                            ordered_mean(features.values(), order));
}

ClassStats class_conditional_stats(const FeatureMatrix& features,
                                   const LabelVector& labels) {
  check_consistent(features, labels);
  const auto order = canonical_row_order(features.values());
  return ordered_class_stats(features.values(), order, labels,
                             ordered_mean(features.values(), order));
}

Matrix between_class_covariance(const ClassStats& stats) {
  const Index k = stats.class_means.cols();
  Matrix between = Matrix::Zero(k, k);
  for (Index y = 0; y < stats.class_means.rows(); ++y) {
    const Vector d = stats.class_means.row(y).transpose() - stats.global_mean;
    between.noalias() += stats.priors(y) * d * d.transpose();
  }
  return between;
}

SpectralInverse spectral_inverse(const Matrix& psd, InverseMode mode) {
  if (psd.rows() != psd.cols()) throw DataError("matrix is not square");
  if (!psd.allFinite()) throw NumericalError("matrix contains NaN or Inf");
  const Index k = psd.rows();
  const Matrix sym = 0.5 * (psd + psd.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition failed");
  }
  const Vector& lambda = eig.eigenvalues();
  const Matrix& vectors = eig.eigenvectors();
  const double lambda_max = k ? lambda(k - 1) : 0.0;
  const double lambda_min = k ? lambda(0) : 0.0;
  const double scale = std::max(std::abs(lambda_max), std::abs(lambda_min));
  if (lambda_min < -1e-9 * scale) {
    std::ostringstream os;
    os.precision(6);
    os << "matrix is not positive semi-definite (eigenvalue " << lambda_min
       << ", largest " << lambda_max << ")";
    throw NotPsdError(os.str());
  }

  SpectralInverse out;
  const double cutoff =
      (mode.kind == InverseMode::Kind::kPseudo ? mode.parameter : 1e-10) *
      lambda_max;
  for (Index i = 0; i < k; ++i) {
    if (lambda_max > 0.0 && lambda(i) > cutoff) ++out.rank;
  }

  if (mode.kind == InverseMode::Kind::kPseudo) {
    if (!(mode.parameter >= 0.0)) {
      throw DataError("pseudo-inverse tolerance must be non-negative");
    }
    out.whitener.resize(k, out.rank);
    for (Index j = 0; j < out.rank; ++j) {
      const Index i = k - out.rank + j;
      out.whitener.col(j) = vectors.col(i) / std::sqrt(lambda(i));
    }
  } else {
    if (!(mode.parameter > 0.0)) {
      throw DataError("ridge lambda must be positive");
    }
    out.whitener.resize(k, k);
    for (Index i = 0; i < k; ++i) {
      out.whitener.col(i) =
          vectors.col(i) / std::sqrt(std::max(lambda(i), 0.0) + mode.parameter);
    }
  }
  out.inverse = out.whitener * out.whitener.transpose();
  return out;
}

Matrix regularized_inverse(const Matrix& psd, InverseMode mode) {
  return spectral_inverse(psd, mode).inverse;
}

HScoreReport h_score_from_moments(const Matrix& feature_cov,
                                  const Matrix& class_means,
                                  const Vector& priors, const Vector& mean,
                                  InverseMode mode) {
  const SpectralInverse inv = spectral_inverse(feature_cov, mode);
  ClassStats stats{priors, class_means, mean, {}};
  HScoreReport report;
  report.feature_cov = feature_cov;
  report.between_cov = between_class_covariance(stats);
  report.effective_rank = inv.rank;
  report.regularization = mode.describe();
  report.value = whitened_between(inv, class_means, priors, mean);
  return report;
}

HScorer::HScorer(const FeatureMatrix& features, InverseMode mode)
    : features_(&features),
      mode_(mode),
      order_(canonical_row_order(features.values())),
      mean_(ordered_mean(features.values(), order_)),
      cov_(ordered_covariance(features.values(), order_, mean_)),
      inverse_(spectral_inverse(cov_, mode)) {}

void HScorer::check_labels(const LabelVector& labels) const {
  check_consistent(*features_, labels);
  if (static_cast<Index>(labels.size()) <= labels.class_count()) {
    throw InsufficientSamplesError(
        "H-score needs more samples than classes (m = " +
        std::to_string(labels.size()) +
        ", C = " + std::to_string(labels.class_count()) + ")");
  }
}

ClassStats HScorer::stats(const LabelVector& labels) const {
  check_labels(labels);
  return ordered_class_stats(features_->values(), order_, labels, mean_);
}

double HScorer::value(const LabelVector& labels) const {
  const ClassStats s = stats(labels);
  return whitened_between(inverse_, s.class_means, s.priors, s.global_mean);
}

HScoreReport HScorer::report(const LabelVector& labels) const {
  const ClassStats s = stats(labels);
  HScoreReport report;
  report.feature_cov = cov_;
  report.between_cov = between_class_covariance(s);
  report.effective_rank = inverse_.rank;
  report.regularization = mode_.describe();
  report.value = whitened_between(inverse_, s.class_means, s.priors, s.global_mean);
  return report;
}

HScoreReport h_score(const FeatureMatrix& features, const LabelVector& labels,
                     InverseMode mode) {
  check_consistent(features, labels);
  return HScorer(features, mode).report(labels);
}

}  // namespace xfer
