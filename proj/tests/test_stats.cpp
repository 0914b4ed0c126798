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

#include <doctest.h>

#include <cstring>
#include <random>

#include "oracle.hpp"
#include "xfer/error.hpp"
#include "xfer/stats.hpp"

using namespace xfer;

namespace {

FeatureMatrix features(std::initializer_list<std::initializer_list<double>> rows) {
  RowMatrix m(static_cast<Index>(rows.size()),
              static_cast<Index>(rows.begin()->size()));
  Index r = 0;
  for (const auto& row : rows) {
    Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return FeatureMatrix(m);
}

LabelVector labels(std::vector<int> y) {
  return LabelVector::from_raw(std::span<const int>(y));
}

// Gaussian class-conditional features: mean of class c is c * separation
// along a random direction, plus isotropic noise.
struct Sample {
  RowMatrix f;
  std::vector<int> y;
};

Sample gaussian_classes(std::mt19937_64& rng, Index m, Index k, int classes,
                        double separation) {
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> pick(0, classes - 1);
  const Matrix centres = oracle::random_matrix(rng, classes, k) * separation;
  Sample s{RowMatrix(m, k), std::vector<int>(static_cast<std::size_t>(m))};
  for (Index i = 0; i < m; ++i) {
    const int c = i < classes ? static_cast<int>(i) : pick(rng);
    s.y[static_cast<std::size_t>(i)] = c;
    for (Index j = 0; j < k; ++j) s.f(i, j) = centres(c, j) + normal(rng);
  }
  return s;
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

TEST_CASE("sample covariance: examples") {
  CHECK(sample_covariance(features({{1}, {-1}}))(0, 0) == doctest::Approx(1.0));
  const Matrix zero = sample_covariance(features({{2.5, 2.5}, {2.5, 2.5}}));
  CHECK(zero.isZero(0.0));
  const Matrix half =
      sample_covariance(features({{1, 0}, {0, 1}, {-1, 0}, {0, -1}}));
  CHECK(half.isApprox(Matrix::Identity(2, 2) * 0.5, 1e-15));
}

TEST_CASE("sample covariance matches the 1/m formula on random data") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = oracle::random_matrix(rng, 50 + trial, 4);
    const Matrix centred = a.rowwise() - a.colwise().mean();
    const Matrix expected = centred.transpose() * centred / static_cast<double>(a.rows());
    CHECK((sample_covariance(FeatureMatrix(a)) - expected).norm() <= 1e-12);
  }
}

TEST_CASE("class conditional stats: examples") {
  const ClassStats two = class_conditional_stats(features({{1}, {3}}), labels({0, 1}));
  CHECK(two.class_means(0, 0) == 1);
  CHECK(two.class_means(1, 0) == 3);
  CHECK(two.priors(0) == 0.5);
  CHECK(two.priors(1) == 0.5);

  const ClassStats one = class_conditional_stats(features({{1}, {5}}), labels({4, 4}));
  CHECK(one.class_means.rows() == 1);
  CHECK(one.class_means(0, 0) == doctest::Approx(one.global_mean(0)));

  const ClassStats three =
      class_conditional_stats(features({{2}, {4}, {6}}), labels({0, 0, 1}));
  CHECK(three.class_means(0, 0) == doctest::Approx(3));
  CHECK(three.class_means(1, 0) == doctest::Approx(6));
  CHECK(three.priors(0) == doctest::Approx(2.0 / 3.0));
  CHECK(three.priors(1) == doctest::Approx(1.0 / 3.0));
  CHECK(three.global_mean(0) == doctest::Approx(4));
  CHECK(between_class_covariance(three)(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("class conditional stats: length mismatch is an error") {
  CHECK_THROWS_AS(class_conditional_stats(features({{1}, {2}, {3}}), labels({0, 1})),
                  DataError);
}

TEST_CASE("class stats invariants hold on random data") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Sample s = gaussian_classes(rng, 60, 3, 4, 1.0);
    const ClassStats st = class_conditional_stats(FeatureMatrix(s.f), labels(s.y));
    CHECK(std::abs(st.priors.sum() - 1.0) <= 1e-12);
    const Vector mixed = st.class_means.transpose() * st.priors;
    CHECK((mixed - st.global_mean).norm() <= 1e-10);
  }
}

TEST_CASE("between-class covariance: examples") {
  ClassStats st;
  st.priors = Vector::Constant(2, 0.5);
  st.class_means = Matrix(2, 2);
  st.class_means << 1, 0, -1, 0;
  st.global_mean = Vector::Zero(2);
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 1;
  CHECK(between_class_covariance(st).isApprox(expected));

  ClassStats single;
  single.priors = Vector::Ones(1);
  single.class_means = Matrix::Constant(1, 2, 3.0);
  single.global_mean = Vector::Constant(2, 3.0);
  CHECK(between_class_covariance(single).isZero(0.0));
}

TEST_CASE("between-class covariance has rank at most C-1") {
  std::mt19937_64 rng(4);
  const Sample s = gaussian_classes(rng, 200, 6, 3, 2.0);
  const Matrix b =
      between_class_covariance(class_conditional_stats(FeatureMatrix(s.f), labels(s.y)));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(b);
  const double top = eig.eigenvalues().maxCoeff();
  int rank = 0;
  for (Index i = 0; i < 6; ++i) rank += eig.eigenvalues()(i) > 1e-10 * top;
  CHECK(rank <= 2);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("regularized inverse: examples") {
  const Matrix eye = Matrix::Identity(3, 3);
  CHECK(regularized_inverse(eye, InverseMode::pseudo()).isApprox(eye));
  CHECK(regularized_inverse(eye, InverseMode::ridge(0.5)).isApprox(eye / 1.5));
  Matrix ones = Matrix::Ones(2, 2);
  CHECK(regularized_inverse(ones, InverseMode::pseudo())
            .isApprox(Matrix::Constant(2, 2, 0.25), 1e-14));
  CHECK(regularized_inverse(Matrix::Zero(2, 2), InverseMode::pseudo()).isZero(0.0));
}

TEST_CASE("regularized inverse rejects indefinite matrices") {
  Matrix a(2, 2);
  a << 1, 0, 0, -0.1;
  CHECK_THROWS_AS(regularized_inverse(a, InverseMode::pseudo()), NotPsdError);
}

TEST_CASE("regularized inverse agrees with an SVD pseudo-inverse") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix g = oracle::random_matrix(rng, 5, 3);
    const Matrix psd = g * g.transpose();  // rank 3 of 5
    CHECK((regularized_inverse(psd, InverseMode::pseudo()) - oracle::pinv(psd))
              .norm() <= 1e-9 * oracle::pinv(psd).norm());
  }
}

TEST_CASE("h-score: exact binary symmetric joint gives 0.36") {
  // (x, y) counts 4, 1, 1, 4 reproduce P(0,0) = P(1,1) = 0.4 exactly.
  const FeatureMatrix f = features({{1}, {1}, {1}, {1}, {1}, {-1}, {-1}, {-1}, {-1}, {-1}});
  const LabelVector y = labels({0, 0, 0, 0, 1, 0, 1, 1, 1, 1});
  const HScoreReport r = h_score(f, y);
  CHECK(std::abs(r.value - 0.36) <= 1e-12);
  CHECK(r.effective_rank == 1);
  CHECK(r.feature_cov(0, 0) == doctest::Approx(1.0));
  CHECK(r.between_cov(0, 0) == doctest::Approx(0.36));
}

TEST_CASE("h-score: label-independent feature on the exact joint gives 0") {
  const FeatureMatrix f = features({{1}, {1}, {-1}, {-1}});
  const LabelVector y = labels({0, 1, 0, 1});
  CHECK(std::abs(h_score(f, y).value) <= 1e-15);
}

TEST_CASE("h-score: rejects m <= C and length mismatch") {
  CHECK_THROWS_AS(h_score(features({{1}, {2}}), labels({0, 1})),
                  InsufficientSamplesError);
  CHECK_THROWS_AS(h_score(features({{1}, {2}, {3}}), labels({0, 1})), DataError);
}

TEST_CASE("h-score agrees with the loop oracle on random data") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const Index k = 1 + trial % 5;
    const Sample s = gaussian_classes(rng, 80, k, 2 + trial % 4, 0.7);
    const double h = h_score(FeatureMatrix(s.f), labels(s.y)).value;
    CHECK(rel_diff(h, oracle::naive_h(s.f, s.y)) <= 1e-9);
  }
}

TEST_CASE("h-score: ridge mode uses (cov + lambda I)^-1") {
  std::mt19937_64 rng(10);
  const Sample s = gaussian_classes(rng, 100, 3, 3, 1.0);
  const FeatureMatrix f(s.f);
  const LabelVector y = labels(s.y);
  const HScoreReport r = h_score(f, y, InverseMode::ridge(0.3));
  const Matrix expected_inv =
      (r.feature_cov + 0.3 * Matrix::Identity(3, 3)).inverse();
  CHECK(r.value == doctest::Approx((expected_inv * r.between_cov).trace()).epsilon(1e-12));
  CHECK(r.regularization.find("ridge") != std::string::npos);
}

TEST_CASE("h-score report invariants") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const Sample s = gaussian_classes(rng, 60, 4, 3, 1.5);
    const HScoreReport r = h_score(FeatureMatrix(s.f), labels(s.y));
    CHECK(r.value >= 0.0);
    CHECK(r.value <= static_cast<double>(r.effective_rank) + 1e-9);
    CHECK((r.feature_cov - r.feature_cov.transpose()).norm() <= 1e-12);
    CHECK((r.between_cov - r.between_cov.transpose()).norm() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> a(r.feature_cov), b(r.between_cov);
    CHECK(a.eigenvalues().minCoeff() >= -1e-9);
    CHECK(b.eigenvalues().minCoeff() >= -1e-9);
  }
}

TEST_CASE("h-score is affine invariant") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const Index k = 1 + trial % 4;
    const Sample s = gaussian_classes(rng, 50, k, 3, 1.0);
    Matrix a = oracle::random_matrix(rng, k, k) + 2.0 * Matrix::Identity(k, k);
    const Vector b = oracle::random_matrix(rng, k, 1);
    const RowMatrix moved = (s.f * a.transpose()).rowwise() + b.transpose();
    const double h0 = h_score(FeatureMatrix(s.f), labels(s.y)).value;
    const double h1 = h_score(FeatureMatrix(moved), labels(s.y)).value;
    CHECK(rel_diff(h0, h1) <= 1e-8);
  }
}

TEST_CASE("h-score ignores duplicated and constant columns (pseudo mode)") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    const Sample s = gaussian_classes(rng, 40, 2, 2, 1.0);
    const double h = h_score(FeatureMatrix(s.f), labels(s.y)).value;
    RowMatrix dup(s.f.rows(), 4);
    dup << s.f, s.f;
    CHECK(std::abs(h_score(FeatureMatrix(dup), labels(s.y)).value - h) <= 1e-8);
    RowMatrix constant(s.f.rows(), 3);
    constant << s.f, RowMatrix::Constant(s.f.rows(), 1, 4.2);
    CHECK(std::abs(h_score(FeatureMatrix(constant), labels(s.y)).value - h) <= 1e-8);
  }
}

TEST_CASE("appending columns never lowers the h-score") {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 100; ++trial) {
    const Sample s = gaussian_classes(rng, 50, 5, 3, 0.8);
    const double part = h_score(FeatureMatrix(RowMatrix(s.f.leftCols(2))), labels(s.y)).value;
    const double all = h_score(FeatureMatrix(s.f), labels(s.y)).value;
    CHECK(all >= part - 1e-8);
  }
}

TEST_CASE("h-score is zero exactly when class means coincide") {
  // Class means are equal by construction: each class holds {-a, +a} pairs.
  RowMatrix f(8, 2);
  f << 1, 2, -1, -2, 3, 0, -3, 0, 0.5, 1, -0.5, -1, 2, 2, -2, -2;
  const LabelVector y = labels({0, 0, 1, 1, 2, 2, 3, 3});
  CHECK(std::abs(h_score(FeatureMatrix(f), y).value) <= 1e-15);
}

TEST_CASE("sample permutation leaves outputs bit-identical") {
  std::mt19937_64 rng(20);
  for (int trial = 0; trial < 100; ++trial) {
    const Sample s = gaussian_classes(rng, 70, 3, 3, 1.0);
    std::vector<Index> perm(static_cast<std::size_t>(s.f.rows()));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    RowMatrix pf(s.f.rows(), s.f.cols());
    std::vector<int> py(s.y.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      pf.row(static_cast<Index>(i)) = s.f.row(perm[i]);
      py[i] = s.y[static_cast<std::size_t>(perm[i])];
    }
    const HScoreReport a = h_score(FeatureMatrix(s.f), labels(s.y));
    const HScoreReport b = h_score(FeatureMatrix(pf), labels(py));
    CHECK(std::memcmp(&a.value, &b.value, sizeof(double)) == 0);
    CHECK(std::memcmp(a.feature_cov.data(), b.feature_cov.data(),
                      sizeof(double) * 9) == 0);
    CHECK(std::memcmp(a.between_cov.data(), b.between_cov.data(),
                      sizeof(double) * 9) == 0);
  }
}

TEST_CASE("HScorer reuses one inverse and matches h_score") {
  std::mt19937_64 rng(22);
  const Sample s = gaussian_classes(rng, 90, 4, 3, 1.0);
  const FeatureMatrix f(s.f);
  const HScorer scorer(f, InverseMode::pseudo());
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> y = s.y;
    std::shuffle(y.begin(), y.end(), rng);
    const double expected = h_score(f, labels(y)).value;
    CHECK(scorer.value(labels(y)) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("h-score from population moments") {
  Matrix cov = Matrix::Identity(1, 1);
  Matrix means(2, 1);
  means << 0.6, -0.6;
  const HScoreReport r = h_score_from_moments(cov, means, Vector::Constant(2, 0.5),
                                              Vector::Zero(1), InverseMode::pseudo());
  CHECK(r.value == doctest::Approx(0.36).epsilon(1e-14));
}
