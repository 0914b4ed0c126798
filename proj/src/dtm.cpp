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

#include "xfer/dtm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "xfer/error.hpp"

namespace xfer {
namespace {

// Flips each column of `primary` (and the matching column of `secondary`) so
// that its largest-magnitude entry is positive.
void fix_signs(Matrix& primary, Matrix& secondary) {
  for (Index j = 0; j < primary.cols(); ++j) {
    Index arg = 0;
    primary.col(j).cwiseAbs().maxCoeff(&arg);
    if (primary(arg, j) < 0.0) {
      primary.col(j) *= -1.0;
      if (secondary.cols() > j) secondary.col(j) *= -1.0;
    }
  }
}

// Centres f under p_x and whitens it symmetrically so that E[f f^T] = I.
// Returns the number of directions with variance above the numerical floor.
Index center_and_whiten(Matrix& f, const Vector& p_x) {
  const Eigen::RowVectorXd mean = p_x.transpose() * f;
  f.rowwise() -= mean;
  const Matrix cov = f.transpose() * p_x.asDiagonal() * f;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (cov + cov.transpose()));
  const Vector& lambda = eig.eigenvalues();
  // Variances are measured against a feature that had identity covariance
  // one sweep earlier, so the floor is absolute.
  constexpr double kVarianceFloor = 1e-24;
  Index rank = 0;
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > kVarianceFloor) ++rank;
  }
  if (rank < f.cols()) return rank;
  const Matrix inv_sqrt = eig.eigenvectors() *
                          lambda.cwiseSqrt().cwiseInverse().asDiagonal() *
                          eig.eigenvectors().transpose();
  f = f * inv_sqrt;
  return rank;
}

void check_k(int k) {
  if (k < 1) throw DataError("feature dimension k must be at least 1");
}

}  // namespace

JointDistribution::JointDistribution(const Matrix& table, bool normalize) {
  if (table.size() == 0) throw DataError("joint distribution table is empty");
  if (!table.allFinite() || (table.array() < 0.0).any()) {
    throw DataError("joint distribution has negative or non-finite entries");
  }
  const double total = table.sum();
  if (!(total > 0.0)) throw DataError("joint distribution has zero mass");
  Matrix scaled = table;
  if (normalize) {
    scaled /= total;
  } else if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "joint distribution sums to " << total << ", not 1";
    throw DataError(os.str());
  }
  const Vector row_mass = scaled.rowwise().sum();
  const Vector col_mass = scaled.colwise().sum().transpose();
  for (Index y = 0; y < row_mass.size(); ++y) {
    if (row_mass(y) > 0.0) kept_y_.push_back(y);
  }
  for (Index x = 0; x < col_mass.size(); ++x) {
    if (col_mass(x) > 0.0) kept_x_.push_back(x);
  }
  table_ = scaled(kept_y_, kept_x_);
  p_y_ = table_.rowwise().sum();
  p_x_ = table_.colwise().sum().transpose();
}

JointDistribution empirical_joint(std::span<const std::int64_t> x,
                                  std::span<const std::int64_t> y) {
  if (x.size() != y.size()) {
    throw DataError("x has " + std::to_string(x.size()) + " samples but y has " +
                    std::to_string(y.size()));
  }
  if (x.empty()) throw DataError("no samples");
  auto alphabet = [](std::span<const std::int64_t> s) {
    std::vector<std::int64_t> a(s.begin(), s.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
  };
  auto xs = alphabet(x);
  auto ys = alphabet(y);
  Matrix counts = Matrix::Zero(static_cast<Index>(ys.size()),
                               static_cast<Index>(xs.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto xi = std::lower_bound(xs.begin(), xs.end(), x[i]) - xs.begin();
    const auto yi = std::lower_bound(ys.begin(), ys.end(), y[i]) - ys.begin();
    counts(yi, xi) += 1.0;
  }
  JointDistribution joint(counts / static_cast<double>(x.size()), true);
  joint.x_symbols_ = std::move(xs);
  joint.y_symbols_ = std::move(ys);
  return joint;
}

Dtm dtm(const JointDistribution& joint) {
  const Vector sx = joint.p_x().cwiseSqrt();
  const Vector sy = joint.p_y().cwiseSqrt();
  Dtm out;
  out.b = sy.cwiseInverse().asDiagonal() * joint.table() *
              sx.cwiseInverse().asDiagonal() -
          sy * sx.transpose();
  return out;
}

SpectralDecomposition spectral(const Dtm& b) {
  Eigen::JacobiSVD<Matrix> svd(b.b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  Index rank = 0;
  while (rank < s.size() && s(rank) > kSpectralZero) ++rank;
  SpectralDecomposition out;
  out.singular_values = s.head(rank);
  out.right_vectors = svd.matrixV().leftCols(rank);
  out.left_vectors = svd.matrixU().leftCols(rank);
  fix_signs(out.right_vectors, out.left_vectors);
  return out;
}

OptimalFeatures optimal_features(const JointDistribution& joint, int k) {
  check_k(k);
  const SpectralDecomposition sd = spectral(dtm(joint));
  if (k > sd.rank()) {
    throw RankError("k = " + std::to_string(k) + " exceeds the DTM rank " +
                        std::to_string(sd.rank()),
                    static_cast<std::size_t>(sd.rank()));
  }
  OptimalFeatures out;
  out.sigma = sd.singular_values.head(k);
  out.f_table = joint.p_x().cwiseSqrt().cwiseInverse().asDiagonal() *
                sd.right_vectors.leftCols(k);
  out.g_table = joint.p_y().cwiseSqrt().cwiseInverse().asDiagonal() *
                sd.left_vectors.leftCols(k);
  out.h_opt = out.sigma.squaredNorm();
  out.rho = out.sigma.sum();
  return out;
}

OptimalFeatures ace(const JointDistribution& joint, int k,
                    const AceOptions& options) {
  check_k(k);
  const Matrix& p = joint.table();
  const Vector& p_x = joint.p_x();
  const Vector& p_y = joint.p_y();
  const Vector inv_px = p_x.cwiseInverse();
  const Vector inv_py = p_y.cwiseInverse();

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss;
  Matrix f(joint.x_size(), k);
  for (Index i = 0; i < f.size(); ++i) f.data()[i] = gauss(rng);

  auto require_rank = [k](Index rank) {
    if (rank < k) {
      throw RankError("ACE: only " + std::to_string(rank) +
                          " informative directions, k = " + std::to_string(k),
                      static_cast<std::size_t>(rank));
    }
  };
  require_rank(center_and_whiten(f, p_x));

  Matrix g;
  double objective = 0.0;
  double previous = 0.0;
  int iter = 0;
  bool converged = false;
  while (iter < options.max_iter) {
    ++iter;
    g = inv_py.asDiagonal() * (p * f);  // E[f(X) | Y]
    objective = (g.transpose() * p_y.asDiagonal() * g).trace();
    if (iter > 1 && std::abs(objective - previous) < options.tol) {
      converged = true;
      break;
    }
    previous = objective;
    f = inv_px.asDiagonal() * (p.transpose() * g);  // E[g(Y) | X]
    require_rank(center_and_whiten(f, p_x));
  }
  if (!converged) {
    throw ConvergenceError("ACE did not converge within " +
                               std::to_string(options.max_iter) + " sweeps",
                           objective);
  }

  // Rotate onto canonical directions: sqrt(P_Y) E[f|Y] = B Phi.
  const Matrix projected = p_y.cwiseSqrt().asDiagonal() * g;
  Eigen::JacobiSVD<Matrix> svd(projected,
                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  OptimalFeatures out;
  out.sigma = svd.singularValues();
  out.f_table = f * svd.matrixV();
  out.g_table = p_y.cwiseSqrt().cwiseInverse().asDiagonal() * svd.matrixU();
  fix_signs(out.f_table, out.g_table);
  out.h_opt = out.sigma.squaredNorm();
  out.rho = out.sigma.sum();
  out.iterations = iter;
  return out;
}

double hgr_correlation(const JointDistribution& joint, int k) {
  check_k(k);
  const SpectralDecomposition sd = spectral(dtm(joint));
  return sd.singular_values.head(std::min<Index>(k, sd.rank())).sum();
}

PhiEmbedding phi_embedding(const Matrix& f_table, const Vector& p_x) {
  if (f_table.rows() != p_x.size()) {
    throw DataError("feature table has " + std::to_string(f_table.rows()) +
                    " rows but the alphabet has " + std::to_string(p_x.size()) +
                    " symbols");
  }
  return {p_x.cwiseSqrt().asDiagonal() * f_table};
}

namespace {
void check_phi(const Dtm& b, const PhiEmbedding& phi) {
  if (phi.phi.rows() != b.b.cols()) {
    throw DataError("embedding rows do not match the DTM's |X|");
  }
}
}  // namespace

Matrix optimal_psi(const Dtm& b, const PhiEmbedding& phi) {
  check_phi(b, phi);
  const Matrix gram = phi.phi.transpose() * phi.phi;
  return b.b * phi.phi * regularized_inverse(gram, InverseMode::pseudo());
}

double projected_dtm_energy(const Dtm& b, const PhiEmbedding& phi) {
  check_phi(b, phi);
  const Matrix gram = phi.phi.transpose() * phi.phi;
  const SpectralInverse inv = spectral_inverse(gram, InverseMode::pseudo());
  return (b.b * phi.phi * inv.whitener).squaredNorm();
}

double residual_logloss_proxy(const Dtm& b, const PhiEmbedding& phi) {
  return b.b.squaredNorm() - projected_dtm_energy(b, phi);
}

HScoreReport exact_h_score(const Matrix& f_table, const JointDistribution& joint,
                           InverseMode mode) {
  if (f_table.rows() != joint.x_size()) {
    throw DataError("feature table has " + std::to_string(f_table.rows()) +
                    " rows but the joint has " + std::to_string(joint.x_size()) +
                    " input symbols");
  }
  const Vector& p_x = joint.p_x();
  const Vector mean = f_table.transpose() * p_x;
  const Matrix centered = f_table.rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * p_x.asDiagonal() * centered;
  const Matrix class_means =
      joint.p_y().cwiseInverse().asDiagonal() * joint.table() * f_table;
  return h_score_from_moments(0.5 * (cov + cov.transpose()), class_means,
                              joint.p_y(), mean, mode);
}

}  // namespace xfer
