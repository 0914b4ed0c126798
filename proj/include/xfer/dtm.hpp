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

#ifndef XFER_DTM_HPP_
#define XFER_DTM_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "xfer/stats.hpp"
#include "xfer/types.hpp"

namespace xfer {

// Discrete joint P_{YX} stored as a |Y| x |X| table. Symbols with zero
// marginal mass are pruned on construction; kept_x()/kept_y() give the
// original index of every remaining column/row.
class JointDistribution {
 public:
  // `table` must be non-negative and sum to 1 within 1e-12 unless
  // `normalize` is set, in which case it is rescaled first.
  explicit JointDistribution(const Matrix& table, bool normalize = false);

  const Matrix& table() const { return table_; }
  const Vector& p_x() const { return p_x_; }
  const Vector& p_y() const { return p_y_; }
  Index x_size() const { return table_.cols(); }
  Index y_size() const { return table_.rows(); }
  const std::vector<Index>& kept_x() const { return kept_x_; }
  const std::vector<Index>& kept_y() const { return kept_y_; }

  // Symbol values for joints built from samples; empty otherwise.
  const std::vector<std::int64_t>& x_symbols() const { return x_symbols_; }
  const std::vector<std::int64_t>& y_symbols() const { return y_symbols_; }

 private:
  friend JointDistribution empirical_joint(std::span<const std::int64_t>,
                                           std::span<const std::int64_t>);

  Matrix table_;
  Vector p_x_, p_y_;
  std::vector<Index> kept_x_, kept_y_;
  std::vector<std::int64_t> x_symbols_, y_symbols_;
};

// Cell (y, x) = count / m over the observed alphabets (sorted ascending).
JointDistribution empirical_joint(std::span<const std::int64_t> x,
                                  std::span<const std::int64_t> y);

// B(y, x) = P(x, y) / sqrt(P(x) P(y)) - sqrt(P(y) P(x))
struct Dtm {
  Matrix b;  // |Y| x |X|
};
Dtm dtm(const JointDistribution& joint);

// Singular triplets of the DTM with sigma above kSpectralZero. The structural
// pair (sqrt P_Y, sqrt P_X) has sigma = 0 after the subtraction and never
// appears.
struct SpectralDecomposition {
  Vector singular_values;  // non-increasing
  Matrix right_vectors;    // |X| x r
  Matrix left_vectors;     // |Y| x r
  Index rank() const { return singular_values.size(); }
};
inline constexpr double kSpectralZero = 1e-12;
SpectralDecomposition spectral(const Dtm& b);

struct OptimalFeatures {
  Matrix f_table;  // |X| x k, f(x)
  Matrix g_table;  // |Y| x k, g(y)
  double h_opt = 0.0;  // sum_{i<=k} sigma_i^2
  double rho = 0.0;    // E[f(X)^T g(Y)] = sum_{i<=k} sigma_i
  Vector sigma;        // per-feature correlations, non-increasing
  int iterations = 0;  // ACE sweeps; 0 for the SVD route
};

// Minimum-error-probability features from the top-k right singular vectors:
// f_i(x) = v_i(x) / sqrt(P(x)), g_i(y) = u_i(y) / sqrt(P(y)). Throws RankError
// when k exceeds the DTM rank.
OptimalFeatures optimal_features(const JointDistribution& joint, int k);

struct AceOptions {
  double tol = 1e-12;
  int max_iter = 100000;
  std::uint64_t seed = 0;
};

// Alternating conditional expectations: g <- E[f(X)|Y], f <- E[g(Y)|X], with
// f re-centred and symmetrically whitened under P_X after every sweep. Stops
// once the objective E[f^T g] moves by less than tol. The returned features
// are rotated onto the canonical correlation directions of the subspace.
OptimalFeatures ace(const JointDistribution& joint, int k,
                    const AceOptions& options = {});

// sum_{i<=k} sigma_i; k larger than the rank sums the whole spectrum.
double hgr_correlation(const JointDistribution& joint, int k);

// Phi = [sqrt(P_X)] F for a feature table F (|X| x k).
struct PhiEmbedding {
  Matrix phi;
};
PhiEmbedding phi_embedding(const Matrix& f_table, const Vector& p_x);

// argmin_Psi |B - Psi Phi^T|_F = B Phi (Phi^T Phi)^+
Matrix optimal_psi(const Dtm& b, const PhiEmbedding& phi);

// |B|_F^2 - |B Phi (Phi^T Phi)^{-1/2}|_F^2. For zero-mean f this equals
// |B|_F^2 - H(f).
double residual_logloss_proxy(const Dtm& b, const PhiEmbedding& phi);

// |B Phi (Phi^T Phi)^{-1/2}|_F^2 (pseudo-inverse square root).
double projected_dtm_energy(const Dtm& b, const PhiEmbedding& phi);

// Trace-form H-score of a feature table evaluated on the exact joint:
// covariances under P_X, conditional means under P_{X|Y}.
HScoreReport exact_h_score(const Matrix& f_table, const JointDistribution& joint,
                           InverseMode mode = InverseMode::pseudo());

}  // namespace xfer

#endif  // XFER_DTM_HPP_
