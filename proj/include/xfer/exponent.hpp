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

#ifndef XFER_EXPONENT_HPP_
#define XFER_EXPONENT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "xfer/types.hpp"

namespace xfer {

// Two hypotheses P1, P2 inside the chi-square ball of radius epsilon around a
// reference P0: sum_x (P_i(x) - P0(x))^2 / P0(x) <= epsilon^2.
struct LocalPair {
  Vector p0, p1, p2;
  double epsilon = 0.05;

  // Validates the invariants; throws DataError when they do not hold.
  LocalPair(Vector reference, Vector first, Vector second, double eps);

  // Non-fatal notes, e.g. epsilon beyond the small-perturbation regime.
  std::vector<std::string> warnings() const;
};

// Above this epsilon the dropped o(eps^2) terms are no longer negligible.
inline constexpr double kLocalEpsilonWarning = 0.2;

// phi_i(x) = (P_i(x) - P0(x)) / (epsilon sqrt(P0(x)))
Vector perturbation_vector(const Vector& p_i, const Vector& p0, double epsilon);

struct InformationVector {
  Vector xi;              // sqrt(P0(x)) f(x) for the normalized f
  bool normalized = false;  // f had to be centred or rescaled first
};
// xi(x) = sqrt(P0(x)) f(x), after normalizing f to zero mean and unit
// variance under P0. Throws NumericalError for a constant f.
InformationVector information_vector(const Vector& f, const Vector& p0);

struct ExponentReport {
  double predicted = 0.0;  // (eps^2/8) sum_i <xi_i, phi1 - phi2>^2
  double optimal = 0.0;    // (eps^2/8) |phi1 - phi2|^2
  double ratio = 0.0;      // predicted / optimal, 0 when optimal is 0
  Index dimension = 0;     // number of orthonormal directions used
};

// Error exponent of the k-dimensional mean statistic built from the feature
// columns of f_table (|X| x k), whitened under P0. The o(eps^2) remainder is
// dropped.
ExponentReport mismatched_exponent(const Matrix& f_table, const LocalPair& pair);

// H-score of f_table for the binary task with P(X|Y=0) = P1, P(X|Y=1) = P2
// and equal priors, evaluated on the exact joint.
double pair_h_score(const Matrix& f_table, const LocalPair& pair);

struct SimulationOptions {
  std::vector<int> sample_sizes;  // strictly increasing, at least 3 entries
  std::int64_t trials = 100000;
  std::uint64_t seed = 0;
};

struct SizeEstimate {
  int sample_size = 0;
  double error_rate = 0.0;  // equal-prior overall error probability
  bool used_in_fit = false;
  bool dropped = false;     // no errors observed, -log is undefined
};

struct SimulationResult {
  double slope = 0.0;       // fitted exponent (per sample, natural log)
  double intercept = 0.0;
  std::vector<SizeEstimate> sizes;
};

// Monte-Carlo equal-prior test between P1 and P2 using l = (1/m) sum f(x_i).
// For k > 1 the statistic is projected on E_P1[f] - E_P2[f]. The threshold is
// the midpoint of the two means; ties count as half an error. The exponent is
// the least-squares slope of -log P_e against m, skipping the smallest size.
SimulationResult simulate_error_rate(const Matrix& f_table, const Vector& p1,
                                     const Vector& p2,
                                     const SimulationOptions& options);

}  // namespace xfer

#endif  // XFER_EXPONENT_HPP_
