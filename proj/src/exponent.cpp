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

#include "xfer/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "xfer/dtm.hpp"
#include "xfer/error.hpp"
#include "xfer/parallel.hpp"
#include "xfer/stats.hpp"

namespace xfer {
namespace {

constexpr std::int64_t kTrialsPerStream = 4096;

void check_distribution(const Vector& p, const char* name) {
  if (!p.allFinite() || (p.array() < 0.0).any()) {
    throw DataError(std::string(name) + " has negative or non-finite entries");
  }
  if (std::abs(p.sum() - 1.0) > 1e-9) {
    throw DataError(std::string(name) + " does not sum to 1");
  }
}

double chi_square(const Vector& p, const Vector& p0) {
  return ((p - p0).array().square() / p0.array()).sum();
}

}  // namespace

LocalPair::LocalPair(Vector reference, Vector first, Vector second, double eps)
    : p0(std::move(reference)),
      p1(std::move(first)),
      p2(std::move(second)),
      epsilon(eps) {
  if (p0.size() < 2 || p1.size() != p0.size() || p2.size() != p0.size()) {
    throw DataError("local pair distributions must share an alphabet of size >= 2");
  }
  check_distribution(p0, "P0");
  check_distribution(p1, "P1");
  check_distribution(p2, "P2");
  if ((p0.array() <= 0.0).any()) {
    throw DataError("reference distribution P0 must be strictly positive");
  }
  if (!(epsilon > 0.0)) throw DataError("epsilon must be positive");
  const double radius = epsilon * epsilon * (1.0 + 1e-9);
  if (chi_square(p1, p0) > radius || chi_square(p2, p0) > radius) {
    std::ostringstream os;
    os.precision(6);
    os << "P1/P2 lie outside the epsilon-neighbourhood of P0 (chi2 = "
       << chi_square(p1, p0) << ", " << chi_square(p2, p0)
       << ", eps^2 = " << epsilon * epsilon << ")";
    throw DataError(os.str());
  }
}

std::vector<std::string> LocalPair::warnings() const {
  std::vector<std::string> out;
  if (epsilon > kLocalEpsilonWarning) {
    std::ostringstream os;
    os << "epsilon = " << epsilon << " exceeds " << kLocalEpsilonWarning
       << "; local approximations drop o(eps^2) terms";
    out.push_back(os.str());
  }
  return out;
}

Vector perturbation_vector(const Vector& p_i, const Vector& p0, double epsilon) {
  if (p_i.size() != p0.size()) throw DataError("distribution sizes differ");
  if ((p0.array() <= 0.0).any()) {
    throw DataError("reference distribution has a zero entry");
  }
  if (!(epsilon > 0.0)) throw DataError("epsilon must be positive");
  return ((p_i - p0).array() / (epsilon * p0.array().sqrt())).matrix();
}

InformationVector information_vector(const Vector& f, const Vector& p0) {
  if (f.size() != p0.size()) throw DataError("feature and P0 sizes differ");
  const double mean = f.dot(p0);
  const Vector centered = f.array() - mean;
  const double var = centered.array().square().matrix().dot(p0);
  if (!(var > 1e-300) || var <= 1e-24 * f.squaredNorm()) {
    throw NumericalError("feature has zero variance under P0");
  }
  InformationVector out;
  const double sd = std::sqrt(var);
  out.normalized = std::abs(mean) > 1e-12 || std::abs(var - 1.0) > 1e-12;
  out.xi = (p0.array().sqrt() * centered.array() / sd).matrix();
  return out;
}

ExponentReport mismatched_exponent(const Matrix& f_table, const LocalPair& pair) {
  if (f_table.rows() != pair.p0.size()) {
    throw DataError("feature table rows must match the alphabet size");
  }
  const Vector& p0 = pair.p0;
  const Eigen::RowVectorXd mean = p0.transpose() * f_table;
  const Matrix centered = f_table.rowwise() - mean;
  const Matrix cov = centered.transpose() * p0.asDiagonal() * centered;
  const SpectralInverse inv =
      spectral_inverse(0.5 * (cov + cov.transpose()), InverseMode::pseudo());
  // Columns of xi are orthonormal information vectors sqrt(P0) f_i.
  const Matrix xi = p0.cwiseSqrt().asDiagonal() * centered * inv.whitener;
  const Vector delta = perturbation_vector(pair.p1, p0, pair.epsilon) -
                       perturbation_vector(pair.p2, p0, pair.epsilon);
  const double scale = pair.epsilon * pair.epsilon / 8.0;

  ExponentReport report;
  report.dimension = inv.rank;
  report.optimal = scale * delta.squaredNorm();
  report.predicted = scale * (xi.transpose() * delta).squaredNorm();
  report.ratio = report.optimal > 0.0 ? report.predicted / report.optimal : 0.0;
  return report;
}

double pair_h_score(const Matrix& f_table, const LocalPair& pair) {
  Matrix table(2, pair.p0.size());
  table.row(0) = 0.5 * pair.p1.transpose();
  table.row(1) = 0.5 * pair.p2.transpose();
  const JointDistribution joint(table, true);
  // Pruned symbols carry no mass under either hypothesis.
  return exact_h_score(f_table(joint.kept_x(), Eigen::all), joint).value;
}

SimulationResult simulate_error_rate(const Matrix& f_table, const Vector& p1,
                                     const Vector& p2,
                                     const SimulationOptions& options) {
  const Index nx = f_table.rows();
  if (p1.size() != nx || p2.size() != nx) {
    throw DataError("feature table rows must match the alphabet size");
  }
  check_distribution(p1, "P1");
  check_distribution(p2, "P2");
  if (f_table.cols() < 1 || !f_table.allFinite()) {
    throw DataError("feature table must have finite columns");
  }
  const auto& sizes = options.sample_sizes;
  if (sizes.size() < 3) throw DataError("need at least 3 sample sizes");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 1 || (i && sizes[i] <= sizes[i - 1])) {
      throw DataError("sample sizes must be positive and strictly increasing");
    }
  }
  if (options.trials < 1) throw DataError("trials must be positive");

  // Scalar statistic per symbol.
  Vector score = f_table.col(0);
  if (f_table.cols() > 1) {
    const Vector direction = f_table.transpose() * (p1 - p2);
    score = direction.squaredNorm() > 0.0 ? Vector(f_table * direction)
                                          : Vector(f_table.rowwise().sum());
  }
  const double mean1 = score.dot(p1);
  const double mean2 = score.dot(p2);
  const double threshold = 0.5 * (mean1 + mean2);
  // Decide P1 when l lies on mean1's side of the threshold.
  const double orientation = mean1 >= mean2 ? 1.0 : -1.0;

  SimulationResult result;
  const std::int64_t streams =
      (options.trials + kTrialsPerStream - 1) / kTrialsPerStream;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const int m = sizes[si];
    // Errors in half units so that ties count 1/2.
    std::vector<std::int64_t> half_errors(static_cast<std::size_t>(streams), 0);
    parallel_for(0, static_cast<std::size_t>(streams), [&](std::size_t s) {
      std::seed_seq seq{static_cast<std::uint64_t>(options.seed),
                        static_cast<std::uint64_t>(si),
                        static_cast<std::uint64_t>(s)};
      std::mt19937_64 rng(seq);
      const std::int64_t begin = static_cast<std::int64_t>(s) * kTrialsPerStream;
      const std::int64_t end = std::min(options.trials, begin + kTrialsPerStream);
      std::int64_t local = 0;
      for (std::int64_t t = begin; t < end; ++t) {
        for (int hyp = 0; hyp < 2; ++hyp) {
          const Vector& p = hyp == 0 ? p1 : p2;
          int remaining = m;
          double mass = 1.0;
          double total = 0.0;
          for (Index x = 0; x < nx && remaining > 0; ++x) {
            int count = remaining;
            if (x + 1 < nx) {
              const double q = mass > 0.0 ? std::clamp(p(x) / mass, 0.0, 1.0) : 1.0;
              count = std::binomial_distribution<int>(remaining, q)(rng);
            }
            total += count * score(x);
            remaining -= count;
            mass -= p(x);
          }
          const double side = orientation * (total / m - threshold);
          if (side == 0.0) {
            local += 1;
          } else if ((hyp == 0) == (side < 0.0)) {
            local += 2;
          }
        }
      }
      half_errors[s] = local;
    });
    std::int64_t sum = 0;
    for (auto e : half_errors) sum += e;
    SizeEstimate est;
    est.sample_size = m;
    // P_e = (alpha + beta) / 2, errors counted in halves.
    est.error_rate = static_cast<double>(sum) /
                     (4.0 * static_cast<double>(options.trials));
    est.dropped = sum == 0;
    est.used_in_fit = si > 0 && !est.dropped;
    result.sizes.push_back(est);
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& est : result.sizes) {
    if (!est.used_in_fit) continue;
    const double x = est.sample_size;
    const double y = -std::log(est.error_rate);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) {
    throw NumericalError(
        "insufficient trials: fewer than 2 sample sizes observed any error");
  }
  const double denom = n * sxx - sx * sx;
  result.slope = (n * sxy - sx * sy) / denom;
  result.intercept = (sy - result.slope * sx) / n;
  return result;
}

}  // namespace xfer
