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

#include "xfer/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "xfer/error.hpp"
#include "xfer/parallel.hpp"

namespace xfer {
namespace {

constexpr double kDegenerateSelfScore = 1e-14;

int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    auto& p = parent[static_cast<std::size_t>(x)];
    p = parent[static_cast<std::size_t>(p)];
    x = p;
  }
  return x;
}

std::vector<int> components_from(std::vector<int>& parent, int* count) {
  const int n = static_cast<int>(parent.size());
  std::vector<int> smallest(static_cast<std::size_t>(n), n);
  for (int i = 0; i < n; ++i) {
    auto& s = smallest[static_cast<std::size_t>(find_root(parent, i))];
    s = std::min(s, i);
  }
  std::vector<int> component(static_cast<std::size_t>(n));
  int distinct = 0;
  for (int i = 0; i < n; ++i) {
    const int c = smallest[static_cast<std::size_t>(find_root(parent, i))];
    component[static_cast<std::size_t>(i)] = c;
    if (c == i) ++distinct;
  }
  *count = distinct;
  return component;
}

void require_square(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 2) {
    throw DataError("transferability matrix must be square with n >= 2");
  }
}

std::map<std::string, int> positions(const Ranking& ranking) {
  std::map<std::string, int> pos;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (!pos.emplace(ranking[i], static_cast<int>(i) + 1).second) {
      throw DataError("ranking lists '" + ranking[i] + "' twice");
    }
  }
  return pos;
}

void require_same_items(const std::map<std::string, int>& a,
                        const std::map<std::string, int>& b) {
  if (a.size() != b.size() ||
      !std::equal(a.begin(), a.end(), b.begin(),
                  [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw DataError("rankings do not cover the same items");
  }
}

double rank_difference_formula(const std::vector<double>& ra,
                               const std::vector<double>& rb) {
  const auto n = static_cast<double>(ra.size());
  if (ra.size() < 2) throw DataError("spearman needs at least 2 items");
  double d2 = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  }
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

// Pearson correlation of rank vectors; matches the difference formula when
// there are no ties.
double rank_correlation(const std::vector<double>& ra,
                        const std::vector<double>& rb) {
  if (ra.size() < 2) throw DataError("spearman needs at least 2 items");
  const Eigen::Map<const Vector> a(ra.data(), static_cast<Index>(ra.size()));
  const Eigen::Map<const Vector> b(rb.data(), static_cast<Index>(rb.size()));
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  const double denom = ca.norm() * cb.norm();
  if (!(denom > 0.0)) throw DataError("spearman is undefined for constant scores");
  return ca.dot(cb) / denom;
}

}  // namespace

TransferabilityMatrix transferability_matrix(
    const std::vector<CurriculumTask>& tasks, InverseMode mode) {
  const auto n = tasks.size();
  if (n < 2) throw DataError("a transferability matrix needs at least 2 tasks");
  const Index m = tasks.front().features.sample_count();
  std::string offenders;
  for (const auto& task : tasks) {
    if (task.features.sample_count() != m ||
        static_cast<Index>(task.labels.size()) != m) {
      offenders += (offenders.empty() ? "" : ", ") + task.task_id;
    }
  }
  if (!offenders.empty()) {
    throw DataError("tasks disagree on the sample count (expected " +
                    std::to_string(m) + "): " + offenders);
  }

  TransferabilityMatrix out;
  const auto size = static_cast<Index>(n);
  out.raw = Matrix::Zero(size, size);
  for (const auto& task : tasks) out.task_ids.push_back(task.task_id);

  parallel_for(0, n, [&](std::size_t i) {
    const HScorer scorer(tasks[i].features, mode);
    for (std::size_t j = 0; j < n; ++j) {
      out.raw(static_cast<Index>(i), static_cast<Index>(j)) =
          scorer.value(tasks[j].labels);
    }
  });

  out.m = Matrix::Zero(size, size);
  for (Index j = 0; j < size; ++j) {
    const double self = out.raw(j, j);
    if (!(self > kDegenerateSelfScore)) {
      throw DegenerateTaskError("task '" + tasks[static_cast<std::size_t>(j)].task_id +
                                "' has zero H-score on its own labels");
    }
    out.m.col(j) = out.raw.col(j) / self;
    out.m(j, j) = 1.0;
  }
  return out;
}

std::size_t TaskGraph::edge_count() const {
  return static_cast<std::size_t>(std::count(present.begin(), present.end(), 1)) / 2;
}

TaskGraph build_graph(const Matrix& m, double alpha) {
  require_square(m);
  if (!(alpha >= 0.0)) throw DataError("alpha must be non-negative");
  TaskGraph graph;
  graph.n = static_cast<int>(m.rows());
  graph.alpha = alpha;
  graph.weights = Matrix::Zero(m.rows(), m.cols());
  graph.present.assign(static_cast<std::size_t>(graph.n * graph.n), 0);
  for (int i = 0; i < graph.n; ++i) {
    for (int j = i + 1; j < graph.n; ++j) {
      const double best = std::max(m(i, j), m(j, i));
      if (!(best >= alpha)) continue;
      graph.weights(i, j) = graph.weights(j, i) = 1.0 - best;
      graph.present[static_cast<std::size_t>(i * graph.n + j)] = 1;
      graph.present[static_cast<std::size_t>(j * graph.n + i)] = 1;
    }
  }
  return graph;
}

double percentile_threshold(const Matrix& m, double percentile) {
  require_square(m);
  if (!(percentile >= 0.0 && percentile <= 100.0)) {
    throw DataError("percentile must lie in [0, 100]");
  }
  std::vector<double> values;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = i + 1; j < m.cols(); ++j) {
      values.push_back(std::max(m(i, j), m(j, i)));
    }
  }
  std::sort(values.begin(), values.end());
  const double pos = percentile / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

SpanningForest spanning_forest(const TaskGraph& graph) {
  std::vector<UndirectedEdge> candidates;
  for (int a = 0; a < graph.n; ++a) {
    for (int b = a + 1; b < graph.n; ++b) {
      if (graph.has_edge(a, b)) candidates.push_back({a, b, graph.weights(a, b)});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const UndirectedEdge& x, const UndirectedEdge& y) {
              return std::tie(x.weight, x.a, x.b) < std::tie(y.weight, y.a, y.b);
            });

  SpanningForest forest;
  forest.n = graph.n;
  std::vector<int> parent(static_cast<std::size_t>(graph.n));
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& edge : candidates) {
    const int ra = find_root(parent, edge.a);
    const int rb = find_root(parent, edge.b);
    if (ra == rb) continue;
    parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
    forest.edges.push_back(edge);
    forest.total_weight += edge.weight;
  }
  forest.component = components_from(parent, &forest.component_count);
  return forest;
}

CurriculumForest orient_edges(const SpanningForest& forest, const Matrix& m) {
  require_square(m);
  if (m.rows() != forest.n) {
    throw DataError("forest and transferability matrix sizes differ");
  }
  CurriculumForest out;
  out.component = forest.component;
  out.component_count = forest.component_count;
  for (const auto& edge : forest.edges) {
    const bool forward = m(edge.a, edge.b) >= m(edge.b, edge.a);
    const int src = forward ? edge.a : edge.b;
    const int dst = forward ? edge.b : edge.a;
    out.edges.push_back({src, dst, edge.weight, m(src, dst), m(dst, src)});
  }
  return out;
}

Dendrogram cluster_tasks(const Matrix& vectors) {
  const auto n = static_cast<int>(vectors.rows());
  if (n < 2) throw DataError("clustering needs at least 2 tasks");
  if (!vectors.allFinite()) throw DataError("task vectors must be finite");

  // Active clusters keyed by id; dist holds the average-linkage distances.
  const int total = 2 * n - 1;
  Matrix dist = Matrix::Zero(total, total);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      dist(i, j) = dist(j, i) = (vectors.row(i) - vectors.row(j)).norm();
    }
  }
  std::vector<int> active(static_cast<std::size_t>(n));
  std::iota(active.begin(), active.end(), 0);
  std::vector<int> size(static_cast<std::size_t>(total), 1);

  Dendrogram out;
  out.n = n;
  for (int step = 0; step < n - 1; ++step) {
    int best_a = -1, best_b = -1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < active.size(); ++x) {
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const int a = active[x], b = active[y];
        if (dist(a, b) < best) {
          best = dist(a, b);
          best_a = a;
          best_b = b;
        }
      }
    }
    const int merged = n + step;
    const int sa = size[static_cast<std::size_t>(best_a)];
    const int sb = size[static_cast<std::size_t>(best_b)];
    size[static_cast<std::size_t>(merged)] = sa + sb;
    for (int c : active) {
      if (c == best_a || c == best_b) continue;
      const double d = (sa * dist(best_a, c) + sb * dist(best_b, c)) / (sa + sb);
      dist(merged, c) = dist(c, merged) = d;
    }
    std::erase(active, best_a);
    std::erase(active, best_b);
    active.push_back(merged);
    out.merges.push_back({best_a, best_b, best, sa + sb});
  }
  return out;
}

std::vector<double> average_ranks(const Vector& scores) {
  const auto n = static_cast<std::size_t>(scores.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Index>(a)) < scores(static_cast<Index>(b));
  });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores(static_cast<Index>(order[j + 1])) ==
                            scores(static_cast<Index>(order[i]))) {
      ++j;
    }
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = shared;
    i = j + 1;
  }
  return ranks;
}

double spearman(const Ranking& a, const Ranking& b) {
  const auto pa = positions(a);
  const auto pb = positions(b);
  require_same_items(pa, pb);
  std::vector<double> ra, rb;
  for (const auto& [item, rank] : pa) {
    ra.push_back(rank);
    rb.push_back(pb.at(item));
  }
  return rank_difference_formula(ra, rb);
}

double spearman(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw DataError("score vectors differ in length");
  if (!x.allFinite() || !y.allFinite()) throw DataError("scores must be finite");
  return rank_correlation(average_ranks(x), average_ranks(y));
}

DcgResult dcg_similarity(const Ranking& a, const Ranking& b,
                         RelevanceMode mode) {
  const auto pa = positions(a);
  const auto pb = positions(b);
  require_same_items(pa, pb);
  const auto n = static_cast<int>(a.size());
  auto gain = [&](int rank_b) {
    const double rel = n - rank_b;
    return mode == RelevanceMode::kReverseRank ? rel : std::exp2(rel) - 1.0;
  };
  DcgResult out;
  for (int i = 0; i < n; ++i) {
    const double discount = 1.0 / std::log2(static_cast<double>(i) + 2.0);
    out.dcg += gain(pb.at(a[static_cast<std::size_t>(i)])) * discount;
    out.ideal += gain(i + 1) * discount;
  }
  out.normalized = out.ideal > 0.0 ? out.dcg / out.ideal : 1.0;
  return out;
}

nlohmann::ordered_json curriculum_json(const CurriculumForest& forest,
                                       double alpha,
                                       const std::vector<std::string>& ids) {
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const auto& e : forest.edges) {
    edges.push_back({{"src", ids.at(static_cast<std::size_t>(e.src))},
                     {"dst", ids.at(static_cast<std::size_t>(e.dst))},
                     {"weight", e.weight},
                     {"m_ij", e.m_ij},
                     {"m_ji", e.m_ji}});
  }
  std::map<int, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < forest.component.size(); ++i) {
    groups[forest.component[i]].push_back(ids.at(i));
  }
  nlohmann::ordered_json components = nlohmann::ordered_json::array();
  for (auto& [root, members] : groups) components.push_back(members);
  nlohmann::ordered_json out;
  out["alpha"] = alpha;
  out["components"] = components;
  out["edges"] = edges;
  return out;
}

nlohmann::ordered_json dendrogram_json(const Dendrogram& dendrogram,
                                       const std::vector<std::string>& ids) {
  nlohmann::ordered_json merges = nlohmann::ordered_json::array();
  for (const auto& merge : dendrogram.merges) {
    merges.push_back({{"left", merge.left},
                      {"right", merge.right},
                      {"height", merge.height},
                      {"size", merge.size}});
  }
  nlohmann::ordered_json out;
  out["leaves"] = ids;
  out["merges"] = merges;
  return out;
}

std::string forest_dot(const CurriculumForest& forest,
                       const std::vector<std::string>& ids) {
  std::ostringstream dot;
  dot.precision(17);
  dot << "digraph curriculum {\n";
  for (const auto& id : ids) dot << "  \"" << id << "\";\n";
  for (const auto& e : forest.edges) {
    dot << "  \"" << ids.at(static_cast<std::size_t>(e.src)) << "\" -> \""
        << ids.at(static_cast<std::size_t>(e.dst)) << "\" [weight=" << e.weight
        << "];\n";
  }
  dot << "}\n";
  return dot.str();
}

}  // namespace xfer
