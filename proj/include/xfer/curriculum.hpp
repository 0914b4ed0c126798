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

#ifndef XFER_CURRICULUM_HPP_
#define XFER_CURRICULUM_HPP_

#include <string>
#include <vector>

#include <json.hpp>

#include "xfer/stats.hpp"
#include "xfer/types.hpp"

namespace xfer {

// A task evaluated on the shared input set: its own trained features and its
// labels. Every task in a batch has the same m.
struct CurriculumTask {
  std::string task_id;
  FeatureMatrix features;
  LabelVector labels;
};

// raw(i, j) is the H-score of task i's features on task j's labels;
// m(i, j) = raw(i, j) / raw(j, j), so the diagonal of m is exactly 1.
struct TransferabilityMatrix {
  Matrix raw;
  Matrix m;
  std::vector<std::string> task_ids;
};

TransferabilityMatrix transferability_matrix(
    const std::vector<CurriculumTask>& tasks,
    InverseMode mode = InverseMode::pseudo());

// Edge {i, j} is present iff max(M(i,j), M(j,i)) >= alpha, with weight
// 1 - max(M(i,j), M(j,i)). Weights are symmetric; absent entries are zero.
struct TaskGraph {
  int n = 0;
  double alpha = 0.0;
  Matrix weights;
  std::vector<char> present;  // n x n row-major, diagonal always false

  bool has_edge(int i, int j) const {
    return present[static_cast<std::size_t>(i * n + j)] != 0;
  }
  std::size_t edge_count() const;
};

TaskGraph build_graph(const Matrix& m, double alpha);

// Linearly interpolated p-th percentile of {max(M(i,j), M(j,i)) : i < j}.
double percentile_threshold(const Matrix& m, double percentile);

struct UndirectedEdge {
  int a = 0;  // a < b
  int b = 0;
  double weight = 0.0;
};

struct SpanningForest {
  int n = 0;
  std::vector<UndirectedEdge> edges;  // in the order Kruskal accepted them
  std::vector<int> component;         // smallest task index in each component
  int component_count = 0;
  double total_weight = 0.0;
};

// Kruskal's algorithm; equal weights are taken in (a, b) order.
SpanningForest spanning_forest(const TaskGraph& graph);

struct DirectedEdge {
  int src = 0;
  int dst = 0;
  double weight = 0.0;
  double m_ij = 0.0;  // M(src, dst)
  double m_ji = 0.0;  // M(dst, src)
};

struct CurriculumForest {
  std::vector<DirectedEdge> edges;
  std::vector<int> component;
  int component_count = 0;
};

// {i, j} becomes i -> j iff M(i,j) >= M(j,i); exact ties point from the lower
// index to the higher.
CurriculumForest orient_edges(const SpanningForest& forest, const Matrix& m);

// Clusters are numbered 0..n-1 for the leaves and n + t for the cluster formed
// by merge t.
struct Merge {
  int left = 0;  // left < right
  int right = 0;
  double height = 0.0;
  int size = 0;
};

struct Dendrogram {
  int n = 0;
  std::vector<Merge> merges;  // n - 1 entries, heights non-decreasing
};

// Average-linkage agglomerative clustering of the rows of `vectors` under
// Euclidean distance. Equal distances merge the lexicographically smallest
// (left, right) cluster pair first.
Dendrogram cluster_tasks(const Matrix& vectors);

// Item ids ordered best first.
using Ranking = std::vector<std::string>;

double spearman(const Ranking& a, const Ranking& b);

// Spearman's coefficient of two score vectors: the Pearson correlation of
// their average ranks. Throws DataError when either vector is constant.
double spearman(const Vector& x, const Vector& y);

std::vector<double> average_ranks(const Vector& scores);

enum class RelevanceMode {
  kReverseRank,      // relevance(item) = n - rank_b(item), ranks from 1
  kExponentialGain,  // 2^(n - rank_b(item)) - 1
};

struct DcgResult {
  double dcg = 0.0;
  double ideal = 0.0;
  double normalized = 0.0;  // dcg / ideal, or 1 when ideal is 0
};

// DCG of ordering `a` against relevance taken from ordering `b`, discounted by
// 1 / log2(rank_a + 1).
DcgResult dcg_similarity(const Ranking& a, const Ranking& b,
                         RelevanceMode mode = RelevanceMode::kReverseRank);

nlohmann::ordered_json curriculum_json(const CurriculumForest& forest,
                                       double alpha,
                                       const std::vector<std::string>& ids);
nlohmann::ordered_json dendrogram_json(const Dendrogram& dendrogram,
                                       const std::vector<std::string>& ids);
std::string forest_dot(const CurriculumForest& forest,
                       const std::vector<std::string>& ids);

}  // namespace xfer

#endif  // XFER_CURRICULUM_HPP_
