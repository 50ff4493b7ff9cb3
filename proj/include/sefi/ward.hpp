#pragma once

#include <Eigen/Core>

#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace sefi {

struct MergeEvent {
  int cluster_a = 0;  // surviving label (the lower one)
  int cluster_b = 0;  // absorbed label
  double distance = 0.0;
};

struct MergeTree {
  std::vector<MergeEvent> events;
  int final_k = 0;
};

struct MergeResult {
  MergeTree tree;
  std::vector<int> assignment;  // compacted to [1..final_k]
  std::vector<int> cluster_map; // original label - 1 -> merged label
};

/// Increase in within-cluster SSE when joining two clusters.
template <typename DerivedA, typename DerivedB>
double ward_distance(const Eigen::MatrixBase<DerivedA>& centroid_a, double size_a,
                     const Eigen::MatrixBase<DerivedB>& centroid_b, double size_b) {
  if (size_a + size_b <= 0.0) return 0.0;
  return size_a * size_b / (size_a + size_b) *
         static_cast<double>((centroid_a.template cast<double>() - centroid_b.template cast<double>()).squaredNorm());
}

/// Agglomerates centroid clusters with Ward linkage until `final_k` remain, or
/// (when `threshold` is set) until the next merge would cost more than it.
/// Ties go to the lowest (a, b) label pair. Labels in `assignment` are 1-based.
template <typename Derived>
MergeResult hierarchical_merge(const Eigen::MatrixBase<Derived>& centroids, const std::vector<std::size_t>& sizes,
                               const std::vector<int>& assignment, int final_k,
                               std::optional<double> threshold = std::nullopt) {
  const int k = static_cast<int>(centroids.rows());
  if (static_cast<int>(sizes.size()) != k) throw std::invalid_argument("cluster size list does not match centroids");
  if (final_k < 1 || final_k > k) throw std::invalid_argument("final_k must be in [1, k]");

  Eigen::MatrixXd centers = centroids.template cast<double>();
  std::vector<double> weight(sizes.begin(), sizes.end());
  std::vector<bool> active(static_cast<std::size_t>(k), true);
  std::vector<int> parent(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) parent[static_cast<std::size_t>(i)] = i;

  MergeResult out;
  int remaining = k;
  while (remaining > final_k) {
    double best = std::numeric_limits<double>::infinity();
    int best_a = -1, best_b = -1;
    for (int a = 0; a < k; ++a) {
      if (!active[static_cast<std::size_t>(a)]) continue;
      for (int b = a + 1; b < k; ++b) {
        if (!active[static_cast<std::size_t>(b)]) continue;
        const double dist = ward_distance(centers.row(a), weight[static_cast<std::size_t>(a)], centers.row(b),
                                          weight[static_cast<std::size_t>(b)]);
        if (dist < best) {
          best = dist;
          best_a = a;
          best_b = b;
        }
      }
    }
    if (threshold && best > *threshold) break;

    const double wa = weight[static_cast<std::size_t>(best_a)], wb = weight[static_cast<std::size_t>(best_b)];
    if (wa + wb > 0.0) centers.row(best_a) = (wa * centers.row(best_a) + wb * centers.row(best_b)) / (wa + wb);
    weight[static_cast<std::size_t>(best_a)] = wa + wb;
    active[static_cast<std::size_t>(best_b)] = false;
    for (auto& p : parent)
      if (p == best_b) p = best_a;
    out.tree.events.push_back({best_a + 1, best_b + 1, best});
    --remaining;
  }
  out.tree.final_k = remaining;

  // Surviving roots in ascending order become labels 1..remaining.
  std::vector<int> compact(static_cast<std::size_t>(k), 0);
  int next = 0;
  for (int i = 0; i < k; ++i)
    if (active[static_cast<std::size_t>(i)]) compact[static_cast<std::size_t>(i)] = ++next;
  out.cluster_map.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    out.cluster_map[static_cast<std::size_t>(i)] = compact[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
  out.assignment.reserve(assignment.size());
  for (int label : assignment) {
    if (label < 1 || label > k) throw std::invalid_argument("assignment label out of range");
    out.assignment.push_back(out.cluster_map[static_cast<std::size_t>(label - 1)]);
  }
  return out;
}

}  // namespace sefi
