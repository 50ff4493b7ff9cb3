#pragma once

#include "sefi/parallel.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace sefi {

struct KMeansOptions {
  int k = 2;
  std::uint64_t seed = 0;
  int max_iter = 300;
  double tol = 1e-4;  // on the largest centroid displacement
  int threads = 1;
};

template <typename Scalar>
struct KMeansResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> centroids;  // k×d
  std::vector<int> assignment;          // labels in [1..k]
  Scalar inertia = 0;                   // SSE of assignment against centroids
  int iterations = 0;
  std::uint64_t seed = 0;
  std::vector<Scalar> inertia_trace;    // SSE after each assignment step, then the final SSE

  int k() const { return static_cast<int>(centroids.rows()); }
  std::vector<std::size_t> cluster_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k()), 0);
    for (int a : assignment) ++sizes[static_cast<std::size_t>(a - 1)];
    return sizes;
  }
};

namespace detail {

template <typename Scalar, typename DerivedX, typename DerivedC>
Scalar squared_distance(const Eigen::MatrixBase<DerivedX>& x, Eigen::Index row, const Eigen::MatrixBase<DerivedC>& c,
                        Eigen::Index centroid) {
  return (x.row(row) - c.row(centroid)).squaredNorm();
}

/// Nearest centroid per row, ties to the lowest index. Returns (0-based label, distance²).
template <typename Scalar, typename DerivedX, typename DerivedC>
void assign_nearest(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedC>& c, int threads,
                    std::vector<int>& labels, std::vector<Scalar>& dist2) {
  const Eigen::Index n = x.rows();
  labels.resize(static_cast<std::size_t>(n));
  dist2.resize(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    Scalar best = std::numeric_limits<Scalar>::infinity();
    int best_j = 0;
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      const Scalar d = squared_distance<Scalar>(x, row, c, j);
      if (d < best) {
        best = d;
        best_j = static_cast<int>(j);
      }
    }
    labels[i] = best_j;
    dist2[i] = best;
  });
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding. Rows of `x` are observations.
template <typename Derived>
KMeansResult<typename Derived::Scalar> kmeans(const Eigen::MatrixBase<Derived>& x, const KMeansOptions& opt) {
  using Scalar = typename Derived::Scalar;
  using Centroids = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const int k = opt.k;
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (k > n) throw std::invalid_argument("k (" + std::to_string(k) + ") exceeds the number of points (" +
                                         std::to_string(n) + ")");
  if (opt.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // k-means++: first center uniform, then proportional to squared distance.
  Centroids centroids(k, d);
  std::vector<Scalar> nearest(static_cast<std::size_t>(n), std::numeric_limits<Scalar>::infinity());
  Eigen::Index first = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
  centroids.row(0) = x.row(first);
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar dd = detail::squared_distance<Scalar>(x, i, centroids, j - 1);
      if (dd < nearest[static_cast<std::size_t>(i)]) nearest[static_cast<std::size_t>(i)] = dd;
      total += static_cast<double>(nearest[static_cast<std::size_t>(i)]);
    }
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      chosen = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double w = static_cast<double>(nearest[static_cast<std::size_t>(i)]);
        acc += w;
        if (w > 0.0 && acc > target) {
          chosen = i;
          break;
        }
      }
      if (chosen < 0) {  // rounding at the tail: last point with positive weight
        for (Eigen::Index i = n - 1; i >= 0; --i)
          if (nearest[static_cast<std::size_t>(i)] > 0) {
            chosen = i;
            break;
          }
      }
    } else {
      chosen = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
    }
    centroids.row(j) = x.row(chosen);
  }

  KMeansResult<Scalar> result;
  result.seed = opt.seed;
  std::vector<int> labels;
  std::vector<Scalar> dist2;
  Centroids updated(k, d);
  std::vector<std::size_t> counts(static_cast<std::size_t>(k));

  for (int iter = 1;; ++iter) {
    detail::assign_nearest<Scalar>(x, centroids, opt.threads, labels, dist2);
    Scalar sse = 0;
    for (const Scalar v : dist2) sse += v;
    result.inertia_trace.push_back(sse);

    updated.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
      updated.row(static_cast<Eigen::Index>(j)) += x.row(i);
      ++counts[j];
    }
    bool reseeded = false;
    for (int j = 0; j < k; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) {
        updated.row(j) /= static_cast<Scalar>(counts[static_cast<std::size_t>(j)]);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its own centroid.
      Eigen::Index far = 0;
      Scalar far_d = -1;
      for (Eigen::Index i = 0; i < n; ++i)
        if (dist2[static_cast<std::size_t>(i)] > far_d) {
          far_d = dist2[static_cast<std::size_t>(i)];
          far = i;
        }
      updated.row(j) = x.row(far);
      dist2[static_cast<std::size_t>(far)] = 0;
      reseeded = true;
    }

    Scalar shift = 0;
    for (int j = 0; j < k; ++j) shift = std::max(shift, (updated.row(j) - centroids.row(j)).norm());
    centroids.swap(updated);
    result.iterations = iter;
    if ((!reseeded && shift < static_cast<Scalar>(opt.tol)) || iter >= opt.max_iter) break;
  }

  // Final centroids are the means of the final assignment.
  result.assignment.resize(static_cast<std::size_t>(n));
  Scalar sse = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int j = labels[static_cast<std::size_t>(i)];
    result.assignment[static_cast<std::size_t>(i)] = j + 1;
    sse += detail::squared_distance<Scalar>(x, i, centroids, j);
  }
  result.inertia = sse;
  result.inertia_trace.push_back(sse);
  result.centroids = std::move(centroids);
  return result;
}

/// Assignment-implied sum of squared distances.
template <typename Derived, typename Scalar>
Scalar assignment_sse(const Eigen::MatrixBase<Derived>& x, const KMeansResult<Scalar>& r) {
  Scalar sse = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    sse += (x.row(i).template cast<Scalar>() - r.centroids.row(r.assignment[static_cast<std::size_t>(i)] - 1)).squaredNorm();
  return sse;
}

}  // namespace sefi
