#pragma once

// Independent reference computations used only by the tests. None of these
// share code paths with the library implementations they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace sefi::oracle {

/// ARI from raw agreement counts over all n(n-1)/2 point pairs.
inline double pair_counting_ari(const std::vector<int>& a, const std::vector<int>& b) {
  long double same_both = 0, same_a = 0, same_b = 0, diff_both = 0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      if (sa && sb) ++same_both;
      else if (sa) ++same_a;
      else if (sb) ++same_b;
      else ++diff_both;
    }
  // Steinley's form of the Hubert-Arabie index.
  const long double num = 2 * (diff_both * same_both - same_a * same_b);
  const long double den = (diff_both + same_a) * (same_a + same_both) + (diff_both + same_b) * (same_b + same_both);
  if (den == 0) return same_a == 0 && same_b == 0 ? 1.0 : 0.0;
  return static_cast<double>(num / den);
}

/// Sample covariance (n-1 denominator) of row-major data, explicit loops.
inline std::vector<std::vector<double>> covariance(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size(), c = rows.front().size();
  std::vector<double> mean(c, 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < c; ++j) mean[j] += r[j];
  for (auto& m : mean) m /= static_cast<double>(n);
  std::vector<std::vector<double>> cov(c, std::vector<double>(c, 0.0));
  for (const auto& r : rows)
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j = 0; j < c; ++j) cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
  for (auto& row : cov)
    for (auto& v : row) v /= static_cast<double>(n - 1);
  return cov;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = std::max(0.0, a[i][i]);
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

/// Minimum SSE over every assignment of 1D points to at most k groups.
inline double exhaustive_min_sse(const std::vector<double>& xs, int k) {
  const std::size_t n = xs.size();
  std::vector<int> label(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<double> sum(static_cast<std::size_t>(k), 0.0), sq(static_cast<std::size_t>(k), 0.0);
    std::vector<int> cnt(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[static_cast<std::size_t>(label[i])] += xs[i];
      sq[static_cast<std::size_t>(label[i])] += xs[i] * xs[i];
      ++cnt[static_cast<std::size_t>(label[i])];
    }
    double sse = 0.0;
    for (int j = 0; j < k; ++j)
      if (cnt[static_cast<std::size_t>(j)] > 0)
        sse += sq[static_cast<std::size_t>(j)] - sum[static_cast<std::size_t>(j)] * sum[static_cast<std::size_t>(j)] / cnt[static_cast<std::size_t>(j)];
    best = std::min(best, sse);
    std::size_t i = 0;
    while (i < n && ++label[i] == k) label[i++] = 0;
    if (i == n) break;
  }
  return best;
}

/// Direct 2D zero-padded convolution with the outer product of `taps`.
inline std::vector<std::vector<double>> direct_convolve(const std::vector<std::vector<double>>& in,
                                                        const std::vector<double>& taps) {
  const int r = static_cast<int>(taps.size() / 2);
  const int h = static_cast<int>(in.size()), w = static_cast<int>(in.front().size());
  std::vector<std::vector<double>> out(static_cast<std::size_t>(h), std::vector<double>(static_cast<std::size_t>(w), 0.0));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
          out[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] +=
              taps[static_cast<std::size_t>(dy + r)] * taps[static_cast<std::size_t>(dx + r)] *
              in[static_cast<std::size_t>(yy)][static_cast<std::size_t>(xx)];
        }
  return out;
}

/// Gaussian taps written out independently: exp(-i²/2σ²) for |i| ≤ ceil(4σ), unit sum.
inline std::vector<double> gaussian_taps(double sigma) {
  const int r = static_cast<int>(std::ceil(4 * sigma));
  std::vector<double> t;
  double s = 0;
  for (int i = -r; i <= r; ++i) {
    t.push_back(std::exp(-(i * i) / (2 * sigma * sigma)));
    s += t.back();
  }
  for (auto& v : t) v /= s;
  return t;
}

/// Ward cost of merging two 1D groups, from SSE before and after.
inline double ward_cost_1d(const std::vector<double>& a, const std::vector<double>& b) {
  auto sse = [](const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
  };
  std::vector<double> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  return sse(ab) - sse(a) - sse(b);
}

}  // namespace sefi::oracle
