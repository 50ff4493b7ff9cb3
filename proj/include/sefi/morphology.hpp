#pragma once

#include "sefi/pca.hpp"
#include "sefi/tensor.hpp"

#include <cstdint>
#include <vector>

namespace sefi {

inline const std::vector<int> kDefaultScales = {4, 8, 16, 32};

/// Deterministic texture descriptors per pixel: for every window size s, the
/// local mean, local standard deviation, difference of Gaussians
/// (sigma s/4 minus sigma s/2) and 8-bin intensity entropy in bits.
FeatureTensor builtin_features(const GrayImage& img, const std::vector<int>& scales = kDefaultScales,
                               int threads = 1);

/// Bilinear resampling with pixel-center alignment; clamps at the edges.
/// Shrinking by a factor f >= 2 first applies an f-wide moving average.
FeatureTensor resample_to_grid(const FeatureTensor& t, int target_h, int target_w);

/// Fits PCA on up to `sample_cap` masked pixels drawn uniformly with `seed`.
PcaModel<double> fit_pca(const FeatureTensor& t, const Mask& mask, double variance_target,
                         std::size_t sample_cap = 100000, std::uint64_t seed = 0);

struct ReducedFeatures {
  FeatureTensor tensor;  // channels pc1..pcD
  PcaModel<double> model;
};

ReducedFeatures apply_pca(const FeatureTensor& t, const PcaModel<double>& model);

}  // namespace sefi
