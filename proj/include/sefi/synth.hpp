#pragma once

#include "sefi/image_io.hpp"
#include "sefi/io_util.hpp"
#include "sefi/points.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace sefi {

struct SynthConfig {
  std::uint64_t seed = 0;
  int height = 512;
  int width = 512;
  int n_niches = 6;
  int n_genes = 33;
  double density = 0.02;        // points per px²
  double concentration = 0.3;   // Dirichlet alpha of niche gene profiles
  double morph_signal = 0.8;    // 0: texture independent of niche
  std::vector<std::pair<int, int>> identical_profiles;  // 0-based niche pairs sharing one profile

  void validate() const;
  Provenance to_provenance() const;
};

struct SynthTissue {
  LabelArray truth;  // niche index + 1 per pixel
  PointCloud points;
  GrayImage image;
  std::vector<std::vector<double>> profiles;  // niche × gene probabilities
};

/// Voronoi niches with Dirichlet gene profiles, uniformly placed detections
/// and band-pass noise texture whose scale grows with the niche index.
SynthTissue generate(const SynthConfig& cfg);

}  // namespace sefi
