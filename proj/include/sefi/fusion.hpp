#pragma once

#include "sefi/density.hpp"
#include "sefi/image_io.hpp"
#include "sefi/io_util.hpp"
#include "sefi/kmeans.hpp"
#include "sefi/morphology.hpp"
#include "sefi/ward.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace sefi {

struct PixelIndex {
  int y = 0;
  int x = 0;
  bool operator==(const PixelIndex&) const = default;
};

/// One row per foreground pixel: z-scored gene columns, then z-scored
/// morphology columns scaled by the morphology weight.
struct FusedMatrix {
  RowMatrix<double> values;
  std::vector<PixelIndex> pixel_index;
  int gene_columns = 0;
  int morph_columns = 0;
  double morph_weight = 1.0;
};

/// Genes-only fusion.
FusedMatrix assemble(const GeneExpressionMap& genes, const Mask& mask);
/// Genes plus morphology (morph must share the gene grid). Requires w > 0.
FusedMatrix assemble(const GeneExpressionMap& genes, const FeatureTensor& morph, const Mask& mask, double w);

struct LabelMap {
  LabelArray labels;  // 0 = background
  int n_clusters = 0;
  Provenance provenance;
};

/// Scatters per-pixel labels into an H×W map, compacting labels to [1..n] in
/// ascending order of their input value.
LabelMap labels_to_map(const std::vector<int>& assignment, const std::vector<PixelIndex>& pixel_index, int height,
                       int width);

/// (pixel, label) pairs for every foreground pixel in row-major order.
std::pair<std::vector<int>, std::vector<PixelIndex>> map_to_labels(const LabelMap& map);

struct ClusterParams {
  int k = 0;                              // 0: number of gene channels
  std::optional<int> final_k;
  std::optional<double> merge_threshold;  // used when final_k is unset
  double morph_weight = 1.0;
  double epsilon = 1e-3;
  std::uint64_t seed = 0;
  int max_iter = 300;
  double tol = 1e-4;
  int threads = 1;
};

struct ClusterOutcome {
  LabelMap map;
  KMeansResult<double> kmeans;
  MergeTree tree;
};

/// k-means on the fused features of foreground pixels followed by Ward
/// merging of the k-means centroids. `morph` may be null for genes-only runs.
/// The foreground mask is recomputed from `genes` unless given.
ClusterOutcome cluster_niches(const GeneExpressionMap& genes, const FeatureTensor* morph, const ClusterParams& params,
                              const Mask* mask = nullptr);

}  // namespace sefi
