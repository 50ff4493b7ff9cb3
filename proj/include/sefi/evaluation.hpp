#pragma once

#include "sefi/ari.hpp"
#include "sefi/density.hpp"
#include "sefi/fusion.hpp"

#include <string>
#include <vector>

namespace sefi {

/// ARI over pixels that are foreground (nonzero) in both maps.
AriScore adjusted_rand_index(const LabelMap& a, const LabelMap& b);
AriScore adjusted_rand_index(const LabelArray& a, const LabelArray& b);

/// Pixel-resolution labels read at the centers of grid bins. The size ratio
/// must be the same whole number along both axes.
LabelArray sample_labels_on_grid(const LabelArray& fine, int height_bins, int width_bins);

struct ExpressionTable {
  std::vector<std::string> genes;
  std::vector<int> clusters;           // 1..n
  std::vector<std::size_t> pixels;     // per cluster
  Eigen::MatrixXd mean;                // cluster × gene
};

/// Mean density of each gene over the pixels of each cluster.
ExpressionTable cluster_mean_expression(const LabelMap& labels, const GeneExpressionMap& genes);
std::string format_expression_csv(const ExpressionTable& table);

struct DropoutRow {
  double fraction_kept = 1.0;
  int replicate = 0;
  std::uint64_t seed = 0;  // gene-subsampling seed of this replicate
  double ari_genes_only = 0.0;
  double ari_with_morphology = 0.0;
  int genes_kept = 0;
};

struct DropoutResult {
  std::vector<DropoutRow> rows;
};

struct DropoutParams {
  GridSpec grid;
  ClusterParams cluster;  // final_k (or threshold) shared by all arms; k is replaced per run
  bool compose = false;
  int threads = 1;        // replicate-level workers
};

/// Gene-subsampling seed for (base seed, fraction index, replicate).
std::uint64_t replicate_seed(std::uint64_t base, std::size_t fraction_index, int replicate);

/// Genes kept for a fraction: ceil(fraction·G) panel indices, sorted.
std::vector<int> sample_genes(std::size_t panel_size, double fraction, std::uint64_t seed);

/// Reference = genes-only clustering of the full panel; every (fraction, rep)
/// runs genes-only and genes+morphology on a random gene subset with k set to
/// the subset size and compares both to the reference.
DropoutResult dropout_benchmark(const PointCloud& pc, const FeatureTensor& morph, const std::vector<double>& fractions,
                                int reps, std::uint64_t seed, const DropoutParams& params);

std::string format_dropout_csv(const DropoutResult& result);

struct DropoutSummary {
  double fraction = 0.0;
  double mean_genes = 0.0, sd_genes = 0.0;
  double mean_joint = 0.0, sd_joint = 0.0;
};

/// Per-fraction means and sample standard deviations, in first-seen order.
std::vector<DropoutSummary> summarize_dropout(const DropoutResult& result);

/// Line plot of mean ± sd ARI against the number of kept genes fraction.
std::string render_dropout_svg(const std::vector<DropoutSummary>& summary);

}  // namespace sefi
