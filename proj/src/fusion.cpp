#include "sefi/fusion.hpp"

#include "sefi/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace sefi {

namespace {

// In-place z-score of each column; columns with a single distinct value become 0.
void standardize_columns(RowMatrix<double>& m, Eigen::Index begin, Eigen::Index end, double scale) {
  for (Eigen::Index c = begin; c < end; ++c) {
    auto col = m.col(c);
    if (col.maxCoeff() == col.minCoeff()) {
      col.setZero();
      continue;
    }
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(col.size()));
    col *= scale / sd;
  }
}

FusedMatrix assemble_impl(const GeneExpressionMap& genes, const FeatureTensor* morph, const Mask& mask, double w) {
  const FeatureTensor& g = genes.tensor;
  if (mask.rows() != g.height() || mask.cols() != g.width()) throw DataError("mask and gene grid differ in size");
  if (morph && (morph->height() != g.height() || morph->width() != g.width()))
    throw DataError("morphology grid " + std::to_string(morph->height()) + "x" + std::to_string(morph->width()) +
                    " does not match gene grid " + std::to_string(g.height()) + "x" + std::to_string(g.width()));
  if (!(w > 0.0) || !std::isfinite(w)) throw DataError("morphology weight must be > 0");

  FusedMatrix fm;
  fm.gene_columns = g.channels();
  fm.morph_columns = morph ? morph->channels() : 0;
  fm.morph_weight = w;
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x)
      if (mask(y, x)) fm.pixel_index.push_back({y, x});
  if (fm.pixel_index.empty()) throw DataError("foreground mask is empty");

  const auto n = static_cast<Eigen::Index>(fm.pixel_index.size());
  fm.values.resize(n, fm.gene_columns + fm.morph_columns);
  const auto gm = g.matrix();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = fm.pixel_index[static_cast<std::size_t>(i)];
    const Eigen::Index flat = static_cast<Eigen::Index>(p.y) * g.width() + p.x;
    fm.values.row(i).head(fm.gene_columns) = gm.row(flat).cast<double>();
    if (morph) fm.values.row(i).tail(fm.morph_columns) = morph->matrix().row(flat).cast<double>();
  }
  standardize_columns(fm.values, 0, fm.gene_columns, 1.0);
  standardize_columns(fm.values, fm.gene_columns, fm.gene_columns + fm.morph_columns, w);
  return fm;
}

}  // namespace

FusedMatrix assemble(const GeneExpressionMap& genes, const Mask& mask) {
  return assemble_impl(genes, nullptr, mask, 1.0);
}

FusedMatrix assemble(const GeneExpressionMap& genes, const FeatureTensor& morph, const Mask& mask, double w) {
  return assemble_impl(genes, &morph, mask, w);
}

LabelMap labels_to_map(const std::vector<int>& assignment, const std::vector<PixelIndex>& pixel_index, int height,
                       int width) {
  if (assignment.size() != pixel_index.size())
    throw DataError("assignment length " + std::to_string(assignment.size()) + " does not match pixel count " +
                    std::to_string(pixel_index.size()));
  std::map<int, int> compact;
  for (int a : assignment) {
    if (a < 1) throw DataError("cluster labels must be >= 1");
    compact.emplace(a, 0);
  }
  int next = 0;
  for (auto& [label, value] : compact) value = ++next;

  LabelMap map;
  map.labels = LabelArray::Zero(height, width);
  map.n_clusters = next;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const auto& p = pixel_index[i];
    if (p.y < 0 || p.y >= height || p.x < 0 || p.x >= width) throw DataError("pixel index outside label map");
    map.labels(p.y, p.x) = compact.at(assignment[i]);
  }
  return map;
}

std::pair<std::vector<int>, std::vector<PixelIndex>> map_to_labels(const LabelMap& map) {
  std::pair<std::vector<int>, std::vector<PixelIndex>> out;
  for (Eigen::Index y = 0; y < map.labels.rows(); ++y)
    for (Eigen::Index x = 0; x < map.labels.cols(); ++x)
      if (const int v = map.labels(y, x); v > 0) {
        out.first.push_back(v);
        out.second.push_back({static_cast<int>(y), static_cast<int>(x)});
      }
  return out;
}

ClusterOutcome cluster_niches(const GeneExpressionMap& genes, const FeatureTensor* morph, const ClusterParams& params,
                              const Mask* mask) {
  if (!params.final_k && !params.merge_threshold) throw DataError("either final_k or a merge threshold is required");
  const Mask fg = mask ? *mask : foreground_mask(genes, params.epsilon);
  const FusedMatrix fm = morph ? assemble(genes, *morph, fg, params.morph_weight) : assemble(genes, fg);

  KMeansOptions opt;
  opt.k = params.k > 0 ? params.k : genes.tensor.channels();
  opt.seed = params.seed;
  opt.max_iter = params.max_iter;
  opt.tol = params.tol;
  opt.threads = params.threads;
  if (opt.k > fm.values.rows())
    throw DataError("k = " + std::to_string(opt.k) + " exceeds the " + std::to_string(fm.values.rows()) +
                    " foreground pixels");

  ClusterOutcome out;
  out.kmeans = kmeans(fm.values, opt);
  const int final_k = params.final_k ? std::min(*params.final_k, opt.k) : 1;
  if (params.final_k && *params.final_k < 1) throw DataError("final_k must be >= 1");
  MergeResult merged = hierarchical_merge(out.kmeans.centroids, out.kmeans.cluster_sizes(), out.kmeans.assignment,
                                          final_k, params.final_k ? std::nullopt : params.merge_threshold);
  out.tree = std::move(merged.tree);
  out.map = labels_to_map(merged.assignment, fm.pixel_index, genes.tensor.height(), genes.tensor.width());

  auto& prov = out.map.provenance;
  std::ostringstream num;
  num.precision(17);
  auto fmt = [&](double v) {
    num.str("");
    num << v;
    return num.str();
  };
  prov["seed"] = std::to_string(params.seed);
  prov["k"] = std::to_string(opt.k);
  prov["final_k"] = std::to_string(out.map.n_clusters);
  if (params.merge_threshold && !params.final_k) prov["merge_threshold"] = fmt(*params.merge_threshold);
  prov["morph_weight"] = morph ? fmt(params.morph_weight) : "none";
  prov["morph_channels"] = std::to_string(fm.morph_columns);
  prov["gene_channels"] = std::to_string(fm.gene_columns);
  prov["epsilon"] = fmt(params.epsilon);
  prov["grid_resolution"] = fmt(genes.grid.resolution);
  prov["grid_sigma"] = fmt(genes.grid.sigma);
  prov["grid_height_bins"] = std::to_string(genes.grid.height_bins);
  prov["grid_width_bins"] = std::to_string(genes.grid.width_bins);
  prov["kmeans_iterations"] = std::to_string(out.kmeans.iterations);
  prov["kmeans_inertia"] = fmt(out.kmeans.inertia);
  prov["max_iter"] = std::to_string(params.max_iter);
  prov["tol"] = fmt(params.tol);
  return out;
}

}  // namespace sefi
