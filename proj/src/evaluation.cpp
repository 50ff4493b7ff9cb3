#include "sefi/evaluation.hpp"

#include "sefi/error.hpp"
#include "sefi/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace sefi {

LabelArray sample_labels_on_grid(const LabelArray& fine, int height_bins, int width_bins) {
  if (height_bins <= 0 || width_bins <= 0 || fine.rows() % height_bins != 0 || fine.cols() % width_bins != 0 ||
      fine.rows() / height_bins != fine.cols() / width_bins)
    throw DataError("label map " + std::to_string(fine.rows()) + "x" + std::to_string(fine.cols()) +
                    " is not a whole multiple of " + std::to_string(height_bins) + "x" + std::to_string(width_bins));
  const Eigen::Index f = fine.rows() / height_bins;
  LabelArray out(height_bins, width_bins);
  for (int y = 0; y < height_bins; ++y)
    for (int x = 0; x < width_bins; ++x) out(y, x) = fine(y * f + f / 2, x * f + f / 2);
  return out;
}

AriScore adjusted_rand_index(const LabelArray& a, const LabelArray& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DataError("label maps differ in size");
  std::vector<int> la, lb;
  for (Eigen::Index y = 0; y < a.rows(); ++y)
    for (Eigen::Index x = 0; x < a.cols(); ++x)
      if (a(y, x) > 0 && b(y, x) > 0) {
        la.push_back(a(y, x));
        lb.push_back(b(y, x));
      }
  if (la.size() < 2) throw DataError("fewer than 2 pixels are foreground in both label maps");
  return adjusted_rand_index(std::span<const int>(la), std::span<const int>(lb));
}

AriScore adjusted_rand_index(const LabelMap& a, const LabelMap& b) { return adjusted_rand_index(a.labels, b.labels); }

ExpressionTable cluster_mean_expression(const LabelMap& labels, const GeneExpressionMap& genes) {
  const FeatureTensor& t = genes.tensor;
  if (labels.labels.rows() != t.height() || labels.labels.cols() != t.width())
    throw DataError("label map and gene grid differ in size");
  std::map<int, std::size_t> row_of;
  for (Eigen::Index i = 0; i < labels.labels.size(); ++i)
    if (const int v = labels.labels.data()[i]; v > 0) row_of.emplace(v, 0);

  ExpressionTable table;
  table.genes = t.channel_names();
  for (auto& [label, row] : row_of) {
    row = table.clusters.size();
    table.clusters.push_back(label);
  }
  table.pixels.assign(table.clusters.size(), 0);
  table.mean = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(table.clusters.size()), t.channels());
  const auto gm = t.matrix();
  for (int y = 0; y < t.height(); ++y)
    for (int x = 0; x < t.width(); ++x) {
      const int v = labels.labels(y, x);
      if (v <= 0) continue;
      const std::size_t r = row_of.at(v);
      table.mean.row(static_cast<Eigen::Index>(r)) += gm.row(static_cast<Eigen::Index>(y) * t.width() + x).cast<double>();
      ++table.pixels[r];
    }
  for (std::size_t r = 0; r < table.clusters.size(); ++r)
    table.mean.row(static_cast<Eigen::Index>(r)) /= static_cast<double>(table.pixels[r]);
  return table;
}

std::string format_expression_csv(const ExpressionTable& table) {
  std::ostringstream out;
  out.precision(9);
  out << "cluster,pixels";
  for (const auto& g : table.genes) out << ',' << g;
  out << '\n';
  for (std::size_t r = 0; r < table.clusters.size(); ++r) {
    out << table.clusters[r] << ',' << table.pixels[r];
    for (Eigen::Index c = 0; c < table.mean.cols(); ++c) out << ',' << table.mean(static_cast<Eigen::Index>(r), c);
    out << '\n';
  }
  return out.str();
}

std::uint64_t replicate_seed(std::uint64_t base, std::size_t fraction_index, int replicate) {
  // splitmix64 finalizer over the combined key
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (1 + fraction_index * 1000003ULL + static_cast<std::uint64_t>(replicate));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<int> sample_genes(std::size_t panel_size, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) throw DataError("gene fraction must be in (0, 1]");
  const auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(panel_size) - 1e-9));
  if (keep == 0) throw DataError("gene fraction keeps no genes");
  std::vector<int> genes(panel_size);
  std::iota(genes.begin(), genes.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < keep; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, panel_size - 1);
    std::swap(genes[i], genes[pick(rng)]);
  }
  genes.resize(keep);
  std::sort(genes.begin(), genes.end());
  return genes;
}

DropoutResult dropout_benchmark(const PointCloud& pc, const FeatureTensor& morph, const std::vector<double>& fractions,
                                int reps, std::uint64_t seed, const DropoutParams& params) {
  if (reps < 1) throw DataError("replicate count must be >= 1");
  if (fractions.empty()) throw DataError("at least one gene fraction is required");
  for (double f : fractions)
    if (!(f > 0.0) || f > 1.0) throw DataError("gene fractions must be in (0, 1]");
  if (pc.gene_panel.empty()) throw DataError("point cloud has no genes");

  const GeneExpressionMap smoothed = gaussian_smooth(rasterize_points(pc, params.grid), params.threads);
  if (morph.height() != smoothed.tensor.height() || morph.width() != smoothed.tensor.width())
    throw DataError("morphology features do not match the gene grid");

  ClusterParams base = params.cluster;
  base.seed = seed;
  base.threads = 1;

  auto run = [&](const std::vector<int>& genes, const FeatureTensor* morph_features) {
    GeneExpressionMap sub{smoothed.tensor.select_channels(genes), smoothed.grid};
    const Mask mask = foreground_mask(sub, base.epsilon);
    if (params.compose) sub = compose_normalize(sub, base.epsilon);
    ClusterParams p = base;
    p.k = static_cast<int>(genes.size());
    return cluster_niches(sub, morph_features, p, &mask).map;
  };

  std::vector<int> all(pc.gene_panel.size());
  std::iota(all.begin(), all.end(), 0);
  const LabelMap reference = run(all, nullptr);

  DropoutResult result;
  result.rows.resize(fractions.size() * static_cast<std::size_t>(reps));
  parallel_for(result.rows.size(), params.threads, [&](std::size_t job) {
    const std::size_t fi = job / static_cast<std::size_t>(reps);
    const int rep = static_cast<int>(job % static_cast<std::size_t>(reps));
    DropoutRow& row = result.rows[job];
    row.fraction_kept = fractions[fi];
    row.replicate = rep;
    row.seed = replicate_seed(seed, fi, rep);
    const std::vector<int> genes = sample_genes(pc.gene_panel.size(), row.fraction_kept, row.seed);
    row.genes_kept = static_cast<int>(genes.size());
    row.ari_genes_only = adjusted_rand_index(run(genes, nullptr), reference).value;
    row.ari_with_morphology = adjusted_rand_index(run(genes, &morph), reference).value;
  });
  return result;
}

std::string format_dropout_csv(const DropoutResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "fraction,rep,seed,ari_genes,ari_joint\n";
  for (const auto& r : result.rows)
    out << r.fraction_kept << ',' << r.replicate << ',' << r.seed << ',' << r.ari_genes_only << ','
        << r.ari_with_morphology << '\n';
  return out.str();
}

std::vector<DropoutSummary> summarize_dropout(const DropoutResult& result) {
  std::vector<DropoutSummary> out;
  std::vector<std::vector<const DropoutRow*>> groups;
  for (const auto& r : result.rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const DropoutSummary& s) { return s.fraction == r.fraction_kept; });
    if (it == out.end()) {
      out.push_back({r.fraction_kept});
      groups.emplace_back();
      it = out.end() - 1;
    }
    groups[static_cast<std::size_t>(it - out.begin())].push_back(&r);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& g = groups[i];
    const double n = static_cast<double>(g.size());
    double sg = 0, sj = 0;
    for (const auto* r : g) {
      sg += r->ari_genes_only;
      sj += r->ari_with_morphology;
    }
    out[i].mean_genes = sg / n;
    out[i].mean_joint = sj / n;
    if (g.size() > 1) {
      double vg = 0, vj = 0;
      for (const auto* r : g) {
        vg += (r->ari_genes_only - out[i].mean_genes) * (r->ari_genes_only - out[i].mean_genes);
        vj += (r->ari_with_morphology - out[i].mean_joint) * (r->ari_with_morphology - out[i].mean_joint);
      }
      out[i].sd_genes = std::sqrt(vg / (n - 1));
      out[i].sd_joint = std::sqrt(vj / (n - 1));
    }
  }
  return out;
}

std::string render_dropout_svg(const std::vector<DropoutSummary>& summary) {
  constexpr double kW = 480, kH = 320, kLeft = 60, kRight = 20, kTop = 20, kBottom = 50;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  double ymin = 0.0;
  for (const auto& s : summary)
    ymin = std::min({ymin, s.mean_genes - s.sd_genes, s.mean_joint - s.sd_joint});
  ymin = std::floor(ymin * 10.0) / 10.0;
  auto px = [&](double f) { return kLeft + f * pw; };
  auto py = [&](double v) { return kTop + (1.0 - (v - ymin) / (1.0 - ymin)) * ph; };

  std::vector<DropoutSummary> sorted = summary;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.fraction < b.fraction; });

  std::ostringstream out;
  out.precision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\"" << kTop + ph
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">fraction of genes kept</text>\n";
  out << "<text x=\"14\" y=\"" << kTop + ph / 2 << "\" transform=\"rotate(-90 14 " << kTop + ph / 2
      << ")\" text-anchor=\"middle\" font-size=\"12\">ARI vs all-gene reference</text>\n";
  for (double t = 0.0; t <= 1.0001; t += 0.25)
    out << "<text x=\"" << px(t) << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\" font-size=\"10\">" << t
        << "</text>\n";
  for (double v = ymin; v <= 1.0001; v += 0.2)
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(v) + 3 << "\" text-anchor=\"end\" font-size=\"10\">" << v
        << "</text>\n";

  auto series = [&](auto mean_of, auto sd_of, const char* color, const char* label, double legend_y) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& s : sorted) out << px(s.fraction) << ',' << py(mean_of(s)) << ' ';
    out << "\"/>\n";
    for (const auto& s : sorted) {
      out << "<line x1=\"" << px(s.fraction) << "\" y1=\"" << py(mean_of(s) - sd_of(s)) << "\" x2=\"" << px(s.fraction)
          << "\" y2=\"" << py(mean_of(s) + sd_of(s)) << "\" stroke=\"" << color << "\"/>\n";
      out << "<circle cx=\"" << px(s.fraction) << "\" cy=\"" << py(mean_of(s)) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
    }
    out << "<text x=\"" << kLeft + 10 << "\" y=\"" << legend_y << "\" font-size=\"11\" fill=\"" << color << "\">"
        << label << "</text>\n";
  };
  series([](const DropoutSummary& s) { return s.mean_genes; }, [](const DropoutSummary& s) { return s.sd_genes; },
         "#1f77b4", "genes only", kTop + 14);
  series([](const DropoutSummary& s) { return s.mean_joint; }, [](const DropoutSummary& s) { return s.sd_joint; },
         "#d62728", "genes + morphology", kTop + 28);
  out << "</svg>\n";
  return out.str();
}

}  // namespace sefi
