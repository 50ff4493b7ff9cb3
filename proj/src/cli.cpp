#include "sefi/cli.hpp"

#include "sefi/density.hpp"
#include "sefi/error.hpp"
#include "sefi/evaluation.hpp"
#include "sefi/fusion.hpp"
#include "sefi/image_io.hpp"
#include "sefi/io_util.hpp"
#include "sefi/morphology.hpp"
#include "sefi/sft.hpp"
#include "sefi/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

namespace sefi::cli {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

std::string join_command(const std::vector<std::string>& args) {
  std::string cmd = "sefi";
  for (const auto& a : args) cmd += " " + a;
  return cmd;
}

void write_with_provenance(const std::string& path, const std::string& bytes, const Provenance& prov) {
  write_file(path, bytes);
  write_file(provenance_path(path), format_provenance(prov));
}

/// Usage error raised after parsing (e.g. mutually required flags).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<int> parse_scales(const std::string& text) {
  std::vector<int> scales;
  std::stringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      std::size_t used = 0;
      scales.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("bad scale list '" + text + "'");
    }
  }
  return scales;
}

std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("bad fraction list '" + text + "'");
    }
  }
  return out;
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& text) {
  std::vector<std::pair<int, int>> pairs;
  if (text.empty() || text == "none") return pairs;
  std::stringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    const auto dash = tok.find('-');
    try {
      if (dash == std::string::npos) throw std::invalid_argument(tok);
      pairs.emplace_back(std::stoi(tok.substr(0, dash)), std::stoi(tok.substr(dash + 1)));
    } catch (const std::exception&) {
      throw UsageError("bad niche pair list '" + text + "' (expected a-b,c-d)");
    }
  }
  return pairs;
}

std::pair<int, int> parse_extent(const std::string& text) {
  const auto sep = text.find('x');
  try {
    if (sep == std::string::npos) throw std::invalid_argument(text);
    return {std::stoi(text.substr(0, sep)), std::stoi(text.substr(sep + 1))};
  } catch (const std::exception&) {
    throw UsageError("bad extent '" + text + "' (expected HxW in pixels)");
  }
}

/// Gene map from an SFT file, with grid parameters from its sidecar when present.
GeneExpressionMap load_gene_map(const std::string& path) {
  GeneExpressionMap m;
  m.tensor = load_feature_tensor(path);
  m.grid.height_bins = m.tensor.height();
  m.grid.width_bins = m.tensor.width();
  if (std::filesystem::exists(provenance_path(path))) {
    const Provenance prov = parse_provenance(read_file(provenance_path(path)));
    if (auto it = prov.find("resolution"); it != prov.end()) m.grid.resolution = std::stod(it->second);
    if (auto it = prov.find("sigma"); it != prov.end()) m.grid.sigma = std::stod(it->second);
  }
  return m;
}

struct StopRule {
  std::optional<int> final_k;
  std::optional<double> merge_threshold;

  void add_to(CLI::App* app) {
    app->add_option("--final-k", final_k, "Number of niches after hierarchical merging");
    app->add_option("--merge-threshold", merge_threshold,
                    "Stop merging before the first Ward distance above this value");
  }
  void require() const {
    if (!final_k && !merge_threshold)
      throw UsageError("a stopping criterion is required: pass --final-k or --merge-threshold");
    if (final_k && merge_threshold) throw UsageError("--final-k and --merge-threshold are mutually exclusive");
  }
  void apply(ClusterParams& p) const {
    p.final_k = final_k;
    p.merge_threshold = merge_threshold;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Segmentation-free niche detection from spatial gene detections and nuclear-stain morphology", "sefi"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  const std::string command = join_command(args);
  std::function<void()> action;

  // ---- synth
  SynthConfig synth_cfg;
  std::string synth_out, synth_pairs = "none";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic tissue with known niches");
  synth->add_option("--seed", synth_cfg.seed, "Random seed")->capture_default_str();
  synth->add_option("--out-dir", synth_out, "Output directory")->required();
  synth->add_option("--height", synth_cfg.height, "Image height in px")->capture_default_str();
  synth->add_option("--width", synth_cfg.width, "Image width in px")->capture_default_str();
  synth->add_option("--niches", synth_cfg.n_niches, "Number of niches")->capture_default_str();
  synth->add_option("--genes", synth_cfg.n_genes, "Gene panel size")->capture_default_str();
  synth->add_option("--density", synth_cfg.density, "Detections per px^2")->capture_default_str();
  synth->add_option("--alpha", synth_cfg.concentration, "Dirichlet concentration of gene profiles")
      ->capture_default_str();
  synth->add_option("--morph-signal", synth_cfg.morph_signal, "Texture separability in [0,1]")->capture_default_str();
  synth->add_option("--identical", synth_pairs, "Niche pairs sharing a gene profile, e.g. 0-1,2-3")
      ->capture_default_str();
  synth->callback([&] {
    action = [&] {
      synth_cfg.identical_profiles = parse_pairs(synth_pairs);
      synth_cfg.validate();
      const SynthTissue tissue = generate(synth_cfg);
      std::filesystem::create_directories(synth_out);
      const std::filesystem::path dir(synth_out);
      Provenance prov = synth_cfg.to_provenance();
      prov["command"] = command;
      write_with_provenance((dir / "points.csv").string(), write_points(tissue.points), prov);
      save_gray_png((dir / "dapi.png").string(), tissue.image);
      write_file(provenance_path((dir / "dapi.png").string()), format_provenance(prov));
      save_label_pgm((dir / "truth.pgm").string(), tissue.truth);
      write_file(provenance_path((dir / "truth.pgm").string()), format_provenance(prov));
      write_file((dir / "synth.txt").string(), format_provenance(prov));
    };
  });

  // ---- density
  std::string den_points, den_out, den_image, den_extent;
  double den_resolution = 4.0, den_sigma = 2.0, den_epsilon = 1e-3;
  bool den_compose = false;
  int den_threads = 1;
  auto* density = app.add_subcommand("density", "Per-gene Gaussian density maps from a points CSV");
  density->add_option("--points", den_points, "Points CSV with header x,y,gene")->required();
  density->add_option("--out", den_out, "Output SFT tensor")->required();
  density->add_option("--image", den_image, "Stain image defining the grid extent");
  density->add_option("--extent", den_extent, "Grid extent HxW in px (default: from image or points)");
  density->add_option("--resolution", den_resolution, "Pixels per bin")->capture_default_str();
  density->add_option("--sigma", den_sigma, "Smoothing bandwidth in bins")->capture_default_str();
  density->add_flag("--compose", den_compose, "Divide each bin by its total density");
  density->add_option("--epsilon", den_epsilon, "Background threshold used by --compose")->capture_default_str();
  density->add_option("--threads", den_threads, "Worker threads")->capture_default_str();
  density->callback([&] {
    action = [&] {
      const PointCloud pc = load_points(den_points);
      GridSpec grid;
      if (!den_extent.empty()) {
        const auto [h, w] = parse_extent(den_extent);
        grid = GridSpec::for_extent(h, w, den_resolution, den_sigma);
      } else if (!den_image.empty()) {
        const GrayImage img = load_gray_image(den_image);
        grid = GridSpec::for_extent(img.height(), img.width(), den_resolution, den_sigma);
      } else {
        grid = GridSpec::for_points(pc, den_resolution, den_sigma);
      }
      GeneExpressionMap m = gaussian_smooth(rasterize_points(pc, grid), den_threads);
      if (den_compose) m = compose_normalize(m, den_epsilon);
      const Provenance prov{{"command", command},
                            {"resolution", fmt(grid.resolution)},
                            {"sigma", fmt(grid.sigma)},
                            {"height_bins", std::to_string(grid.height_bins)},
                            {"width_bins", std::to_string(grid.width_bins)},
                            {"compose", den_compose ? "true" : "false"},
                            {"epsilon", fmt(den_epsilon)},
                            {"genes", std::to_string(pc.gene_panel.size())},
                            {"points", std::to_string(pc.points.size())}};
      write_with_provenance(den_out, write_feature_tensor(m.tensor), prov);
    };
  });

  // ---- features
  std::string feat_image, feat_from, feat_genes, feat_out, feat_scales = "4,8,16,32";
  double feat_variance = 0.95, feat_epsilon = 1e-3;
  std::size_t feat_cap = 100000;
  std::uint64_t feat_seed = 0;
  int feat_threads = 1;
  auto* features = app.add_subcommand("features", "PCA-reduced morphology features on the gene grid");
  auto* feat_image_opt = features->add_option("--image", feat_image, "Stain image for the built-in extractor");
  auto* feat_from_opt = features->add_option("--morph-from", feat_from, "Precomputed feature SFT (bypasses the built-in extractor)");
  feat_image_opt->excludes(feat_from_opt);
  features->add_option("--genes", feat_genes, "Gene density SFT defining grid and foreground")->required();
  features->add_option("--out", feat_out, "Output SFT of principal components")->required();
  features->add_option("--scales", feat_scales, "Window sizes of the built-in extractor")->capture_default_str();
  features->add_option("--variance", feat_variance, "Retained variance fraction")->capture_default_str();
  features->add_option("--sample-cap", feat_cap, "Maximum pixels used for the PCA fit")->capture_default_str();
  features->add_option("--epsilon", feat_epsilon, "Foreground threshold on total gene density")->capture_default_str();
  features->add_option("--seed", feat_seed, "Random seed for PCA subsampling")->capture_default_str();
  features->add_option("--threads", feat_threads, "Worker threads")->capture_default_str();
  features->callback([&] {
    action = [&] {
      if (feat_image.empty() == feat_from.empty()) throw UsageError("pass exactly one of --image or --morph-from");
      const GeneExpressionMap genes = load_gene_map(feat_genes);
      const FeatureTensor raw = feat_from.empty()
                                    ? builtin_features(load_gray_image(feat_image), parse_scales(feat_scales), feat_threads)
                                    : load_feature_tensor(feat_from);
      const FeatureTensor on_grid = resample_to_grid(raw, genes.tensor.height(), genes.tensor.width());
      const Mask mask = foreground_mask(genes, feat_epsilon);
      const PcaModel<double> model = fit_pca(on_grid, mask, feat_variance, feat_cap, feat_seed);
      const ReducedFeatures reduced = apply_pca(on_grid, model);

      Provenance prov{{"command", command},
                      {"source", feat_from.empty() ? "builtin" : "file"},
                      {"input_channels", std::to_string(raw.channels())},
                      {"components", std::to_string(model.output_dim())},
                      {"variance_target", fmt(feat_variance)},
                      {"sample_cap", std::to_string(feat_cap)},
                      {"seed", std::to_string(feat_seed)},
                      {"epsilon", fmt(feat_epsilon)},
                      {"degenerate", model.degenerate ? "true" : "false"}};
      if (feat_from.empty()) prov["scales"] = feat_scales;
      double cumulative = 0.0;
      for (Eigen::Index i = 0; i < model.explained_variance_ratio.size(); ++i)
        cumulative += model.explained_variance_ratio(i);
      prov["explained_variance"] = fmt(cumulative);
      write_with_provenance(feat_out, write_feature_tensor(reduced.tensor), prov);

      nlohmann::json j;
      j["mean"] = std::vector<double>(model.mean.data(), model.mean.data() + model.mean.size());
      j["explained_variance_ratio"] = std::vector<double>(
          model.explained_variance_ratio.data(), model.explained_variance_ratio.data() + model.explained_variance_ratio.size());
      std::vector<std::vector<double>> rows;
      for (Eigen::Index r = 0; r < model.components.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(model.components.cols()));
        for (Eigen::Index c = 0; c < model.components.cols(); ++c) row[static_cast<std::size_t>(c)] = model.components(r, c);
        rows.push_back(std::move(row));
      }
      j["components"] = rows;
      j["variance_target"] = model.variance_target;
      j["degenerate"] = model.degenerate;
      write_file(feat_out + ".pca.json", j.dump(1) + "\n");
    };
  });

  // ---- cluster
  std::string cl_genes, cl_morph, cl_out, cl_png, cl_tree;
  StopRule cl_stop;
  ClusterParams cl_params;
  auto* cluster = app.add_subcommand("cluster", "k-means on fused features, then Ward merging of clusters");
  cluster->add_option("--genes", cl_genes, "Gene density SFT")->required();
  cluster->add_option("--morph", cl_morph, "Reduced morphology SFT (omit for genes only)");
  cluster->add_option("--out", cl_out, "Output 16-bit PGM label map")->required();
  cluster->add_option("--png", cl_png, "Optional color rendering of the label map");
  cluster->add_option("--merge-tree", cl_tree, "Optional CSV of merge events");
  cl_stop.add_to(cluster);
  cluster->add_option("--k", cl_params.k, "k-means clusters (default: number of genes)");
  cluster->add_option("--morph-weight", cl_params.morph_weight, "Scale of z-scored morphology columns")
      ->capture_default_str();
  cluster->add_option("--epsilon", cl_params.epsilon, "Foreground threshold on total gene density")
      ->capture_default_str();
  cluster->add_option("--seed", cl_params.seed, "Random seed")->capture_default_str();
  cluster->add_option("--max-iter", cl_params.max_iter, "Lloyd iteration cap")->capture_default_str();
  cluster->add_option("--tol", cl_params.tol, "Centroid displacement tolerance")->capture_default_str();
  cluster->add_option("--threads", cl_params.threads, "Worker threads")->capture_default_str();
  cluster->callback([&] {
    cl_stop.require();
    action = [&] {
      cl_stop.apply(cl_params);
      const GeneExpressionMap genes = load_gene_map(cl_genes);
      std::optional<FeatureTensor> morph;
      if (!cl_morph.empty())
        morph = resample_to_grid(load_feature_tensor(cl_morph), genes.tensor.height(), genes.tensor.width());
      const ClusterOutcome result = cluster_niches(genes, morph ? &*morph : nullptr, cl_params);
      Provenance prov = result.map.provenance;
      prov["command"] = command;
      prov["genes_file"] = cl_genes;
      prov["morph_file"] = cl_morph.empty() ? "none" : cl_morph;
      save_label_pgm(cl_out, result.map.labels);
      write_file(provenance_path(cl_out), format_provenance(prov));
      if (!cl_png.empty()) write_with_provenance(cl_png, render_labels_png(result.map.labels), prov);
      if (!cl_tree.empty()) {
        std::ostringstream csv;
        csv.precision(17);
        csv << "step,cluster_a,cluster_b,distance\n";
        for (std::size_t i = 0; i < result.tree.events.size(); ++i) {
          const auto& e = result.tree.events[i];
          csv << i + 1 << ',' << e.cluster_a << ',' << e.cluster_b << ',' << e.distance << '\n';
        }
        write_with_provenance(cl_tree, csv.str(), prov);
      }
      out << "niches: " << result.map.n_clusters << "\n";
    };
  });

  // ---- eval-ari
  std::string ari_a, ari_b, ari_out;
  auto* eval = app.add_subcommand("eval-ari", "Adjusted Rand index between two label maps");
  eval->add_option("--a", ari_a, "First label map (PGM/PNG)")->required();
  eval->add_option("--b", ari_b, "Second label map (PGM/PNG)")->required();
  eval->add_option("--out", ari_out, "Optional CSV output");
  eval->callback([&] {
    action = [&] {
      LabelArray a = load_label_image(ari_a), b = load_label_image(ari_b);
      // A pixel-resolution truth map is read at bin centers of the coarser map.
      if (a.size() > b.size()) a = sample_labels_on_grid(a, static_cast<int>(b.rows()), static_cast<int>(b.cols()));
      if (b.size() > a.size()) b = sample_labels_on_grid(b, static_cast<int>(a.rows()), static_cast<int>(a.cols()));
      const AriScore s = adjusted_rand_index(a, b);
      const std::string csv = "ari,n\n" + fmt(s.value) + "," + std::to_string(s.n) + "\n";
      if (!ari_out.empty()) write_with_provenance(ari_out, csv, {{"command", command}});
      out << csv;
    };
  });

  // ---- expression-table
  std::string et_labels, et_genes, et_out;
  auto* table = app.add_subcommand("expression-table", "Mean gene density per niche as CSV");
  table->add_option("--labels", et_labels, "Label map (PGM/PNG)")->required();
  table->add_option("--genes", et_genes, "Gene density SFT")->required();
  table->add_option("--out", et_out, "Output CSV")->required();
  table->callback([&] {
    action = [&] {
      LabelMap labels;
      labels.labels = load_label_image(et_labels);
      const GeneExpressionMap genes = load_gene_map(et_genes);
      write_with_provenance(et_out, format_expression_csv(cluster_mean_expression(labels, genes)),
                            {{"command", command}, {"labels_file", et_labels}, {"genes_file", et_genes}});
    };
  });

  // ---- benchmark-dropout
  std::string bd_points, bd_image, bd_morph, bd_out, bd_svg, bd_fractions = "1,0.75,0.5,0.25", bd_extent,
      bd_scales = "4,8,16,32";
  int bd_reps = 10;
  double bd_resolution = 4.0, bd_sigma = 2.0, bd_variance = 0.95;
  std::size_t bd_cap = 100000;
  bool bd_compose = false;
  StopRule bd_stop;
  ClusterParams bd_params;
  int bd_threads = 1;
  auto* bench = app.add_subcommand("benchmark-dropout", "Gene-dropout ARI benchmark, genes only vs genes + morphology");
  bench->add_option("--points", bd_points, "Points CSV")->required();
  auto* bd_image_opt = bench->add_option("--image", bd_image, "Stain image (built-in features + PCA)");
  auto* bd_morph_opt = bench->add_option("--morph", bd_morph, "Reduced morphology SFT on the gene grid");
  bd_image_opt->excludes(bd_morph_opt);
  bench->add_option("--extent", bd_extent, "Grid extent HxW in px (default: from image, else points)");
  bench->add_option("--out", bd_out, "Output CSV")->required();
  bench->add_option("--svg", bd_svg, "Optional SVG plot of mean +/- sd per fraction");
  bench->add_option("--fractions", bd_fractions, "Fractions of genes kept")->capture_default_str();
  bench->add_option("--reps", bd_reps, "Replicates per fraction")->capture_default_str();
  bench->add_option("--seed", bd_params.seed, "Random seed")->capture_default_str();
  bd_stop.add_to(bench);
  bench->add_option("--resolution", bd_resolution, "Pixels per bin")->capture_default_str();
  bench->add_option("--sigma", bd_sigma, "Smoothing bandwidth in bins")->capture_default_str();
  bench->add_flag("--compose", bd_compose, "Composition-normalize gene maps");
  bench->add_option("--epsilon", bd_params.epsilon, "Foreground threshold")->capture_default_str();
  bench->add_option("--morph-weight", bd_params.morph_weight, "Scale of z-scored morphology columns")
      ->capture_default_str();
  bench->add_option("--scales", bd_scales, "Built-in extractor window sizes")->capture_default_str();
  bench->add_option("--variance", bd_variance, "Retained PCA variance")->capture_default_str();
  bench->add_option("--sample-cap", bd_cap, "Maximum pixels used for the PCA fit")->capture_default_str();
  bench->add_option("--max-iter", bd_params.max_iter, "Lloyd iteration cap")->capture_default_str();
  bench->add_option("--tol", bd_params.tol, "Centroid displacement tolerance")->capture_default_str();
  bench->add_option("--threads", bd_threads, "Worker threads")->capture_default_str();
  bench->callback([&] {
    bd_stop.require();
    action = [&] {
      if (bd_image.empty() == bd_morph.empty()) throw UsageError("pass exactly one of --image or --morph");
      bd_stop.apply(bd_params);
      const PointCloud pc = load_points(bd_points);
      std::optional<GrayImage> img;
      if (!bd_image.empty()) img = load_gray_image(bd_image);
      GridSpec grid;
      if (!bd_extent.empty()) {
        const auto [h, w] = parse_extent(bd_extent);
        grid = GridSpec::for_extent(h, w, bd_resolution, bd_sigma);
      } else if (img) {
        grid = GridSpec::for_extent(img->height(), img->width(), bd_resolution, bd_sigma);
      } else {
        grid = GridSpec::for_points(pc, bd_resolution, bd_sigma);
      }
      FeatureTensor morph;
      if (img) {
        const GeneExpressionMap full = gaussian_smooth(rasterize_points(pc, grid), bd_threads);
        const FeatureTensor on_grid = resample_to_grid(builtin_features(*img, parse_scales(bd_scales), bd_threads),
                                                       grid.height_bins, grid.width_bins);
        const Mask mask = foreground_mask(full, bd_params.epsilon);
        morph = apply_pca(on_grid, fit_pca(on_grid, mask, bd_variance, bd_cap, bd_params.seed)).tensor;
      } else {
        morph = resample_to_grid(load_feature_tensor(bd_morph), grid.height_bins, grid.width_bins);
      }
      DropoutParams params;
      params.grid = grid;
      params.cluster = bd_params;
      params.compose = bd_compose;
      params.threads = bd_threads;
      const DropoutResult result =
          dropout_benchmark(pc, morph, parse_fractions(bd_fractions), bd_reps, bd_params.seed, params);
      const Provenance prov{{"command", command},
                            {"fractions", bd_fractions},
                            {"reps", std::to_string(bd_reps)},
                            {"seed", std::to_string(bd_params.seed)},
                            {"resolution", fmt(grid.resolution)},
                            {"sigma", fmt(grid.sigma)},
                            {"morph_channels", std::to_string(morph.channels())},
                            {"morph_weight", fmt(bd_params.morph_weight)}};
      write_with_provenance(bd_out, format_dropout_csv(result), prov);
      const auto summary = summarize_dropout(result);
      if (!bd_svg.empty()) write_with_provenance(bd_svg, render_dropout_svg(summary), prov);
      for (const auto& s : summary)
        out << "fraction " << s.fraction << ": genes " << s.mean_genes << " +/- " << s.sd_genes << ", joint "
            << s.mean_joint << " +/- " << s.sd_joint << "\n";
    };
  });

  std::vector<std::string> argv_store{"sefi"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (action) action();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

}  // namespace sefi::cli
