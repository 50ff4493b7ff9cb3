// Acceptance checks. One PASS/FAIL line per check; exit status is the failure count.
#include "oracles.hpp"
#include "sefi/cli.hpp"
#include "sefi/density.hpp"
#include "sefi/evaluation.hpp"
#include "sefi/fusion.hpp"
#include "sefi/io_util.hpp"
#include "sefi/morphology.hpp"
#include "sefi/pca.hpp"
#include "sefi/synth.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace sefi;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool ok = true;
  std::ostringstream note;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) note << what;
    ok = ok && cond;
  }
};

int failures = 0;

void report(const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.ok = false;
    o.note << "exception: " << e.what();
  }
  std::cout << (o.ok ? "PASS " : "FAIL ") << name << " (" << std::fixed << std::setprecision(2) << seconds_since(t0)
            << " s)";
  if (!o.note.str().empty()) std::cout << ": " << o.note.str();
  std::cout << std::endl;
  if (!o.ok) ++failures;
}

void ari_check(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 12)(rng);
    std::uniform_int_distribution<int> classes(1, 4);
    std::uniform_int_distribution<int> la(1, classes(rng)), lb(1, classes(rng));
    std::vector<int> a, b;
    for (int i = 0; i < n; ++i) {
      a.push_back(la(rng));
      b.push_back(lb(rng));
    }
    const double v = adjusted_rand_index(std::span<const int>(a), std::span<const int>(b)).value;
    worst = std::max(worst, std::abs(v - oracle::pair_counting_ari(a, b)));
  }
  const std::vector<int> a{1, 1, 2, 2}, b{1, 2, 1, 2};
  const double hand = adjusted_rand_index(std::span<const int>(a), std::span<const int>(b)).value;
  o.require(worst <= 1e-12, "max deviation from oracle " + std::to_string(worst));
  o.require(hand == -0.5, "hand case gave " + std::to_string(hand));
  o.require(seconds_since(t0) < 1.0, "too slow");
}

void pca_check(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  int dim_mismatch = 0, threshold_violations = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = std::uniform_int_distribution<int>(10, 200)(rng);
    const int c = std::uniform_int_distribution<int>(2, 64)(rng);
    Eigen::MatrixXd x(n, c);
    // Random anisotropic mixing so the spectrum is spread out.
    Eigen::MatrixXd mix(c, c);
    for (Eigen::Index i = 0; i < mix.size(); ++i) mix.data()[i] = normal(rng) / (1.0 + (i % c));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    x = x * mix;
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(c)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < c; ++j) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = x(i, j);
    const auto eig = oracle::jacobi_eigenvalues(oracle::covariance(rows));
    double total = 0.0;
    for (double e : eig) total += std::max(e, 0.0);
    const auto model = fit_pca_rows(x, 0.95);
    double cumulative = 0.0;
    int expected_d = 0;
    for (int k = 0; k < c; ++k) {
      const double r = std::max(eig[static_cast<std::size_t>(k)], 0.0) / total;
      worst = std::max(worst, std::abs(model.spectrum_ratio(k) - r));
      if (expected_d == 0) {
        cumulative += r;
        if (cumulative >= 0.95 - 1e-12) expected_d = k + 1;
      }
    }
    if (model.components.rows() != expected_d) ++dim_mismatch;
    const Eigen::Index d = model.components.rows();
    if (model.spectrum_ratio.head(d).sum() < 0.95 || (d > 1 && model.spectrum_ratio.head(d - 1).sum() >= 0.95))
      ++threshold_violations;
  }
  Eigen::VectorXd ratios(3);
  ratios << 0.9, 0.05, 0.05;
  const auto boundary = retained_dimension(ratios, 0.95);
  ratios << 0.9, 0.04, 0.06;
  const auto past = retained_dimension(ratios, 0.95);
  o.require(worst <= 1e-8, "max ratio deviation " + std::to_string(worst));
  o.require(dim_mismatch == 0, std::to_string(dim_mismatch) + " retained-dimension mismatches");
  o.require(threshold_violations == 0, "cumulative ratio at D or D-1 on the wrong side of 0.95");
  o.require(boundary == 2 && past == 3, "cumulative threshold semantics");
  o.require(seconds_since(t0) < 5.0, "too slow");
}

void kmeans_check(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  int increases = 0, above_bound = 0, nondeterministic = 0;
  for (int run = 0; run < 100; ++run) {
    const int n = std::uniform_int_distribution<int>(20, 400)(rng);
    const int c = std::uniform_int_distribution<int>(1, 8)(rng);
    Eigen::MatrixXd x(n, c);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng) + 4.0 * static_cast<double>(i % 3);
    KMeansOptions opt;
    opt.k = std::uniform_int_distribution<int>(1, 12)(rng);
    opt.seed = static_cast<std::uint64_t>(run);
    const auto r = kmeans(x, opt);
    for (std::size_t i = 1; i < r.inertia_trace.size(); ++i)
      if (r.inertia_trace[i] > r.inertia_trace[i - 1] * (1.0 + 1e-12)) ++increases;
    const auto again = kmeans(x, opt);
    if (again.assignment != r.assignment || again.centroids != r.centroids || again.inertia != r.inertia)
      ++nondeterministic;
  }
  for (int run = 0; run < 100; ++run) {
    const int n = std::uniform_int_distribution<int>(3, 10)(rng);
    const int k = std::uniform_int_distribution<int>(1, 3)(rng);
    std::vector<double> xs;
    Eigen::MatrixXd x(n, 1);
    for (int i = 0; i < n; ++i) xs.push_back(x(i, 0) = normal(rng) * 3.0);
    KMeansOptions opt;
    opt.k = k;
    opt.seed = static_cast<std::uint64_t>(run);
    const double best = oracle::exhaustive_min_sse(xs, k);
    const auto r = kmeans(x, opt);
    // Lloyd can stop at a local optimum; it must never beat the exhaustive minimum.
    if (r.inertia < best - 1e-9) ++above_bound;
  }
  o.require(increases == 0, std::to_string(increases) + " inertia increases");
  o.require(above_bound == 0, std::to_string(above_bound) + " results below the exhaustive minimum");
  o.require(nondeterministic == 0, std::to_string(nondeterministic) + " non-reproducible runs");
  o.require(seconds_since(t0) < 30.0, "too slow");
}

void density_check(Outcome& o) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(40.0, 216.0);
  std::vector<double> xs, ys;
  std::vector<std::string> genes;
  for (int i = 0; i < 1000; ++i) {
    xs.push_back(u(rng));
    ys.push_back(u(rng));
    genes.push_back(i % 2 ? "A" : "B");
  }
  const PointCloud pc = make_point_cloud(xs, ys, genes);
  const GridSpec grid = GridSpec::for_extent(256, 256, 4.0, 2.0);
  const GeneExpressionMap raw = rasterize_points(pc, grid);
  const GeneExpressionMap smooth = gaussian_smooth(raw);
  double mass = 0.0;
  for (float v : smooth.tensor.data()) mass += v;
  o.require(std::abs(mass - 1000.0) <= 1e-3 * 1000.0, "mass " + std::to_string(mass));

  std::vector<std::vector<double>> in(64, std::vector<double>(64));
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) in[y][x] = raw.tensor.at(y, x, 0);
  const auto direct = oracle::direct_convolve(in, oracle::gaussian_taps(grid.sigma));
  double worst = 0.0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) worst = std::max(worst, std::abs(smooth.tensor.at(y, x, 0) - direct[y][x]));
  o.require(worst <= 1e-6, "separable vs direct deviation " + std::to_string(worst));
}

void dropout_check(Outcome& o) {
  const auto t0 = Clock::now();
  SynthConfig cfg;
  cfg.identical_profiles = {{0, 1}, {2, 3}};
  const SynthTissue tissue = generate(cfg);
  const GridSpec grid = GridSpec::for_extent(cfg.height, cfg.width, 4.0, 2.0);
  DropoutParams params;
  params.grid = grid;
  params.cluster.final_k = cfg.n_niches - 2;
  params.cluster.seed = cfg.seed;

  const GeneExpressionMap full = gaussian_smooth(rasterize_points(tissue.points, grid));
  const FeatureTensor on_grid =
      resample_to_grid(builtin_features(tissue.image, kDefaultScales), grid.height_bins, grid.width_bins);
  const Mask mask = foreground_mask(full, params.cluster.epsilon);
  const FeatureTensor morph = apply_pca(on_grid, fit_pca(on_grid, mask, 0.95, 100000, cfg.seed)).tensor;

  const DropoutResult result = dropout_benchmark(tissue.points, morph, {1.0, 0.75, 0.5, 0.25}, 10, cfg.seed, params);
  const auto summary = summarize_dropout(result);
  std::vector<double> gap;
  for (const auto& s : summary) gap.push_back(s.mean_joint - s.mean_genes);
  std::ostringstream gaps;
  gaps << std::setprecision(3) << "gaps";
  for (double g : gap) gaps << ' ' << g;
  bool monotone = true;
  for (std::size_t i = 1; i < gap.size(); ++i) monotone = monotone && gap[i] >= gap[i - 1];
  o.require(summary.size() == 4 && summary[0].mean_genes == 1.0, "full-panel genes-only ARI is not 1");
  o.require(gap.back() >= 0.05, gaps.str() + " (gap at 0.25 below 0.05)");
  o.require(monotone, gaps.str() + " (gap not non-decreasing)");
  o.require(seconds_since(t0) < 300.0, "too slow");
  if (o.ok) o.note << gaps.str();
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) throw std::runtime_error("sefi " + args.front() + " failed: " + err.str());
  return code;
}

void cli_determinism_check(Outcome& o) {
  const fs::path root = fs::temp_directory_path() / "sefi_acceptance";
  fs::remove_all(root);
  auto pipeline = [&](const std::string& tag) {
    const std::string d = (root / tag).string() + "/";
    fs::create_directories(d);
    cli({"synth", "--seed", "21", "--out-dir", d + "syn", "--height", "128", "--width", "128", "--niches", "4",
         "--genes", "10", "--identical", "0-1"});
    cli({"density", "--points", d + "syn/points.csv", "--image", d + "syn/dapi.png", "--out", d + "genes.sft"});
    cli({"features", "--image", d + "syn/dapi.png", "--genes", d + "genes.sft", "--out", d + "morph.sft", "--seed",
         "21"});
    cli({"cluster", "--genes", d + "genes.sft", "--morph", d + "morph.sft", "--out", d + "labels.pgm", "--final-k",
         "3", "--seed", "21"});
    cli({"expression-table", "--labels", d + "labels.pgm", "--genes", d + "genes.sft", "--out", d + "expr.csv"});
    cli({"benchmark-dropout", "--points", d + "syn/points.csv", "--image", d + "syn/dapi.png", "--out",
         d + "dropout.csv", "--final-k", "3", "--reps", "2", "--seed", "21"});
    return d;
  };
  const std::string a = pipeline("a"), b = pipeline("b");
  for (const std::string f : {"syn/points.csv", "syn/truth.pgm", "syn/dapi.png", "genes.sft", "morph.sft",
                              "labels.pgm", "expr.csv", "dropout.csv"})
    o.require(read_file(a + f) == read_file(b + f), f + " differs between runs; ");
  fs::remove_all(root);
}

void ward_check(Outcome& o) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  int nonmonotone = 0, not_single = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = std::uniform_int_distribution<int>(2, 15)(rng);
    Eigen::MatrixXd c(k, 4);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = normal(rng);
    std::vector<std::size_t> sizes;
    std::vector<int> assignment;
    for (int j = 0; j < k; ++j) {
      sizes.push_back(std::uniform_int_distribution<std::size_t>(1, 30)(rng));
      assignment.insert(assignment.end(), sizes.back(), j + 1);
    }
    const MergeResult m = hierarchical_merge(c, sizes, assignment, 1);
    for (std::size_t i = 1; i < m.tree.events.size(); ++i)
      if (m.tree.events[i].distance < m.tree.events[i - 1].distance * (1.0 - 1e-12)) ++nonmonotone;
    if (std::set<int>(m.assignment.begin(), m.assignment.end()) != std::set<int>{1}) ++not_single;
  }
  Eigen::MatrixXd c(4, 2);
  c << 0, 0, 3, 1, 7, 7, 3, 1;
  const MergeResult first = hierarchical_merge(c, {5, 2, 9, 4}, {1, 2, 3, 4}, 3);
  o.require(nonmonotone == 0, std::to_string(nonmonotone) + " decreasing merge distances");
  o.require(not_single == 0, std::to_string(not_single) + " trees not ending at one label");
  o.require(first.tree.events.size() == 1 && first.tree.events[0].cluster_a == 2 &&
                first.tree.events[0].cluster_b == 4 && first.tree.events[0].distance == 0.0,
            "identical centroids were not merged first");
}

}  // namespace

int main() {
  report("ari matches pair-counting oracle", ari_check);
  report("pca spectrum and retained dimension match oracle", pca_check);
  report("kmeans monotone, bounded by exhaustive optimum, reproducible", kmeans_check);
  report("density conserves mass and matches direct convolution", density_check);
  report("morphology compensates gene dropout on synthetic tissue", dropout_check);
  report("cli outputs byte-identical across runs", cli_determinism_check);
  report("ward merging monotone and complete", ward_check);
  return failures;
}
