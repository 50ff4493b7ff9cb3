#include "sefi/synth.hpp"

#include "sefi/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

namespace sefi {

namespace {

using ArrayD = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

ArrayD blur_wrap(const ArrayD& in, double sigma) {
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) total += taps[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& t : taps) t /= total;
  const Eigen::Index h = in.rows(), w = in.cols();
  auto wrap = [](Eigen::Index i, Eigen::Index n) { return ((i % n) + n) % n; };
  ArrayD tmp(h, w), out(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += taps[static_cast<std::size_t>(k + radius)] * in(y, wrap(x + k, w));
      tmp(y, x) = acc;
    }
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += taps[static_cast<std::size_t>(k + radius)] * tmp(wrap(y + k, h), x);
      out(y, x) = acc;
    }
  return out;
}

std::string gene_token(int g, int n_genes) {
  const int digits = static_cast<int>(std::to_string(n_genes).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "g%0*d", digits, g + 1);
  return buf;
}

}  // namespace

void SynthConfig::validate() const {
  if (height < 8 || width < 8) throw DataError("synthetic image must be at least 8x8");
  if (n_niches < 2) throw DataError("n_niches must be >= 2");
  if (n_genes < 2) throw DataError("n_genes must be >= 2");
  if (!(density > 0.0)) throw DataError("point density must be > 0");
  if (!(concentration > 0.0)) throw DataError("profile concentration must be > 0");
  if (!(morph_signal >= 0.0 && morph_signal <= 1.0)) throw DataError("morph_signal must be in [0, 1]");
  for (const auto& [a, b] : identical_profiles)
    if (a < 0 || b < 0 || a >= n_niches || b >= n_niches || a == b) throw DataError("invalid identical-profile pair");
}

Provenance SynthConfig::to_provenance() const {
  std::ostringstream num;
  num.precision(17);
  auto fmt = [&](double v) {
    num.str("");
    num << v;
    return num.str();
  };
  std::string pairs;
  for (const auto& [a, b] : identical_profiles) {
    if (!pairs.empty()) pairs += ',';
    pairs += std::to_string(a) + "-" + std::to_string(b);
  }
  return {{"seed", std::to_string(seed)},
          {"height", std::to_string(height)},
          {"width", std::to_string(width)},
          {"n_niches", std::to_string(n_niches)},
          {"n_genes", std::to_string(n_genes)},
          {"density", fmt(density)},
          {"concentration", fmt(concentration)},
          {"morph_signal", fmt(morph_signal)},
          {"identical_profiles", pairs.empty() ? "none" : pairs}};
}

SynthTissue generate(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SynthTissue out;

  // Voronoi niches.
  std::vector<std::pair<double, double>> sites(static_cast<std::size_t>(cfg.n_niches));
  for (auto& [sy, sx] : sites) {
    sy = unit(rng) * cfg.height;
    sx = unit(rng) * cfg.width;
  }
  out.truth.resize(cfg.height, cfg.width);
  std::vector<std::vector<std::pair<int, int>>> members(static_cast<std::size_t>(cfg.n_niches));
  for (int y = 0; y < cfg.height; ++y)
    for (int x = 0; x < cfg.width; ++x) {
      double best = std::numeric_limits<double>::infinity();
      int owner = 0;
      for (int i = 0; i < cfg.n_niches; ++i) {
        const double dy = y + 0.5 - sites[static_cast<std::size_t>(i)].first;
        const double dx = x + 0.5 - sites[static_cast<std::size_t>(i)].second;
        if (const double d = dy * dy + dx * dx; d < best) {
          best = d;
          owner = i;
        }
      }
      out.truth(y, x) = owner + 1;
      members[static_cast<std::size_t>(owner)].emplace_back(y, x);
    }

  // Dirichlet gene profiles; listed pairs share the first niche's profile.
  std::gamma_distribution<double> gamma(cfg.concentration, 1.0);
  out.profiles.assign(static_cast<std::size_t>(cfg.n_niches), std::vector<double>(static_cast<std::size_t>(cfg.n_genes)));
  for (auto& profile : out.profiles) {
    double total = 0.0;
    for (auto& p : profile) total += p = gamma(rng);
    if (total <= 0.0) {
      std::fill(profile.begin(), profile.end(), 1.0 / cfg.n_genes);
    } else {
      for (auto& p : profile) p /= total;
    }
  }
  for (const auto& [a, b] : cfg.identical_profiles)
    out.profiles[static_cast<std::size_t>(b)] = out.profiles[static_cast<std::size_t>(a)];

  // Detections: Poisson count per niche, uniform position inside its pixels.
  std::vector<double> xs, ys;
  std::vector<std::string> genes;
  std::vector<std::string> tokens;
  for (int g = 0; g < cfg.n_genes; ++g) tokens.push_back(gene_token(g, cfg.n_genes));
  for (int i = 0; i < cfg.n_niches; ++i) {
    const auto& pix = members[static_cast<std::size_t>(i)];
    if (pix.empty()) continue;
    std::poisson_distribution<long> count(cfg.density * static_cast<double>(pix.size()));
    std::uniform_int_distribution<std::size_t> pick(0, pix.size() - 1);
    std::discrete_distribution<int> gene(out.profiles[static_cast<std::size_t>(i)].begin(),
                                         out.profiles[static_cast<std::size_t>(i)].end());
    const long n = count(rng);
    for (long j = 0; j < n; ++j) {
      const auto [py, px] = pix[pick(rng)];
      // Stay strictly inside the pixel so floor() recovers it.
      xs.push_back(px + std::min(unit(rng), 1.0 - 1e-9));
      ys.push_back(py + std::min(unit(rng), 1.0 - 1e-9));
      genes.push_back(tokens[static_cast<std::size_t>(gene(rng))]);
    }
  }
  out.points = make_point_cloud(xs, ys, genes);

  // Texture: one white-noise field, band-passed at a niche-dependent scale.
  std::normal_distribution<double> normal(0.0, 1.0);
  ArrayD noise(cfg.height, cfg.width);
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = normal(rng);
  std::vector<ArrayD> bands;
  std::vector<double> band_sigma;
  for (int i = 0; i < cfg.n_niches; ++i) {
    const double sigma = std::pow(2.0, cfg.morph_signal * 5.0 * i / (cfg.n_niches - 1));
    const auto hit = std::find(band_sigma.begin(), band_sigma.end(), sigma);
    if (hit != band_sigma.end()) {
      bands.push_back(bands[static_cast<std::size_t>(hit - band_sigma.begin())]);
      band_sigma.push_back(sigma);
      continue;
    }
    ArrayD band = blur_wrap(noise, sigma) - blur_wrap(noise, 2.0 * sigma);
    const double sd = std::sqrt((band - band.mean()).square().mean());
    if (sd > 0.0) band /= sd;
    bands.push_back(std::move(band));
    band_sigma.push_back(sigma);
  }
  out.image.pixels.resize(cfg.height, cfg.width);
  for (int y = 0; y < cfg.height; ++y)
    for (int x = 0; x < cfg.width; ++x) {
      const double v = 0.5 + 0.15 * bands[static_cast<std::size_t>(out.truth(y, x) - 1)](y, x);
      out.image.pixels(y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  return out;
}

}  // namespace sefi
