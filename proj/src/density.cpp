#include "sefi/density.hpp"

#include "sefi/error.hpp"
#include "sefi/parallel.hpp"

#include <cmath>
#include <sstream>

namespace sefi {

GridSpec GridSpec::for_extent(int height_px, int width_px, double resolution, double sigma) {
  if (!(resolution > 0.0)) throw DataError("grid resolution must be > 0");
  if (height_px < 1 || width_px < 1) throw DataError("grid extent must be at least 1 px");
  GridSpec g;
  g.resolution = resolution;
  g.sigma = sigma;
  g.height_bins = static_cast<int>(std::ceil(height_px / resolution));
  g.width_bins = static_cast<int>(std::ceil(width_px / resolution));
  g.validate();
  return g;
}

GridSpec GridSpec::for_points(const PointCloud& pc, double resolution, double sigma) {
  if (!(resolution > 0.0)) throw DataError("grid resolution must be > 0");
  double max_x = 0.0, max_y = 0.0;
  for (const auto& p : pc.points) {
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  GridSpec g;
  g.resolution = resolution;
  g.sigma = sigma;
  g.height_bins = static_cast<int>(std::floor(max_y / resolution)) + 1;
  g.width_bins = static_cast<int>(std::floor(max_x / resolution)) + 1;
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw DataError("grid resolution must be > 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DataError("smoothing sigma must be > 0");
  if (height_bins < 1 || width_bins < 1) throw DataError("grid must have at least one bin");
}

GeneExpressionMap rasterize_points(const PointCloud& pc, const GridSpec& grid) {
  grid.validate();
  GeneExpressionMap m{FeatureTensor(grid.height_bins, grid.width_bins, static_cast<int>(pc.gene_panel.size()),
                                    pc.gene_panel),
                      grid};
  std::vector<std::size_t> outside;
  for (std::size_t i = 0; i < pc.points.size(); ++i) {
    const auto& p = pc.points[i];
    const double bx = std::floor(p.x / grid.resolution);
    const double by = std::floor(p.y / grid.resolution);
    if (bx < 0 || by < 0 || bx >= grid.width_bins || by >= grid.height_bins) {
      outside.push_back(i);
      continue;
    }
    m.tensor.at(static_cast<int>(by), static_cast<int>(bx), static_cast<int>(p.gene)) += 1.0f;
  }
  if (!outside.empty()) {
    std::ostringstream msg;
    msg << outside.size() << " point(s) outside the grid extent, indices:";
    for (std::size_t j = 0; j < outside.size() && j < 20; ++j) msg << ' ' << outside[j];
    if (outside.size() > 20) msg << " ...";
    throw DataError(msg.str());
  }
  return m;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw DataError("smoothing sigma must be > 0");
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (auto& v : taps) v /= total;
  return taps;
}

namespace {

// Zero-padded 1D convolution along rows then columns.
Eigen::ArrayXXd smooth_channel(const Eigen::ArrayXXd& in, const std::vector<double>& taps) {
  const int radius = static_cast<int>(taps.size() / 2);
  const Eigen::Index h = in.rows(), w = in.cols();
  Eigen::ArrayXXd tmp = Eigen::ArrayXXd::Zero(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const Eigen::Index xx = x + k;
        if (xx >= 0 && xx < w) acc += taps[static_cast<std::size_t>(k + radius)] * in(y, xx);
      }
      tmp(y, x) = acc;
    }
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const Eigen::Index yy = y + k;
        if (yy >= 0 && yy < h) acc += taps[static_cast<std::size_t>(k + radius)] * tmp(yy, x);
      }
      out(y, x) = acc;
    }
  return out;
}

}  // namespace

GeneExpressionMap gaussian_smooth(const GeneExpressionMap& m, int threads) {
  m.grid.validate();
  const auto taps = gaussian_kernel(m.grid.sigma);
  GeneExpressionMap out{FeatureTensor(m.tensor.height(), m.tensor.width(), m.tensor.channels(),
                                      m.tensor.channel_names()),
                        m.grid};
  parallel_for(static_cast<std::size_t>(m.tensor.channels()), threads, [&](std::size_t c) {
    const int ch = static_cast<int>(c);
    const Eigen::ArrayXXd smoothed = smooth_channel(m.tensor.channel(ch).cast<double>(), taps);
    out.tensor.set_channel(ch, smoothed.cast<float>().max(0.0f));
  });
  return out;
}

GeneExpressionMap compose_normalize(const GeneExpressionMap& m, double epsilon) {
  GeneExpressionMap out = m;
  auto mat = out.tensor.matrix();
  for (Eigen::Index p = 0; p < mat.rows(); ++p) {
    const double total = mat.row(p).cast<double>().sum();
    if (total > epsilon)
      mat.row(p) = (mat.row(p).cast<double>() / total).cast<float>();
    else
      mat.row(p).setZero();
  }
  return out;
}

Mask foreground_mask(const FeatureTensor& t, double epsilon) {
  if (epsilon < 0.0) throw DataError("mask epsilon must be >= 0");
  Mask mask(t.height(), t.width());
  const auto mat = t.matrix();
  for (int y = 0; y < t.height(); ++y)
    for (int x = 0; x < t.width(); ++x)
      mask(y, x) = mat.row(static_cast<Eigen::Index>(y) * t.width() + x).cast<double>().sum() > epsilon;
  return mask;
}

}  // namespace sefi
