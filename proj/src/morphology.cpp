#include "sefi/morphology.hpp"

#include "sefi/error.hpp"
#include "sefi/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace sefi {

namespace {

using ArrayD = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Summed-area table with a zero first row and column.
ArrayD integral(const ArrayD& a) {
  ArrayD s = ArrayD::Zero(a.rows() + 1, a.cols() + 1);
  for (Eigen::Index y = 0; y < a.rows(); ++y) {
    double row = 0.0;
    for (Eigen::Index x = 0; x < a.cols(); ++x) {
      row += a(y, x);
      s(y + 1, x + 1) = s(y, x + 1) + row;
    }
  }
  return s;
}

struct Window {
  Eigen::Index y0, y1, x0, x1;  // half-open
  double area() const { return static_cast<double>((y1 - y0) * (x1 - x0)); }
};

Window window_at(Eigen::Index y, Eigen::Index x, int size, Eigen::Index h, Eigen::Index w) {
  const Eigen::Index half = size / 2;
  return {std::max<Eigen::Index>(0, y - half), std::min<Eigen::Index>(h, y - half + size),
          std::max<Eigen::Index>(0, x - half), std::min<Eigen::Index>(w, x - half + size)};
}

double box_sum(const ArrayD& s, const Window& win) {
  return s(win.y1, win.x1) - s(win.y0, win.x1) - s(win.y1, win.x0) + s(win.y0, win.x0);
}

// Separable Gaussian with edge replication; radius ceil(4·sigma).
ArrayD blur_replicate(const ArrayD& in, double sigma) {
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) total += taps[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& t : taps) t /= total;

  const Eigen::Index h = in.rows(), w = in.cols();
  ArrayD tmp(h, w), out(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += taps[static_cast<std::size_t>(k + radius)] * in(y, std::clamp<Eigen::Index>(x + k, 0, w - 1));
      tmp(y, x) = acc;
    }
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += taps[static_cast<std::size_t>(k + radius)] * tmp(std::clamp<Eigen::Index>(y + k, 0, h - 1), x);
      out(y, x) = acc;
    }
  return out;
}

constexpr int kEntropyBins = 8;

// Moving average of width `fy`×`fx` (normalized over in-bounds samples);
// widths below 2 leave that axis untouched.
FeatureTensor box_prefilter(const FeatureTensor& t, int fy, int fx) {
  if (fy < 2 && fx < 2) return t;
  FeatureTensor out = t;
  auto pass = [&](FeatureTensor& dst, const FeatureTensor& in, int width, bool along_x) {
    if (width < 2) {
      dst = in;
      return;
    }
    const int lo = -(width - 1) / 2, hi = width / 2;
    for (int y = 0; y < in.height(); ++y)
      for (int x = 0; x < in.width(); ++x)
        for (int c = 0; c < in.channels(); ++c) {
          double acc = 0.0;
          int n = 0;
          for (int k = lo; k <= hi; ++k) {
            const int yy = along_x ? y : y + k, xx = along_x ? x + k : x;
            if (yy < 0 || yy >= in.height() || xx < 0 || xx >= in.width()) continue;
            acc += in.at(yy, xx, c);
            ++n;
          }
          dst.at(y, x, c) = static_cast<float>(acc / n);
        }
  };
  FeatureTensor tmp = t;
  pass(tmp, t, fx, true);
  pass(out, tmp, fy, false);
  return out;
}

}  // namespace

FeatureTensor builtin_features(const GrayImage& img, const std::vector<int>& scales, int threads) {
  if (scales.empty()) throw DataError("at least one feature scale is required");
  for (int s : scales)
    if (s < 2) throw DataError("feature scales must be >= 2");
  const int max_scale = *std::max_element(scales.begin(), scales.end());
  if (img.height() < max_scale || img.width() < max_scale)
    throw DataError("image (" + std::to_string(img.height()) + "x" + std::to_string(img.width()) +
                    ") is smaller than the largest feature scale " + std::to_string(max_scale));

  const Eigen::Index h = img.height(), w = img.width();
  // Statistics are taken on the globally centered image so that flat regions
  // give exact zeros for std and DoG.
  const ArrayD raw = img.pixels.cast<double>();
  const double global_mean = raw.mean();
  const ArrayD centered = raw - global_mean;
  const ArrayD sum1 = integral(centered);
  const ArrayD sum2 = integral(centered.square());

  std::array<ArrayD, kEntropyBins> bin_sums;
  for (int b = 0; b < kEntropyBins; ++b) {
    ArrayD indicator(h, w);
    for (Eigen::Index y = 0; y < h; ++y)
      for (Eigen::Index x = 0; x < w; ++x) {
        const int bin = std::clamp(static_cast<int>(std::floor(raw(y, x) * kEntropyBins)), 0, kEntropyBins - 1);
        indicator(y, x) = bin == b ? 1.0 : 0.0;
      }
    bin_sums[static_cast<std::size_t>(b)] = integral(indicator);
  }

  std::vector<std::string> names;
  for (int s : scales)
    for (const char* stat : {"mean", "std", "dog", "entropy"}) names.push_back("s" + std::to_string(s) + "_" + stat);
  FeatureTensor out(static_cast<int>(h), static_cast<int>(w), static_cast<int>(4 * scales.size()), names);

  parallel_for(scales.size(), threads, [&](std::size_t si) {
    const int s = scales[si];
    const int base = static_cast<int>(4 * si);
    const ArrayD dog = blur_replicate(centered, s / 4.0) - blur_replicate(centered, s / 2.0);
    for (Eigen::Index y = 0; y < h; ++y)
      for (Eigen::Index x = 0; x < w; ++x) {
        const Window win = window_at(y, x, s, h, w);
        const double n = win.area();
        const double m = box_sum(sum1, win) / n;
        const double var = std::max(0.0, box_sum(sum2, win) / n - m * m);
        double entropy = 0.0;
        for (const auto& bs : bin_sums) {
          const double p = box_sum(bs, win) / n;
          if (p > 0.0) entropy -= p * std::log2(p);
        }
        const int yi = static_cast<int>(y), xi = static_cast<int>(x);
        out.at(yi, xi, base + 0) = static_cast<float>(m + global_mean);
        out.at(yi, xi, base + 1) = static_cast<float>(std::sqrt(var));
        out.at(yi, xi, base + 2) = static_cast<float>(dog(y, x));
        out.at(yi, xi, base + 3) = static_cast<float>(std::max(0.0, entropy));
      }
  });
  return out;
}

FeatureTensor resample_to_grid(const FeatureTensor& t, int target_h, int target_w) {
  if (target_h < 1 || target_w < 1) throw DataError("resample target must be at least 1x1");
  if (t.height() < 1 || t.width() < 1) throw DataError("cannot resample an empty tensor");
  if (target_h == t.height() && target_w == t.width()) return t;

  const FeatureTensor src = box_prefilter(t, static_cast<int>(std::floor(static_cast<double>(t.height()) / target_h)),
                                          static_cast<int>(std::floor(static_cast<double>(t.width()) / target_w)));
  FeatureTensor out(target_h, target_w, t.channels(), t.channel_names());
  const double sy = static_cast<double>(t.height()) / target_h;
  const double sx = static_cast<double>(t.width()) / target_w;
  for (int y = 0; y < target_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(t.height() - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, t.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < target_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(t.width() - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, t.width() - 1);
      const double wx = fx - x0;
      for (int c = 0; c < t.channels(); ++c) {
        const double top = (1.0 - wx) * src.at(y0, x0, c) + wx * src.at(y0, x1, c);
        const double bottom = (1.0 - wx) * src.at(y1, x0, c) + wx * src.at(y1, x1, c);
        double v = (1.0 - wy) * top + wy * bottom;
        // Convex combination; clamp away rounding past the corner values.
        const double lo = std::min({src.at(y0, x0, c), src.at(y0, x1, c), src.at(y1, x0, c), src.at(y1, x1, c)});
        const double hi = std::max({src.at(y0, x0, c), src.at(y0, x1, c), src.at(y1, x0, c), src.at(y1, x1, c)});
        out.at(y, x, c) = static_cast<float>(std::clamp(v, lo, hi));
      }
    }
  }
  return out;
}

PcaModel<double> fit_pca(const FeatureTensor& t, const Mask& mask, double variance_target, std::size_t sample_cap,
                         std::uint64_t seed) {
  if (mask.rows() != t.height() || mask.cols() != t.width()) throw DataError("mask and feature grid differ in size");
  if (!(variance_target > 0.0) || variance_target > 1.0) throw DataError("variance target must be in (0, 1]");
  std::vector<Eigen::Index> pixels;
  for (Eigen::Index y = 0; y < mask.rows(); ++y)
    for (Eigen::Index x = 0; x < mask.cols(); ++x)
      if (mask(y, x)) pixels.push_back(y * mask.cols() + x);
  if (pixels.size() < 2) throw DataError("PCA needs at least 2 masked pixels");

  if (sample_cap >= 2 && pixels.size() > sample_cap) {
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: the first sample_cap entries are a uniform subset.
    for (std::size_t i = 0; i < sample_cap; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pixels.size() - 1);
      std::swap(pixels[i], pixels[pick(rng)]);
    }
    pixels.resize(sample_cap);
    std::sort(pixels.begin(), pixels.end());
  }

  const auto all = t.matrix();
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(pixels.size()), t.channels());
  for (std::size_t i = 0; i < pixels.size(); ++i) samples.row(static_cast<Eigen::Index>(i)) = all.row(pixels[i]).cast<double>();
  return fit_pca_rows<double>(samples, variance_target);
}

ReducedFeatures apply_pca(const FeatureTensor& t, const PcaModel<double>& model) {
  if (t.channels() != model.input_dim())
    throw DataError("feature tensor has " + std::to_string(t.channels()) + " channels, PCA model expects " +
                    std::to_string(model.input_dim()));
  const Eigen::Index d = model.output_dim();
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < d; ++i) names.push_back("pc" + std::to_string(i + 1));
  ReducedFeatures out{FeatureTensor(t.height(), t.width(), static_cast<int>(d), names), model};
  out.tensor.matrix() = model.project(t.matrix()).cast<float>();
  return out;
}

}  // namespace sefi
