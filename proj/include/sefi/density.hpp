#pragma once

#include "sefi/points.hpp"
#include "sefi/tensor.hpp"

#include <vector>

namespace sefi {

/// Regular binning grid with origin at (0,0) in pixel coordinates.
struct GridSpec {
  double resolution = 4.0;  // px per bin
  double sigma = 2.0;       // smoothing bandwidth in bins
  int height_bins = 1;
  int width_bins = 1;

  /// Grid covering an image of the given pixel extent.
  static GridSpec for_extent(int height_px, int width_px, double resolution, double sigma);
  /// Smallest grid containing every point.
  static GridSpec for_points(const PointCloud& pc, double resolution, double sigma);

  void validate() const;
};

/// Per-gene raster; channel order and names follow the gene panel.
struct GeneExpressionMap {
  FeatureTensor tensor;
  GridSpec grid;
};

/// Unsmoothed per-gene counts, bin = floor(coord / resolution).
/// Throws DataError listing points that fall outside the grid.
GeneExpressionMap rasterize_points(const PointCloud& pc, const GridSpec& grid);

/// Normalized, truncated (radius ceil(4·sigma)) 1D Gaussian taps.
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian smoothing per channel; zero outside the grid.
GeneExpressionMap gaussian_smooth(const GeneExpressionMap& m, int threads = 1);

/// Divides each bin by its total density over genes (0 where total <= epsilon).
GeneExpressionMap compose_normalize(const GeneExpressionMap& m, double epsilon);

/// True where the channel sum exceeds epsilon.
Mask foreground_mask(const FeatureTensor& t, double epsilon);
inline Mask foreground_mask(const GeneExpressionMap& m, double epsilon) { return foreground_mask(m.tensor, epsilon); }

}  // namespace sefi
