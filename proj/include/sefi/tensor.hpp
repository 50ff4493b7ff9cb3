#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace sefi {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// H×W boolean raster, row-major (y, x).
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Grayscale intensities in [0,1], indexed (y, x).
struct GrayImage {
  Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> pixels;

  int height() const { return static_cast<int>(pixels.rows()); }
  int width() const { return static_cast<int>(pixels.cols()); }
};

/// H×W×C float raster stored channel-last: index = (y·W + x)·C + c.
class FeatureTensor {
 public:
  FeatureTensor() = default;
  FeatureTensor(int height, int width, int channels, std::vector<std::string> names = {});

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t pixels() const { return static_cast<std::size_t>(height_) * width_; }

  const std::vector<std::string>& channel_names() const { return names_; }
  void set_channel_names(std::vector<std::string> names);

  float& at(int y, int x, int c) { return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c]; }
  float at(int y, int x, int c) const { return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c]; }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  /// (H·W)×C view, one pixel per row.
  Eigen::Map<RowMatrix<float>> matrix() { return {data_.data(), static_cast<Eigen::Index>(pixels()), channels_}; }
  Eigen::Map<const RowMatrix<float>> matrix() const {
    return {data_.data(), static_cast<Eigen::Index>(pixels()), channels_};
  }

  /// Copy of channel c as an H×W array.
  Eigen::ArrayXXf channel(int c) const;
  void set_channel(int c, const Eigen::Ref<const Eigen::ArrayXXf>& values);

  /// New tensor holding the listed channels, in the given order.
  FeatureTensor select_channels(const std::vector<int>& which) const;

  bool operator==(const FeatureTensor&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<std::string> names_;
  std::vector<float> data_;
};

}  // namespace sefi
