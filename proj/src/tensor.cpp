#include "sefi/tensor.hpp"

#include "sefi/error.hpp"

namespace sefi {

FeatureTensor::FeatureTensor(int height, int width, int channels, std::vector<std::string> names)
    : height_(height), width_(width), channels_(channels), names_(std::move(names)) {
  if (height < 0 || width < 0 || channels < 0) throw DataError("negative tensor dimension");
  if (names_.empty()) names_.resize(static_cast<std::size_t>(channels));
  if (names_.size() != static_cast<std::size_t>(channels))
    throw DataError("channel name count does not match channel count");
  data_.assign(pixels() * static_cast<std::size_t>(channels), 0.0f);
}

void FeatureTensor::set_channel_names(std::vector<std::string> names) {
  if (names.size() != static_cast<std::size_t>(channels_))
    throw DataError("channel name count does not match channel count");
  names_ = std::move(names);
}

Eigen::ArrayXXf FeatureTensor::channel(int c) const {
  Eigen::ArrayXXf out(height_, width_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) out(y, x) = at(y, x, c);
  return out;
}

void FeatureTensor::set_channel(int c, const Eigen::Ref<const Eigen::ArrayXXf>& values) {
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) at(y, x, c) = values(y, x);
}

FeatureTensor FeatureTensor::select_channels(const std::vector<int>& which) const {
  std::vector<std::string> names;
  names.reserve(which.size());
  for (int c : which) {
    if (c < 0 || c >= channels_) throw DataError("channel index out of range");
    names.push_back(names_[static_cast<std::size_t>(c)]);
  }
  FeatureTensor out(height_, width_, static_cast<int>(which.size()), std::move(names));
  const std::size_t n = pixels();
  const std::size_t k = which.size();
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t j = 0; j < k; ++j)
      out.data_[p * k + j] = data_[p * static_cast<std::size_t>(channels_) + static_cast<std::size_t>(which[j])];
  return out;
}

}  // namespace sefi
