#pragma once

#include "sefi/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sefi {

/// Integer raster exactly as stored (no normalization).
struct RawImage {
  int height = 0;
  int width = 0;
  int channels = 1;     // 1 gray, 3 rgb
  std::uint32_t maxval = 255;
  std::vector<std::uint16_t> samples;  // row-major, channel-interleaved
};

/// Label raster, 0 = background.
using LabelArray = Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RawImage decode_pgm(const std::string& bytes);
std::string encode_pgm16(const RawImage& img);

RawImage decode_png(const std::string& bytes);
std::string encode_png(const RawImage& img);

/// PNG or PGM by signature.
RawImage load_raw_image(const std::string& path);

/// 8/16-bit grayscale PNG or PGM normalized by maxval to [0,1].
GrayImage load_gray_image(const std::string& path);
GrayImage to_gray_image(const RawImage& raw);

/// Quantizes to 8 bits.
void save_gray_png(const std::string& path, const GrayImage& img);

void save_label_pgm(const std::string& path, const LabelArray& labels);
LabelArray load_label_image(const std::string& path);

/// RGB rendering with a fixed 12-color palette (background black).
std::string render_labels_png(const LabelArray& labels);

}  // namespace sefi
