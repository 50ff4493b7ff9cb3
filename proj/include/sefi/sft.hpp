#pragma once

#include "sefi/tensor.hpp"

#include <string>
#include <string_view>

namespace sefi {

// SFT1 layout: "SFT1", u32le height, width, channels, name_table_len,
// name table (LF-separated UTF-8), then H·W·C f32le channel-last.

FeatureTensor read_feature_tensor(std::string_view bytes);
std::string write_feature_tensor(const FeatureTensor& t);

FeatureTensor load_feature_tensor(const std::string& path);
void save_feature_tensor(const std::string& path, const FeatureTensor& t);

}  // namespace sefi
