#include "sefi/sft.hpp"

#include "sefi/error.hpp"
#include "sefi/io_util.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

namespace sefi {

namespace {

constexpr char kMagic[4] = {'S', 'F', 'T', '1'};
constexpr std::size_t kHeaderBytes = 4 + 4 * 4;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  return v;
}

}  // namespace

std::string write_feature_tensor(const FeatureTensor& t) {
  std::string names;
  bool any_name = false;
  for (const auto& n : t.channel_names()) {
    if (n.find('\n') != std::string::npos) throw FormatError("channel name contains a line feed");
    any_name = any_name || !n.empty();
  }
  if (any_name) {
    for (std::size_t i = 0; i < t.channel_names().size(); ++i) {
      if (i) names.push_back('\n');
      names += t.channel_names()[i];
    }
  }
  if (names.size() > std::numeric_limits<std::uint32_t>::max()) throw FormatError("name table too large");

  std::string out(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(t.height()));
  put_u32(out, static_cast<std::uint32_t>(t.width()));
  put_u32(out, static_cast<std::uint32_t>(t.channels()));
  put_u32(out, static_cast<std::uint32_t>(names.size()));
  out += names;

  const auto& data = t.data();
  const std::size_t base = out.size();
  out.resize(base + data.size() * 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(data[i]);
    for (int b = 0; b < 4; ++b) out[base + 4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
  }
  return out;
}

FeatureTensor read_feature_tensor(std::string_view bytes) {
  if (bytes.size() < kHeaderBytes) throw FormatError("truncated SFT header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad SFT magic");
  const std::uint64_t h = get_u32(bytes, 4);
  const std::uint64_t w = get_u32(bytes, 8);
  const std::uint64_t c = get_u32(bytes, 12);
  const std::uint64_t name_len = get_u32(bytes, 16);

  constexpr std::uint64_t kMaxDim = std::numeric_limits<int>::max();
  if (h > kMaxDim || w > kMaxDim || c > kMaxDim) throw FormatError("SFT dimension overflow");
  // h, w, c < 2^31 so the product of any two fits; check the third.
  const std::uint64_t hw = h * w;
  if (c != 0 && hw > std::numeric_limits<std::uint64_t>::max() / 4 / c) throw FormatError("SFT dimension overflow");
  const std::uint64_t count = hw * c;
  const std::uint64_t available = bytes.size() - kHeaderBytes;
  if (name_len > available) throw FormatError("truncated SFT name table");
  if ((available - name_len) / 4 < count || (available - name_len) != count * 4)
    throw FormatError(count * 4 > available - name_len ? "truncated SFT payload" : "trailing bytes after SFT payload");

  std::vector<std::string> names;
  if (name_len > 0) {
    std::string_view table = bytes.substr(kHeaderBytes, name_len);
    std::size_t pos = 0;
    while (true) {
      const std::size_t lf = table.find('\n', pos);
      names.emplace_back(table.substr(pos, lf == std::string_view::npos ? std::string_view::npos : lf - pos));
      if (lf == std::string_view::npos) break;
      pos = lf + 1;
    }
    if (names.size() != c) throw FormatError("SFT name table does not list one name per channel");
  }

  FeatureTensor t(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c), std::move(names));
  auto& data = t.data();
  const std::size_t base = kHeaderBytes + name_len;
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint32_t bits = get_u32(bytes, base + 4 * i);
    data[i] = std::bit_cast<float>(bits);
    if (!std::isfinite(data[i])) throw FormatError("non-finite value in SFT payload");
  }
  return t;
}

FeatureTensor load_feature_tensor(const std::string& path) { return read_feature_tensor(read_file(path)); }

void save_feature_tensor(const std::string& path, const FeatureTensor& t) { write_file(path, write_feature_tensor(t)); }

}  // namespace sefi
