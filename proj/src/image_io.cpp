#include "sefi/image_io.hpp"

#include "sefi/error.hpp"
#include "sefi/io_util.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstring>

namespace sefi {

namespace {

// PNM header token reader; skips whitespace and '#' comments.
class PnmTokenizer {
 public:
  explicit PnmTokenizer(const std::string& bytes) : bytes_(bytes) {}

  std::string next() {
    skip();
    std::string tok;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) tok += bytes_[pos_++];
    if (tok.empty()) throw FormatError("truncated PGM header");
    return tok;
  }

  long next_int() {
    const std::string tok = next();
    if (!std::all_of(tok.begin(), tok.end(), [](unsigned char ch) { return std::isdigit(ch); }))
      throw FormatError("bad PGM header field '" + tok + "'");
    return std::stol(tok);
  }

  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }

 private:
  void skip() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

struct PngReadSource {
  const std::string* bytes;
  std::size_t pos;
};

void png_read_from_string(png_structp png, png_bytep out, png_size_t len) {
  auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
  if (src->pos + len > src->bytes->size()) png_error(png, "truncated PNG");
  std::memcpy(out, src->bytes->data() + src->pos, len);
  src->pos += len;
}

void png_write_to_string(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), len);
}

void png_flush_noop(png_structp) {}

[[noreturn]] void png_throw(png_structp png, png_const_charp msg) {
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  *err = msg;
  png_longjmp(png, 1);
}

void png_warn_silent(png_structp, png_const_charp) {}

constexpr std::array<std::array<std::uint8_t, 3>, 12> kPalette = {{
    {230, 25, 75},   {60, 180, 75},  {255, 225, 25}, {0, 130, 200},  {245, 130, 48}, {145, 30, 180},
    {70, 240, 240},  {240, 50, 230}, {210, 245, 60}, {250, 190, 212}, {0, 128, 128}, {170, 110, 40},
}};

}  // namespace

RawImage decode_pgm(const std::string& bytes) {
  PnmTokenizer tok(bytes);
  const std::string magic = tok.next();
  if (magic != "P5" && magic != "P2") throw FormatError("not a grayscale PGM");
  RawImage img;
  const long w = tok.next_int();
  const long h = tok.next_int();
  const long maxval = tok.next_int();
  if (w < 1 || h < 1 || w > (1 << 20) || h > (1 << 20)) throw FormatError("bad PGM dimensions");
  if (maxval < 1 || maxval > 65535) throw FormatError("bad PGM maxval");
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.maxval = static_cast<std::uint32_t>(maxval);
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  img.samples.resize(n);

  if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      const long v = tok.next_int();
      if (v > maxval) throw FormatError("PGM sample exceeds maxval");
      img.samples[i] = static_cast<std::uint16_t>(v);
    }
    return img;
  }
  tok.advance();  // single whitespace after maxval
  const std::size_t bps = maxval > 255 ? 2 : 1;
  std::size_t pos = tok.pos();
  if (bytes.size() < pos + n * bps) throw FormatError("truncated PGM payload");
  for (std::size_t i = 0; i < n; ++i) {
    std::uint16_t v = static_cast<unsigned char>(bytes[pos]);
    if (bps == 2) v = static_cast<std::uint16_t>((v << 8) | static_cast<unsigned char>(bytes[pos + 1]));
    if (v > maxval) throw FormatError("PGM sample exceeds maxval");
    img.samples[i] = v;
    pos += bps;
  }
  return img;
}

std::string encode_pgm16(const RawImage& img) {
  if (img.channels != 1) throw FormatError("PGM output must be single channel");
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n65535\n";
  out.reserve(out.size() + img.samples.size() * 2);
  for (std::uint16_t v : img.samples) {
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xffu));
  }
  return out;
}

RawImage decode_png(const std::string& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0)
    throw FormatError("not a PNG");
  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_throw, png_warn_silent);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("libpng initialization failed");
  }
  RawImage img;
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> buffer;
  PngReadSource src{&bytes, 0};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("PNG decode failed: " + err);
  }
  png_set_read_fn(png, &src, png_read_from_string);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // host little-endian u16
  png_read_update_info(png, info);

  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.channels = png_get_channels(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  img.maxval = out_depth == 16 ? 65535u : 255u;
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * static_cast<std::size_t>(img.height));
  rows.resize(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) rows[static_cast<std::size_t>(y)] = buffer.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
  img.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (out_depth == 16) {
      std::uint16_t v;
      std::memcpy(&v, buffer.data() + 2 * i, 2);
      img.samples[i] = v;
    } else {
      img.samples[i] = buffer[i];
    }
  }
  return img;
}

std::string encode_png(const RawImage& img) {
  if (img.channels != 1 && img.channels != 3) throw FormatError("PNG output must be gray or rgb");
  const bool wide = img.maxval > 255;
  std::string out;
  std::string err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_throw, png_warn_silent);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw FormatError("libpng initialization failed");
  }
  const std::size_t row_samples = static_cast<std::size_t>(img.width) * img.channels;
  std::vector<std::uint8_t> buffer(row_samples * img.height * (wide ? 2 : 1));
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    if (wide) {
      buffer[2 * i] = static_cast<std::uint8_t>(img.samples[i] >> 8);
      buffer[2 * i + 1] = static_cast<std::uint8_t>(img.samples[i] & 0xffu);
    } else {
      buffer[i] = static_cast<std::uint8_t>(img.samples[i]);
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y)
    rows[static_cast<std::size_t>(y)] = buffer.data() + row_samples * (wide ? 2 : 1) * y;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError("PNG encode failed: " + err);
  }
  png_set_write_fn(png, &out, png_write_to_string, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), wide ? 16 : 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

RawImage load_raw_image(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '2')) return decode_pgm(bytes);
  return decode_png(bytes);
}

GrayImage to_gray_image(const RawImage& raw) {
  if (raw.channels != 1) throw FormatError("expected a single-channel grayscale image");
  GrayImage img;
  img.pixels.resize(raw.height, raw.width);
  const float scale = 1.0f / static_cast<float>(raw.maxval);
  for (int y = 0; y < raw.height; ++y)
    for (int x = 0; x < raw.width; ++x)
      img.pixels(y, x) = static_cast<float>(raw.samples[static_cast<std::size_t>(y) * raw.width + x]) * scale;
  return img;
}

GrayImage load_gray_image(const std::string& path) { return to_gray_image(load_raw_image(path)); }

void save_gray_png(const std::string& path, const GrayImage& img) {
  RawImage raw;
  raw.height = img.height();
  raw.width = img.width();
  raw.maxval = 255;
  raw.samples.resize(static_cast<std::size_t>(raw.height) * raw.width);
  for (int y = 0; y < raw.height; ++y)
    for (int x = 0; x < raw.width; ++x) {
      const float v = std::clamp(img.pixels(y, x), 0.0f, 1.0f);
      raw.samples[static_cast<std::size_t>(y) * raw.width + x] = static_cast<std::uint16_t>(std::lround(v * 255.0f));
    }
  write_file(path, encode_png(raw));
}

void save_label_pgm(const std::string& path, const LabelArray& labels) {
  RawImage raw;
  raw.height = static_cast<int>(labels.rows());
  raw.width = static_cast<int>(labels.cols());
  raw.maxval = 65535;
  raw.samples.resize(static_cast<std::size_t>(labels.size()));
  for (Eigen::Index y = 0; y < labels.rows(); ++y)
    for (Eigen::Index x = 0; x < labels.cols(); ++x) {
      const int v = labels(y, x);
      if (v < 0 || v > 65535) throw FormatError("label out of 16-bit range");
      raw.samples[static_cast<std::size_t>(y * labels.cols() + x)] = static_cast<std::uint16_t>(v);
    }
  write_file(path, encode_pgm16(raw));
}

LabelArray load_label_image(const std::string& path) {
  const RawImage raw = load_raw_image(path);
  if (raw.channels != 1) throw FormatError("label image must be single channel");
  LabelArray labels(raw.height, raw.width);
  for (int y = 0; y < raw.height; ++y)
    for (int x = 0; x < raw.width; ++x) labels(y, x) = raw.samples[static_cast<std::size_t>(y) * raw.width + x];
  return labels;
}

std::string render_labels_png(const LabelArray& labels) {
  RawImage raw;
  raw.height = static_cast<int>(labels.rows());
  raw.width = static_cast<int>(labels.cols());
  raw.channels = 3;
  raw.samples.resize(static_cast<std::size_t>(labels.size()) * 3);
  for (Eigen::Index y = 0; y < labels.rows(); ++y)
    for (Eigen::Index x = 0; x < labels.cols(); ++x) {
      const int v = labels(y, x);
      const std::size_t base = static_cast<std::size_t>(y * labels.cols() + x) * 3;
      if (v <= 0) continue;
      const auto& rgb = kPalette[static_cast<std::size_t>(v - 1) % kPalette.size()];
      for (int c = 0; c < 3; ++c) raw.samples[base + c] = rgb[static_cast<std::size_t>(c)];
    }
  return encode_png(raw);
}

}  // namespace sefi
