#include "flareforge/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "flareforge/errors.hpp"

namespace flareforge {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) fail(ErrorKind::io, "cannot open " + path.string());
  return f;
}

// Raw decoded PNG: interleaved samples, bytes exactly as stored.
struct RawPng {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  int channels = 0;
  std::vector<png_byte> bytes;
  std::size_t rowbytes = 0;
};

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<char*>(png_get_error_ptr(png));
  std::snprintf(buf, 256, "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

// Plain-C style reader: no objects with destructors are live across setjmp.
bool read_png_raw(std::FILE* fp, bool expand_low_gray, RawPng* out, char* err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, err, png_error_fn,
                                           png_warning_fn);
  if (!png) {
    std::snprintf(err, 256, "png_create_read_struct failed");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  png_bytep* rows = nullptr;
  if (!info || setjmp(png_jmpbuf(png))) {
    std::free(rows);
    png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (!info) std::snprintf(err, 256, "png_create_info_struct failed");
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  out->color_type = png_get_color_type(png, info);
  if (expand_low_gray && out->color_type == PNG_COLOR_TYPE_GRAY && out->bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  out->channels = png_get_channels(png, info);
  out->rowbytes = png_get_rowbytes(png, info);
  out->bytes.resize(out->rowbytes * out->height);
  rows = static_cast<png_bytep*>(std::malloc(sizeof(png_bytep) * out->height));
  for (png_uint_32 y = 0; y < out->height; ++y) rows[y] = out->bytes.data() + y * out->rowbytes;
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  std::free(rows);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

RawPng read_png(const std::filesystem::path& path, bool expand_low_gray) {
  FilePtr fp = open_file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    fail(ErrorKind::io, "not a PNG file: " + path.string());
  }
  std::rewind(fp.get());
  RawPng raw;
  char err[256] = {0};
  if (!read_png_raw(fp.get(), expand_low_gray, &raw, err)) {
    fail(ErrorKind::io, "corrupt PNG " + path.string() + ": " + err);
  }
  return raw;
}

float raw_sample(const RawPng& raw, png_uint_32 x, png_uint_32 y, int c) {
  const png_byte* row = raw.bytes.data() + y * raw.rowbytes;
  if (raw.bit_depth == 16) {
    const png_byte* p = row + (static_cast<std::size_t>(x) * raw.channels + c) * 2;
    return static_cast<float>((p[0] << 8) | p[1]) / 65535.0f;
  }
  return static_cast<float>(row[static_cast<std::size_t>(x) * raw.channels + c]) / 255.0f;
}

bool write_png_raw(std::FILE* fp, png_uint_32 w, png_uint_32 h, int bit_depth, int color_type,
                   const png_byte* data, std::size_t rowbytes, char* err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, err, png_error_fn,
                                            png_warning_fn);
  if (!png) {
    std::snprintf(err, 256, "png_create_write_struct failed");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    if (!info) std::snprintf(err, 256, "png_create_info_struct failed");
    return false;
  }
  png_init_io(png, fp);
  png_set_compression_level(png, 3);
  png_set_IHDR(png, info, w, h, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (png_uint_32 y = 0; y < h; ++y) {
    png_write_row(png, const_cast<png_bytep>(data + y * rowbytes));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

void write_png_bytes(const std::filesystem::path& path, png_uint_32 w, png_uint_32 h,
                     int bit_depth, int color_type, const std::vector<png_byte>& data,
                     std::size_t rowbytes) {
  FilePtr fp = open_file(path, "wb");
  char err[256] = {0};
  if (!write_png_raw(fp.get(), w, h, bit_depth, color_type, data.data(), rowbytes, err)) {
    fail(ErrorKind::io, "failed writing " + path.string() + ": " + err);
  }
  if (std::fflush(fp.get()) != 0) fail(ErrorKind::io, "failed writing " + path.string());
}

}  // namespace

std::uint8_t quantize8(float v) noexcept {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::floor(c * 255.0f + 0.5f));
}

Image load_png(const std::filesystem::path& path) {
  RawPng raw = read_png(path, false);
  if (raw.bit_depth != 8 && raw.bit_depth != 16) {
    fail(ErrorKind::format, path.string() + ": unsupported bit depth " +
                                std::to_string(raw.bit_depth));
  }
  if (raw.color_type != PNG_COLOR_TYPE_RGB && raw.color_type != PNG_COLOR_TYPE_RGB_ALPHA) {
    fail(ErrorKind::format, path.string() + ": unsupported color type " +
                                std::to_string(raw.color_type) + " (need RGB or RGBA)");
  }
  std::vector<float> samples(static_cast<std::size_t>(raw.width) * raw.height * 3);
  std::size_t i = 0;
  for (png_uint_32 y = 0; y < raw.height; ++y) {
    for (png_uint_32 x = 0; x < raw.width; ++x) {
      for (int c = 0; c < 3; ++c) samples[i++] = raw_sample(raw, x, y, c);
    }
  }
  return Image(static_cast<int>(raw.width), static_cast<int>(raw.height), std::move(samples));
}

void write_png(const Image& img, const std::filesystem::path& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    fail(ErrorKind::format, "write_png: bit depth must be 8 or 16");
  }
  if (img.space() != ColorSpace::encoded) {
    fail(ErrorKind::value, "write_png: image must be gamma-encoded before writing");
  }
  const std::size_t bytes_per_sample = bit_depth / 8;
  const std::size_t rowbytes = static_cast<std::size_t>(img.width()) * 3 * bytes_per_sample;
  std::vector<png_byte> data(rowbytes * img.height());
  auto s = img.samples();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (bit_depth == 8) {
      data[i] = quantize8(s[i]);
    } else {
      const float c = std::clamp(s[i], 0.0f, 1.0f);
      const auto q = static_cast<std::uint16_t>(std::floor(c * 65535.0f + 0.5f));
      data[2 * i] = static_cast<png_byte>(q >> 8);
      data[2 * i + 1] = static_cast<png_byte>(q & 0xFF);
    }
  }
  write_png_bytes(path, img.width(), img.height(), bit_depth, PNG_COLOR_TYPE_RGB, data, rowbytes);
}

RegionMask load_mask_png(const std::filesystem::path& path) {
  RawPng raw = read_png(path, true);
  if (raw.color_type == PNG_COLOR_TYPE_PALETTE) {
    fail(ErrorKind::format, path.string() + ": palette masks are not supported");
  }
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(raw.width) * raw.height);
  std::size_t i = 0;
  for (png_uint_32 y = 0; y < raw.height; ++y) {
    for (png_uint_32 x = 0; x < raw.width; ++x) {
      bits[i++] = raw_sample(raw, x, y, 0) >= 0.5f ? 1 : 0;
    }
  }
  return RegionMask(static_cast<int>(raw.width), static_cast<int>(raw.height), std::move(bits));
}

void write_mask_png(const RegionMask& mask, const std::filesystem::path& path) {
  std::vector<png_byte> data(mask.bits().size());
  std::transform(mask.bits().begin(), mask.bits().end(), data.begin(),
                 [](std::uint8_t b) { return static_cast<png_byte>(b ? 255 : 0); });
  write_png_bytes(path, mask.width(), mask.height(), 8, PNG_COLOR_TYPE_GRAY, data,
                  static_cast<std::size_t>(mask.width()));
}

DepthMap load_pfm(const std::filesystem::path& path, bool invert, double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    fail(ErrorKind::value, "load_pfm: epsilon must be finite and >= 0");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());

  std::string magic;
  int width = 0;
  int height = 0;
  double scale = 0.0;
  in >> magic;
  if (magic != "Pf") {
    fail(ErrorKind::format, path.string() + ": expected grayscale PFM header \"Pf\", got \"" +
                                magic.substr(0, 8) + "\"");
  }
  if (!(in >> width >> height >> scale) || width < 1 || height < 1 || scale == 0.0) {
    fail(ErrorKind::format, path.string() + ": malformed PFM header");
  }
  in.get();  // single whitespace byte before the raster

  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<std::uint32_t> words(n);
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(n * 4));
  if (static_cast<std::size_t>(in.gcount()) != n * 4) {
    fail(ErrorKind::format, path.string() + ": truncated PFM raster");
  }
  const bool file_little = scale < 0.0;
  const bool host_little = std::endian::native == std::endian::little;

  std::vector<float> values(n);
  for (int row = 0; row < height; ++row) {
    // PFM stores the bottom row first.
    const int y = height - 1 - row;
    for (int x = 0; x < width; ++x) {
      std::uint32_t w = words[static_cast<std::size_t>(row) * width + x];
      if (file_little != host_little) w = __builtin_bswap32(w);
      float v;
      std::memcpy(&v, &w, sizeof v);
      if (!std::isfinite(v)) {
        fail(ErrorKind::value, path.string() + ": non-finite depth at (" + std::to_string(x) +
                                   "," + std::to_string(y) + ")");
      }
      double d = v;
      if (invert) d = 1.0 / (d + epsilon);
      if (!std::isfinite(d)) {
        fail(ErrorKind::value, path.string() + ": inverse depth overflow at (" +
                                   std::to_string(x) + "," + std::to_string(y) +
                                   "); use a positive epsilon");
      }
      d = std::max(d, epsilon);
      values[static_cast<std::size_t>(y) * width + x] = static_cast<float>(d);
    }
  }
  return DepthMap(width, height, std::move(values));
}

void write_pfm(std::span<const float> values, int width, int height,
               const std::filesystem::path& path) {
  if (width < 1 || height < 1 || values.size() != static_cast<std::size_t>(width) * height) {
    fail(ErrorKind::dimension, "write_pfm: value count does not match dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open " + path.string());
  out << "Pf\n" << width << " " << height << "\n-1.0\n";
  std::vector<std::uint32_t> words(values.size());
  for (int row = 0; row < height; ++row) {
    const int y = height - 1 - row;
    for (int x = 0; x < width; ++x) {
      std::uint32_t w;
      std::memcpy(&w, &values[static_cast<std::size_t>(y) * width + x], sizeof w);
      if constexpr (std::endian::native == std::endian::big) w = __builtin_bswap32(w);
      words[static_cast<std::size_t>(row) * width + x] = w;
    }
  }
  out.write(reinterpret_cast<const char*>(words.data()),
            static_cast<std::streamsize>(words.size() * 4));
  if (!out) fail(ErrorKind::io, "failed writing " + path.string());
}

void write_pfm(const DepthMap& depth, const std::filesystem::path& path) {
  write_pfm(depth.values(), depth.width(), depth.height(), path);
}

}  // namespace flareforge
