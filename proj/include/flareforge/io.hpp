#pragma once

#include <filesystem>
#include <string>

#include "flareforge/image.hpp"

namespace flareforge {

// Reads an 8- or 16-bit RGB/RGBA PNG. Alpha is dropped; samples are scaled
// to [0,1] and tagged encoded. Grayscale and palette files are rejected
// with FormatError.
Image load_png(const std::filesystem::path& path);

// Writes an 8- or 16-bit RGB PNG. Linear images must be encoded first.
// Headroom samples are clipped to [0,1]; quantization rounds half up.
void write_png(const Image& img, const std::filesystem::path& path, int bit_depth = 8);

// Binary masks: 0 <-> 0 and 1 <-> 255 in an 8-bit grayscale PNG. The reader
// also accepts gray+alpha, RGB and RGBA files and sets pixels whose first
// channel is >= half scale.
RegionMask load_mask_png(const std::filesystem::path& path);
void write_mask_png(const RegionMask& mask, const std::filesystem::path& path);

// Reads a grayscale "Pf" float map (either endianness; rows stored bottom
// to top). With `invert`, each value v becomes 1/(v+epsilon). All outputs
// are clamped to >= epsilon.
DepthMap load_pfm(const std::filesystem::path& path, bool invert = false, double epsilon = 1e-6);

// Writes a little-endian "Pf" file.
void write_pfm(std::span<const float> values, int width, int height,
               const std::filesystem::path& path);
void write_pfm(const DepthMap& depth, const std::filesystem::path& path);

// 8-bit quantization used by write_png: floor(v*255 + 0.5) after clamping.
std::uint8_t quantize8(float v) noexcept;

}  // namespace flareforge
