#include "flareforge/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flareforge/errors.hpp"

namespace flareforge {

namespace {

void check_dims(int width, int height, const char* what) {
  if (width < 1 || height < 1) {
    fail(ErrorKind::dimension, std::string(what) + ": dimensions must be positive, got " +
                                   std::to_string(width) + "x" + std::to_string(height));
  }
}

void check_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    fail(ErrorKind::dimension, std::string(what) + ": expected " + std::to_string(want) +
                                   " values, got " + std::to_string(got));
  }
}

}  // namespace

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return "IOError";
    case ErrorKind::format: return "FormatError";
    case ErrorKind::value: return "ValueError";
    case ErrorKind::dimension: return "DimensionError";
    case ErrorKind::config: return "ConfigError";
    case ErrorKind::empty_flare: return "EmptyFlareError";
    case ErrorKind::bounds: return "BoundsError";
    case ErrorKind::empty_region: return "EmptyRegionError";
    case ErrorKind::pairing: return "PairingError";
    case ErrorKind::missing_depth: return "MissingDepthError";
    case ErrorKind::usage: return "UsageError";
  }
  return "Error";
}

Image::Image(int width, int height, ColorSpace space)
    : width_(width), height_(height), space_(space), range_(SampleRange::unit) {
  check_dims(width, height, "Image");
  samples_.assign(pixel_count() * kChannels, 0.0f);
}

Image::Image(int width, int height, std::vector<float> samples, ColorSpace space,
             SampleRange range)
    : width_(width), height_(height), space_(space), range_(range),
      samples_(std::move(samples)) {
  check_dims(width, height, "Image");
  check_size(samples_.size(), pixel_count() * kChannels, "Image");
  const bool unit = range_ == SampleRange::unit;
  for (float v : samples_) {
    if (!std::isfinite(v) || v < 0.0f || (unit && v > 1.0f)) {
      fail(ErrorKind::value, "Image: sample " + std::to_string(v) + " outside " +
                                 (unit ? "[0,1]" : "[0,inf)"));
    }
  }
}

DepthMap::DepthMap(int width, int height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width, height, "DepthMap");
  check_size(values_.size(), static_cast<std::size_t>(width) * height, "DepthMap");
  for (float v : values_) {
    if (!std::isfinite(v) || v <= 0.0f) {
      fail(ErrorKind::value, "DepthMap: depth must be finite and > 0, got " + std::to_string(v));
    }
  }
}

RegionMask::RegionMask(int width, int height) : width_(width), height_(height) {
  check_dims(width, height, "RegionMask");
  bits_.assign(static_cast<std::size_t>(width) * height, 0);
}

RegionMask::RegionMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  check_dims(width, height, "RegionMask");
  check_size(bits_.size(), static_cast<std::size_t>(width) * height, "RegionMask");
  if (std::any_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b > 1; })) {
    fail(ErrorKind::value, "RegionMask: values must be 0 or 1");
  }
}

std::size_t RegionMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

LuminanceMap::LuminanceMap(int width, int height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width, height, "LuminanceMap");
  check_size(values_.size(), static_cast<std::size_t>(width) * height, "LuminanceMap");
  for (float v : values_) {
    if (!std::isfinite(v)) fail(ErrorKind::value, "LuminanceMap: non-finite value");
  }
}

}  // namespace flareforge
