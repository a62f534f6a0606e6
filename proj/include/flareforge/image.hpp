#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace flareforge {

enum class ColorSpace { encoded, linear };

// `unit` samples live in [0,1]. `headroom` samples are only required to be
// finite and non-negative; they appear between brightness scaling and the
// final clip.
enum class SampleRange { unit, headroom };

// Interleaved RGB float image, row-major. Immutable once constructed.
class Image {
 public:
  static constexpr int kChannels = 3;

  // All-black image.
  Image(int width, int height, ColorSpace space = ColorSpace::encoded);
  Image(int width, int height, std::vector<float> samples,
        ColorSpace space = ColorSpace::encoded,
        SampleRange range = SampleRange::unit);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  ColorSpace space() const noexcept { return space_; }
  SampleRange range() const noexcept { return range_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  float at(int x, int y, int c) const noexcept {
    return samples_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }
  std::span<const float> samples() const& noexcept { return samples_; }
  std::span<const float> samples() const&& = delete;

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_;
  int height_;
  ColorSpace space_;
  SampleRange range_;
  std::vector<float> samples_;
};

// Per-pixel scene depth. Relative units; every value finite and > 0.
class DepthMap {
 public:
  DepthMap(int width, int height, std::vector<float> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  float at(int x, int y) const noexcept {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::span<const float> values() const& noexcept { return values_; }
  std::span<const float> values() const&& = delete;

 private:
  int width_;
  int height_;
  std::vector<float> values_;
};

// Binary single-channel mask, values in {0,1}.
class RegionMask {
 public:
  // All-zero mask.
  RegionMask(int width, int height);
  RegionMask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool at(int x, int y) const noexcept {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  std::span<const std::uint8_t> bits() const& noexcept { return bits_; }
  std::span<const std::uint8_t> bits() const&& = delete;
  std::size_t count() const noexcept;
  bool empty() const noexcept { return count() == 0; }

  friend bool operator==(const RegionMask&, const RegionMask&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

// Single-channel luma plane (Y').
class LuminanceMap {
 public:
  LuminanceMap(int width, int height, std::vector<float> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  float at(int x, int y) const noexcept {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::span<const float> values() const& noexcept { return values_; }
  std::span<const float> values() const&& = delete;

 private:
  int width_;
  int height_;
  std::vector<float> values_;
};

}  // namespace flareforge
