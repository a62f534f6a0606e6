#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flareforge/errors.hpp"
#include "flareforge/image.hpp"
#include "flareforge/synth.hpp"

namespace fixtures {

using flareforge::DepthMap;
using flareforge::Image;
using flareforge::RegionMask;

// Directory holding the checked-in fixture files.
std::filesystem::path data_dir();

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

Image constant_image(int w, int h, float r, float g, float b);
Image random_image(int w, int h, std::uint64_t seed, float lo = 0.0f, float hi = 1.0f);

// Dark street-like scene: vertical gradient, a few dim windows, mild noise.
Image night_background(int w, int h, std::uint64_t seed);

DepthMap constant_depth(int w, int h, float value);
// Near at the bottom of the frame, far at the top.
DepthMap ramp_depth(int w, int h, float near, float far);
// `left` for x < w/2, `right` otherwise.
DepthMap split_depth(int w, int h, float left, float right);

struct StarburstSpec {
  int size = 63;              // square template side
  double core_radius = 2.5;   // saturated core
  double glow_radius = 24.0;  // everything is exactly zero beyond this
  int streaks = 6;
  float tint_r = 1.0f, tint_g = 0.85f, tint_b = 0.7f;
};

// Flare on black: white core, tinted glow and thin streaks.
Image starburst(const StarburstSpec& spec = {});
// Core pixels (radius core_radius) as a mask of the same size.
RegionMask starburst_core(const StarburstSpec& spec = {});

flareforge::FlareTemplate starburst_template(const std::string& id, const StarburstSpec& spec = {},
                                             bool with_light_source = false);

// Odd-sized template whose only pixel at or above 0.97 luma is the exact
// center; a dim glow surrounds it.
Image point_light(int size, double glow_radius);

double sum_samples(const Image& img);

struct DatasetDirs {
  std::filesystem::path backgrounds, depths, flares;
};

// Writes backgrounds/*.png, depths/*.pfm and flares/*.png (+ *_ls.png when
// requested) under `root`.
DatasetDirs write_dataset(const std::filesystem::path& root, int backgrounds, int w, int h,
                          int templates, bool light_source_masks);

std::vector<unsigned char> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const std::string& bytes);

// Kind of the flareforge::Error thrown by fn, or nullopt if none was thrown.
template <class Fn>
std::optional<flareforge::ErrorKind> thrown_kind(Fn&& fn) {
  try {
    fn();
  } catch (const flareforge::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

#define CHECK_THROWS_KIND(expr, kind) \
  CHECK(::fixtures::thrown_kind([&] { (void)(expr); }) == (kind))

}  // namespace fixtures
