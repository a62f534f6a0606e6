#include "flareforge/spe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "flareforge/color.hpp"
#include "flareforge/errors.hpp"

namespace flareforge {

std::string_view to_string(LightSourceOrigin origin) {
  switch (origin) {
    case LightSourceOrigin::provided_mask: return "provided_mask";
    case LightSourceOrigin::luminance_threshold: return "luminance_threshold";
    case LightSourceOrigin::brightest_fallback: return "brightest_fallback";
  }
  return "unknown";
}

RegionMask LightSourceRegion::to_mask(int width, int height) const {
  RegionMask empty(width, height);
  std::vector<std::uint8_t> bits(empty.bits().begin(), empty.bits().end());
  for (const auto& p : pixels) {
    if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) {
      fail(ErrorKind::bounds, "light-source pixel outside mask bounds");
    }
    bits[static_cast<std::size_t>(p.y) * width + p.x] = 1;
  }
  return RegionMask(width, height, std::move(bits));
}

LightSourceRegion extract_light_source(const Image& flare, const std::optional<RegionMask>& provided,
                                       double tau_ls) {
  if (!(tau_ls > 0.0 && tau_ls < 1.0)) {
    fail(ErrorKind::config, "tau_ls must lie in (0,1), got " + std::to_string(tau_ls));
  }
  const auto samples = flare.samples();
  if (std::all_of(samples.begin(), samples.end(), [](float v) { return v == 0.0f; })) {
    fail(ErrorKind::empty_flare, "flare image is entirely zero");
  }
  const int w = flare.width();
  const int h = flare.height();

  LightSourceRegion region;
  if (provided && !provided->empty()) {
    if (provided->width() != w || provided->height() != h) {
      fail(ErrorKind::dimension, "light-source mask size does not match flare");
    }
    region.origin = LightSourceOrigin::provided_mask;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (provided->at(x, y)) region.pixels.push_back({x, y});
      }
    }
    return region;
  }

  const LuminanceMap luma = to_luma_bt601(flare);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (luma.at(x, y) >= tau_ls) region.pixels.push_back({x, y});
    }
  }
  if (!region.pixels.empty()) {
    region.origin = LightSourceOrigin::luminance_threshold;
    return region;
  }

  // Brightest ceil(0.1%) pixels; ties broken by row-major index.
  const std::size_t n = flare.pixel_count();
  const auto keep = static_cast<std::size_t>(std::ceil(kFallbackFraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto values = luma.values();
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return values[a] > values[b] || (values[a] == values[b] && a < b);
                    });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  region.origin = LightSourceOrigin::brightest_fallback;
  for (std::size_t idx : order) {
    region.pixels.push_back({static_cast<int>(idx % w), static_cast<int>(idx / w)});
  }
  return region;
}

double mean_depth(const DepthMap& depth, const LightSourceRegion& region) {
  if (region.pixels.empty()) fail(ErrorKind::empty_region, "mean_depth: empty region");
  double sum = 0.0;
  for (const auto& p : region.pixels) {
    if (p.x < 0 || p.y < 0 || p.x >= depth.width() || p.y >= depth.height()) {
      fail(ErrorKind::bounds, "mean_depth: pixel (" + std::to_string(p.x) + "," +
                                  std::to_string(p.y) + ") outside depth map");
    }
    sum += depth.at(p.x, p.y);
  }
  return sum / static_cast<double>(region.pixels.size());
}

double mean_radius(const LightSourceRegion& region, int width, int height) {
  if (region.pixels.empty()) fail(ErrorKind::empty_region, "mean_radius: empty region");
  const double cx = width / 2.0;
  const double cy = height / 2.0;
  double sum = 0.0;
  for (const auto& p : region.pixels) {
    sum += std::hypot(p.x + 0.5 - cx, p.y + 0.5 - cy);
  }
  return sum / static_cast<double>(region.pixels.size());
}

double incident_angle(double radius_r, int width, double fov_phi) {
  if (!(fov_phi > 0.0 && fov_phi < std::numbers::pi)) {
    fail(ErrorKind::config, "field of view must lie in (0, 180) degrees");
  }
  if (!(radius_r >= 0.0) || !std::isfinite(radius_r)) {
    fail(ErrorKind::value, "incident_angle: radius must be finite and >= 0");
  }
  if (width < 1) fail(ErrorKind::dimension, "incident_angle: width must be positive");
  const double theta = std::atan((2.0 * radius_r / width) * std::tan(fov_phi / 2.0));
  // atan of a huge argument rounds to pi/2 in double.
  constexpr double kBelowRightAngle = 1.5707963267948963;
  return std::min(theta, kBelowRightAngle);
}

}  // namespace flareforge
