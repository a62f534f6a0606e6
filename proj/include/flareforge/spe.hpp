#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "flareforge/affine.hpp"
#include "flareforge/image.hpp"

namespace flareforge {

struct PixelCoord {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

enum class LightSourceOrigin { provided_mask, luminance_threshold, brightest_fallback };

std::string_view to_string(LightSourceOrigin origin);

// Pixels belonging to the light source of one transformed flare.
// Non-empty, in bounds, listed in row-major order.
struct LightSourceRegion {
  std::vector<PixelCoord> pixels;
  LightSourceOrigin origin = LightSourceOrigin::luminance_threshold;

  RegionMask to_mask(int width, int height) const;
};

// Geometry and photometry of one placed flare.
struct FlarePlacement {
  AffineParams affine;
  double depth_d = 1.0;
  double radius_r = 0.0;  // pixels
  double theta = 0.0;     // radians, [0, pi/2)
  double scale_s = 1.0;
};

inline constexpr double kDefaultLightSourceThreshold = 0.97;
inline constexpr double kFallbackFraction = 0.001;

// Chooses the light-source pixels of an (already transformed) flare:
// the provided mask when it has set pixels, else pixels with
// Y' >= tau_ls, else the brightest ceil(0.1%) of pixels. Throws
// EmptyFlareError for an all-zero flare and ConfigError for tau_ls
// outside (0,1).
LightSourceRegion extract_light_source(const Image& flare, const std::optional<RegionMask>& provided,
                                       double tau_ls = kDefaultLightSourceThreshold);

// Arithmetic mean of depth over the region (divisor = region size).
double mean_depth(const DepthMap& depth, const LightSourceRegion& region);

// Mean distance from region pixel centers (x+0.5, y+0.5) to the image
// center (W/2, H/2).
double mean_radius(const LightSourceRegion& region, int width, int height);

// theta = atan((2 r / W) * tan(fov / 2)). fov in radians, 0 < fov < pi.
double incident_angle(double radius_r, int width, double fov_phi);

}  // namespace flareforge
