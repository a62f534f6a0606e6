#pragma once

#include <limits>
#include <span>
#include <vector>

#include "flareforge/image.hpp"
#include "flareforge/spe.hpp"

namespace flareforge {

// Brightness adjustment from the inverse-square and cosine laws.
//
// Illumination at the lens from light i is E_i = I cos(theta_i) / d_i^2.
// All flares come from one template, so I is shared and cancels when each
// flare is referenced against a light at the mean depth d_bar with zero
// incidence:
//
//   s_i = E_i / E_ref = (d_bar / d_i)^2 * cos(theta_i)

struct BrightnessContext {
  std::vector<FlarePlacement> placements;  // scale_s filled in
  double mean_depth_dbar = 1.0;
};

// Mean of the depths. Computed as d_0 + mean(d_i - d_0) so that equal
// depths give d_bar == d_0 exactly.
double reference_depth(std::span<const FlarePlacement> placements);

// s_i for every placement, in input order. Throws ValueError for an empty
// list, non-positive depths or theta outside [0, pi/2).
std::vector<double> brightness_scales(std::span<const FlarePlacement> placements);

// brightness_scales, capped at max_scale, written back into the placements.
BrightnessContext adjust_brightness(std::vector<FlarePlacement> placements,
                                    double max_scale = std::numeric_limits<double>::infinity());

// flare * s without clipping; the result carries headroom. Throws
// ValueError for negative or non-finite s.
Image apply_scale(const Image& flare, double s);

}  // namespace flareforge
