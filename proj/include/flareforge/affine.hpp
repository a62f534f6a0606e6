#pragma once

#include <numbers>

#include "flareforge/image.hpp"
#include "flareforge/rng.hpp"

namespace flareforge {

struct Interval {
  double low = 0.0;
  double high = 0.0;

  bool contains(double v) const noexcept { return v >= low && v <= high; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Random affine transform of a flare template. The forward map is
//   out = out_center + translate + scale * R(rotation) * Shear * (src - src_center)
// with Shear = [[1, tan(shear_x)], [tan(shear_y), 1]].
struct AffineParams {
  double rotation = 0.0;  // radians
  double scale = 1.0;
  double translate_x = 0.0;  // pixels
  double translate_y = 0.0;  // pixels
  double shear_x = 0.0;  // radians
  double shear_y = 0.0;  // radians

  // Throws ValueError unless every field is finite and scale > 0.
  void validate() const;
  bool is_identity() const noexcept;

  friend bool operator==(const AffineParams&, const AffineParams&) = default;
};

struct AffineRanges {
  Interval rotation{0.0, 2.0 * std::numbers::pi};
  Interval scale{0.8, 1.5};
  // Fraction of min(canvas width, canvas height), drawn per axis.
  Interval translate{-0.3, 0.3};
  // Drawn independently for the x and y shear.
  Interval shear{-10.0 * std::numbers::pi / 180.0, 10.0 * std::numbers::pi / 180.0};

  // Throws ConfigError for inverted, non-finite or non-positive-scale
  // ranges, or shear magnitudes of 45 degrees or more.
  void validate() const;

  friend bool operator==(const AffineRanges&, const AffineRanges&) = default;
};

inline constexpr int kAffineDraws = 6;

// Draws rotation, scale, translate_x, translate_y, shear_x, shear_y in that
// order; always consumes exactly kAffineDraws values from `rng`.
AffineParams sample_affine(SeededRng& rng, const AffineRanges& ranges, int canvas_width,
                           int canvas_height);

// Inverse-mapped bilinear resampling onto an out_width x out_height canvas,
// with the source center mapped to the canvas center. Samples falling
// outside the source read as zero.
Image apply_affine(const Image& img, const AffineParams& p, int out_width, int out_height);

// Same geometry with nearest-neighbour sampling so the mask stays binary.
RegionMask apply_affine(const RegionMask& mask, const AffineParams& p, int out_width,
                        int out_height);

}  // namespace flareforge
