#pragma once

#include "flareforge/image.hpp"

namespace flareforge {

// ITU-R BT.601 luma weights.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

// Y' = 0.299 R + 0.587 G + 0.114 B. The weights are defined for
// gamma-encoded samples; callers working on linear data get a
// linear-light weighted sum instead.
LuminanceMap to_luma_bt601(const Image& img);

// out = in^gamma, tagged linear. Throws ValueError for gamma <= 0.
Image gamma_decode(const Image& img, double gamma);
// out = in^(1/gamma), tagged encoded. Throws ValueError for gamma <= 0.
Image gamma_encode(const Image& img, double gamma);

// clamp(base + addend, 0, 1). Dimensions and color spaces must agree.
Image add_clip(const Image& base, const Image& addend);

// base + addend without clipping; the result carries headroom.
Image add_unclipped(const Image& base, const Image& addend);

}  // namespace flareforge
