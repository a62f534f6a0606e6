#pragma once

#include <variant>

#include "flareforge/image.hpp"

namespace flareforge {

// Adaptive focus masking: a luminance threshold tau, the binary mask
// M = [Y' >= tau], and the masked image M * I.
//
// In a training graph the masked image feeds a restoration network; its
// 3-channel output is concatenated with the 3-channel unmasked input along
// the channel axis and projected 6 -> 3 by a learned 1x1 convolution. That
// recomposition has trainable weights and lives with the training code.

namespace afm {

struct Fixed {
  double tau = 0.5;
};

// sigmoid(w * mean(Y') + b): global average pooling, a scalar affine layer
// and a sigmoid. Resolution independent.
struct AffineOfMean {
  double w = 0.0;
  double b = 0.0;
};

// Nearest-rank p-th percentile of Y'.
struct Percentile {
  double p = 50.0;
};

}  // namespace afm

using ThresholdStrategy = std::variant<afm::Fixed, afm::AffineOfMean, afm::Percentile>;

// Throws ConfigError: fixed tau must lie in (0,1), p in [0,100], w and b
// finite.
void validate(const ThresholdStrategy& strategy);

struct MaskResult {
  double tau = 0.0;
  RegionMask mask;
  double coverage = 0.0;  // set pixels / (H * W)
};

double sigmoid(double x) noexcept;

double compute_threshold(const LuminanceMap& y, const ThresholdStrategy& strategy);

// M(i,j) = 1 iff Y'(i,j) >= tau.
MaskResult generate_mask(const LuminanceMap& y, double tau);

// Multiplies every channel by the mask. Throws DimensionError on size
// mismatch.
Image apply_mask(const Image& img, const RegionMask& mask);

}  // namespace flareforge
