#include "flareforge/bam.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "flareforge/errors.hpp"

namespace flareforge {

namespace {

void check_placements(std::span<const FlarePlacement> placements) {
  if (placements.empty()) {
    fail(ErrorKind::value, "brightness adjustment needs at least one flare");
  }
  for (const auto& p : placements) {
    if (!(p.depth_d > 0.0) || !std::isfinite(p.depth_d)) {
      fail(ErrorKind::value,
           "flare depth must be finite and > 0, got " + std::to_string(p.depth_d));
    }
    if (!(p.theta >= 0.0 && p.theta < std::numbers::pi / 2.0)) {
      fail(ErrorKind::value,
           "incident angle must lie in [0, pi/2), got " + std::to_string(p.theta));
    }
  }
}

}  // namespace

double reference_depth(std::span<const FlarePlacement> placements) {
  check_placements(placements);
  const double d0 = placements.front().depth_d;
  double offset = 0.0;
  for (const auto& p : placements) offset += p.depth_d - d0;
  return d0 + offset / static_cast<double>(placements.size());
}

std::vector<double> brightness_scales(std::span<const FlarePlacement> placements) {
  const double dbar = reference_depth(placements);
  std::vector<double> scales;
  scales.reserve(placements.size());
  for (const auto& p : placements) {
    const double ratio = dbar / p.depth_d;
    scales.push_back(ratio * ratio * std::cos(p.theta));
  }
  return scales;
}

BrightnessContext adjust_brightness(std::vector<FlarePlacement> placements, double max_scale) {
  if (!(max_scale > 0.0)) fail(ErrorKind::config, "max_scale must be > 0");
  const auto scales = brightness_scales(placements);
  BrightnessContext ctx;
  ctx.mean_depth_dbar = reference_depth(placements);
  for (std::size_t i = 0; i < placements.size(); ++i) {
    placements[i].scale_s = std::min(scales[i], max_scale);
  }
  ctx.placements = std::move(placements);
  return ctx;
}

Image apply_scale(const Image& flare, double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) {
    fail(ErrorKind::value, "brightness scale must be finite and >= 0, got " + std::to_string(s));
  }
  auto in = flare.samples();
  std::vector<float> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(in[i]) * s);
  }
  return Image(flare.width(), flare.height(), std::move(out), flare.space(), SampleRange::headroom);
}

}  // namespace flareforge
