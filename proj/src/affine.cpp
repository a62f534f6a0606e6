#include "flareforge/affine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "flareforge/errors.hpp"

namespace flareforge {

namespace {

// Output pixel center -> continuous source coordinate (pixel-edge origin).
struct InverseMap {
  double m00, m01, m10, m11;
  double out_cx, out_cy;
  double src_cx, src_cy;

  InverseMap(const AffineParams& p, int src_w, int src_h, int out_w, int out_h) {
    p.validate();
    const double c = std::cos(p.rotation);
    const double s = std::sin(p.rotation);
    const double hx = std::tan(p.shear_x);
    const double hy = std::tan(p.shear_y);
    // forward = scale * R * Sh
    const double a00 = p.scale * (c - s * hy);
    const double a01 = p.scale * (c * hx - s);
    const double a10 = p.scale * (s + c * hy);
    const double a11 = p.scale * (s * hx + c);
    const double det = a00 * a11 - a01 * a10;
    if (!(std::abs(det) > 1e-12)) {
      fail(ErrorKind::value, "apply_affine: transform is singular");
    }
    m00 = a11 / det;
    m01 = -a01 / det;
    m10 = -a10 / det;
    m11 = a00 / det;
    out_cx = out_w / 2.0 + p.translate_x;
    out_cy = out_h / 2.0 + p.translate_y;
    src_cx = src_w / 2.0;
    src_cy = src_h / 2.0;
  }

  void map(int x, int y, double& sx, double& sy) const noexcept {
    const double px = (x + 0.5) - out_cx;
    const double py = (y + 0.5) - out_cy;
    sx = m00 * px + m01 * py + src_cx;
    sy = m10 * px + m11 * py + src_cy;
  }
};

void check_out_size(int w, int h) {
  if (w < 1 || h < 1) {
    fail(ErrorKind::dimension, "apply_affine: output size must be positive, got " +
                                   std::to_string(w) + "x" + std::to_string(h));
  }
}

void check_interval(const Interval& iv, const char* name) {
  if (!std::isfinite(iv.low) || !std::isfinite(iv.high) || iv.low > iv.high) {
    fail(ErrorKind::config,
         std::string("affine range '") + name + "' must be finite with low <= high");
  }
}

}  // namespace

void AffineParams::validate() const {
  for (double v : {rotation, scale, translate_x, translate_y, shear_x, shear_y}) {
    if (!std::isfinite(v)) fail(ErrorKind::value, "AffineParams: non-finite field");
  }
  if (!(scale > 0.0)) fail(ErrorKind::value, "AffineParams: scale must be > 0");
}

bool AffineParams::is_identity() const noexcept {
  return *this == AffineParams{};
}

void AffineRanges::validate() const {
  check_interval(rotation, "rotation");
  check_interval(scale, "scale");
  check_interval(translate, "translate");
  check_interval(shear, "shear");
  if (!(scale.low > 0.0)) fail(ErrorKind::config, "affine range 'scale' must be > 0");
  constexpr double kMaxShear = std::numbers::pi / 4.0;
  if (!(std::abs(shear.low) < kMaxShear && std::abs(shear.high) < kMaxShear)) {
    fail(ErrorKind::config, "affine range 'shear' must stay within (-45, 45) degrees");
  }
}

AffineParams sample_affine(SeededRng& rng, const AffineRanges& ranges, int canvas_width,
                           int canvas_height) {
  ranges.validate();
  if (canvas_width < 1 || canvas_height < 1) {
    fail(ErrorKind::dimension, "sample_affine: canvas size must be positive");
  }
  const double extent = std::min(canvas_width, canvas_height);
  AffineParams p;
  p.rotation = rng.uniform(ranges.rotation.low, ranges.rotation.high);
  p.scale = rng.uniform(ranges.scale.low, ranges.scale.high);
  p.translate_x = rng.uniform(ranges.translate.low, ranges.translate.high) * extent;
  p.translate_y = rng.uniform(ranges.translate.low, ranges.translate.high) * extent;
  p.shear_x = rng.uniform(ranges.shear.low, ranges.shear.high);
  p.shear_y = rng.uniform(ranges.shear.low, ranges.shear.high);
  return p;
}

Image apply_affine(const Image& img, const AffineParams& p, int out_width, int out_height) {
  check_out_size(out_width, out_height);
  const InverseMap inv(p, img.width(), img.height(), out_width, out_height);
  const int sw = img.width();
  const int sh = img.height();
  auto src = img.samples();
  const float ceiling = img.range() == SampleRange::unit ? 1.0f : std::numeric_limits<float>::infinity();

  std::vector<float> out(static_cast<std::size_t>(out_width) * out_height * Image::kChannels,
                         0.0f);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      double sx, sy;
      inv.map(x, y, sx, sy);
      const double u = sx - 0.5;
      const double v = sy - 0.5;
      if (!(u > -1.0 && v > -1.0 && u < sw && v < sh)) continue;
      const double fu = std::floor(u);
      const double fv = std::floor(v);
      const int x0 = static_cast<int>(fu);
      const int y0 = static_cast<int>(fv);
      const double ax = u - fu;
      const double ay = v - fv;
      const double w[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
      const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
      const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
      double acc[3] = {0.0, 0.0, 0.0};
      for (int k = 0; k < 4; ++k) {
        if (w[k] == 0.0 || xs[k] < 0 || ys[k] < 0 || xs[k] >= sw || ys[k] >= sh) continue;
        const float* px = &src[(static_cast<std::size_t>(ys[k]) * sw + xs[k]) * Image::kChannels];
        acc[0] += w[k] * px[0];
        acc[1] += w[k] * px[1];
        acc[2] += w[k] * px[2];
      }
      float* o = &out[(static_cast<std::size_t>(y) * out_width + x) * Image::kChannels];
      for (int c = 0; c < 3; ++c) {
        o[c] = std::clamp(static_cast<float>(acc[c]), 0.0f, ceiling);
      }
    }
  }
  return Image(out_width, out_height, std::move(out), img.space(), img.range());
}

RegionMask apply_affine(const RegionMask& mask, const AffineParams& p, int out_width,
                        int out_height) {
  check_out_size(out_width, out_height);
  const InverseMap inv(p, mask.width(), mask.height(), out_width, out_height);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(out_width) * out_height, 0);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      double sx, sy;
      inv.map(x, y, sx, sy);
      const double fx = std::floor(sx);
      const double fy = std::floor(sy);
      if (fx < 0 || fy < 0 || fx >= mask.width() || fy >= mask.height()) continue;
      out[static_cast<std::size_t>(y) * out_width + x] =
          mask.at(static_cast<int>(fx), static_cast<int>(fy)) ? 1 : 0;
    }
  }
  return RegionMask(out_width, out_height, std::move(out));
}

}  // namespace flareforge
