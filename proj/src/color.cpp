#include "flareforge/color.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flareforge/errors.hpp"

namespace flareforge {

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    fail(ErrorKind::value, "gamma must be finite and > 0, got " + std::to_string(gamma));
  }
}

void check_compatible(const Image& a, const Image& b, const char* op) {
  if (!a.same_shape(b)) {
    fail(ErrorKind::dimension, std::string(op) + ": size mismatch " + std::to_string(a.width()) +
                                   "x" + std::to_string(a.height()) + " vs " +
                                   std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
  if (a.space() != b.space()) {
    fail(ErrorKind::value, std::string(op) + ": color space mismatch");
  }
}

Image apply_power(const Image& img, double exponent, ColorSpace out_space) {
  auto in = img.samples();
  std::vector<float> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const float v = in[i];
    out[i] = (v == 0.0f || v == 1.0f)
                 ? v
                 : static_cast<float>(std::pow(static_cast<double>(v), exponent));
  }
  return Image(img.width(), img.height(), std::move(out), out_space, img.range());
}

}  // namespace

LuminanceMap to_luma_bt601(const Image& img) {
  auto s = img.samples();
  std::vector<float> y(img.pixel_count());
  for (std::size_t p = 0; p < y.size(); ++p) {
    const float* px = &s[p * Image::kChannels];
    y[p] = static_cast<float>(kLumaR * px[0] + kLumaG * px[1] + kLumaB * px[2]);
  }
  return LuminanceMap(img.width(), img.height(), std::move(y));
}

Image gamma_decode(const Image& img, double gamma) {
  check_gamma(gamma);
  return apply_power(img, gamma, ColorSpace::linear);
}

Image gamma_encode(const Image& img, double gamma) {
  check_gamma(gamma);
  return apply_power(img, 1.0 / gamma, ColorSpace::encoded);
}

Image add_clip(const Image& base, const Image& addend) {
  check_compatible(base, addend, "add_clip");
  auto a = base.samples();
  auto b = addend.samples();
  std::vector<float> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = std::clamp(a[i] + b[i], 0.0f, 1.0f);
  }
  return Image(base.width(), base.height(), std::move(out), base.space());
}

Image add_unclipped(const Image& base, const Image& addend) {
  check_compatible(base, addend, "add_unclipped");
  auto a = base.samples();
  auto b = addend.samples();
  std::vector<float> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return Image(base.width(), base.height(), std::move(out), base.space(), SampleRange::headroom);
}

}  // namespace flareforge
