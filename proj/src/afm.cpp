#include "flareforge/afm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "flareforge/errors.hpp"

namespace flareforge {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void validate(const ThresholdStrategy& strategy) {
  std::visit(Overloaded{
                 [](const afm::Fixed& s) {
                   if (!(s.tau > 0.0 && s.tau < 1.0)) {
                     fail(ErrorKind::config,
                          "fixed threshold must lie in (0,1), got " + std::to_string(s.tau));
                   }
                 },
                 [](const afm::AffineOfMean& s) {
                   if (!std::isfinite(s.w) || !std::isfinite(s.b)) {
                     fail(ErrorKind::config, "affine threshold weights must be finite");
                   }
                 },
                 [](const afm::Percentile& s) {
                   if (!(s.p >= 0.0 && s.p <= 100.0)) {
                     fail(ErrorKind::config,
                          "percentile must lie in [0,100], got " + std::to_string(s.p));
                   }
                 },
             },
             strategy);
}

double sigmoid(double x) noexcept {
  // Split by sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double compute_threshold(const LuminanceMap& y, const ThresholdStrategy& strategy) {
  validate(strategy);
  const auto values = y.values();
  return std::visit(
      Overloaded{
          [](const afm::Fixed& s) { return s.tau; },
          [&](const afm::AffineOfMean& s) {
            double sum = 0.0;
            for (float v : values) sum += v;
            const double mean = sum / static_cast<double>(values.size());
            // Saturated sigmoids would otherwise round to exactly 0 or 1.
            return std::clamp(sigmoid(s.w * mean + s.b), std::numeric_limits<double>::min(),
                              std::nextafter(1.0, 0.0));
          },
          [&](const afm::Percentile& s) {
            std::vector<float> sorted(values.begin(), values.end());
            std::sort(sorted.begin(), sorted.end());
            const double n = static_cast<double>(sorted.size());
            auto rank = static_cast<std::size_t>(std::ceil(s.p / 100.0 * n));
            rank = std::clamp<std::size_t>(rank, 1, sorted.size());
            return static_cast<double>(sorted[rank - 1]);
          },
      },
      strategy);
}

MaskResult generate_mask(const LuminanceMap& y, double tau) {
  if (std::isnan(tau)) fail(ErrorKind::value, "generate_mask: threshold is NaN");
  const auto values = y.values();
  std::vector<std::uint8_t> bits(values.size());
  std::size_t set = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    bits[i] = static_cast<double>(values[i]) >= tau ? 1 : 0;
    set += bits[i];
  }
  MaskResult result{tau, RegionMask(y.width(), y.height(), std::move(bits)), 0.0};
  result.coverage = static_cast<double>(set) / static_cast<double>(values.size());
  return result;
}

Image apply_mask(const Image& img, const RegionMask& mask) {
  if (img.width() != mask.width() || img.height() != mask.height()) {
    fail(ErrorKind::dimension, "apply_mask: mask size does not match image");
  }
  auto in = img.samples();
  auto bits = mask.bits();
  std::vector<float> out(in.size());
  for (std::size_t p = 0; p < bits.size(); ++p) {
    const float m = bits[p] ? 1.0f : 0.0f;
    for (int c = 0; c < Image::kChannels; ++c) {
      out[p * Image::kChannels + c] = in[p * Image::kChannels + c] * m;
    }
  }
  return Image(img.width(), img.height(), std::move(out), img.space(), img.range());
}

}  // namespace flareforge
