#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "flareforge/image.hpp"

namespace flareforge {

// PSNR in dB with peak 1 and MSE over every channel. Identical images
// give +infinity.
double psnr(const Image& a, const Image& b);

// PSNR with the MSE restricted to pixels set in `region` (all channels).
// Throws EmptyRegionError for an empty region.
double masked_psnr(const Image& a, const Image& b, const RegionMask& region);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 1.0;
};

// Mean SSIM over valid (fully inside) Gaussian-window positions, computed
// per RGB channel and averaged. Images must be at least window x window.
double ssim(const Image& a, const Image& b, const SsimParams& params = {});

// Optional region-restricted PSNR columns in a report.
struct RegionMaskDirs {
  std::optional<std::filesystem::path> glare;
  std::optional<std::filesystem::path> streak;
  // A combined flare region (e.g. the synthesizer's mask output). Reported
  // as "flare_psnr" rather than glare/streak PSNR.
  std::optional<std::filesystem::path> flare;
};

struct ImageMetrics {
  std::string name;
  double psnr = 0.0;
  double ssim = 0.0;
  std::optional<double> g_psnr;
  std::optional<double> s_psnr;
  std::optional<double> flare_psnr;
};

struct SkippedMetric {
  std::string name;
  std::string metric;
  std::string reason;
};

struct MetricAggregate {
  std::optional<double> mean;  // over finite values; empty when none
  std::size_t finite = 0;
  std::size_t non_finite = 0;
};

struct MetricsReport {
  std::vector<ImageMetrics> per_image;
  MetricAggregate psnr;
  MetricAggregate ssim;
  std::optional<MetricAggregate> g_psnr;
  std::optional<MetricAggregate> s_psnr;
  std::optional<MetricAggregate> flare_psnr;
  std::vector<SkippedMetric> skipped;

  // Schema: {per_image: [{name, psnr, ssim, g_psnr, s_psnr[, flare_psnr]}],
  //          aggregate: {...}, skipped: [...]}. Infinite PSNR -> null.
  nlohmann::json to_json() const;
};

MetricAggregate aggregate(const std::vector<double>& values);

// Pairs PNG files by filename across the directories and scores each pair.
// Throws PairingError when a file has no partner (including a missing mask)
// and IOError for unreadable directories.
MetricsReport evaluate_dirs(const std::filesystem::path& pred_dir,
                            const std::filesystem::path& gt_dir, const RegionMaskDirs& masks = {},
                            int jobs = 1);

}  // namespace flareforge
