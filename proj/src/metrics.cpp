#include "flareforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "flareforge/errors.hpp"
#include "flareforge/io.hpp"
#include "flareforge/parallel.hpp"

namespace flareforge {

namespace fs = std::filesystem;

namespace {

void check_same_shape(const Image& a, const Image& b, const char* op) {
  if (!a.same_shape(b)) {
    fail(ErrorKind::dimension, std::string(op) + ": image sizes differ (" +
                                   std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                   " vs " + std::to_string(b.width()) + "x" +
                                   std::to_string(b.height()) + ")");
  }
}

double psnr_from_mse(double mse) {
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(size);
  const int radius = size / 2;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double x = i - radius;
    w[i] = std::exp(-(x * x) / (2.0 * sigma * sigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Valid-mode separable filtering of one plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int width, int height,
                                 const std::vector<double>& w) {
  const int k = static_cast<int>(w.size());
  const int ow = width - k + 1;
  const int oh = height - k + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * height);
  for (int y = 0; y < height; ++y) {
    const double* row = &plane[static_cast<std::size_t>(y) * width];
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += w[i] * row[x + i];
      tmp[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += w[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

double ssim_channel(const Image& a, const Image& b, int c, const std::vector<double>& w,
                    const SsimParams& params) {
  const int width = a.width();
  const int height = a.height();
  const std::size_t n = a.pixel_count();
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  auto sa = a.samples();
  auto sb = b.samples();
  for (std::size_t p = 0; p < n; ++p) {
    x[p] = sa[p * Image::kChannels + c];
    y[p] = sb[p * Image::kChannels + c];
    xx[p] = x[p] * x[p];
    yy[p] = y[p] * y[p];
    xy[p] = x[p] * y[p];
  }
  const auto mx = filter_valid(x, width, height, w);
  const auto my = filter_valid(y, width, height, w);
  const auto mxx = filter_valid(xx, width, height, w);
  const auto myy = filter_valid(yy, width, height, w);
  const auto mxy = filter_valid(xy, width, height, w);

  const double c1 = std::pow(params.k1 * params.data_range, 2);
  const double c2 = std::pow(params.k2 * params.data_range, 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = mxx[i] - mx[i] * mx[i];
    const double vy = myy[i] - my[i] * my[i];
    const double cov = mxy[i] - mx[i] * my[i];
    const double num = (2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2);
    const double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2);
    sum += num / den;
  }
  return sum / static_cast<double>(mx.size());
}

std::vector<std::string> list_pngs(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(ErrorKind::io, "not a directory: " + dir.string());
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) {
      return static_cast<char>(std::tolower(ch));
    });
    if (ext == ".png") names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json optional_metric(const std::optional<double>& v) {
  return v ? finite_or_null(*v) : nlohmann::json(nullptr);
}

nlohmann::json aggregate_json(const MetricAggregate& agg) {
  return {{"mean", agg.mean ? nlohmann::json(*agg.mean) : nlohmann::json(nullptr)},
          {"finite", agg.finite},
          {"non_finite", agg.non_finite}};
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  check_same_shape(a, b, "psnr");
  auto sa = a.samples();
  auto sb = b.samples();
  double sum = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double d = static_cast<double>(sa[i]) - static_cast<double>(sb[i]);
    sum += d * d;
  }
  return psnr_from_mse(sum / static_cast<double>(sa.size()));
}

double masked_psnr(const Image& a, const Image& b, const RegionMask& region) {
  check_same_shape(a, b, "masked_psnr");
  if (region.width() != a.width() || region.height() != a.height()) {
    fail(ErrorKind::dimension, "masked_psnr: region size does not match images");
  }
  auto sa = a.samples();
  auto sb = b.samples();
  auto bits = region.bits();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t p = 0; p < bits.size(); ++p) {
    if (!bits[p]) continue;
    for (int c = 0; c < Image::kChannels; ++c) {
      const std::size_t i = p * Image::kChannels + c;
      const double d = static_cast<double>(sa[i]) - static_cast<double>(sb[i]);
      sum += d * d;
    }
    count += Image::kChannels;
  }
  if (count == 0) fail(ErrorKind::empty_region, "masked_psnr: region is empty");
  return psnr_from_mse(sum / static_cast<double>(count));
}

double ssim(const Image& a, const Image& b, const SsimParams& params) {
  check_same_shape(a, b, "ssim");
  if (params.window < 1 || params.window % 2 == 0 || !(params.sigma > 0.0)) {
    fail(ErrorKind::config, "ssim: window must be odd and positive, sigma > 0");
  }
  if (a.width() < params.window || a.height() < params.window) {
    fail(ErrorKind::dimension, "ssim: images must be at least " + std::to_string(params.window) +
                                   "x" + std::to_string(params.window));
  }
  const auto w = gaussian_window(params.window, params.sigma);
  double sum = 0.0;
  for (int c = 0; c < Image::kChannels; ++c) sum += ssim_channel(a, b, c, w, params);
  return sum / Image::kChannels;
}

MetricAggregate aggregate(const std::vector<double>& values) {
  MetricAggregate agg;
  double sum = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++agg.finite;
    } else {
      ++agg.non_finite;
    }
  }
  if (agg.finite > 0) agg.mean = sum / static_cast<double>(agg.finite);
  return agg;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& m : per_image) {
    nlohmann::json row = {{"name", m.name}, {"psnr", finite_or_null(m.psnr)}, {"ssim", m.ssim}};
    if (g_psnr) row["g_psnr"] = optional_metric(m.g_psnr);
    if (s_psnr) row["s_psnr"] = optional_metric(m.s_psnr);
    if (flare_psnr) row["flare_psnr"] = optional_metric(m.flare_psnr);
    rows.push_back(std::move(row));
  }
  nlohmann::json agg = {{"count", per_image.size()},
                        {"psnr", aggregate_json(psnr)},
                        {"ssim", aggregate_json(ssim)}};
  if (g_psnr) agg["g_psnr"] = aggregate_json(*g_psnr);
  if (s_psnr) agg["s_psnr"] = aggregate_json(*s_psnr);
  if (flare_psnr) agg["flare_psnr"] = aggregate_json(*flare_psnr);
  nlohmann::json skipped_json = nlohmann::json::array();
  for (const auto& s : skipped) {
    skipped_json.push_back({{"name", s.name}, {"metric", s.metric}, {"reason", s.reason}});
  }
  return {{"per_image", std::move(rows)}, {"aggregate", std::move(agg)},
          {"skipped", std::move(skipped_json)}};
}

MetricsReport evaluate_dirs(const fs::path& pred_dir, const fs::path& gt_dir,
                            const RegionMaskDirs& masks, int jobs) {
  const auto pred_names = list_pngs(pred_dir);
  const auto gt_names = list_pngs(gt_dir);
  {
    std::vector<std::string> unmatched;
    std::set_symmetric_difference(pred_names.begin(), pred_names.end(), gt_names.begin(),
                                  gt_names.end(), std::back_inserter(unmatched));
    if (!unmatched.empty()) {
      fail(ErrorKind::pairing, "unmatched file between prediction and ground-truth dirs: " +
                                   unmatched.front());
    }
  }
  struct MaskColumn {
    const char* metric;
    fs::path dir;
  };
  std::vector<MaskColumn> columns;
  if (masks.glare) columns.push_back({"g_psnr", *masks.glare});
  if (masks.streak) columns.push_back({"s_psnr", *masks.streak});
  if (masks.flare) columns.push_back({"flare_psnr", *masks.flare});
  for (const auto& col : columns) {
    const auto names = list_pngs(col.dir);
    const std::set<std::string> have(names.begin(), names.end());
    for (const auto& n : pred_names) {
      if (!have.count(n)) {
        fail(ErrorKind::pairing, std::string("missing ") + col.metric + " mask for " + n +
                                     " in " + col.dir.string());
      }
    }
  }

  MetricsReport report;
  report.per_image.resize(pred_names.size());
  std::vector<std::vector<SkippedMetric>> skipped(pred_names.size());
  parallel_for(pred_names.size(), jobs, [&](std::size_t i) {
    const auto& name = pred_names[i];
    const Image pred = load_png(pred_dir / name);
    const Image gt = load_png(gt_dir / name);
    ImageMetrics m;
    m.name = name;
    m.psnr = psnr(pred, gt);
    m.ssim = ssim(pred, gt);
    for (const auto& col : columns) {
      const RegionMask region = load_mask_png(col.dir / name);
      std::optional<double> value;
      if (region.empty()) {
        skipped[i].push_back({name, col.metric, "empty region mask"});
      } else {
        value = masked_psnr(pred, gt, region);
      }
      const std::string metric = col.metric;
      if (metric == "g_psnr") m.g_psnr = value;
      else if (metric == "s_psnr") m.s_psnr = value;
      else m.flare_psnr = value;
    }
    report.per_image[i] = std::move(m);
  });
  for (auto& s : skipped) report.skipped.insert(report.skipped.end(), s.begin(), s.end());

  auto collect = [&](auto member) {
    std::vector<double> values;
    for (const auto& m : report.per_image) {
      if constexpr (std::is_same_v<decltype(m.*member), const double&>) {
        values.push_back(m.*member);
      } else if ((m.*member).has_value()) {
        values.push_back(*(m.*member));
      }
    }
    return aggregate(values);
  };
  report.psnr = collect(&ImageMetrics::psnr);
  report.ssim = collect(&ImageMetrics::ssim);
  if (masks.glare) report.g_psnr = collect(&ImageMetrics::g_psnr);
  if (masks.streak) report.s_psnr = collect(&ImageMetrics::s_psnr);
  if (masks.flare) report.flare_psnr = collect(&ImageMetrics::flare_psnr);
  return report;
}

}  // namespace flareforge
