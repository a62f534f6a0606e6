#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <unistd.h>

#include "flareforge/io.hpp"
#include "flareforge/rng.hpp"

namespace fixtures {

namespace fs = std::filesystem;
using flareforge::SeededRng;

#ifndef FLAREFORGE_TEST_DATA_DIR
#error "FLAREFORGE_TEST_DATA_DIR must be defined"
#endif

fs::path data_dir() { return FLAREFORGE_TEST_DATA_DIR; }

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("flareforge-" + tag + "-" + std::to_string(::getpid()) + "-" +
           std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Image constant_image(int w, int h, float r, float g, float b) {
  std::vector<float> s(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < s.size(); i += 3) {
    s[i] = r;
    s[i + 1] = g;
    s[i + 2] = b;
  }
  return Image(w, h, std::move(s));
}

Image random_image(int w, int h, std::uint64_t seed, float lo, float hi) {
  SeededRng rng(seed, 0x5EED);
  std::vector<float> s(static_cast<std::size_t>(w) * h * 3);
  for (auto& v : s) v = static_cast<float>(rng.uniform(lo, hi));
  return Image(w, h, std::move(s));
}

Image night_background(int w, int h, std::uint64_t seed) {
  SeededRng rng(seed, 0xB6);
  std::vector<float> s(static_cast<std::size_t>(w) * h * 3);
  struct Window {
    int x0, y0, x1, y1;
  };
  std::vector<Window> windows;
  for (int k = 0; k < 6; ++k) {
    const int x0 = static_cast<int>(rng.uniform(0.0, w * 0.9));
    const int y0 = static_cast<int>(rng.uniform(h * 0.3, h * 0.9));
    windows.push_back({x0, y0, x0 + std::max(2, w / 20), y0 + std::max(2, h / 16)});
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sky = 0.03 + 0.12 * static_cast<double>(y) / h;
      double v = sky;
      for (const auto& win : windows) {
        if (x >= win.x0 && x < win.x1 && y >= win.y0 && y < win.y1) v = 0.32;
      }
      const double n = rng.uniform(-0.01, 0.01);
      const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 3;
      s[i] = static_cast<float>(std::clamp(v * 0.9 + n, 0.0, 1.0));
      s[i + 1] = static_cast<float>(std::clamp(v * 0.85 + n, 0.0, 1.0));
      s[i + 2] = static_cast<float>(std::clamp(v * 1.1 + n, 0.0, 1.0));
    }
  }
  return Image(w, h, std::move(s));
}

DepthMap constant_depth(int w, int h, float value) {
  return DepthMap(w, h, std::vector<float>(static_cast<std::size_t>(w) * h, value));
}

DepthMap ramp_depth(int w, int h, float near, float far) {
  std::vector<float> v(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    const float t = h > 1 ? static_cast<float>(y) / static_cast<float>(h - 1) : 0.0f;
    for (int x = 0; x < w; ++x) v[static_cast<std::size_t>(y) * w + x] = far + (near - far) * t;
  }
  return DepthMap(w, h, std::move(v));
}

DepthMap split_depth(int w, int h, float left, float right) {
  std::vector<float> v(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) v[static_cast<std::size_t>(y) * w + x] = x < w / 2 ? left : right;
  }
  return DepthMap(w, h, std::move(v));
}

namespace {

double starburst_value(const StarburstSpec& spec, double dx, double dy) {
  const double r = std::hypot(dx, dy);
  if (r <= spec.core_radius) return 1.0;
  if (r >= spec.glow_radius) return 0.0;
  const double fall = 1.0 - r / spec.glow_radius;
  double v = 0.8 * fall * fall * fall;
  const double phi = std::atan2(dy, dx);
  for (int k = 0; k < spec.streaks; ++k) {
    const double a = std::numbers::pi * k / spec.streaks;
    const double perp = r * std::sin(phi - a);
    v += 0.5 * fall * std::exp(-perp * perp / 0.72);
  }
  return std::min(v, 0.95);
}

}  // namespace

Image starburst(const StarburstSpec& spec) {
  const int n = spec.size;
  const double c = (n - 1) / 2.0;
  std::vector<float> s(static_cast<std::size_t>(n) * n * 3);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double v = starburst_value(spec, x - c, y - c);
      const std::size_t i = (static_cast<std::size_t>(y) * n + x) * 3;
      if (v >= 1.0) {
        s[i] = s[i + 1] = s[i + 2] = 1.0f;
      } else {
        s[i] = static_cast<float>(v * spec.tint_r);
        s[i + 1] = static_cast<float>(v * spec.tint_g);
        s[i + 2] = static_cast<float>(v * spec.tint_b);
      }
    }
  }
  return Image(n, n, std::move(s));
}

RegionMask starburst_core(const StarburstSpec& spec) {
  const int n = spec.size;
  const double c = (n - 1) / 2.0;
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n) * n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      bits[static_cast<std::size_t>(y) * n + x] = std::hypot(x - c, y - c) <= spec.core_radius;
    }
  }
  return RegionMask(n, n, std::move(bits));
}

flareforge::FlareTemplate starburst_template(const std::string& id, const StarburstSpec& spec,
                                             bool with_light_source) {
  flareforge::FlareTemplate t{id, starburst(spec), std::nullopt, {}};
  if (with_light_source) t.light_source = starburst_core(spec);
  return t;
}

Image point_light(int size, double glow_radius) {
  const int c = size / 2;
  std::vector<float> s(static_cast<std::size_t>(size) * size * 3, 0.0f);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double r = std::hypot(x - c, y - c);
      double v = 0.0;
      if (r == 0.0) {
        v = 1.0;
      } else if (r < glow_radius) {
        const double t = 1.0 - r / glow_radius;
        v = 0.6 * t * t;
      }
      const std::size_t i = (static_cast<std::size_t>(y) * size + x) * 3;
      const bool core = r == 0.0;
      s[i] = static_cast<float>(v);
      s[i + 1] = static_cast<float>(core ? v : v * 0.9);
      s[i + 2] = static_cast<float>(core ? v : v * 0.8);
    }
  }
  return Image(size, size, std::move(s));
}

double sum_samples(const Image& img) {
  double s = 0.0;
  for (float v : img.samples()) s += v;
  return s;
}

DatasetDirs write_dataset(const fs::path& root, int backgrounds, int w, int h, int templates,
                          bool light_source_masks) {
  DatasetDirs d{root / "backgrounds", root / "depths", root / "flares"};
  fs::create_directories(d.backgrounds);
  fs::create_directories(d.depths);
  fs::create_directories(d.flares);
  for (int i = 0; i < backgrounds; ++i) {
    const std::string stem = "bg" + std::to_string(i);
    flareforge::write_png(night_background(w, h, 100 + i), d.backgrounds / (stem + ".png"));
    flareforge::write_pfm(ramp_depth(w, h, 1.0f + i, 8.0f + 2.0f * i), d.depths / (stem + ".pfm"));
  }
  for (int t = 0; t < templates; ++t) {
    StarburstSpec spec;
    spec.size = 63 + 16 * t;
    spec.glow_radius = spec.size * 0.4;
    spec.streaks = 4 + 2 * t;
    spec.tint_b = 0.6f + 0.15f * t;
    const std::string stem = "flare" + std::to_string(t);
    flareforge::write_png(starburst(spec), d.flares / (stem + ".png"));
    if (light_source_masks) {
      flareforge::write_mask_png(starburst_core(spec), d.flares / (stem + "_ls.png"));
    }
  }
  return d;
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

}  // namespace fixtures
