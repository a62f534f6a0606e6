#include <algorithm>
#include <cstdio>
#include <fstream>
#include <mutex>

#include "flareforge/digest.hpp"
#include "flareforge/errors.hpp"
#include "flareforge/io.hpp"
#include "flareforge/parallel.hpp"
#include "flareforge/rng.hpp"
#include "flareforge/synth.hpp"
#include "flareforge/version.hpp"

namespace flareforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Stream slot for the background choice; flares use slots 1..8.
constexpr std::uint64_t kBackgroundSlot = 0x100;

std::vector<fs::path> list_backgrounds(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(ErrorKind::io, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string indexed_name(std::size_t index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu%s", index, ext);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open " + path.string());
  out << text;
  if (!out) fail(ErrorKind::io, "failed writing " + path.string());
}

}  // namespace

json run_dataset(const SynthConfig& cfg, const DatasetPaths& paths, std::size_t count, int jobs,
                 const ProgressFn& progress) {
  cfg.validate();
  std::vector<fs::path> backgrounds;
  std::vector<fs::path> depths;
  TemplateLibrary templates;
  if (count > 0) {
    backgrounds = list_backgrounds(paths.backgrounds);
    if (backgrounds.empty()) fail(ErrorKind::io, "no background PNGs in " + paths.backgrounds.string());
    std::error_code ec;
    if (!fs::is_directory(paths.depths, ec)) {
      fail(ErrorKind::io, "not a directory: " + paths.depths.string());
    }
    for (const auto& bg : backgrounds) {
      fs::path d = paths.depths / (bg.stem().string() + ".pfm");
      if (!fs::is_regular_file(d, ec)) {
        fail(ErrorKind::missing_depth, "no depth map " + d.string() + " for background " +
                                           bg.filename().string());
      }
      depths.push_back(std::move(d));
    }
    templates = TemplateLibrary::from_directory(paths.flares);
    if (templates.empty()) fail(ErrorKind::io, "no flare templates in " + paths.flares.string());
  }

  for (const char* sub : {"input", "gt", "mask", "records"}) {
    std::error_code ec;
    fs::create_directories(paths.out / sub, ec);
    if (ec) fail(ErrorKind::io, "cannot create " + (paths.out / sub).string() + ": " + ec.message());
  }

  std::vector<json> entries(count);
  std::mutex progress_mutex;
  std::size_t done = 0;
  parallel_for(count, jobs, [&](std::size_t k) {
    SeededRng pick(cfg.master_seed, stream_id(k, kBackgroundSlot));
    const auto b = static_cast<std::size_t>(
        pick.uniform_int(0, static_cast<std::int64_t>(backgrounds.size()) - 1));
    const Image bg = load_png(backgrounds[b]);
    const DepthMap depth = load_pfm(depths[b], cfg.depth_inverse, cfg.depth_epsilon);

    SynthResult result = synthesize_pair(cfg, bg, depth, templates, k);
    SynthRecord& rec = result.record;
    rec.background_path = backgrounds[b].string();
    rec.depth_path = depths[b].string();
    rec.input_path = (fs::path("input") / indexed_name(k, ".png")).string();
    rec.gt_path = (fs::path("gt") / indexed_name(k, ".png")).string();
    rec.mask_path = (fs::path("mask") / indexed_name(k, ".png")).string();
    const std::string record_rel = (fs::path("records") / indexed_name(k, ".json")).string();

    write_png(result.input, paths.out / rec.input_path);
    write_png(result.gt, paths.out / rec.gt_path);
    write_mask_png(result.flare_mask, paths.out / rec.mask_path);
    write_text(paths.out / record_rel, rec.to_json().dump(2) + "\n");

    json scales = json::array();
    for (const auto& f : rec.flares) scales.push_back(f.scale_s);
    entries[k] = {
        {"index", k},
        {"background", rec.background_path},
        {"template_id", rec.template_id},
        {"flare_count", rec.flares.size()},
        {"scales", scales},
        {"files",
         {{"input", {{"path", rec.input_path}, {"sha256", sha256_file(paths.out / rec.input_path)}}},
          {"gt", {{"path", rec.gt_path}, {"sha256", sha256_file(paths.out / rec.gt_path)}}},
          {"mask", {{"path", rec.mask_path}, {"sha256", sha256_file(paths.out / rec.mask_path)}}},
          {"record", {{"path", record_rel}, {"sha256", sha256_file(paths.out / record_rel)}}}}},
    };
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(++done, count);
    }
  });

  json manifest = {
      {"tool", "flareforge"},
      {"version", kVersion},
      {"config", cfg.to_json()},
      {"inputs",
       {{"backgrounds", paths.backgrounds.string()},
        {"depths", paths.depths.string()},
        {"flares", paths.flares.string()}}},
      {"count", count},
      {"pairs", std::move(entries)},
  };
  write_text(paths.out / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace flareforge
