#include "flareforge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flareforge/afm.hpp"
#include "flareforge/bam.hpp"
#include "flareforge/color.hpp"
#include "flareforge/errors.hpp"
#include "flareforge/io.hpp"
#include "flareforge/rng.hpp"

namespace flareforge {

namespace fs = std::filesystem;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool all_zero(const Image& img) {
  const auto s = img.samples();
  return std::all_of(s.begin(), s.end(), [](float v) { return v == 0.0f; });
}

// One flare after the transform, with its geometry estimated.
struct PlacedFlare {
  Image warped;  // encoded, same size as the background
  LightSourceRegion region;
  FlarePlacement placement;
};

struct RenderInputs {
  const Image& background;
  const DepthMap& depth;
  const FlareTemplate& tmpl;
  double fov_degrees;
  std::optional<double> gamma;
  GtMode gt_mode;  // resolved
  double tau_ls;
  double max_scale;
};

PlacedFlare place_flare(const RenderInputs& in, const AffineParams& affine, Image warped) {
  const int w = in.background.width();
  const int h = in.background.height();
  std::optional<RegionMask> provided;
  if (in.tmpl.light_source) provided = apply_affine(*in.tmpl.light_source, affine, w, h);
  PlacedFlare placed{std::move(warped), {}, {}};
  placed.region = extract_light_source(placed.warped, provided, in.tau_ls);
  placed.placement.affine = affine;
  placed.placement.depth_d = mean_depth(in.depth, placed.region);
  placed.placement.radius_r = mean_radius(placed.region, w, h);
  placed.placement.theta =
      incident_angle(placed.placement.radius_r, w, in.fov_degrees * kDegToRad);
  return placed;
}

// Brightness scaling and composition shared by fresh synthesis and replay.
SynthResult compose(const RenderInputs& in, std::vector<PlacedFlare> flares,
                    SynthRecord record) {
  const Image& bg = in.background;
  const int w = bg.width();
  const int h = bg.height();
  record.gamma = in.gamma;
  record.gt_mode = in.gt_mode;
  record.tau_ls = in.tau_ls;
  record.max_scale = in.max_scale;
  record.fov_degrees = in.fov_degrees;

  if (flares.empty()) {
    record.mean_depth_dbar = 0.0;
    record.flares.clear();
    return SynthResult{bg, bg, RegionMask(w, h), Image(w, h, bg.space()), std::move(record)};
  }

  std::vector<FlarePlacement> placements;
  for (const auto& f : flares) placements.push_back(f.placement);
  const BrightnessContext ctx = adjust_brightness(std::move(placements), in.max_scale);
  record.mean_depth_dbar = ctx.mean_depth_dbar;
  record.flares.resize(flares.size());
  for (std::size_t i = 0; i < flares.size(); ++i) {
    const FlarePlacement& p = ctx.placements[i];
    FlareRecord& fr = record.flares[i];
    fr.affine = p.affine;
    fr.depth_d = p.depth_d;
    fr.radius_r = p.radius_r;
    fr.theta = p.theta;
    fr.scale_s = p.scale_s;
    fr.light_source = flares[i].region.origin;
    fr.light_source_pixels = flares[i].region.pixels.size();
  }

  const bool linear = in.gamma.has_value();
  auto to_compose_space = [&](const Image& img) {
    return linear ? gamma_decode(img, *in.gamma) : img;
  };
  const Image bg_c = to_compose_space(bg);
  const bool keep_light_source = in.gt_mode == GtMode::background_plus_light_source;

  Image flare_layer(w, h, bg_c.space());
  Image light_layer(w, h, bg_c.space());
  for (std::size_t i = 0; i < flares.size(); ++i) {
    const double s = ctx.placements[i].scale_s;
    const Image flare_c = to_compose_space(flares[i].warped);
    flare_layer = add_unclipped(flare_layer, apply_scale(flare_c, s));
    if (keep_light_source) {
      const RegionMask ls = flares[i].region.to_mask(w, h);
      light_layer = add_unclipped(light_layer, apply_scale(apply_mask(flare_c, ls), s));
    }
  }

  Image input_c = add_clip(bg_c, flare_layer);
  Image gt_c = keep_light_source ? add_clip(bg_c, light_layer) : bg_c;
  const MaskResult mask = generate_mask(to_luma_bt601(flare_layer), kFlareMaskThreshold);

  if (linear) {
    return SynthResult{gamma_encode(input_c, *in.gamma), gamma_encode(gt_c, *in.gamma), mask.mask,
                       std::move(flare_layer), std::move(record)};
  }
  return SynthResult{std::move(input_c), std::move(gt_c), mask.mask, std::move(flare_layer),
                     std::move(record)};
}

void check_inputs(const Image& background, const DepthMap& depth) {
  if (background.width() != depth.width() || background.height() != depth.height()) {
    fail(ErrorKind::dimension, "depth map " + std::to_string(depth.width()) + "x" +
                                   std::to_string(depth.height()) +
                                   " does not match background " +
                                   std::to_string(background.width()) + "x" +
                                   std::to_string(background.height()));
  }
  if (background.space() != ColorSpace::encoded) {
    fail(ErrorKind::value, "background must be gamma-encoded");
  }
}

GtMode resolve_gt_mode(GtMode mode, const FlareTemplate& tmpl) {
  if (mode != GtMode::automatic) return mode;
  return tmpl.light_source ? GtMode::background_plus_light_source : GtMode::background_only;
}

}  // namespace

fs::path light_source_mask_path(const fs::path& template_path) {
  return template_path.parent_path() /
         (template_path.stem().string() + "_ls" + template_path.extension().string());
}

FlareTemplate load_template(const fs::path& path) {
  FlareTemplate t{path.stem().string(), load_png(path), std::nullopt, path};
  const fs::path ls = light_source_mask_path(path);
  std::error_code ec;
  if (fs::is_regular_file(ls, ec)) {
    RegionMask mask = load_mask_png(ls);
    if (mask.width() != t.flare.width() || mask.height() != t.flare.height()) {
      fail(ErrorKind::dimension, "light-source mask " + ls.string() + " does not match template");
    }
    t.light_source = std::move(mask);
  }
  return t;
}

TemplateLibrary TemplateLibrary::from_directory(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(ErrorKind::io, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".png") continue;
    const std::string stem = entry.path().stem().string();
    if (stem.size() >= 3 && stem.compare(stem.size() - 3, 3, "_ls") == 0) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  TemplateLibrary lib;
  for (const auto& f : files) lib.add_file(f);
  return lib;
}

void TemplateLibrary::add(FlareTemplate tmpl) {
  Entry e{tmpl.id, tmpl.path, nullptr};
  e.resident = std::make_shared<const FlareTemplate>(std::move(tmpl));
  entries_.push_back(std::move(e));
}

void TemplateLibrary::add_file(const fs::path& path) {
  entries_.push_back(Entry{path.stem().string(), path, nullptr});
}

std::optional<std::size_t> TemplateLibrary::find(const std::string& id) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].id == id) return i;
  }
  return std::nullopt;
}

std::shared_ptr<const FlareTemplate> TemplateLibrary::load(std::size_t i) const {
  const Entry& e = entries_.at(i);
  if (e.resident) return e.resident;
  return std::make_shared<const FlareTemplate>(load_template(e.path));
}

SynthResult synthesize_pair(const SynthConfig& cfg, const Image& background,
                            const DepthMap& depth, const TemplateLibrary& templates,
                            std::uint64_t pair_index) {
  cfg.validate();
  check_inputs(background, depth);
  if (templates.empty()) fail(ErrorKind::config, "template library is empty");

  // Pair-level draws, always four and always in this order.
  const std::uint64_t pair_stream = stream_id(pair_index, 0);
  SeededRng rng(cfg.master_seed, pair_stream);
  const auto count = static_cast<int>(rng.uniform_int(cfg.flare_count_min, cfg.flare_count_max));
  const auto template_index =
      static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(templates.size()) - 1));
  const std::uint64_t fov_draw = rng.next_u64();
  const double gamma_draw = rng.uniform01();

  const double fov_degrees = std::visit(
      [&](const auto& mode) -> double {
        using T = std::decay_t<decltype(mode)>;
        if constexpr (std::is_same_v<T, FovFixed>) {
          return mode.degrees;
        } else {
          return mode.degrees[fov_draw % mode.degrees.size()];
        }
      },
      cfg.fov);
  std::optional<double> gamma;
  if (cfg.compose_space == ColorSpace::linear && cfg.gamma) {
    gamma = cfg.gamma->low + (cfg.gamma->high - cfg.gamma->low) * gamma_draw;
  }

  const auto tmpl = templates.load(template_index);
  SynthRecord record;
  record.pair_index = pair_index;
  record.master_seed = cfg.master_seed;
  record.pair_stream = pair_stream;
  record.template_id = tmpl->id;
  record.template_path = tmpl->path.string();
  record.depth_inverse = cfg.depth_inverse;
  record.depth_epsilon = cfg.depth_epsilon;

  const RenderInputs in{background, depth, *tmpl, fov_degrees, gamma,
                        resolve_gt_mode(cfg.gt_mode, *tmpl), cfg.tau_ls, cfg.max_scale};
  const int w = background.width();
  const int h = background.height();

  std::vector<PlacedFlare> flares;
  std::vector<std::pair<int, std::uint64_t>> draws;  // attempts, stream
  for (int i = 0; i < count; ++i) {
    const std::uint64_t stream = stream_id(pair_index, static_cast<std::uint64_t>(i) + 1);
    SeededRng flare_rng(cfg.master_seed, stream);
    bool placed = false;
    for (int attempt = 1; attempt <= cfg.max_placement_attempts && !placed; ++attempt) {
      const AffineParams p = sample_affine(flare_rng, cfg.affine, w, h);
      Image warped = apply_affine(tmpl->flare, p, w, h);
      if (all_zero(warped)) continue;
      flares.push_back(place_flare(in, p, std::move(warped)));
      draws.emplace_back(attempt, stream);
      placed = true;
    }
    if (!placed) {
      fail(ErrorKind::empty_flare, "flare " + std::to_string(i) + " of pair " +
                                       std::to_string(pair_index) + " left the canvas in " +
                                       std::to_string(cfg.max_placement_attempts) + " attempts");
    }
  }

  SynthResult result = compose(in, std::move(flares), std::move(record));
  for (std::size_t i = 0; i < draws.size(); ++i) {
    result.record.flares[i].attempts = draws[i].first;
    result.record.flares[i].stream = draws[i].second;
  }
  return result;
}

SynthResult render_record(const SynthRecord& record, const Image& background,
                          const DepthMap& depth, const FlareTemplate& tmpl) {
  check_inputs(background, depth);
  if (record.gt_mode == GtMode::automatic) {
    fail(ErrorKind::value, "record gt mode must be resolved");
  }
  const RenderInputs in{background, depth, tmpl, record.fov_degrees, record.gamma,
                        record.gt_mode, record.tau_ls, record.max_scale};
  const int w = background.width();
  const int h = background.height();
  std::vector<PlacedFlare> flares;
  for (const auto& f : record.flares) {
    Image warped = apply_affine(tmpl.flare, f.affine, w, h);
    if (all_zero(warped)) fail(ErrorKind::empty_flare, "recorded placement leaves the canvas");
    flares.push_back(place_flare(in, f.affine, std::move(warped)));
  }
  SynthResult result = compose(in, std::move(flares), record);
  for (std::size_t i = 0; i < record.flares.size(); ++i) {
    result.record.flares[i].attempts = record.flares[i].attempts;
    result.record.flares[i].stream = record.flares[i].stream;
  }
  return result;
}

SynthResult replay_record(const SynthRecord& record) {
  const Image background = load_png(record.background_path);
  const DepthMap depth = load_pfm(record.depth_path, record.depth_inverse, record.depth_epsilon);
  const FlareTemplate tmpl = load_template(record.template_path);
  return render_record(record, background, depth, tmpl);
}

nlohmann::json PlacementReport::to_json() const {
  return {
      {"d_i", placement.depth_d},
      {"r_i", placement.radius_r},
      {"theta_deg", placement.theta / kDegToRad},
      {"scale_s", placement.scale_s},
      {"light_source_pixels", region.pixels.size()},
      {"provenance",
       {{"light_source", to_string(region.origin)},
        {"template_id", template_id},
        {"affine",
         {{"rotation", placement.affine.rotation},
          {"scale", placement.affine.scale},
          {"translate_x", placement.affine.translate_x},
          {"translate_y", placement.affine.translate_y},
          {"shear_x", placement.affine.shear_x},
          {"shear_y", placement.affine.shear_y}}}}},
  };
}

PlacementReport inspect_placement(const Image& background, const DepthMap& depth,
                                  const FlareTemplate& tmpl, double fov_degrees,
                                  const AffineParams& affine, double tau_ls) {
  check_inputs(background, depth);
  if (!(fov_degrees > 0.0 && fov_degrees < 180.0)) {
    fail(ErrorKind::config, "field of view must lie in (0, 180) degrees");
  }
  const RenderInputs in{background, depth, tmpl, fov_degrees, std::nullopt,
                        GtMode::background_only, tau_ls,
                        std::numeric_limits<double>::infinity()};
  Image warped = apply_affine(tmpl.flare, affine, background.width(), background.height());
  PlacedFlare placed = place_flare(in, affine, std::move(warped));
  const BrightnessContext ctx = adjust_brightness({placed.placement});
  return PlacementReport{ctx.placements.front(), std::move(placed.region), tmpl.id};
}

}  // namespace flareforge
