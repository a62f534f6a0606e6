// JSON forms of SynthConfig and SynthRecord.

#include <cmath>
#include <set>
#include <string>

#include "flareforge/errors.hpp"
#include "flareforge/synth.hpp"

namespace flareforge {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const char* where) {
  if (!j.is_object()) fail(ErrorKind::config, std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) {
      fail(ErrorKind::config, std::string("unknown key '") + key + "' in " + where);
    }
  }
}

json interval_json(const Interval& iv) { return json::array({iv.low, iv.high}); }

Interval interval_from(const json& j, const char* name) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    fail(ErrorKind::config, std::string("'") + name + "' must be a [low, high] number pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json affine_json(const AffineParams& p) {
  return {{"rotation", p.rotation}, {"scale", p.scale},     {"translate_x", p.translate_x},
          {"translate_y", p.translate_y}, {"shear_x", p.shear_x}, {"shear_y", p.shear_y}};
}

AffineParams affine_from(const json& j) {
  AffineParams p;
  p.rotation = j.at("rotation").get<double>();
  p.scale = j.at("scale").get<double>();
  p.translate_x = j.at("translate_x").get<double>();
  p.translate_y = j.at("translate_y").get<double>();
  p.shear_x = j.at("shear_x").get<double>();
  p.shear_y = j.at("shear_y").get<double>();
  return p;
}

LightSourceOrigin parse_origin(const std::string& s) {
  for (auto o : {LightSourceOrigin::provided_mask, LightSourceOrigin::luminance_threshold,
                 LightSourceOrigin::brightest_fallback}) {
    if (to_string(o) == s) return o;
  }
  fail(ErrorKind::format, "unknown light-source origin '" + s + "'");
}

}  // namespace

std::string_view to_string(GtMode mode) {
  switch (mode) {
    case GtMode::automatic: return "auto";
    case GtMode::background_only: return "background_only";
    case GtMode::background_plus_light_source: return "background_plus_light_source";
  }
  return "auto";
}

std::string_view to_string(ColorSpace space) {
  return space == ColorSpace::linear ? "linear" : "encoded";
}

GtMode parse_gt_mode(std::string_view s) {
  for (auto m : {GtMode::automatic, GtMode::background_only, GtMode::background_plus_light_source}) {
    if (to_string(m) == s) return m;
  }
  fail(ErrorKind::config, "unknown gt mode '" + std::string(s) +
                              "' (expected auto, background_only, background_plus_light_source)");
}

ColorSpace parse_color_space(std::string_view s) {
  if (s == "linear") return ColorSpace::linear;
  if (s == "encoded") return ColorSpace::encoded;
  fail(ErrorKind::config, "unknown compose space '" + std::string(s) + "' (expected linear or encoded)");
}

void SynthConfig::validate() const {
  std::visit(
      [](const auto& mode) {
        using T = std::decay_t<decltype(mode)>;
        std::vector<double> degrees;
        if constexpr (std::is_same_v<T, FovFixed>) {
          degrees = {mode.degrees};
        } else {
          degrees = mode.degrees;
          if (degrees.empty()) fail(ErrorKind::config, "random FOV choice list is empty");
        }
        for (double d : degrees) {
          if (!(d > 0.0 && d < 180.0)) {
            fail(ErrorKind::config, "field of view must lie in (0, 180) degrees, got " +
                                        std::to_string(d));
          }
        }
      },
      fov);
  const bool passthrough = flare_count_min == 0 && flare_count_max == 0;
  if (!passthrough &&
      !(flare_count_min >= 1 && flare_count_min <= flare_count_max && flare_count_max <= 8)) {
    fail(ErrorKind::config, "flare count range must satisfy 1 <= min <= max <= 8, got [" +
                                std::to_string(flare_count_min) + "," +
                                std::to_string(flare_count_max) + "]");
  }
  if (gamma && !(gamma->low > 0.0 && gamma->low <= gamma->high && std::isfinite(gamma->high))) {
    fail(ErrorKind::config, "gamma range must satisfy 0 < low <= high < inf");
  }
  if (!(tau_ls > 0.0 && tau_ls < 1.0)) fail(ErrorKind::config, "tau_ls must lie in (0,1)");
  affine.validate();
  if (!(max_scale > 0.0)) fail(ErrorKind::config, "max_scale must be > 0");
  if (!(depth_epsilon >= 0.0) || !std::isfinite(depth_epsilon)) {
    fail(ErrorKind::config, "depth_epsilon must be finite and >= 0");
  }
  if (max_placement_attempts < 1) fail(ErrorKind::config, "max_placement_attempts must be >= 1");
}

json SynthConfig::to_json() const {
  json fov_json = std::visit(
      [](const auto& mode) -> json {
        using T = std::decay_t<decltype(mode)>;
        if constexpr (std::is_same_v<T, FovFixed>) {
          return {{"mode", "fixed"}, {"degrees", mode.degrees}};
        } else {
          return {{"mode", "random_choice"}, {"degrees", mode.degrees}};
        }
      },
      fov);
  return {
      {"master_seed", master_seed},
      {"fov", fov_json},
      {"flare_count", json::array({flare_count_min, flare_count_max})},
      {"gamma", gamma ? interval_json(*gamma) : json(nullptr)},
      {"compose_space", to_string(compose_space)},
      {"gt_mode", to_string(gt_mode)},
      {"tau_ls", tau_ls},
      {"affine",
       {{"rotation", interval_json(affine.rotation)},
        {"scale", interval_json(affine.scale)},
        {"translate", interval_json(affine.translate)},
        {"shear", interval_json(affine.shear)}}},
      {"max_scale", number_or_null(max_scale)},
      {"depth_inverse", depth_inverse},
      {"depth_epsilon", depth_epsilon},
      {"max_placement_attempts", max_placement_attempts},
  };
}

SynthConfig SynthConfig::from_json(const json& j, SynthConfig cfg) {
  reject_unknown_keys(j,
                      {"master_seed", "fov", "flare_count", "gamma", "compose_space", "gt_mode",
                       "tau_ls", "affine", "max_scale", "depth_inverse", "depth_epsilon",
                       "max_placement_attempts"},
                      "synth config");
  try {
    if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("fov")) {
      const json& f = j["fov"];
      reject_unknown_keys(f, {"mode", "degrees"}, "fov");
      const auto mode = f.at("mode").get<std::string>();
      if (mode == "fixed") {
        cfg.fov = FovFixed{f.at("degrees").get<double>()};
      } else if (mode == "random_choice") {
        cfg.fov = FovRandomChoice{f.at("degrees").get<std::vector<double>>()};
      } else {
        fail(ErrorKind::config, "fov.mode must be 'fixed' or 'random_choice'");
      }
    }
    if (j.contains("flare_count")) {
      const auto range = j["flare_count"].get<std::vector<int>>();
      if (range.size() != 2) fail(ErrorKind::config, "flare_count must be [min, max]");
      cfg.flare_count_min = range[0];
      cfg.flare_count_max = range[1];
    }
    if (j.contains("gamma")) {
      cfg.gamma = j["gamma"].is_null() ? std::nullopt
                                       : std::optional<Interval>(interval_from(j["gamma"], "gamma"));
    }
    if (j.contains("compose_space")) {
      cfg.compose_space = parse_color_space(j["compose_space"].get<std::string>());
    }
    if (j.contains("gt_mode")) cfg.gt_mode = parse_gt_mode(j["gt_mode"].get<std::string>());
    if (j.contains("tau_ls")) cfg.tau_ls = j["tau_ls"].get<double>();
    if (j.contains("affine")) {
      const json& a = j["affine"];
      reject_unknown_keys(a, {"rotation", "scale", "translate", "shear"}, "affine");
      if (a.contains("rotation")) cfg.affine.rotation = interval_from(a["rotation"], "rotation");
      if (a.contains("scale")) cfg.affine.scale = interval_from(a["scale"], "scale");
      if (a.contains("translate")) cfg.affine.translate = interval_from(a["translate"], "translate");
      if (a.contains("shear")) cfg.affine.shear = interval_from(a["shear"], "shear");
    }
    if (j.contains("max_scale")) {
      cfg.max_scale = j["max_scale"].is_null() ? std::numeric_limits<double>::infinity()
                                               : j["max_scale"].get<double>();
    }
    if (j.contains("depth_inverse")) cfg.depth_inverse = j["depth_inverse"].get<bool>();
    if (j.contains("depth_epsilon")) cfg.depth_epsilon = j["depth_epsilon"].get<double>();
    if (j.contains("max_placement_attempts")) {
      cfg.max_placement_attempts = j["max_placement_attempts"].get<int>();
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("invalid synth config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

SynthConfig SynthConfig::from_json(const json& j) { return from_json(j, SynthConfig{}); }

json SynthRecord::to_json() const {
  json flare_list = json::array();
  for (const auto& f : flares) {
    flare_list.push_back({
        {"affine", affine_json(f.affine)},
        {"attempts", f.attempts},
        {"stream", f.stream},
        {"depth_d", f.depth_d},
        {"radius_r", f.radius_r},
        {"theta", f.theta},
        {"scale_s", f.scale_s},
        {"light_source", {{"origin", to_string(f.light_source)}, {"pixels", f.light_source_pixels}}},
    });
  }
  return {
      {"pair_index", pair_index},
      {"seeds", {{"master_seed", master_seed}, {"pair_stream", pair_stream}}},
      {"background_path", background_path},
      {"depth_path", depth_path},
      {"template_id", template_id},
      {"template_path", template_path},
      {"fov_degrees", fov_degrees},
      {"gamma", gamma ? json(*gamma) : json(nullptr)},
      {"compose_space", gamma ? "linear" : "encoded"},
      {"gt_mode", to_string(gt_mode)},
      {"tau_ls", tau_ls},
      {"max_scale", number_or_null(max_scale)},
      {"depth_inverse", depth_inverse},
      {"depth_epsilon", depth_epsilon},
      {"mean_depth_dbar", mean_depth_dbar},
      {"flares", flare_list},
      {"outputs", {{"input", input_path}, {"gt", gt_path}, {"mask", mask_path}}},
  };
}

SynthRecord SynthRecord::from_json(const json& j) {
  SynthRecord r;
  try {
    r.pair_index = j.at("pair_index").get<std::uint64_t>();
    r.master_seed = j.at("seeds").at("master_seed").get<std::uint64_t>();
    r.pair_stream = j.at("seeds").at("pair_stream").get<std::uint64_t>();
    r.background_path = j.at("background_path").get<std::string>();
    r.depth_path = j.at("depth_path").get<std::string>();
    r.template_id = j.at("template_id").get<std::string>();
    r.template_path = j.at("template_path").get<std::string>();
    r.fov_degrees = j.at("fov_degrees").get<double>();
    if (!j.at("gamma").is_null()) r.gamma = j["gamma"].get<double>();
    r.gt_mode = parse_gt_mode(j.at("gt_mode").get<std::string>());
    r.tau_ls = j.at("tau_ls").get<double>();
    r.max_scale = j.at("max_scale").is_null() ? std::numeric_limits<double>::infinity()
                                              : j["max_scale"].get<double>();
    r.depth_inverse = j.at("depth_inverse").get<bool>();
    r.depth_epsilon = j.at("depth_epsilon").get<double>();
    r.mean_depth_dbar = j.at("mean_depth_dbar").get<double>();
    for (const auto& f : j.at("flares")) {
      FlareRecord fr;
      fr.affine = affine_from(f.at("affine"));
      fr.attempts = f.at("attempts").get<int>();
      fr.stream = f.at("stream").get<std::uint64_t>();
      fr.depth_d = f.at("depth_d").get<double>();
      fr.radius_r = f.at("radius_r").get<double>();
      fr.theta = f.at("theta").get<double>();
      fr.scale_s = f.at("scale_s").get<double>();
      fr.light_source = parse_origin(f.at("light_source").at("origin").get<std::string>());
      fr.light_source_pixels = f.at("light_source").at("pixels").get<std::size_t>();
      r.flares.push_back(fr);
    }
    const json& out = j.at("outputs");
    r.input_path = out.at("input").get<std::string>();
    r.gt_path = out.at("gt").get<std::string>();
    r.mask_path = out.at("mask").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorKind::format, std::string("invalid synth record: ") + e.what());
  }
  if (r.gt_mode == GtMode::automatic) {
    fail(ErrorKind::format, "synth record must carry a resolved gt mode");
  }
  return r;
}

}  // namespace flareforge
