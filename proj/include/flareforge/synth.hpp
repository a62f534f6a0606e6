#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "flareforge/affine.hpp"
#include "flareforge/image.hpp"
#include "flareforge/spe.hpp"

namespace flareforge {

struct FovFixed {
  double degrees = 60.0;
  friend bool operator==(const FovFixed&, const FovFixed&) = default;
};
struct FovRandomChoice {
  std::vector<double> degrees{20.0, 40.0, 60.0, 80.0, 100.0};
  friend bool operator==(const FovRandomChoice&, const FovRandomChoice&) = default;
};
using FovMode = std::variant<FovFixed, FovRandomChoice>;

enum class GtMode {
  // background_plus_light_source when the template ships a light-source
  // mask, background_only otherwise.
  automatic,
  background_only,
  background_plus_light_source,
};

std::string_view to_string(GtMode mode);
std::string_view to_string(ColorSpace space);
GtMode parse_gt_mode(std::string_view s);
ColorSpace parse_color_space(std::string_view s);

struct SynthConfig {
  FovMode fov = FovRandomChoice{};
  // Inclusive. [0,0] is accepted as a pass-through hook (no flares).
  int flare_count_min = 1;
  int flare_count_max = 3;
  // Linearization exponent range; nullopt disables linearization.
  std::optional<Interval> gamma = Interval{1.8, 2.2};
  ColorSpace compose_space = ColorSpace::linear;
  GtMode gt_mode = GtMode::automatic;
  double tau_ls = kDefaultLightSourceThreshold;
  AffineRanges affine;
  std::uint64_t master_seed = 0;
  double max_scale = std::numeric_limits<double>::infinity();
  bool depth_inverse = false;
  double depth_epsilon = 1e-6;
  // Affine redraws allowed when a transform pushes the flare off canvas.
  int max_placement_attempts = 16;

  // Throws ConfigError.
  void validate() const;

  nlohmann::json to_json() const;
  // Missing keys keep the values from `base`; unknown keys are an error.
  static SynthConfig from_json(const nlohmann::json& j, SynthConfig base);
  static SynthConfig from_json(const nlohmann::json& j);

  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

struct FlareTemplate {
  std::string id;
  Image flare;
  std::optional<RegionMask> light_source;
  std::filesystem::path path;  // empty for in-memory templates
};

// Light-source masks are discovered as `<stem>_ls.png` next to the template.
std::filesystem::path light_source_mask_path(const std::filesystem::path& template_path);

// Flare templates, either held in memory or loaded from disk on demand.
// Loading is thread-safe.
class TemplateLibrary {
 public:
  // Every *.png in `dir` except *_ls.png, sorted by filename.
  static TemplateLibrary from_directory(const std::filesystem::path& dir);

  void add(FlareTemplate tmpl);
  void add_file(const std::filesystem::path& path);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::string& id(std::size_t i) const { return entries_.at(i).id; }
  std::optional<std::size_t> find(const std::string& id) const;
  std::shared_ptr<const FlareTemplate> load(std::size_t i) const;

 private:
  struct Entry {
    std::string id;
    std::filesystem::path path;
    std::shared_ptr<const FlareTemplate> resident;
  };
  std::vector<Entry> entries_;
};

FlareTemplate load_template(const std::filesystem::path& path);

struct FlareRecord {
  AffineParams affine;
  int attempts = 1;
  std::uint64_t stream = 0;
  double depth_d = 0.0;
  double radius_r = 0.0;
  double theta = 0.0;
  double scale_s = 0.0;
  LightSourceOrigin light_source = LightSourceOrigin::luminance_threshold;
  std::size_t light_source_pixels = 0;

  friend bool operator==(const FlareRecord&, const FlareRecord&) = default;
};

// Everything needed to reproduce one pair.
struct SynthRecord {
  std::uint64_t pair_index = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t pair_stream = 0;
  std::string background_path;
  std::string depth_path;
  std::string template_id;
  std::string template_path;
  double fov_degrees = 0.0;
  std::optional<double> gamma;  // set iff composition ran in linear space
  GtMode gt_mode = GtMode::background_only;  // resolved, never automatic
  double tau_ls = kDefaultLightSourceThreshold;
  double max_scale = std::numeric_limits<double>::infinity();
  bool depth_inverse = false;
  double depth_epsilon = 1e-6;
  double mean_depth_dbar = 0.0;  // 0 when there are no flares
  std::vector<FlareRecord> flares;
  std::string input_path;
  std::string gt_path;
  std::string mask_path;

  nlohmann::json to_json() const;
  static SynthRecord from_json(const nlohmann::json& j);

  friend bool operator==(const SynthRecord&, const SynthRecord&) = default;
};

struct SynthResult {
  Image input;
  Image gt;
  RegionMask flare_mask;
  // Sum of the scaled flares before clipping, in the composition space.
  Image flare_layer;
  SynthRecord record;
};

// Pre-clip summed flare luma at or above this marks a flare pixel.
inline constexpr double kFlareMaskThreshold = 1.0 / 255.0;

// Draws every random parameter for pair `pair_index`, then renders it.
// Depends only on (cfg, inputs, pair_index).
SynthResult synthesize_pair(const SynthConfig& cfg, const Image& background,
                            const DepthMap& depth, const TemplateLibrary& templates,
                            std::uint64_t pair_index);

// Renders a pair from recorded parameters. Estimated depths, angles and
// scales are recomputed and stored in the returned record.
SynthResult render_record(const SynthRecord& record, const Image& background,
                          const DepthMap& depth, const FlareTemplate& tmpl);

// Loads the background, depth map and template named by the record and
// renders it.
SynthResult replay_record(const SynthRecord& record);

struct DatasetPaths {
  std::filesystem::path backgrounds;
  std::filesystem::path depths;
  std::filesystem::path flares;
  std::filesystem::path out;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Synthesizes `count` pairs into out/{input,gt,mask,records}/%06d.{png,json}
// plus out/manifest.json, and returns the manifest. Output is independent
// of `jobs`.
nlohmann::json run_dataset(const SynthConfig& cfg, const DatasetPaths& paths, std::size_t count,
                           int jobs = 1, const ProgressFn& progress = {});

// Diagnostic view of a single placement: light source, depth, radius,
// angle, and the scale the placement would get relative to a reference
// light at its own depth (cos theta).
struct PlacementReport {
  FlarePlacement placement;
  LightSourceRegion region;
  std::string template_id;

  nlohmann::json to_json() const;
};

PlacementReport inspect_placement(const Image& background, const DepthMap& depth,
                                  const FlareTemplate& tmpl, double fov_degrees,
                                  const AffineParams& affine,
                                  double tau_ls = kDefaultLightSourceThreshold);

}  // namespace flareforge
