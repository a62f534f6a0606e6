#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "flareforge/afm.hpp"
#include "flareforge/color.hpp"
#include "flareforge/errors.hpp"
#include "flareforge/io.hpp"
#include "flareforge/metrics.hpp"
#include "flareforge/rng.hpp"
#include "flareforge/synth.hpp"
#include "flareforge/version.hpp"

namespace flareforge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::config, "config " + path.string() + " is not valid JSON: " + e.what());
  }
}

std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv("FLAREFORGE_SEED");
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const unsigned long long seed = std::strtoull(v, &end, 10);
  if (*end != '\0') fail(ErrorKind::config, std::string("FLAREFORGE_SEED is not an integer: ") + v);
  return seed;
}

struct SynthArgs {
  std::string config, backgrounds, depths, flares, out;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  double fov = 0.0;
  std::vector<double> fov_random;
  int flare_min = 0, flare_max = 0;
  double gamma_min = 0.0, gamma_max = 0.0;
  std::string compose_space, gt_mode;
  double tau_ls = 0.0;
  double max_scale = 0.0;
  int jobs = 1;
  bool quiet = false;
  CLI::Option *o_seed, *o_fov, *o_fov_random, *o_flare_min, *o_flare_max, *o_gamma_min,
      *o_gamma_max, *o_no_gamma, *o_compose, *o_gt, *o_tau_ls, *o_depth_inverse, *o_max_scale,
      *o_config;
};

void add_synth(CLI::App& app, SynthArgs& a) {
  auto* sub = app.add_subcommand("synth", "Synthesize flare-corrupted / ground-truth pairs");
  a.o_config = sub->add_option("--config", a.config, "JSON synth config; flags override it");
  sub->add_option("--backgrounds", a.backgrounds, "Directory of background PNGs");
  sub->add_option("--depths", a.depths, "Directory of <background stem>.pfm depth maps");
  sub->add_option("--flares", a.flares, "Directory of flare template PNGs (+ optional *_ls.png)");
  sub->add_option("--out", a.out, "Output directory")->required();
  sub->add_option("--count", a.count, "Number of pairs to synthesize")->capture_default_str();
  a.o_seed = sub->add_option("--seed", a.seed, "Master seed (fallback: config, then FLAREFORGE_SEED)");
  a.o_fov = sub->add_option("--fov", a.fov, "Fixed horizontal field of view in degrees");
  a.o_fov_random = sub->add_option("--fov-random", a.fov_random,
                                   "Choose the field of view per pair from these degrees");
  a.o_flare_min = sub->add_option("--flare-min", a.flare_min, "Minimum flares per image");
  a.o_flare_max = sub->add_option("--flare-max", a.flare_max, "Maximum flares per image");
  a.o_gamma_min = sub->add_option("--gamma-min", a.gamma_min, "Lower linearization gamma");
  a.o_gamma_max = sub->add_option("--gamma-max", a.gamma_max, "Upper linearization gamma");
  a.o_no_gamma = sub->add_flag("--no-gamma", "Disable linearization (compose encoded values)");
  a.o_compose = sub->add_option("--compose-space", a.compose_space, "linear or encoded")
                    ->check(CLI::IsMember({"linear", "encoded"}));
  a.o_gt = sub->add_option("--gt-mode", a.gt_mode,
                           "auto, background_only or background_plus_light_source")
               ->check(CLI::IsMember({"auto", "background_only", "background_plus_light_source"}));
  a.o_tau_ls = sub->add_option("--tau-ls", a.tau_ls, "Light-source luma threshold in (0,1)");
  a.o_depth_inverse = sub->add_flag("--depth-inverse", "Depth files hold inverse depth");
  a.o_max_scale = sub->add_option("--max-scale", a.max_scale, "Upper bound on brightness scales");
  sub->add_option("--jobs", a.jobs, "Worker threads (output does not depend on it)")
      ->capture_default_str();
  sub->add_flag("-q,--quiet", a.quiet, "Only print the manifest path");
}

SynthConfig effective_synth_config(const SynthArgs& a) {
  SynthConfig cfg;
  bool seed_in_config = false;
  if (a.o_config->count()) {
    const json j = read_json_file(a.config);
    seed_in_config = j.is_object() && j.contains("master_seed");
    cfg = SynthConfig::from_json(j);
  }
  if (a.o_seed->count()) {
    cfg.master_seed = a.seed;
  } else if (!seed_in_config) {
    if (auto env = seed_from_env()) cfg.master_seed = *env;
  }
  if (a.o_fov->count() && a.o_fov_random->count()) {
    fail(ErrorKind::usage, "--fov and --fov-random are mutually exclusive");
  }
  if (a.o_fov->count()) cfg.fov = FovFixed{a.fov};
  if (a.o_fov_random->count()) cfg.fov = FovRandomChoice{a.fov_random};
  if (a.o_flare_min->count()) cfg.flare_count_min = a.flare_min;
  if (a.o_flare_max->count()) cfg.flare_count_max = a.flare_max;
  if (a.o_no_gamma->count()) {
    cfg.gamma.reset();
  } else if (a.o_gamma_min->count() || a.o_gamma_max->count()) {
    Interval g = cfg.gamma.value_or(Interval{1.8, 2.2});
    if (a.o_gamma_min->count()) g.low = a.gamma_min;
    if (a.o_gamma_max->count()) g.high = a.gamma_max;
    cfg.gamma = g;
  }
  if (a.o_compose->count()) cfg.compose_space = parse_color_space(a.compose_space);
  if (a.o_gt->count()) cfg.gt_mode = parse_gt_mode(a.gt_mode);
  if (a.o_tau_ls->count()) cfg.tau_ls = a.tau_ls;
  if (a.o_depth_inverse->count()) cfg.depth_inverse = true;
  if (a.o_max_scale->count()) cfg.max_scale = a.max_scale;
  cfg.validate();
  return cfg;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const SynthConfig cfg = effective_synth_config(a);
  const DatasetPaths paths{a.backgrounds, a.depths, a.flares, a.out};
  ProgressFn progress;
  if (!a.quiet) {
    progress = [&out](std::size_t done, std::size_t total) {
      out << "synthesized " << done << "/" << total << "\n";
    };
  }
  run_dataset(cfg, paths, a.count, a.jobs, progress);
  out << (fs::path(a.out) / "manifest.json").string() << "\n";
  return 0;
}

struct MaskArgs {
  std::string input, out, masked_out, config, strategy;
  double tau = 0.0, w = 0.0, b = 0.0, p = 0.0;
  CLI::Option *o_config, *o_strategy, *o_tau, *o_w, *o_b, *o_p, *o_masked_out;
};

void add_mask(CLI::App& app, MaskArgs& a) {
  auto* sub = app.add_subcommand("mask", "Luminance-threshold focus mask for one image");
  sub->add_option("--input", a.input, "Input PNG")->required();
  sub->add_option("--out", a.out, "Output mask PNG (0/255)")->required();
  a.o_masked_out = sub->add_option("--masked-out", a.masked_out, "Also write the masked image");
  a.o_config = sub->add_option("--config", a.config,
                               "JSON {strategy, tau | w, b | p}; flags override it");
  a.o_strategy = sub->add_option("--strategy", a.strategy, "fixed, affine or percentile")
                     ->check(CLI::IsMember({"fixed", "affine", "percentile"}));
  a.o_tau = sub->add_option("--tau", a.tau, "Fixed threshold in (0,1)");
  a.o_w = sub->add_option("--w", a.w, "Affine weight applied to mean luma");
  a.o_b = sub->add_option("--b", a.b, "Affine bias");
  a.o_p = sub->add_option("--p", a.p, "Percentile in [0,100] (nearest rank)");
}

ThresholdStrategy effective_strategy(const MaskArgs& a) {
  std::string kind;
  std::optional<double> tau, w, b, p;
  if (a.o_config->count()) {
    const json j = read_json_file(a.config);
    try {
      for (const auto& [key, _] : j.items()) {
        if (key != "strategy" && key != "tau" && key != "w" && key != "b" && key != "p") {
          fail(ErrorKind::config, "unknown key '" + key + "' in mask config");
        }
      }
      if (j.contains("strategy")) kind = j["strategy"].get<std::string>();
      if (j.contains("tau")) tau = j["tau"].get<double>();
      if (j.contains("w")) w = j["w"].get<double>();
      if (j.contains("b")) b = j["b"].get<double>();
      if (j.contains("p")) p = j["p"].get<double>();
    } catch (const json::exception& e) {
      fail(ErrorKind::config, std::string("invalid mask config: ") + e.what());
    }
  }
  if (a.o_strategy->count()) kind = a.strategy;
  if (a.o_tau->count()) tau = a.tau;
  if (a.o_w->count()) w = a.w;
  if (a.o_b->count()) b = a.b;
  if (a.o_p->count()) p = a.p;
  if (kind.empty()) {
    if (p) kind = "percentile";
    else if (w || b) kind = "affine";
    else if (tau) kind = "fixed";
    else fail(ErrorKind::usage, "choose a threshold: --tau, --w/--b, --p or --strategy");
  }
  ThresholdStrategy s;
  if (kind == "fixed") {
    if (!tau) fail(ErrorKind::usage, "fixed strategy needs --tau");
    s = afm::Fixed{*tau};
  } else if (kind == "affine") {
    s = afm::AffineOfMean{w.value_or(0.0), b.value_or(0.0)};
  } else if (kind == "percentile") {
    if (!p) fail(ErrorKind::usage, "percentile strategy needs --p");
    s = afm::Percentile{*p};
  } else {
    fail(ErrorKind::config, "unknown strategy '" + kind + "'");
  }
  validate(s);
  return s;
}

int cmd_mask(const MaskArgs& a, std::ostream& out) {
  const ThresholdStrategy strategy = effective_strategy(a);
  const Image img = load_png(a.input);
  const LuminanceMap luma = to_luma_bt601(img);
  const double tau = compute_threshold(luma, strategy);
  const MaskResult mask = generate_mask(luma, tau);
  write_mask_png(mask.mask, a.out);
  if (a.o_masked_out->count()) write_png(apply_mask(img, mask.mask), a.masked_out);
  static constexpr const char* kNames[] = {"fixed", "affine", "percentile"};
  out << json{{"strategy", kNames[strategy.index()]},
              {"tau", tau},
              {"coverage", mask.coverage},
              {"set_pixels", mask.mask.count()},
              {"mask", a.out}}
             .dump()
      << "\n";
  return 0;
}

struct EvalArgs {
  std::string pred, gt, glare, streak, flare, out;
  int jobs = 1;
  CLI::Option *o_glare, *o_streak, *o_flare, *o_out;
};

void add_eval(CLI::App& app, EvalArgs& a) {
  auto* sub = app.add_subcommand("eval", "Score restored images against ground truth");
  sub->add_option("--pred", a.pred, "Directory of restored PNGs")->required();
  sub->add_option("--gt", a.gt, "Directory of ground-truth PNGs (same filenames)")->required();
  a.o_glare = sub->add_option("--glare-masks", a.glare, "Binary glare masks -> g_psnr");
  a.o_streak = sub->add_option("--streak-masks", a.streak, "Binary streak masks -> s_psnr");
  a.o_flare = sub->add_option("--flare-masks", a.flare,
                              "Combined flare-region masks (e.g. synth output) -> flare_psnr");
  a.o_out = sub->add_option("--out", a.out, "Also write the JSON report here");
  sub->add_option("--jobs", a.jobs, "Worker threads")->capture_default_str();
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  RegionMaskDirs masks;
  if (a.o_glare->count()) masks.glare = a.glare;
  if (a.o_streak->count()) masks.streak = a.streak;
  if (a.o_flare->count()) masks.flare = a.flare;
  const MetricsReport report = evaluate_dirs(a.pred, a.gt, masks, a.jobs);
  const std::string text = report.to_json().dump(2);
  if (a.o_out->count()) {
    std::ofstream f(a.out);
    if (!f) fail(ErrorKind::io, "cannot open " + a.out);
    f << text << "\n";
  }
  out << text << "\n";
  return 0;
}

struct InspectArgs {
  std::string background, depth, flare;
  double fov = 60.0;
  std::uint64_t seed = 0;
  double tau_ls = kDefaultLightSourceThreshold;
  bool depth_inverse = false;
  bool no_affine = false;
  CLI::Option* o_seed;
};

void add_inspect(CLI::App& app, InspectArgs& a) {
  auto* sub = app.add_subcommand("inspect", "Estimate depth, angle and scale for one placement");
  sub->add_option("--background", a.background, "Background PNG")->required();
  sub->add_option("--depth", a.depth, "Depth PFM")->required();
  sub->add_option("--flare", a.flare, "Flare template PNG (+ optional <stem>_ls.png)")->required();
  sub->add_option("--fov", a.fov, "Horizontal field of view in degrees")->capture_default_str();
  a.o_seed = sub->add_option("--seed", a.seed, "Seed for the sampled affine transform");
  sub->add_option("--tau-ls", a.tau_ls, "Light-source luma threshold")->capture_default_str();
  sub->add_flag("--depth-inverse", a.depth_inverse, "Depth file holds inverse depth");
  sub->add_flag("--no-affine", a.no_affine, "Place the template untransformed");
}

int cmd_inspect(const InspectArgs& a, std::ostream& out) {
  if (!(a.fov > 0.0 && a.fov < 180.0)) {
    fail(ErrorKind::config, "field of view must lie in (0, 180) degrees");
  }
  std::uint64_t seed = a.seed;
  if (!a.o_seed->count()) seed = seed_from_env().value_or(0);
  const Image bg = load_png(a.background);
  const DepthMap depth = load_pfm(a.depth, a.depth_inverse);
  const FlareTemplate tmpl = load_template(a.flare);
  AffineParams affine;
  if (!a.no_affine) {
    // Same stream as the first flare of pair 0 in a dataset run.
    SeededRng rng(seed, stream_id(0, 1));
    affine = sample_affine(rng, AffineRanges{}, bg.width(), bg.height());
  }
  const PlacementReport report = inspect_placement(bg, depth, tmpl, a.fov, affine, a.tau_ls);
  json j = report.to_json();
  j["fov_degrees"] = a.fov;
  j["seed"] = seed;
  out << j.dump(2) << "\n";
  return 0;
}

void emit_error(std::ostream& err, std::string_view kind, const std::string& message) {
  err << json{{"error_kind", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"flareforge: multi-flare nighttime dataset synthesis, focus masks and metrics",
               "flareforge"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  SynthArgs synth;
  MaskArgs mask;
  EvalArgs eval;
  InspectArgs inspect;
  add_synth(app, synth);
  add_mask(app, mask);
  add_eval(app, eval);
  add_inspect(app, inspect);

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help / --version
      app.exit(e, out, err);
      return 0;
    }
    emit_error(err, error_kind_name(ErrorKind::usage), e.what());
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("synth")) return cmd_synth(synth, out);
    if (app.got_subcommand("mask")) return cmd_mask(mask, out);
    if (app.got_subcommand("eval")) return cmd_eval(eval, out);
    if (app.got_subcommand("inspect")) return cmd_inspect(inspect, out);
  } catch (const Error& e) {
    emit_error(err, error_kind_name(e.kind()), e.what());
    return e.kind() == ErrorKind::usage ? kExitUsage : kExitError;
  } catch (const std::exception& e) {
    emit_error(err, "InternalError", e.what());
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace flareforge::cli
