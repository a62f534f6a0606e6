#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "fixtures.hpp"

#include "flareforge/color.hpp"
#include "flareforge/io.hpp"

using namespace flareforge;
using fixtures::TempDir;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "flareforge");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json error_json(const Run& r) {
  // Exactly one JSON object on one line.
  REQUIRE(!r.err.empty());
  REQUIRE(r.err.find('\n') == r.err.size() - 1);
  return json::parse(r.err);
}

json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string last_line(const std::string& s) {
  const auto end = s.find_last_not_of('\n');
  const auto start = s.rfind('\n', end);
  return s.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
}

}  // namespace

TEST_CASE("help exits 0 and lists the flags") {
  const std::map<std::string, std::vector<std::string>> flags = {
      {"synth", {"--config", "--backgrounds", "--depths", "--flares", "--out", "--count", "--seed",
                 "--fov", "--fov-random", "--flare-min", "--flare-max", "--gamma-min",
                 "--gamma-max", "--no-gamma", "--compose-space", "--gt-mode", "--tau-ls",
                 "--depth-inverse", "--max-scale", "--jobs"}},
      {"mask", {"--input", "--out", "--masked-out", "--config", "--strategy", "--tau", "--w", "--b", "--p"}},
      {"eval", {"--pred", "--gt", "--glare-masks", "--streak-masks", "--flare-masks", "--out", "--jobs"}},
      {"inspect", {"--background", "--depth", "--flare", "--fov", "--seed", "--tau-ls",
                   "--depth-inverse", "--no-affine"}},
  };
  const Run top = run({"--help"});
  CHECK(top.code == 0);
  for (const auto& [sub, names] : flags) {
    CHECK(top.out.find(sub) != std::string::npos);
    const Run r = run({sub, "--help"});
    CHECK(r.code == 0);
    for (const auto& f : names) {
      INFO(sub << " " << f);
      CHECK(r.out.find(f) != std::string::npos);
    }
  }
  CHECK(run({"--version"}).code == 0);
}

TEST_CASE("usage errors exit 2 with JSON on stderr") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {}, {"bogus"}, {"synth"}, {"synth", "--out", "x", "--bogus"},
           {"mask", "--input", "a.png"}, {"synth", "--out", "x", "--gt-mode", "sometimes"}}) {
    const Run r = run(args);
    CHECK(r.code == 2);
    CHECK(error_json(r)["error_kind"] == "UsageError");
    CHECK(error_json(r)["message"].is_string());
  }
}

TEST_CASE("synth with count 0 writes an empty manifest") {
  TempDir dir("cli0");
  const Run r = run({"synth", "--count", "0", "--out", (dir / "out").string()});
  CHECK(r.code == 0);
  CHECK(last_line(r.out) == (dir / "out" / "manifest.json").string());
  const json m = read_json(dir / "out" / "manifest.json");
  CHECK(m["pairs"].empty());
}

TEST_CASE("synth is repeatable and echoes the effective config") {
  TempDir dir("cli-synth");
  const auto d = fixtures::write_dataset(dir.path(), 2, 64, 48, 2, true);
  auto args = [&](const std::string& out) {
    return std::vector<std::string>{"synth", "--backgrounds", d.backgrounds.string(), "--depths",
                                    d.depths.string(), "--flares", d.flares.string(), "--out",
                                    (dir / out).string(), "--seed", "7", "--count", "3", "-q"};
  };
  const Run a = run(args("a"));
  const Run b = run(args("b"));
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out == (dir / "a" / "manifest.json").string() + "\n");
  const json ma = read_json(dir / "a" / "manifest.json");
  const json mb = read_json(dir / "b" / "manifest.json");
  CHECK(ma["pairs"] == mb["pairs"]);
  CHECK(ma["config"]["master_seed"] == 7);
}

TEST_CASE("flags override the config file, which overrides the environment") {
  TempDir dir("cli-cfg");
  const auto d = fixtures::write_dataset(dir.path(), 1, 48, 48, 1, false);
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << json{{"master_seed", 5}, {"fov", {{"mode", "fixed"}, {"degrees", 30}}},
                {"flare_count", {2, 2}}}
               .dump();
  }
  const std::vector<std::string> base = {"synth", "--backgrounds", d.backgrounds.string(),
                                         "--depths", d.depths.string(), "--flares",
                                         d.flares.string(), "--count", "1", "-q"};
  auto with = [&](std::vector<std::string> extra, const std::string& out) {
    std::vector<std::string> args = base;
    args.push_back("--out");
    args.push_back((dir / out).string());
    args.insert(args.end(), extra.begin(), extra.end());
    const Run r = run(args);
    REQUIRE(r.code == 0);
    return read_json(dir / out / "manifest.json")["config"];
  };
  const json c1 = with({"--config", (dir / "cfg.json").string()}, "o1");
  CHECK(c1["master_seed"] == 5);
  CHECK(c1["fov"]["degrees"] == 30.0);
  CHECK(c1["flare_count"] == json{2, 2});

  const json c2 = with({"--config", (dir / "cfg.json").string(), "--seed", "6", "--fov", "45",
                        "--flare-max", "3", "--no-gamma", "--gt-mode", "background_only",
                        "--compose-space", "encoded", "--tau-ls", "0.9", "--max-scale", "2"},
                       "o2");
  CHECK(c2["master_seed"] == 6);
  CHECK(c2["fov"]["degrees"] == 45.0);
  CHECK(c2["flare_count"] == json{2, 3});
  CHECK(c2["gamma"].is_null());
  CHECK(c2["gt_mode"] == "background_only");
  CHECK(c2["compose_space"] == "encoded");
  CHECK(c2["tau_ls"] == 0.9);
  CHECK(c2["max_scale"] == 2.0);

  const json c3 = with({"--fov-random", "20", "100", "--gamma-min", "2.0"}, "o3");
  CHECK(c3["fov"]["mode"] == "random_choice");
  CHECK(c3["fov"]["degrees"] == json{20.0, 100.0});
  CHECK(c3["gamma"] == json{2.0, 2.2});

  ::setenv("FLAREFORGE_SEED", "41", 1);
  const json c4 = with({}, "o4");
  const json c5 = with({"--config", (dir / "cfg.json").string()}, "o5");
  const json c6 = with({"--seed", "3"}, "o6");
  ::unsetenv("FLAREFORGE_SEED");
  CHECK(c4["master_seed"] == 41);
  CHECK(c5["master_seed"] == 5);
  CHECK(c6["master_seed"] == 3);
}

TEST_CASE("synth error exits") {
  TempDir dir("cli-err");
  const auto d = fixtures::write_dataset(dir.path(), 2, 32, 32, 1, false);
  std::filesystem::remove(d.depths / "bg0.pfm");
  const Run r = run({"synth", "--backgrounds", d.backgrounds.string(), "--depths", d.depths.string(),
                     "--flares", d.flares.string(), "--out", (dir / "out").string(), "--count", "2"});
  CHECK(r.code == 1);
  CHECK(error_json(r)["error_kind"] == "MissingDepthError");

  const Run bad_fov = run({"synth", "--out", (dir / "o").string(), "--fov", "0"});
  CHECK(bad_fov.code == 1);
  CHECK(error_json(bad_fov)["error_kind"] == "ConfigError");

  const Run both = run({"synth", "--out", (dir / "o").string(), "--fov", "30", "--fov-random", "20"});
  CHECK(both.code == 2);

  const Run missing_cfg = run({"synth", "--out", (dir / "o").string(), "--config", (dir / "none.json").string()});
  CHECK(missing_cfg.code == 1);
  CHECK(error_json(missing_cfg)["error_kind"] == "IOError");

  fixtures::write_bytes(dir / "bad.json", "{\"fov\": ");
  const Run bad_cfg = run({"synth", "--out", (dir / "o").string(), "--config", (dir / "bad.json").string()});
  CHECK(error_json(bad_cfg)["error_kind"] == "ConfigError");

  ::setenv("FLAREFORGE_SEED", "abc", 1);
  const Run bad_env = run({"synth", "--out", (dir / "o").string()});
  ::unsetenv("FLAREFORGE_SEED");
  CHECK(error_json(bad_env)["error_kind"] == "ConfigError");
}

TEST_CASE("mask with a fixed threshold on a bright image") {
  TempDir dir("cli-mask");
  write_png(fixtures::constant_image(9, 7, 0.9f, 0.95f, 1.0f), dir / "bright.png");
  const Run r = run({"mask", "--input", (dir / "bright.png").string(), "--out",
                     (dir / "m.png").string(), "--tau", "0.5"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["strategy"] == "fixed");
  CHECK(j["tau"] == 0.5);
  CHECK(j["coverage"] == 1.0);
  CHECK(load_mask_png(dir / "m.png").count() == 63);
  CHECK_THROWS_KIND(load_png(dir / "m.png"), ErrorKind::format);  // single-channel 0/255
}

TEST_CASE("mask with percentile 100 selects the brightest pixels") {
  TempDir dir("cli-p100");
  const Image img = fixtures::random_image(20, 15, 3);
  write_png(img, dir / "in.png");
  const Run r = run({"mask", "--input", (dir / "in.png").string(), "--out",
                     (dir / "m.png").string(), "--strategy", "percentile", "--p", "100",
                     "--masked-out", (dir / "masked.png").string()});
  REQUIRE(r.code == 0);
  const LuminanceMap y = to_luma_bt601(load_png(dir / "in.png"));
  float best = 0.0f;
  for (float v : y.values()) best = std::max(best, v);
  const RegionMask m = load_mask_png(dir / "m.png");
  for (int yy = 0; yy < 15; ++yy) {
    for (int x = 0; x < 20; ++x) REQUIRE(m.at(x, yy) == (y.at(x, yy) == best));
  }
  CHECK(json::parse(r.out)["set_pixels"] == m.count());
  CHECK(std::filesystem::exists(dir / "masked.png"));
}

TEST_CASE("mask with the affine strategy") {
  TempDir dir("cli-affine");
  write_png(fixtures::random_image(12, 12, 4), dir / "in.png");
  const Run r = run({"mask", "--input", (dir / "in.png").string(), "--out",
                     (dir / "m.png").string(), "--w", "0", "--b", "0"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["tau"] == 0.5);
  CHECK(json::parse(r.out)["strategy"] == "affine");

  {
    std::ofstream cfg(dir / "afm.json");
    cfg << R"({"strategy": "percentile", "p": 50})";
  }
  const Run c = run({"mask", "--input", (dir / "in.png").string(), "--out",
                     (dir / "m2.png").string(), "--config", (dir / "afm.json").string()});
  REQUIRE(c.code == 0);
  CHECK(json::parse(c.out)["strategy"] == "percentile");
  CHECK(json::parse(c.out)["coverage"].get<double>() == doctest::Approx(0.5).epsilon(0.02));

  const Run bad = run({"mask", "--input", (dir / "in.png").string(), "--out",
                       (dir / "m3.png").string(), "--tau", "1.5"});
  CHECK(bad.code == 1);
  CHECK(error_json(bad)["error_kind"] == "ConfigError");
  const Run missing = run({"mask", "--input", (dir / "nope.png").string(), "--out",
                           (dir / "m4.png").string(), "--tau", "0.5"});
  CHECK(error_json(missing)["error_kind"] == "IOError");
}

TEST_CASE("eval prints and writes the report") {
  TempDir dir("cli-eval");
  std::filesystem::create_directories(dir / "pred");
  std::filesystem::create_directories(dir / "gt");
  std::filesystem::create_directories(dir / "masks");
  write_png(fixtures::random_image(16, 16, 1), dir / "pred" / "a.png");
  write_png(fixtures::random_image(16, 16, 2), dir / "gt" / "a.png");
  write_mask_png(RegionMask(16, 16, std::vector<std::uint8_t>(256, 1)), dir / "masks" / "a.png");
  const Run r = run({"eval", "--pred", (dir / "pred").string(), "--gt", (dir / "gt").string(),
                     "--flare-masks", (dir / "masks").string(), "--out",
                     (dir / "report.json").string()});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j == read_json(dir / "report.json"));
  CHECK(j["per_image"][0]["flare_psnr"] == j["per_image"][0]["psnr"]);
  write_png(fixtures::random_image(16, 16, 2), dir / "gt" / "b.png");
  const Run bad = run({"eval", "--pred", (dir / "pred").string(), "--gt", (dir / "gt").string()});
  CHECK(bad.code == 1);
  CHECK(error_json(bad)["error_kind"] == "PairingError");
}

TEST_CASE("inspect a centered light on constant depth") {
  TempDir dir("cli-inspect");
  write_png(fixtures::night_background(65, 65, 1), dir / "bg.png");
  write_pfm(fixtures::constant_depth(65, 65, 4.0f), dir / "d.pfm");
  write_png(fixtures::point_light(41, 10.0), dir / "pt.png");
  const Run r = run({"inspect", "--background", (dir / "bg.png").string(), "--depth",
                     (dir / "d.pfm").string(), "--flare", (dir / "pt.png").string(), "--no-affine"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["theta_deg"] == 0.0);
  CHECK(j["scale_s"] == 1.0);
  CHECK(j["d_i"] == 4.0);
  CHECK(j["r_i"] == 0.0);
  CHECK(j["light_source_pixels"] == 1);
  CHECK(j["provenance"]["light_source"] == "luminance_threshold");

  const Run seeded = run({"inspect", "--background", (dir / "bg.png").string(), "--depth",
                          (dir / "d.pfm").string(), "--flare", (dir / "pt.png").string(),
                          "--seed", "9", "--fov", "80"});
  REQUIRE(seeded.code == 0);
  const json s = json::parse(seeded.out);
  CHECK(s["seed"] == 9);
  CHECK(s["d_i"] == 4.0);
  CHECK(s["scale_s"].get<double>() == doctest::Approx(std::cos(s["theta_deg"].get<double>() * M_PI / 180)));

  const Run bad = run({"inspect", "--background", (dir / "bg.png").string(), "--depth",
                       (dir / "d.pfm").string(), "--flare", (dir / "pt.png").string(), "--fov", "0"});
  CHECK(bad.code == 1);
  CHECK(error_json(bad)["error_kind"] == "ConfigError");
}

TEST_CASE("inspect averages depth over a known light-source region") {
  TempDir dir("cli-region");
  constexpr int W = 40;
  constexpr int H = 30;
  std::vector<float> depth(W * H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) depth[y * W + x] = 1.0f + 0.25f * x + 0.5f * y;
  }
  write_pfm(depth, W, H, dir / "d.pfm");
  write_png(fixtures::night_background(W, H, 2), dir / "bg.png");
  // Template the size of the canvas with a provided mask on a 3x2 block.
  write_png(fixtures::constant_image(W, H, 0.3f, 0.3f, 0.3f), dir / "f.png");
  std::vector<std::uint8_t> bits(W * H, 0);
  double hand = 0.0;
  for (int y = 5; y < 7; ++y) {
    for (int x = 30; x < 33; ++x) {
      bits[y * W + x] = 1;
      hand += depth[y * W + x];
    }
  }
  hand /= 6.0;
  write_mask_png(RegionMask(W, H, bits), dir / "f_ls.png");
  const Run r = run({"inspect", "--background", (dir / "bg.png").string(), "--depth",
                     (dir / "d.pfm").string(), "--flare", (dir / "f.png").string(), "--no-affine"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["d_i"].get<double>() == doctest::Approx(hand).epsilon(1e-12));
  CHECK(j["light_source_pixels"] == 6);
  CHECK(j["provenance"]["light_source"] == "provided_mask");
  CHECK(j["provenance"]["template_id"] == "f");
}
