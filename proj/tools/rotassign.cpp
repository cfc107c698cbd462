// rotassign: label assignment for oriented object detection.
//
//   rotassign assign  --annotations DIR --dims FILE --out DIR
//   rotassign stats   --synthetic 20 --strategy fixed-scale
//   rotassign compare --sweep --strategies earl,fixed-scale,topk
//   rotassign render  --annotations DIR --dims FILE --scene P0001
//   rotassign bench   --synthetic 4 --boxes 50 --repetitions 50 --reference

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rotassign/app.hpp"

namespace {

using namespace rotassign;
using app::RunManifest;

bool parse_on_off(const std::string& v, const std::string& flag) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw app::ConfigError(flag + " expects on|off, got '" + v + "'");
}

Strategy strategy_from(const std::string& name) {
  if (auto s = parse_strategy(name)) return *s;
  throw app::ConfigError("unknown strategy '" + name +
                         "' (expected earl, fixed-scale, bbox, central-area, topk)");
}

RatioMode ratio_from(const std::string& v) {
  if (v == "adaptive") return RatioMode::adaptive();
  const auto x = text::parse_double(v);
  if (!x) throw app::ConfigError("--xi expects 'adaptive' or a number, got '" + v + "'");
  try {
    return RatioMode::fixed(*x);
  } catch (const std::invalid_argument& e) {
    throw app::ConfigError(e.what());
  }
}

struct RawFlags {
  std::string annotations, dims, categories, strategy = "earl", strategies, xi = "adaptive";
  std::string tile = "off", filter_difficult = "off", overlay = "on", out = "out", scene;
  int k = 15, window = 600, tile_stride = 450, resize = 800, synthetic = 0, boxes = 50;
  int image_size = 800, threads = 0, repetitions = 10;
  double radius = 1.5;
  std::uint64_t seed = 0;
  bool sweep = false, reference = false;
};

void add_common(CLI::App* cmd, RawFlags& f) {
  cmd->add_option("--annotations", f.annotations, "directory of DOTA annotation .txt files");
  cmd->add_option("--dims", f.dims, "image size sidecar (id,width,height per line)");
  cmd->add_option("--categories", f.categories, "category names, one per line (fixes ids)");
  cmd->add_option("--synthetic", f.synthetic, "generate N random synthetic scenes");
  cmd->add_option("--boxes", f.boxes, "boxes per synthetic scene");
  cmd->add_flag("--sweep", f.sweep, "synthetic scale sweep: 9 buckets x 200 single-target scenes");
  cmd->add_option("--image-size", f.image_size, "synthetic image side length");
  cmd->add_option("--strategy", f.strategy, "earl | fixed-scale | bbox | central-area | topk");
  cmd->add_option("--k", f.k, "positive samples per target");
  cmd->add_option("--xi", f.xi, "ellipse threshold: adaptive or a value in (0,1]");
  cmd->add_option("--radius", f.radius, "central-area radius in strides");
  cmd->add_option("--tile", f.tile, "crop into overlapping windows (on|off)");
  cmd->add_option("--window", f.window, "tile window size");
  cmd->add_option("--tile-stride", f.tile_stride, "tile stride");
  cmd->add_option("--resize", f.resize, "tile output size");
  cmd->add_option("--filter-difficult", f.filter_difficult, "drop difficult boxes (on|off)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "seed for synthetic scenes");
  cmd->add_option("--threads", f.threads, "worker threads (ROTASSIGN_THREADS overrides)");
}

RunManifest to_manifest(const RawFlags& f) {
  RunManifest m;
  if (!f.annotations.empty()) m.annotations = f.annotations;
  if (!f.dims.empty()) m.dims = f.dims;
  if (!f.categories.empty()) m.categories = f.categories;
  m.synthetic_scenes = f.synthetic;
  m.synthetic_boxes = f.boxes;
  m.sweep = f.sweep;
  m.image_size = f.image_size;
  m.strategy.strategy = strategy_from(f.strategy);
  m.strategy.k = f.k;
  m.strategy.ratio = ratio_from(f.xi);
  m.strategy.radius_factor = f.radius;
  if (f.k < 1) throw app::ConfigError("--k must be >= 1");
  if (!(f.radius > 0.0)) throw app::ConfigError("--radius must be positive");
  if (f.synthetic < 0 || f.boxes < 0 || f.image_size <= 0) throw app::ConfigError("synthetic sizes must be positive");
  if (!f.strategies.empty()) {
    for (auto tok : text::split(f.strategies, ',')) {
      const std::string name(text::trim(tok));
      if (name == "reference" || name == "oracle") {
        m.include_reference = true;
        continue;
      }
      m.strategies.push_back(strategy_from(name));
    }
  }
  m.include_reference = m.include_reference || f.reference;
  m.tile = parse_on_off(f.tile, "--tile");
  m.tiles = TileSpec{f.window, f.tile_stride, f.resize};
  if (m.tile) {
    try {
      m.tiles.validate();
    } catch (const std::invalid_argument& e) {
      throw app::ConfigError(e.what());
    }
  }
  m.filter_difficult = parse_on_off(f.filter_difficult, "--filter-difficult");
  m.overlay = parse_on_off(f.overlay, "--overlay");
  m.out = f.out;
  m.seed = f.seed;
  m.threads = f.threads;
  m.repetitions = f.repetitions;
  m.scene_id = f.scene;
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Label assignment for oriented object detection"};
  cli.require_subcommand(1);
  RawFlags f;

  auto* assign = cli.add_subcommand("assign", "write per-scene positive samples with weights");
  auto* stats = cli.add_subcommand("stats", "per-category positive share by pyramid level");
  auto* compare = cli.add_subcommand("compare", "side-by-side strategy summary");
  auto* render = cli.add_subcommand("render", "PGM masks of the positives of one scene");
  auto* bench = cli.add_subcommand("bench", "time assignment per scene");
  for (auto* c : {assign, stats, compare, render, bench}) add_common(c, f);
  compare->add_option("--strategies", f.strategies, "comma-separated strategy list")->required();
  bench->add_option("--strategies", f.strategies, "comma-separated strategy list (may include reference)");
  bench->add_option("--repetitions", f.repetitions, "timed runs per scene");
  bench->add_flag("--reference", f.reference, "also time the naive reference path");
  render->add_option("--scene", f.scene, "scene id (tile ids when --tile on)")->required();
  render->add_option("--overlay", f.overlay, "also write the image-resolution weight raster (on|off)");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return app::exit_config;
  }

  try {
    const RunManifest m = to_manifest(f);
    if (assign->parsed()) app::cmd_assign(m);
    else if (stats->parsed()) app::cmd_stats(m);
    else if (compare->parsed()) app::cmd_compare(m);
    else if (render->parsed()) app::cmd_render(m);
    else if (bench->parsed()) app::cmd_bench(m);
  } catch (const app::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return app::exit_config;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return app::exit_parse;
  } catch (const app::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return app::exit_io;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return app::exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return app::exit_ok;
}
