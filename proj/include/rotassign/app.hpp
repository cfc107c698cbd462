#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rotassign/assignment.hpp"
#include "rotassign/ingest.hpp"
#include "rotassign/reference.hpp"
#include "rotassign/report.hpp"
#include "rotassign/synthetic.hpp"
#include "rotassign/weighting.hpp"

namespace rotassign::app {

namespace fs = std::filesystem;

enum ExitCode : int {
  exit_ok = 0,
  exit_config = 2,  // invalid flags, missing dimensions, unknown scene
  exit_parse = 3,   // malformed annotation or sidecar content
  exit_io = 4,      // unreadable input, unwritable output
};

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunManifest {
  std::optional<fs::path> annotations;  // directory of DOTA .txt files
  std::optional<fs::path> dims;         // id,width,height sidecar
  std::optional<fs::path> categories;   // one name per line
  int synthetic_scenes = 0;
  int synthetic_boxes = 50;
  bool sweep = false;
  int image_size = 800;
  StrategyConfig strategy;
  std::vector<Strategy> strategies;     // compare / bench
  bool include_reference = false;       // bench: also time the naive path
  bool tile = false;
  TileSpec tiles;
  bool filter_difficult = false;
  fs::path out = "out";
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = ROTASSIGN_THREADS or hardware concurrency
  int repetitions = 10;
  std::string scene_id;
  bool overlay = true;
};

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + p.string());
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& content) {
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << content;
  if (!out) throw IoError("error while writing " + p.string());
}

inline int worker_count(int requested) {
  if (const char* env = std::getenv("ROTASSIGN_THREADS")) {
    if (auto v = text::parse_int(env); v && *v > 0) return static_cast<int>(*v);
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, n) on a bounded pool; results keep index order.
template <typename Fn>
auto parallel_map(std::size_t n, int threads, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> slots(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::mutex failure_mu;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        failed = true;
      }
    }
  };
  const int nt = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (nt <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

struct Corpus {
  std::vector<Scene> scenes;  // sorted by image id
  CategoryDictionary categories;
};

inline Corpus load_annotation_corpus(const RunManifest& m) {
  if (!m.dims) throw ConfigError("--dims is required with --annotations");
  if (!fs::is_directory(*m.annotations))
    throw IoError("annotation directory not found: " + m.annotations->string());
  const auto dims = [&] {
    try {
      return parse_dims(read_file(*m.dims));
    } catch (const ParseError& e) {
      throw ParseError(m.dims->string() + ": " + e.what(), e.lines());
    }
  }();

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(*m.annotations))
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  Corpus c;
  const bool frozen = m.categories.has_value();
  if (frozen) c.categories = CategoryDictionary::from_text(read_file(*m.categories));
  for (const auto& f : files) {
    const std::string id = f.stem().string();
    const auto it = dims.find(id);
    if (it == dims.end()) throw ConfigError("no image dimensions for scene '" + id + "' in " + m.dims->string());
    std::vector<DotaRecord> records;
    try {
      records = parse_dota(read_file(f));
    } catch (const ParseError& e) {
      throw ParseError(f.string() + ": " + e.what(), e.lines());
    }
    try {
      c.scenes.push_back(build_scene(id, it->second.first, it->second.second, records, c.categories,
                                     m.filter_difficult, frozen));
    } catch (const std::invalid_argument& e) {
      throw ParseError(f.string() + ": " + e.what(), {});
    }
  }
  // Every scene carries the final dictionary.
  for (auto& s : c.scenes) s.categories = c.categories;
  return c;
}

inline Corpus load_synthetic_corpus(const RunManifest& m) {
  Corpus c;
  if (m.sweep) {
    ScaleSweepConfig cfg;
    cfg.image_size = m.image_size;
    c.scenes = scale_sweep(m.seed, cfg);
  } else {
    SyntheticConfig cfg;
    cfg.image_width = m.image_size;
    cfg.image_height = m.image_size;
    SceneRng seeds(m.seed);
    for (int i = 0; i < m.synthetic_scenes; ++i) {
      const std::uint64_t scene_seed = static_cast<std::uint64_t>(seeds.uniform() * 0x1.0p53);
      Scene s = random_scene(scene_seed, m.synthetic_boxes, cfg);
      s.image_id = "synthetic-" + std::to_string(m.seed) + "-" + std::to_string(i);
      c.scenes.push_back(std::move(s));
    }
  }
  if (!c.scenes.empty()) c.categories = c.scenes.front().categories;
  std::sort(c.scenes.begin(), c.scenes.end(),
            [](const Scene& a, const Scene& b) { return a.image_id < b.image_id; });
  return c;
}

inline Corpus load_corpus(const RunManifest& m) {
  Corpus c;
  if (m.annotations) {
    c = load_annotation_corpus(m);
  } else if (m.synthetic_scenes > 0 || m.sweep) {
    c = load_synthetic_corpus(m);
  } else {
    throw ConfigError("no input: pass --annotations DIR or --synthetic N or --sweep");
  }
  if (m.tile) {
    std::vector<Scene> tiled;
    for (const auto& s : c.scenes) {
      auto t = tile_scene(s, m.tiles);
      tiled.insert(tiled.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
    }
    std::sort(tiled.begin(), tiled.end(),
              [](const Scene& a, const Scene& b) { return a.image_id < b.image_id; });
    c.scenes = std::move(tiled);
  }
  return c;
}

inline PyramidSpec scene_pyramid(const Scene& s) { return default_pyramid(s.width, s.height); }

inline StrategyConfig with_strategy(StrategyConfig cfg, Strategy s) {
  cfg.strategy = s;
  return cfg;
}

inline std::string sanitize_id(const std::string& id) {
  std::string out = id;
  for (char& ch : out)
    if (ch == '/' || ch == '\\' || ch == ':') ch = '_';
  return out;
}

// Writes one assignment document per scene under out/assign plus the category
// dictionary. Returns the number of scenes written.
inline std::size_t cmd_assign(const RunManifest& m, std::ostream& log = std::cout) {
  const Corpus c = load_corpus(m);
  const auto docs = parallel_map(c.scenes.size(), worker_count(m.threads), [&](std::size_t i) {
    const Scene& s = c.scenes[i];
    const auto weighted = apply_sdw(assign(s.boxes, scene_pyramid(s), m.strategy));
    return format_assignment(s.image_id, weighted, m.strategy, c.categories);
  });
  std::string index;
  for (std::size_t i = 0; i < c.scenes.size(); ++i) {
    const std::string name = sanitize_id(c.scenes[i].image_id) + ".txt";
    write_file(m.out / "assign" / name, docs[i]);
    index += c.scenes[i].image_id + " assign/" + name + "\n";
  }
  write_file(m.out / "assign_index.txt", index);
  write_file(m.out / "categories.txt", c.categories.to_text());
  log << "assigned " << c.scenes.size() << " scene(s) with " << strategy_name(m.strategy.strategy)
      << " -> " << (m.out / "assign").string() << "\n";
  return c.scenes.size();
}

inline LevelHistogram corpus_histogram(const Corpus& c, const StrategyConfig& cfg, int threads) {
  const auto hs = parallel_map(c.scenes.size(), threads, [&](std::size_t i) {
    return level_histogram(assign(c.scenes[i].boxes, scene_pyramid(c.scenes[i]), cfg));
  });
  LevelHistogram total;
  for (const auto& h : hs) total.merge(h);
  return total;
}

inline LevelHistogram cmd_stats(const RunManifest& m, std::ostream& log = std::cout) {
  const Corpus c = load_corpus(m);
  const LevelHistogram h = corpus_histogram(c, m.strategy, worker_count(m.threads));
  const std::string pct = format_histogram_percent(h, c.categories);
  const std::string counts = format_histogram_counts(h, c.categories);
  write_file(m.out / "stats_percent.csv", pct);
  write_file(m.out / "stats_counts.csv", counts);
  log << pct << "\n" << counts;
  return h;
}

inline std::vector<StrategySummary> cmd_compare(const RunManifest& m, std::ostream& log = std::cout) {
  if (m.strategies.size() < 2) throw ConfigError("compare needs at least two strategies");
  const Corpus c = load_corpus(m);
  const int threads = worker_count(m.threads);
  std::vector<StrategySummary> rows;
  for (Strategy s : m.strategies) {
    const StrategyConfig cfg = with_strategy(m.strategy, s);
    struct PerScene {
      AssignmentResult result;
      std::vector<std::size_t> candidates;
    };
    const auto per = parallel_map(c.scenes.size(), threads, [&](std::size_t i) {
      const Scene& sc = c.scenes[i];
      const PyramidSpec spec = scene_pyramid(sc);
      return PerScene{assign(sc.boxes, spec, cfg), count_candidates(sc.boxes, spec, cfg)};
    });
    StrategySummary sum;
    sum.strategy = s;
    for (const auto& p : per) sum.add(p.result, p.candidates);
    rows.push_back(std::move(sum));
  }
  const std::string table = format_compare(rows);
  write_file(m.out / "compare.csv", table);
  log << table;
  return rows;
}

inline void cmd_render(const RunManifest& m, std::ostream& log = std::cout) {
  if (m.scene_id.empty()) throw ConfigError("render needs --scene ID");
  const Corpus c = load_corpus(m);
  const auto it = std::find_if(c.scenes.begin(), c.scenes.end(),
                               [&](const Scene& s) { return s.image_id == m.scene_id; });
  if (it == c.scenes.end()) throw ConfigError("unknown scene id '" + m.scene_id + "'");
  const auto weighted = apply_sdw(assign(it->boxes, scene_pyramid(*it), m.strategy));
  const auto masks = render_level_masks(weighted.assignment);
  const std::string base = sanitize_id(it->image_id);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const int level = weighted.assignment.spec.levels[i].level;
    write_file(m.out / "render" / (base + "_P" + std::to_string(level) + ".pgm"), masks[i].to_pgm());
  }
  if (m.overlay)
    write_file(m.out / "render" / (base + "_weights.pgm"), render_weight_overlay(weighted).to_pgm());
  log << "rendered " << masks.size() << " level mask(s) for " << it->image_id << "\n";
}

struct BenchRow {
  std::string name;
  std::size_t samples = 0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double anchors_per_second = 0.0;
  double mean_anchors_per_scene = 0.0;
};

inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

// Times assignment only (scenes are loaded before the clock starts), single
// threaded, `repetitions` runs per scene.
inline BenchRow bench_one(const Corpus& c, const std::string& name,
                          const std::function<AssignmentResult(const Scene&, const PyramidSpec&)>& fn,
                          int repetitions) {
  using clock = std::chrono::steady_clock;
  std::vector<PyramidSpec> specs;
  for (const auto& s : c.scenes) specs.push_back(scene_pyramid(s));
  std::vector<double> samples;
  double anchors = 0.0;
  double seconds = 0.0;
  for (std::size_t i = 0; i < c.scenes.size(); ++i) {
    for (int r = 0; r < repetitions; ++r) {
      const auto t0 = clock::now();
      const AssignmentResult res = fn(c.scenes[i], specs[i]);
      const double dt = std::chrono::duration<double>(clock::now() - t0).count();
      if (res.anchor_total() == 0) continue;
      samples.push_back(dt * 1e3);
      seconds += dt;
      anchors += static_cast<double>(specs[i].anchor_count());
    }
  }
  BenchRow row;
  row.name = name;
  row.samples = samples.size();
  row.median_ms = percentile(samples, 0.5);
  row.p95_ms = percentile(samples, 0.95);
  row.anchors_per_second = seconds > 0.0 ? anchors / seconds : 0.0;
  row.mean_anchors_per_scene = samples.empty() ? 0.0 : anchors / static_cast<double>(samples.size());
  return row;
}

inline std::string format_bench(const std::vector<BenchRow>& rows) {
  std::string out = "strategy,samples,median_ms,p95_ms,anchors_per_second,anchors_per_scene\n";
  for (const auto& r : rows)
    out += r.name + "," + std::to_string(r.samples) + "," + format_number(r.median_ms) + "," +
           format_number(r.p95_ms) + "," + format_number(r.anchors_per_second) + "," +
           format_number(r.mean_anchors_per_scene) + "\n";
  return out;
}

inline std::vector<BenchRow> cmd_bench(const RunManifest& m, std::ostream& log = std::cout) {
  if (m.repetitions < 1) throw ConfigError("--repetitions must be >= 1");
  const Corpus c = load_corpus(m);
  std::vector<Strategy> strategies = m.strategies;
  if (strategies.empty()) strategies.push_back(m.strategy.strategy);
  std::vector<BenchRow> rows;
  for (Strategy s : strategies) {
    const StrategyConfig cfg = with_strategy(m.strategy, s);
    rows.push_back(bench_one(c, std::string(strategy_name(s)),
                             [&](const Scene& sc, const PyramidSpec& spec) { return assign(sc.boxes, spec, cfg); },
                             m.repetitions));
  }
  if (m.include_reference) {
    const StrategyConfig cfg = m.strategy;
    rows.push_back(bench_one(c, "reference-" + std::string(strategy_name(cfg.strategy)),
                             [&](const Scene& sc, const PyramidSpec& spec) { return assign_oracle(sc.boxes, spec, cfg); },
                             m.repetitions));
  }
  const std::string table = format_bench(rows);
  write_file(m.out / "bench.csv", table);
  log << table;
  return rows;
}

}  // namespace rotassign::app
