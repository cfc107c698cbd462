#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rotassign/geometry.hpp"
#include "rotassign/ingest.hpp"

namespace rotassign {

inline const std::vector<std::string>& dota_categories() {
  static const std::vector<std::string> names = {
      "plane", "baseball-diamond", "bridge", "ground-track-field", "small-vehicle",
      "large-vehicle", "ship", "tennis-court", "basketball-court", "storage-tank",
      "soccer-ball-field", "roundabout", "harbor", "swimming-pool", "helicopter"};
  return names;
}

// mt19937_64 output is fixed by the standard; the distributions in <random>
// are not, so the mapping to doubles is done here to keep scenes identical
// across standard libraries.
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  std::uint64_t below(std::uint64_t n) { return n ? eng_() % n : 0; }

 private:
  std::mt19937_64 eng_;
};

struct SyntheticConfig {
  int image_width = 800;
  int image_height = 800;
  double min_long_side = 16.0;
  double max_long_side = 512.0;
  double max_aspect = 8.0;
  int num_categories = 15;
};

// Center uniform in the image, long side log-uniform, aspect log-uniform in
// [1, max_aspect], theta uniform in [0, 180).
inline OrientedBox random_box(SceneRng& rng, const SyntheticConfig& cfg) {
  const double cx = rng.uniform(0.0, cfg.image_width);
  const double cy = rng.uniform(0.0, cfg.image_height);
  const double long_side = rng.log_uniform(cfg.min_long_side, cfg.max_long_side);
  const double aspect = rng.log_uniform(1.0, cfg.max_aspect);
  const double theta = rng.uniform(0.0, 180.0);
  const int cat = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.num_categories)));
  return make_box(cx, cy, long_side / aspect, long_side, theta, cat);
}

inline CategoryDictionary synthetic_dictionary(int num_categories) {
  CategoryDictionary d;
  const auto& names = dota_categories();
  for (int i = 0; i < num_categories; ++i)
    d.id_for(i < static_cast<int>(names.size()) ? names[static_cast<std::size_t>(i)]
                                                : "class-" + std::to_string(i));
  return d;
}

inline Scene random_scene(std::uint64_t seed, int num_boxes, const SyntheticConfig& cfg = {}) {
  SceneRng rng(seed);
  Scene s;
  s.image_id = "synthetic-" + std::to_string(seed);
  s.width = cfg.image_width;
  s.height = cfg.image_height;
  s.categories = synthetic_dictionary(cfg.num_categories);
  for (int i = 0; i < num_boxes; ++i) {
    s.boxes.push_back(random_box(rng, cfg));
    s.difficult.push_back(false);
  }
  return s;
}

struct ScaleSweepConfig {
  int buckets = 9;
  int targets_per_bucket = 200;
  double min_long_side = 16.0;
  double max_long_side = 512.0;
  double max_aspect = 8.0;
  int image_size = 800;
};

inline double sweep_long_side(const ScaleSweepConfig& cfg, int bucket) {
  if (cfg.buckets <= 1) return cfg.min_long_side;
  const double f = static_cast<double>(bucket) / (cfg.buckets - 1);
  return cfg.min_long_side * std::pow(cfg.max_long_side / cfg.min_long_side, f);
}

// One target per scene; the category id is the scale bucket. Every bucket
// reuses the same draws of center, aspect and angle so that only the scale
// differs between buckets. Centers fall uniformly within one coarsest-level
// cell (128 px) around the image center, which spans every grid phase of
// strides dividing 128.
inline std::vector<Scene> scale_sweep(std::uint64_t seed, const ScaleSweepConfig& cfg = {}) {
  struct Draw {
    double dx, dy, aspect, theta;
  };
  SceneRng rng(seed);
  std::vector<Draw> draws;
  for (int i = 0; i < cfg.targets_per_bucket; ++i) {
    const double dx = rng.uniform(-64.0, 64.0);
    const double dy = rng.uniform(-64.0, 64.0);
    const double aspect = rng.log_uniform(1.0, cfg.max_aspect);
    draws.push_back({dx, dy, aspect, rng.uniform(0.0, 180.0)});
  }
  CategoryDictionary dict;
  for (int b = 0; b < cfg.buckets; ++b) dict.id_for("scale-" + std::to_string(b));
  const double mid = 0.5 * cfg.image_size;
  std::vector<Scene> out;
  for (int b = 0; b < cfg.buckets; ++b) {
    const double long_side = sweep_long_side(cfg, b);
    for (int i = 0; i < cfg.targets_per_bucket; ++i) {
      const Draw& d = draws[static_cast<std::size_t>(i)];
      Scene s;
      s.image_id = "sweep-" + std::to_string(b) + "-" + std::to_string(i);
      s.width = cfg.image_size;
      s.height = cfg.image_size;
      s.boxes.push_back(make_box(mid + d.dx, mid + d.dy, long_side / d.aspect, long_side, d.theta, b));
      s.difficult.push_back(false);
      s.categories = dict;
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace rotassign
