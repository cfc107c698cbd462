#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rotassign/assignment.hpp"
#include "rotassign/ingest.hpp"
#include "rotassign/text.hpp"
#include "rotassign/weighting.hpp"

namespace rotassign {

using text::format_number;

inline std::string category_label(const CategoryDictionary& dict, int id) {
  if (id >= 0 && static_cast<std::size_t>(id) < dict.size()) return dict.name(id);
  return std::to_string(id);
}

inline std::string ratio_label(const RatioMode& m) {
  return m.is_adaptive() ? "adaptive" : format_number(m.fixed_value());
}

// Line-oriented "key: value" document describing one scene's assignment.
inline std::string format_assignment(const std::string& scene_id, const WeightedAssignment& weighted,
                                     const StrategyConfig& cfg, const CategoryDictionary& dict) {
  const AssignmentResult& r = weighted.assignment;
  std::string out;
  auto kv = [&](const std::string& k, const std::string& v) { out += k + ": " + v + "\n"; };
  kv("scene", scene_id);
  kv("strategy", std::string(strategy_name(r.strategy)));
  kv("k", std::to_string(cfg.k));
  kv("xi", ratio_label(cfg.ratio));
  kv("image_width", std::to_string(r.spec.image_width));
  kv("image_height", std::to_string(r.spec.image_height));
  kv("anchors", std::to_string(r.anchor_total()));
  kv("targets", std::to_string(r.scene.size()));
  for (std::size_t t = 0; t < r.scene.size(); ++t) {
    const OrientedBox& g = r.scene[t];
    kv("target", "index=" + std::to_string(t) + " category=" + category_label(dict, g.category) +
                     " cx=" + format_number(g.cx) + " cy=" + format_number(g.cy) +
                     " w=" + format_number(g.w) + " h=" + format_number(g.h) +
                     " theta=" + format_number(g.theta) +
                     " positives=" + std::to_string(r.target_counts[t]));
  }
  for (const auto& p : r.positives) {
    kv("positive", "level=" + std::to_string(p.anchor.level) + " gx=" + std::to_string(p.anchor.grid_x) +
                       " gy=" + std::to_string(p.anchor.grid_y) + " x=" + format_number(p.anchor.img.x) +
                       " y=" + format_number(p.anchor.img.y) + " target=" + std::to_string(p.target_index) +
                       " distance=" + format_number(p.distance) + " dx=" + format_number(p.regression.dx) +
                       " dy=" + format_number(p.regression.dy) + " w=" + format_number(p.regression.w) +
                       " h=" + format_number(p.regression.h) + " theta=" + format_number(p.regression.theta) +
                       " weight=" + format_number(p.weight) + " escaped=" + (p.escaped ? "1" : "0"));
  }
  std::string counts;
  for (std::size_t t = 0; t < r.target_counts.size(); ++t)
    counts += (t ? "," : "") + std::to_string(r.target_counts[t]);
  kv("summary", "n_pos=" + std::to_string(r.positives.size()) +
                    " escapes=" + std::to_string(r.escape_activations) +
                    " conflicts=" + std::to_string(r.conflict_resolutions) +
                    " counts=" + (counts.empty() ? "-" : counts));
  return out;
}

inline std::string level_header(const std::vector<int>& levels) {
  std::string h;
  for (int l : levels) h += ",P" + std::to_string(l);
  return h;
}

// Rows = categories, columns = levels. Percentages per row sum to 100.
inline std::string format_histogram_percent(const LevelHistogram& h, const CategoryDictionary& dict) {
  std::string out = "category" + level_header(h.levels) + ",total,mean_level\n";
  for (const auto& [cat, row] : h.counts) {
    out += category_label(dict, cat);
    for (double p : h.percentages(cat)) out += "," + format_number(p);
    out += "," + std::to_string(h.total(cat)) + "," + format_number(h.mean_level(cat)) + "\n";
  }
  return out;
}

inline std::string format_histogram_counts(const LevelHistogram& h, const CategoryDictionary& dict) {
  std::string out = "category" + level_header(h.levels) + ",total\n";
  for (const auto& [cat, row] : h.counts) {
    out += category_label(dict, cat);
    for (auto c : row) out += "," + std::to_string(c);
    out += "," + std::to_string(h.total(cat)) + "\n";
  }
  return out;
}

// Shannon entropy (bits) of a count distribution.
inline double entropy_bits(const std::vector<std::size_t>& counts) {
  double tot = 0.0;
  for (auto c : counts) tot += static_cast<double>(c);
  if (tot == 0.0) return 0.0;
  double e = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / tot;
    e -= p * std::log2(p);
  }
  return e;
}

// Corpus-level totals for one strategy, as reported by the compare command.
struct StrategySummary {
  Strategy strategy = Strategy::earl;
  std::size_t scenes = 0;
  std::size_t targets = 0;
  std::size_t positives = 0;
  std::size_t min_per_target = 0;
  std::size_t max_per_target = 0;
  std::size_t candidates = 0;  // region members before any top-k cut
  std::size_t escapes = 0;
  std::size_t conflicts = 0;
  std::vector<int> levels;
  std::vector<std::size_t> level_counts;

  void add(const AssignmentResult& r, const std::vector<std::size_t>& candidate_counts) {
    if (levels.empty()) {
      for (const auto& l : r.spec.levels) levels.push_back(l.level);
      level_counts.assign(levels.size(), 0);
    }
    ++scenes;
    for (auto c : r.target_counts) {
      min_per_target = targets == 0 ? c : std::min(min_per_target, c);
      max_per_target = std::max(max_per_target, c);
      ++targets;
    }
    positives += r.positives.size();
    for (auto c : candidate_counts) candidates += c;
    escapes += r.escape_activations;
    conflicts += r.conflict_resolutions;
    for (const auto& p : r.positives)
      for (std::size_t i = 0; i < levels.size(); ++i)
        if (levels[i] == p.anchor.level) ++level_counts[i];
  }

  double mean_per_target() const { return targets ? static_cast<double>(positives) / targets : 0.0; }
  double mean_candidates() const { return targets ? static_cast<double>(candidates) / targets : 0.0; }
};

inline std::string format_compare(const std::vector<StrategySummary>& rows) {
  std::vector<int> levels = rows.empty() ? std::vector<int>{} : rows.front().levels;
  std::string out =
      "strategy,scenes,targets,total_positives,mean_per_target,min_per_target,max_per_target,"
      "mean_candidates,escapes,conflicts,level_entropy_bits" +
      level_header(levels) + "\n";
  for (const auto& s : rows) {
    out += std::string(strategy_name(s.strategy)) + "," + std::to_string(s.scenes) + "," +
           std::to_string(s.targets) + "," + std::to_string(s.positives) + "," +
           format_number(s.mean_per_target()) + "," + std::to_string(s.min_per_target) + "," +
           std::to_string(s.max_per_target) + "," + format_number(s.mean_candidates()) + "," +
           std::to_string(s.escapes) + "," + std::to_string(s.conflicts) + "," +
           format_number(entropy_bits(s.level_counts));
    for (auto c : s.level_counts) out += "," + std::to_string(c);
    out += "\n";
  }
  return out;
}

// 8-bit grayscale raster written as binary PGM.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {}
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  std::string to_pgm() const {
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
    return out;
  }
};

// One raster per level at grid resolution: positives 255, negatives 0.
inline std::vector<GrayImage> render_level_masks(const AssignmentResult& r) {
  std::vector<GrayImage> out;
  for (const auto& l : r.spec.levels) out.emplace_back(l.width, l.height);
  for (const auto& p : r.positives)
    for (std::size_t i = 0; i < r.spec.levels.size(); ++i)
      if (r.spec.levels[i].level == p.anchor.level) out[i].at(p.anchor.grid_x, p.anchor.grid_y) = 255;
  return out;
}

// Image-resolution overlay: each positive paints its stride cell with
// round(255 * weight); overlapping cells keep the maximum.
inline GrayImage render_weight_overlay(const WeightedAssignment& w) {
  const AssignmentResult& r = w.assignment;
  GrayImage img(r.spec.image_width, r.spec.image_height);
  for (const auto& p : r.positives) {
    const int s = r.spec.level(p.anchor.level).stride;
    const auto v = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(p.weight, 0.0, 1.0)));
    const int x0 = std::max(0, static_cast<int>(p.anchor.img.x) - s / 2);
    const int y0 = std::max(0, static_cast<int>(p.anchor.img.y) - s / 2);
    const int x1 = std::min(img.width, x0 + s);
    const int y1 = std::min(img.height, y0 + s);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) img.at(x, y) = std::max(img.at(x, y), v);
  }
  return img;
}

}  // namespace rotassign
