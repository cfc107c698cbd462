#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rotassign/geometry.hpp"
#include "rotassign/pyramid.hpp"

namespace rotassign {

enum class Strategy { earl, fixed_scale, bounding_box, central_area, topk_only };

inline constexpr Strategy all_strategies[] = {Strategy::earl, Strategy::fixed_scale,
                                              Strategy::bounding_box, Strategy::central_area,
                                              Strategy::topk_only};

inline std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::earl: return "earl";
    case Strategy::fixed_scale: return "fixed-scale";
    case Strategy::bounding_box: return "bbox";
    case Strategy::central_area: return "central-area";
    case Strategy::topk_only: return "topk";
  }
  return "unknown";
}

inline std::optional<Strategy> parse_strategy(std::string_view name) {
  for (Strategy s : all_strategies)
    if (strategy_name(s) == name) return s;
  if (name == "ded") return Strategy::earl;
  if (name == "fixed" || name == "fixedscale") return Strategy::fixed_scale;
  if (name == "bb" || name == "bounding-box") return Strategy::bounding_box;
  if (name == "ca" || name == "central") return Strategy::central_area;
  if (name == "topk-only") return Strategy::topk_only;
  return std::nullopt;
}

// Half-open scale interval (lo, hi] on the largest side distance.
struct ScaleRange {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double v) const { return v > lo && v <= hi; }
  friend bool operator==(const ScaleRange&, const ScaleRange&) = default;
};

// FCOS regression ranges for P3..P7.
inline std::vector<ScaleRange> default_scale_ranges() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return {{0, 64}, {64, 128}, {128, 256}, {256, 512}, {512, inf}};
}

struct StrategyConfig {
  Strategy strategy = Strategy::earl;
  int k = 15;
  RatioMode ratio = RatioMode::adaptive();
  std::vector<ScaleRange> scale_ranges = default_scale_ranges();  // one per level, ascending
  double radius_factor = 1.5;

  void validate(const PyramidSpec& spec) const {
    if (k < 1) throw std::invalid_argument("k must be >= 1, got " + std::to_string(k));
    if (!(radius_factor > 0.0)) throw std::invalid_argument("radius_factor must be positive");
    if (strategy == Strategy::fixed_scale && scale_ranges.size() != spec.levels.size()) {
      throw std::invalid_argument("fixed-scale needs one scale range per pyramid level");
    }
  }
};

struct RegressionTarget {
  double dx = 0.0;
  double dy = 0.0;
  double w = 0.0;
  double h = 0.0;
  double theta = 0.0;

  friend bool operator==(const RegressionTarget&, const RegressionTarget&) = default;
};

struct PositiveSample {
  AnchorPoint anchor;
  std::size_t anchor_index = 0;  // position in enumerate_anchors order
  std::size_t target_index = 0;
  double distance = 0.0;
  RegressionTarget regression;
  double weight = 0.0;  // filled by apply_sdw
  bool escaped = false;
};

struct AssignmentResult {
  Strategy strategy = Strategy::earl;
  std::vector<OrientedBox> scene;
  PyramidSpec spec;
  std::vector<PositiveSample> positives;  // sorted by anchor_index
  std::vector<std::size_t> target_counts;
  std::size_t escape_activations = 0;
  std::size_t conflict_resolutions = 0;

  std::size_t anchor_total() const { return spec.anchor_count(); }

  // True at every enumerated anchor that is positive; the rest are negatives.
  std::vector<bool> positive_mask() const {
    std::vector<bool> mask(anchor_total(), false);
    for (const auto& p : positives) mask[p.anchor_index] = true;
    return mask;
  }
};

inline RegressionTarget regression_target(const OrientedBox& g, ImagePoint anchor) {
  const ImagePoint off = center_offset(g, anchor);
  return {off.x, off.y, g.w, g.h, g.theta};
}

// Sampling region used by a strategy on one level.
class RegionTest {
 public:
  enum class Kind { ellipse, box, central_area, scale_range };

  static RegionTest ellipse(RatioMode mode) { return RegionTest(Kind::ellipse, mode, 0.0, {}); }
  static RegionTest box() { return RegionTest(Kind::box, RatioMode::adaptive(), 0.0, {}); }
  static RegionTest central_area(double radius_factor) {
    return RegionTest(Kind::central_area, RatioMode::adaptive(), radius_factor, {});
  }
  // Inside the box and the largest side distance falls in range.
  static RegionTest scale_range(ScaleRange range) {
    return RegionTest(Kind::scale_range, RatioMode::adaptive(), 0.0, range);
  }

  static RegionTest for_level(const StrategyConfig& cfg, std::size_t level_pos) {
    switch (cfg.strategy) {
      case Strategy::earl:
      case Strategy::topk_only: return ellipse(cfg.ratio);
      case Strategy::bounding_box: return box();
      case Strategy::central_area: return central_area(cfg.radius_factor);
      case Strategy::fixed_scale: return scale_range(cfg.scale_ranges.at(level_pos));
    }
    return ellipse(cfg.ratio);
  }

  Kind kind() const { return kind_; }

  bool contains(const OrientedBox& g, ImagePoint p, const LevelSpec& level) const {
    switch (kind_) {
      case Kind::ellipse: return ded_contains(g, p, mode_);
      case Kind::box: return obb_contains(g, p);
      case Kind::central_area: return central_area_contains(g, p, radius_factor_, level.stride);
      case Kind::scale_range: return obb_contains(g, p) && range_.contains(max_side_distance(g, p));
    }
    return false;
  }

  // Image-space half extents of an axis-aligned box enclosing the region.
  ImagePoint half_extent(const OrientedBox& g, const LevelSpec& level) const {
    if (kind_ == Kind::central_area) {
      const double r = radius_factor_ * level.stride;
      return aabb_half_extent(g, r, r);
    }
    return aabb_half_extent(g, 0.5 * g.w, 0.5 * g.h);
  }

 private:
  RegionTest(Kind kind, RatioMode mode, double radius_factor, ScaleRange range)
      : kind_(kind), mode_(mode), radius_factor_(radius_factor), range_(range) {}

  Kind kind_;
  RatioMode mode_;
  double radius_factor_;
  ScaleRange range_;
};

namespace detail {

struct Claim {
  std::size_t anchor = 0;
  double distance = 0.0;
};

inline bool closer(const Claim& x, const Claim& y) {
  return x.distance < y.distance || (x.distance == y.distance && x.anchor < y.anchor);
}

// Inclusive cell range [lo, hi] whose anchors may fall within +-extent of
// center. One cell of slack on each side; callers apply the exact test.
inline std::pair<int, int> cell_window(double center, double extent, int stride, int cells) {
  const double half = static_cast<double>(stride / 2);
  const double lo = std::floor((center - extent - half) / stride) - 1.0;
  const double hi = std::ceil((center + extent - half) / stride) + 1.0;
  const double clo = std::max(lo, 0.0);
  const double chi = std::min(hi, static_cast<double>(cells - 1));
  if (clo > chi) return {1, 0};
  return {static_cast<int>(clo), static_cast<int>(chi)};
}

// Candidates of one level, appended in row-major order.
inline void level_candidates(const OrientedBox& g, const LevelSpec& level, std::size_t offset,
                             const RegionTest& region, std::vector<Claim>& out) {
  const ImagePoint ext = region.half_extent(g, level);
  const auto [x0, x1] = cell_window(g.cx, ext.x, level.stride, level.width);
  const auto [y0, y1] = cell_window(g.cy, ext.y, level.stride, level.height);
  const int half = level.stride / 2;
  for (int gy = y0; gy <= y1; ++gy) {
    for (int gx = x0; gx <= x1; ++gx) {
      const ImagePoint p{static_cast<double>(half + gx * level.stride),
                         static_cast<double>(half + gy * level.stride)};
      if (!region.contains(g, p, level)) continue;
      const std::size_t flat = offset + static_cast<std::size_t>(gy) * level.width + gx;
      out.push_back(Claim{flat, l2_distance(g, p)});
    }
  }
}

inline void take_closest(std::vector<Claim>& cands, std::size_t n, std::vector<Claim>& out) {
  n = std::min(n, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(n), cands.end(),
                    closer);
  out.insert(out.end(), cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(n));
}

// Per-target claims before conflict resolution.
inline std::vector<Claim> select_for_target(const OrientedBox& g, const PyramidSpec& spec,
                                            const AnchorLayout& layout,
                                            const StrategyConfig& cfg,
                                            std::vector<Claim>& scratch) {
  std::vector<Claim> chosen;
  const std::size_t nlev = spec.levels.size();
  switch (cfg.strategy) {
    case Strategy::earl:
    case Strategy::bounding_box:
    case Strategy::central_area: {
      // Sequential scan from the coarsest level down, k shared across levels.
      std::size_t remaining = static_cast<std::size_t>(cfg.k);
      for (std::size_t i = nlev; i-- > 0 && remaining > 0;) {
        scratch.clear();
        level_candidates(g, spec.levels[i], layout.level_offset(i), RegionTest::for_level(cfg, i),
                         scratch);
        const std::size_t before = chosen.size();
        take_closest(scratch, remaining, chosen);
        remaining -= chosen.size() - before;
      }
      break;
    }
    case Strategy::topk_only: {
      scratch.clear();
      for (std::size_t i = nlev; i-- > 0;)
        level_candidates(g, spec.levels[i], layout.level_offset(i), RegionTest::for_level(cfg, i),
                         scratch);
      take_closest(scratch, static_cast<std::size_t>(cfg.k), chosen);
      break;
    }
    case Strategy::fixed_scale: {
      for (std::size_t i = nlev; i-- > 0;)
        level_candidates(g, spec.levels[i], layout.level_offset(i), RegionTest::for_level(cfg, i),
                         chosen);
      break;
    }
  }
  return chosen;
}

inline std::vector<OrientedBox> checked_scene(std::span<const OrientedBox> scene) {
  std::vector<OrientedBox> out;
  out.reserve(scene.size());
  for (const auto& g : scene) {
    validate_box(g);
    out.push_back(canonicalize(g));
  }
  return out;
}

inline AssignmentResult assign_impl(std::span<const OrientedBox> input, const PyramidSpec& spec,
                                    const StrategyConfig& cfg) {
  cfg.validate(spec);
  AssignmentResult res;
  res.strategy = cfg.strategy;
  res.scene = checked_scene(input);
  res.spec = spec;
  const std::size_t n = res.scene.size();
  res.target_counts.assign(n, 0);
  if (n == 0) return res;

  const AnchorLayout layout(spec);
  constexpr std::int32_t none = -1;
  std::vector<std::int32_t> owner(layout.total(), none);
  std::vector<std::uint8_t> contested(layout.total(), 0);
  std::vector<std::vector<Claim>> claims(n);
  std::vector<Claim> scratch;

  for (std::size_t t = 0; t < n; ++t) {
    claims[t] = select_for_target(res.scene[t], spec, layout, cfg, scratch);
    const double side = res.scene[t].long_side();
    for (const Claim& c : claims[t]) {
      std::int32_t& o = owner[c.anchor];
      if (o == none) {
        o = static_cast<std::int32_t>(t);
        continue;
      }
      contested[c.anchor] = 1;
      // Longest side wins; equal sides keep the lower target index.
      if (side > res.scene[static_cast<std::size_t>(o)].long_side()) o = static_cast<std::int32_t>(t);
    }
  }
  for (std::uint8_t c : contested) res.conflict_resolutions += c;

  auto emit = [&](std::size_t t, std::size_t anchor, double dist, bool escaped) {
    PositiveSample p;
    p.anchor = layout.anchor_at(anchor);
    p.anchor_index = anchor;
    p.target_index = t;
    p.distance = dist;
    p.regression = regression_target(res.scene[t], p.anchor.img);
    p.escaped = escaped;
    res.positives.push_back(p);
    ++res.target_counts[t];
  };

  for (std::size_t t = 0; t < n; ++t)
    for (const Claim& c : claims[t])
      if (owner[c.anchor] == static_cast<std::int32_t>(t)) emit(t, c.anchor, c.distance, false);

  // Escape: a target left without positives takes the closest unassigned
  // anchor on any level.
  std::vector<AnchorPoint> all;
  for (std::size_t t = 0; t < n; ++t) {
    if (res.target_counts[t] > 0) continue;
    if (all.empty()) all = enumerate_anchors(spec);
    std::optional<Claim> best;
    for (std::size_t a = 0; a < all.size(); ++a) {
      if (owner[a] != none) continue;
      const Claim c{a, l2_distance(res.scene[t], all[a].img)};
      if (!best || closer(c, *best)) best = c;
    }
    if (!best) continue;  // every anchor already taken
    owner[best->anchor] = static_cast<std::int32_t>(t);
    emit(t, best->anchor, best->distance, true);
    ++res.escape_activations;
  }

  std::sort(res.positives.begin(), res.positives.end(),
            [](const PositiveSample& x, const PositiveSample& y) {
              return x.anchor_index < y.anchor_index;
            });
  return res;
}

}  // namespace detail

// Anchors of one level inside the region, in row-major order.
inline std::vector<AnchorPoint> candidates_on_level(const OrientedBox& box, const LevelSpec& level,
                                                    const RegionTest& region) {
  std::vector<detail::Claim> claims;
  detail::level_candidates(box, level, 0, region, claims);
  std::vector<AnchorPoint> out;
  out.reserve(claims.size());
  for (const auto& c : claims) {
    const int gx = static_cast<int>(c.anchor % level.width);
    const int gy = static_cast<int>(c.anchor / level.width);
    out.push_back(AnchorPoint{level.level, gx, gy, anchor_image_coords(level, gx, gy)});
  }
  return out;
}

// Region members summed over all levels, per target, before any top-k cut.
inline std::vector<std::size_t> count_candidates(std::span<const OrientedBox> scene,
                                                 const PyramidSpec& spec,
                                                 const StrategyConfig& cfg) {
  cfg.validate(spec);
  std::vector<std::size_t> counts;
  std::vector<detail::Claim> scratch;
  for (const auto& raw : scene) {
    validate_box(raw);
    const OrientedBox g = canonicalize(raw);
    scratch.clear();
    for (std::size_t i = 0; i < spec.levels.size(); ++i)
      detail::level_candidates(g, spec.levels[i], 0, RegionTest::for_level(cfg, i), scratch);
    counts.push_back(scratch.size());
  }
  return counts;
}

// Adaptive scale sampling over the elliptical region, followed by the
// longest-side conflict rule and the closest-unassigned escape rule.
inline AssignmentResult assign_earl(std::span<const OrientedBox> scene, const PyramidSpec& spec,
                                    const StrategyConfig& cfg) {
  if (cfg.strategy != Strategy::earl) throw std::invalid_argument("assign_earl needs the earl strategy");
  return detail::assign_impl(scene, spec, cfg);
}

// Comparison strategies:
//   fixed-scale   every in-box anchor whose largest side distance falls in the
//                 level's range (no top-k)
//   bbox          sequential top-k scan over the oriented box
//   central-area  sequential top-k scan over a stride-scaled center window
//   topk          elliptical region, global top-k pooled over all levels
inline AssignmentResult assign_baseline(std::span<const OrientedBox> scene,
                                        const PyramidSpec& spec, const StrategyConfig& cfg) {
  if (cfg.strategy == Strategy::earl) throw std::invalid_argument("assign_baseline needs a baseline strategy");
  return detail::assign_impl(scene, spec, cfg);
}

inline AssignmentResult assign(std::span<const OrientedBox> scene, const PyramidSpec& spec,
                               const StrategyConfig& cfg) {
  return detail::assign_impl(scene, spec, cfg);
}

// Positive counts per (category, level).
struct LevelHistogram {
  std::vector<int> levels;                               // ascending level indices
  std::map<int, std::vector<std::size_t>> counts;        // category -> count per level

  std::size_t total(int category) const {
    std::size_t s = 0;
    for (auto c : counts.at(category)) s += c;
    return s;
  }

  std::vector<double> percentages(int category) const {
    const auto& row = counts.at(category);
    const double tot = static_cast<double>(total(category));
    std::vector<double> out(row.size(), 0.0);
    if (tot == 0.0) return out;
    for (std::size_t i = 0; i < row.size(); ++i) out[i] = 100.0 * static_cast<double>(row[i]) / tot;
    return out;
  }

  // Count-weighted mean level index.
  double mean_level(int category) const {
    const auto& row = counts.at(category);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      num += static_cast<double>(row[i]) * levels[i];
      den += static_cast<double>(row[i]);
    }
    return den > 0.0 ? num / den : 0.0;
  }

  void merge(const LevelHistogram& other) {
    if (levels.empty()) levels = other.levels;
    if (levels != other.levels) throw std::invalid_argument("histograms over different levels");
    for (const auto& [cat, row] : other.counts) {
      auto& mine = counts[cat];
      mine.resize(levels.size(), 0);
      for (std::size_t i = 0; i < row.size(); ++i) mine[i] += row[i];
    }
  }
};

inline LevelHistogram level_histogram(const AssignmentResult& result) {
  LevelHistogram h;
  for (const auto& l : result.spec.levels) h.levels.push_back(l.level);
  for (const auto& p : result.positives) {
    const int cat = result.scene[p.target_index].category;
    auto& row = h.counts[cat];
    row.resize(h.levels.size(), 0);
    for (std::size_t i = 0; i < h.levels.size(); ++i)
      if (h.levels[i] == p.anchor.level) ++row[i];
  }
  return h;
}

}  // namespace rotassign
