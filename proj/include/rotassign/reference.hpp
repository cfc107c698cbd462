#pragma once

// Deliberately naive assignment: every anchor is tested against every target,
// candidates are ordered with stable sorts, and no spatial windowing is used.
// It shares no selection code with assignment.hpp and exists to cross-check
// it (and as the slow baseline of the bench command).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "rotassign/assignment.hpp"
#include "rotassign/pyramid.hpp"

namespace rotassign {

namespace reference_detail {

struct Frame {
  double a;
  double b;
};

// Offset (center - p) projected on the box axes u = (cos t, sin t) and
// v = (sin t, -cos t).
inline Frame project(const OrientedBox& g, ImagePoint p) {
  const double t = g.theta * std::numbers::pi / 180.0;
  const double ux = std::cos(t), uy = std::sin(t);
  const double ox = g.cx - p.x, oy = g.cy - p.y;
  return {ox * ux + oy * uy, ox * uy - oy * ux};
}

inline bool member(const OrientedBox& g, ImagePoint p, const StrategyConfig& cfg, int level_pos,
                   int stride) {
  const Frame f = project(g, p);
  const double half_w = g.w / 2.0, half_h = g.h / 2.0;
  const bool in_box = std::fabs(f.a) <= half_w && std::fabs(f.b) <= half_h;
  switch (cfg.strategy) {
    case Strategy::earl:
    case Strategy::topk_only: {
      const double xi = cfg.ratio.is_adaptive()
                            ? 1.0 - std::min(g.w, g.h) / (2.0 * std::max(g.w, g.h))
                            : cfg.ratio.fixed_value();
      return (f.a * f.a) / (half_w * half_w) + (f.b * f.b) / (half_h * half_h) < xi;
    }
    case Strategy::bounding_box: return in_box;
    case Strategy::central_area: {
      const double r = cfg.radius_factor * stride;
      return std::fabs(f.a) <= r && std::fabs(f.b) <= r;
    }
    case Strategy::fixed_scale: {
      if (!in_box) return false;
      const double reach = std::max(half_w + std::fabs(f.a), half_h + std::fabs(f.b));
      const ScaleRange& r = cfg.scale_ranges[static_cast<std::size_t>(level_pos)];
      return reach > r.lo && reach <= r.hi;
    }
  }
  return false;
}

struct Pick {
  std::size_t anchor;
  double distance;
};

}  // namespace reference_detail

inline AssignmentResult assign_oracle(std::span<const OrientedBox> input, const PyramidSpec& spec,
                                      const StrategyConfig& cfg) {
  using reference_detail::Pick;
  cfg.validate(spec);
  AssignmentResult res;
  res.strategy = cfg.strategy;
  res.spec = spec;
  for (const auto& g : input) {
    validate_box(g);
    res.scene.push_back(canonicalize(g));
  }
  const std::size_t n = res.scene.size();
  res.target_counts.assign(n, 0);

  const std::vector<AnchorPoint> anchors = enumerate_anchors(spec);
  auto level_pos_of = [&](int level) {
    for (std::size_t i = 0; i < spec.levels.size(); ++i)
      if (spec.levels[i].level == level) return static_cast<int>(i);
    return -1;
  };
  auto dist = [](const OrientedBox& g, ImagePoint p) {
    return std::sqrt((g.cx - p.x) * (g.cx - p.x) + (g.cy - p.y) * (g.cy - p.y));
  };
  auto by_distance = [](const Pick& x, const Pick& y) { return x.distance < y.distance; };

  // Per-target selection over the full anchor list.
  std::vector<std::vector<Pick>> picks(n);
  for (std::size_t t = 0; t < n; ++t) {
    const OrientedBox& g = res.scene[t];
    std::vector<std::vector<Pick>> per_level(spec.levels.size());
    for (std::size_t a = 0; a < anchors.size(); ++a) {
      const int lp = level_pos_of(anchors[a].level);
      const int stride = spec.levels[static_cast<std::size_t>(lp)].stride;
      if (reference_detail::member(g, anchors[a].img, cfg, lp, stride))
        per_level[static_cast<std::size_t>(lp)].push_back({a, dist(g, anchors[a].img)});
    }
    auto& out = picks[t];
    if (cfg.strategy == Strategy::fixed_scale) {
      for (std::size_t lp = spec.levels.size(); lp-- > 0;)
        out.insert(out.end(), per_level[lp].begin(), per_level[lp].end());
    } else if (cfg.strategy == Strategy::topk_only) {
      std::vector<Pick> pool;
      for (std::size_t lp = spec.levels.size(); lp-- > 0;)
        pool.insert(pool.end(), per_level[lp].begin(), per_level[lp].end());
      std::stable_sort(pool.begin(), pool.end(), by_distance);
      const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(cfg.k), pool.size());
      out.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
    } else {
      int k = cfg.k;
      for (std::size_t lp = spec.levels.size(); lp-- > 0;) {
        if (k <= 0) break;
        auto& cands = per_level[lp];
        std::stable_sort(cands.begin(), cands.end(), by_distance);
        const int take = std::min(k, static_cast<int>(cands.size()));
        out.insert(out.end(), cands.begin(), cands.begin() + take);
        k -= take;
      }
    }
  }

  // Conflicts: collect claimants per anchor, winner = longest side, then
  // lowest index.
  std::vector<std::vector<std::size_t>> claimants(anchors.size());
  for (std::size_t t = 0; t < n; ++t)
    for (const Pick& p : picks[t]) claimants[p.anchor].push_back(t);
  std::vector<long> owner(anchors.size(), -1);
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    const auto& c = claimants[a];
    if (c.empty()) continue;
    if (c.size() > 1) ++res.conflict_resolutions;
    std::size_t best = c.front();
    for (std::size_t t : c) {
      const double lt = std::max(res.scene[t].w, res.scene[t].h);
      const double lb = std::max(res.scene[best].w, res.scene[best].h);
      if (lt > lb || (lt == lb && t < best)) best = t;
    }
    owner[a] = static_cast<long>(best);
  }

  auto push = [&](std::size_t t, std::size_t a, double d, bool escaped) {
    PositiveSample s;
    s.anchor = anchors[a];
    s.anchor_index = a;
    s.target_index = t;
    s.distance = d;
    s.regression = {res.scene[t].cx - anchors[a].img.x, res.scene[t].cy - anchors[a].img.y,
                    res.scene[t].w, res.scene[t].h, res.scene[t].theta};
    s.escaped = escaped;
    res.positives.push_back(s);
    ++res.target_counts[t];
  };
  for (std::size_t a = 0; a < anchors.size(); ++a)
    if (owner[a] >= 0) push(static_cast<std::size_t>(owner[a]), a, dist(res.scene[owner[a]], anchors[a].img), false);

  for (std::size_t t = 0; t < n; ++t) {
    if (res.target_counts[t] > 0) continue;
    std::vector<Pick> free;
    for (std::size_t a = 0; a < anchors.size(); ++a)
      if (owner[a] < 0) free.push_back({a, dist(res.scene[t], anchors[a].img)});
    if (free.empty()) continue;
    std::stable_sort(free.begin(), free.end(), by_distance);
    owner[free.front().anchor] = static_cast<long>(t);
    push(t, free.front().anchor, free.front().distance, true);
    ++res.escape_activations;
  }

  std::stable_sort(res.positives.begin(), res.positives.end(),
                   [](const PositiveSample& x, const PositiveSample& y) {
                     return x.anchor_index < y.anchor_index;
                   });
  return res;
}

}  // namespace rotassign
