#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotassign/assignment.hpp"

namespace rotassign {

// Floor applied to the raw term 1 - d/m before normalization. Escape-rule
// anchors can sit farther than m from the center.
inline constexpr double sdw_raw_floor = 1e-3;

// An assignment whose positives carry spatial distance weights in (0, 1].
struct WeightedAssignment {
  AssignmentResult assignment;
};

inline double sdw_raw(double distance, const OrientedBox& g) {
  const double m = std::max(0.5 * g.h, 0.5 * g.w);
  return std::max(1.0 - distance / m, sdw_raw_floor);
}

// W = raw(d) / max over the target's positives of raw(d'), raw(d) = 1 - d/m,
// m = max(w, h) / 2.
inline WeightedAssignment apply_sdw(AssignmentResult result) {
  const std::size_t n = result.scene.size();
  std::vector<double> best(n, 0.0);
  for (const auto& p : result.positives)
    best[p.target_index] = std::max(best[p.target_index], sdw_raw(p.distance, result.scene[p.target_index]));
  for (std::size_t t = 0; t < n; ++t) {
    if (!(best[t] > 0.0) || !std::isfinite(best[t])) {
      throw std::domain_error("spatial weighting: target " + std::to_string(t) +
                              " has no positive samples");
    }
  }
  for (auto& p : result.positives)
    p.weight = sdw_raw(p.distance, result.scene[p.target_index]) / best[p.target_index];
  return WeightedAssignment{std::move(result)};
}

}  // namespace rotassign
