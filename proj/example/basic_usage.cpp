// Assign positives for two boxes on an 800x800 image and print a summary.
#include <cstdio>
#include <vector>

#include "rotassign/rotassign.hpp"

int main() {
  using namespace rotassign;
  const std::vector<OrientedBox> scene = {
      make_box(200, 300, 20, 120, 30, 0),   // thin ship-like box
      make_box(520, 480, 300, 340, 75, 1),  // large roughly square field
  };
  const PyramidSpec spec = default_pyramid(800, 800);
  StrategyConfig cfg;  // EARL, k = 15, adaptive xi

  const WeightedAssignment w = apply_sdw(assign(scene, spec, cfg));
  const AssignmentResult& r = w.assignment;
  std::printf("%zu anchors, %zu positives, %zu escapes\n", r.anchor_total(), r.positives.size(),
              r.escape_activations);
  for (const auto& p : r.positives)
    std::printf("target %zu  P%d (%d,%d)  d=%.2f  w=%.3f\n", p.target_index, p.anchor.level,
                p.anchor.grid_x, p.anchor.grid_y, p.distance, p.weight);
}
