#pragma once

// Seeded scenario generators and a tiny property runner with shrinking.
// A scenario is reproducible from (seed, size) alone.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rotassign/assignment.hpp"
#include "rotassign/ingest.hpp"
#include "rotassign/pyramid.hpp"

namespace gen {

using rotassign::OrientedBox;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed * 0x9E3779B97F4A7C15ull + 0x632BE59BD9B4E019ull) {}
  double unit() { return static_cast<double>(eng_() >> 11) / 9007199254740992.0; }
  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }
  int below(int n) { return static_cast<int>(eng_() % static_cast<std::uint64_t>(n)); }
  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 eng_;
};

struct Scenario {
  std::uint64_t seed = 0;
  int size = 0;
  std::vector<OrientedBox> boxes;
  rotassign::PyramidSpec spec;

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "seed=" << seed << " size=" << size << " image=" << spec.image_width << "x" << spec.image_height;
    for (const auto& b : boxes)
      os << "\n  box(" << b.cx << ", " << b.cy << ", " << b.w << ", " << b.h << ", " << b.theta << ", "
         << b.category << ")";
    return os.str();
  }
};

// Mixture of regimes: tiny objects below the finest stride, huge ones,
// squares, elongated boxes, near-duplicate clusters that force conflicts,
// and boxes partly outside the image.
inline OrientedBox random_box(Rng& r, int img_w, int img_h) {
  const int mode = r.below(6);
  double cx = r.range(-20.0, img_w + 20.0), cy = r.range(-20.0, img_h + 20.0);
  double h = 0.0, w = 0.0;
  switch (mode) {
    case 0: h = r.range(1.0, 10.0), w = h * r.range(0.2, 1.0); break;
    case 1: h = r.range(200.0, 900.0), w = h * r.range(0.3, 1.0); break;
    case 2: h = w = r.range(4.0, 300.0); break;
    case 3: h = r.range(30.0, 400.0), w = h * r.range(0.05, 0.2); break;
    default: h = std::exp(r.range(std::log(6.0), std::log(600.0))), w = h * r.range(0.1, 1.0); break;
  }
  double theta = r.range(0.0, 180.0);
  if (r.chance(0.15)) theta = 45.0 * r.below(4);  // grid-aligned angles hit exact ties
  if (r.chance(0.1)) std::swap(w, h);              // non-canonical input
  return {cx, cy, w, h, theta, r.below(5)};
}

inline Scenario scenario(std::uint64_t seed, int size) {
  Rng r(seed);
  Scenario s;
  s.seed = seed;
  s.size = size;
  const int img_w = r.chance(0.5) ? 800 : 64 + r.below(900);
  const int img_h = r.chance(0.5) ? img_w : 64 + r.below(900);
  s.spec = rotassign::default_pyramid(img_w, img_h);
  for (int i = 0; i < size; ++i) {
    if (i > 0 && r.chance(0.25)) {
      // perturbed copy of an earlier box
      OrientedBox b = s.boxes[static_cast<std::size_t>(r.below(i))];
      b.cx += r.range(-10.0, 10.0);
      b.cy += r.range(-10.0, 10.0);
      b.h *= r.range(0.8, 1.25);
      b.w = std::min(b.w * r.range(0.8, 1.25), b.h);
      if (r.chance(0.3)) b.h = s.boxes[static_cast<std::size_t>(r.below(i))].h;  // equal long sides
      s.boxes.push_back(b);
    } else {
      s.boxes.push_back(random_box(r, img_w, img_h));
    }
  }
  return s;
}

// Box count chosen from the seed, 0..max_boxes.
inline Scenario scenario(std::uint64_t seed) {
  Rng r(seed ^ 0xA5A5A5A5ull);
  return scenario(seed, r.below(41));
}

// Four points on a random ellipse at sorted angles: always convex.
inline rotassign::Quad convex_quad(Rng& r) {
  for (;;) {
    double ang[4];
    for (double& a : ang) a = r.range(0.0, 2.0 * std::numbers::pi);
    std::sort(ang, ang + 4);
    const double rx = r.range(2.0, 300.0), ry = r.range(2.0, 300.0), rot = r.range(0.0, 3.2);
    const double cx = r.range(-500, 1500), cy = r.range(-500, 1500);
    rotassign::Quad q;
    for (std::size_t i = 0; i < 4; ++i) {
      const double x = rx * std::cos(ang[i]), y = ry * std::sin(ang[i]);
      q[i] = {cx + x * std::cos(rot) - y * std::sin(rot), cy + x * std::sin(rot) + y * std::cos(rot)};
    }
    if (std::abs(rotassign::polygon_area(q)) > 1.0) return q;
  }
}

struct Outcome {
  bool ok = true;
  std::string message;
};

// Runs prop on seeds [first, first + count). On the first failure the size
// is shrunk (same seed, fewer boxes) while the property keeps failing, and
// the smallest failing scenario is reported.
inline Outcome check(std::uint64_t first, std::uint64_t count,
                     const std::function<std::string(const Scenario&)>& prop) {
  for (std::uint64_t seed = first; seed < first + count; ++seed) {
    Scenario s = scenario(seed);
    std::string err = prop(s);
    if (err.empty()) continue;
    int size = s.size;
    while (size > 0) {
      const Scenario smaller = scenario(seed, size - 1);
      const std::string e2 = prop(smaller);
      if (e2.empty()) break;
      s = smaller;
      err = e2;
      --size;
    }
    return {false, err + "\nminimal: " + s.describe()};
  }
  return {};
}

}  // namespace gen
