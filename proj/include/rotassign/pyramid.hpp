#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotassign/geometry.hpp"

namespace rotassign {

struct LevelSpec {
  int level = 3;   // pyramid index, P3..P7
  int stride = 8;  // pixels per cell
  int height = 1;  // cells
  int width = 1;   // cells

  std::size_t size() const { return static_cast<std::size_t>(height) * width; }

  friend bool operator==(const LevelSpec&, const LevelSpec&) = default;
};

// Levels are stored in ascending level order (P3 first).
struct PyramidSpec {
  int image_width = 0;
  int image_height = 0;
  std::vector<LevelSpec> levels;

  std::size_t anchor_count() const {
    std::size_t n = 0;
    for (const auto& l : levels) n += l.size();
    return n;
  }

  const LevelSpec& level(int index) const {
    for (const auto& l : levels)
      if (l.level == index) return l;
    throw std::out_of_range("pyramid has no level P" + std::to_string(index));
  }

  friend bool operator==(const PyramidSpec&, const PyramidSpec&) = default;
};

struct AnchorPoint {
  int level = 3;
  int grid_x = 0;
  int grid_y = 0;
  ImagePoint img;

  friend bool operator==(const AnchorPoint&, const AnchorPoint&) = default;
};

inline constexpr int default_strides[] = {8, 16, 32, 64, 128};
inline constexpr int first_default_level = 3;

inline int grid_cells(int dim, int stride) { return (dim + stride - 1) / stride; }

// Pyramid with one level per stride, starting at first_level. Grid dims are
// ceil(dim / stride).
inline PyramidSpec make_pyramid(int image_w, int image_h, std::span<const int> strides,
                                int first_level = first_default_level) {
  if (image_w <= 0 || image_h <= 0) {
    throw std::invalid_argument("image dimensions must be positive, got " +
                                std::to_string(image_w) + "x" + std::to_string(image_h));
  }
  if (strides.empty()) throw std::invalid_argument("pyramid needs at least one stride");
  PyramidSpec spec{image_w, image_h, {}};
  int prev = 0;
  for (std::size_t i = 0; i < strides.size(); ++i) {
    const int s = strides[i];
    if (s <= prev) throw std::invalid_argument("pyramid strides must strictly increase");
    prev = s;
    spec.levels.push_back(LevelSpec{first_level + static_cast<int>(i), s,
                                    grid_cells(image_h, s), grid_cells(image_w, s)});
  }
  return spec;
}

// P3..P7 with strides 8..128.
inline PyramidSpec default_pyramid(int image_w, int image_h) {
  return make_pyramid(image_w, image_h, default_strides);
}

inline ImagePoint anchor_image_coords(const LevelSpec& level, int grid_x, int grid_y) {
  if (grid_x < 0 || grid_y < 0 || grid_x >= level.width || grid_y >= level.height) {
    throw std::out_of_range("anchor (" + std::to_string(grid_x) + "," + std::to_string(grid_y) +
                            ") outside P" + std::to_string(level.level) + " grid " +
                            std::to_string(level.width) + "x" + std::to_string(level.height));
  }
  const int half = level.stride / 2;
  return {static_cast<double>(half + grid_x * level.stride),
          static_cast<double>(half + grid_y * level.stride)};
}

// Layout of the flat anchor enumeration: highest level first, row-major.
class AnchorLayout {
 public:
  explicit AnchorLayout(const PyramidSpec& spec) : levels_(spec.levels) {
    offsets_.resize(spec.levels.size());
    std::size_t off = 0;
    for (std::size_t i = spec.levels.size(); i-- > 0;) {
      offsets_[i] = off;
      off += spec.levels[i].size();
    }
    total_ = off;
  }

  std::size_t total() const { return total_; }

  // Index into PyramidSpec::levels.
  std::size_t index_of(std::size_t level_pos, int grid_x, int grid_y) const {
    const LevelSpec& l = levels_[level_pos];
    return offsets_[level_pos] + static_cast<std::size_t>(grid_y) * l.width + grid_x;
  }

  std::size_t level_offset(std::size_t level_pos) const { return offsets_[level_pos]; }

  AnchorPoint anchor_at(std::size_t flat) const {
    for (std::size_t i = 0; i < offsets_.size(); ++i) {
      const LevelSpec& l = levels_[i];
      if (flat >= offsets_[i] && flat < offsets_[i] + l.size()) {
        const std::size_t local = flat - offsets_[i];
        const int gx = static_cast<int>(local % l.width);
        const int gy = static_cast<int>(local / l.width);
        return AnchorPoint{l.level, gx, gy, anchor_image_coords(l, gx, gy)};
      }
    }
    throw std::out_of_range("flat anchor index " + std::to_string(flat) + " out of range");
  }

 private:
  std::vector<LevelSpec> levels_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

// All anchors, P7 first, row-major within a level.
inline std::vector<AnchorPoint> enumerate_anchors(const PyramidSpec& spec) {
  std::vector<AnchorPoint> out;
  out.reserve(spec.anchor_count());
  for (std::size_t i = spec.levels.size(); i-- > 0;) {
    const LevelSpec& l = spec.levels[i];
    for (int gy = 0; gy < l.height; ++gy)
      for (int gx = 0; gx < l.width; ++gx)
        out.push_back(AnchorPoint{l.level, gx, gy, anchor_image_coords(l, gx, gy)});
  }
  return out;
}

}  // namespace rotassign
