#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rotassign/geometry.hpp"
#include "rotassign/text.hpp"

namespace rotassign {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::vector<std::size_t> lines)
      : std::runtime_error(what), lines_(std::move(lines)) {}
  const std::vector<std::size_t>& lines() const { return lines_; }

 private:
  std::vector<std::size_t> lines_;
};

using Quad = std::array<ImagePoint, 4>;

struct DotaRecord {
  Quad quad{};
  std::string category;
  int difficult = 0;

  friend bool operator==(const DotaRecord&, const DotaRecord&) = default;
};

// DOTA v1.0 text: optional "imagesource:" / "gsd:" header lines, then one
// "x1 y1 x2 y2 x3 y3 x4 y4 category difficult" record per line.
inline std::vector<DotaRecord> parse_dota(std::string_view content) {
  std::vector<DotaRecord> out;
  std::vector<std::size_t> bad;
  std::ostringstream msg;
  text::for_each_line(content, [&](std::size_t lineno, std::string_view raw) {
    const std::string_view line = text::trim(raw);
    if (line.empty()) return;
    if (line.starts_with("imagesource:") || line.starts_with("gsd:")) return;
    const auto tok = text::split_ws(line);
    auto fail = [&](const std::string& why) {
      bad.push_back(lineno);
      msg << "\n  line " << lineno << ": " << why;
    };
    if (tok.size() != 10) {
      fail("expected 10 tokens, got " + std::to_string(tok.size()));
      return;
    }
    DotaRecord r;
    for (std::size_t i = 0; i < 8; ++i) {
      const auto v = text::parse_double(tok[i]);
      if (!v || !std::isfinite(*v)) {
        fail("coordinate " + std::to_string(i + 1) + " is not a number: '" + std::string(tok[i]) + "'");
        return;
      }
      (i % 2 == 0 ? r.quad[i / 2].x : r.quad[i / 2].y) = *v;
    }
    r.category = std::string(tok[8]);
    const auto diff = text::parse_int(tok[9]);
    if (!diff || (*diff != 0 && *diff != 1)) {
      fail("difficult flag must be 0 or 1, got '" + std::string(tok[9]) + "'");
      return;
    }
    r.difficult = static_cast<int>(*diff);
    out.push_back(std::move(r));
  });
  if (!bad.empty()) throw ParseError("malformed DOTA annotation" + msg.str(), std::move(bad));
  return out;
}

inline std::string serialize_dota(std::span<const DotaRecord> records) {
  std::string out;
  for (const auto& r : records) {
    for (const auto& p : r.quad) {
      out += text::format_number(p.x);
      out += ' ';
      out += text::format_number(p.y);
      out += ' ';
    }
    out += r.category;
    out += ' ';
    out += std::to_string(r.difficult);
    out += '\n';
  }
  return out;
}

namespace hull_detail {

inline double cross(ImagePoint o, ImagePoint a, ImagePoint b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace hull_detail

// Convex hull (monotone chain), counterclockwise, collinear points dropped.
inline std::vector<ImagePoint> convex_hull(std::vector<ImagePoint> pts) {
  std::sort(pts.begin(), pts.end(), [](ImagePoint a, ImagePoint b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<ImagePoint> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && hull_detail::cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && hull_detail::cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

inline double polygon_area(std::span<const ImagePoint> poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    s += a.x * b.y - a.y * b.x;
  }
  return 0.5 * std::abs(s);
}

// Minimum-area enclosing rectangle by rotating calipers over the hull edges.
// Returned as a canonical box: h is the long side and theta is the angle from
// the y-axis to it. Squares report theta in [0, 90).
inline OrientedBox min_area_rect(std::span<const ImagePoint> points) {
  const std::vector<ImagePoint> hull = convex_hull({points.begin(), points.end()});
  const std::size_t n = hull.size();
  if (n < 3 || polygon_area(hull) <= 1e-12) {
    throw std::invalid_argument("degenerate polygon: zero enclosed area");
  }
  auto at = [&](std::size_t i) { return hull[i % n]; };
  auto dot = [](ImagePoint v, ImagePoint d) { return v.x * d.x + v.y * d.y; };
  auto sub = [](ImagePoint a, ImagePoint b) { return ImagePoint{a.x - b.x, a.y - b.y}; };

  double best_area = std::numeric_limits<double>::infinity();
  OrientedBox best;
  std::size_t right = 0, top = 0, left = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const ImagePoint e0 = sub(at(i + 1), at(i));
    const double len = std::hypot(e0.x, e0.y);
    const ImagePoint e{e0.x / len, e0.y / len};
    const ImagePoint nrm{-e.y, e.x};  // inward for a counterclockwise hull
    // Extreme points along e, nrm and -e; each pointer only moves forward.
    right = std::max(right, i + 1);
    while (right < i + n && dot(sub(at(right + 1), at(right)), e) > 0) ++right;
    top = std::max(top, right);
    while (top < i + n && dot(sub(at(top + 1), at(top)), nrm) > 0) ++top;
    left = std::max(left, top);
    while (left < i + n && dot(sub(at(left + 1), at(left)), e) < 0) ++left;
    const ImagePoint base = at(i);
    const double hi = dot(sub(at(right), base), e);
    const double lo = dot(sub(at(left), base), e);
    const double height = dot(sub(at(top), base), nrm);
    const double along = hi - lo;
    const double area = along * height;
    if (area < best_area) {
      best_area = area;
      const double mid = 0.5 * (lo + hi);
      best.cx = base.x + e.x * mid + nrm.x * 0.5 * height;
      best.cy = base.y + e.y * mid + nrm.y * 0.5 * height;
      const bool along_is_long = along >= height;
      const ImagePoint long_dir = along_is_long ? e : nrm;
      best.h = along_is_long ? along : height;
      best.w = along_is_long ? height : along;
      double theta = normalize_angle(std::atan2(-long_dir.x, long_dir.y) * 180.0 / std::numbers::pi);
      if (best.h - best.w <= 1e-12 * best.h) theta = std::fmod(theta, 90.0);
      best.theta = theta;
    }
  }
  best.category = 0;
  return best;
}

inline OrientedBox quad_to_obb(const Quad& quad) { return min_area_rect(quad); }

// The four corners of a box, in order around the rectangle.
inline Quad box_corners(const OrientedBox& g) {
  const double t = deg_to_rad(g.theta);
  const ImagePoint u{std::cos(t), std::sin(t)};   // along w
  const ImagePoint v{-std::sin(t), std::cos(t)};  // along h
  const double hw = 0.5 * g.w, hh = 0.5 * g.h;
  Quad q;
  const double sa[4] = {-1, 1, 1, -1};
  const double sb[4] = {-1, -1, 1, 1};
  for (int i = 0; i < 4; ++i) {
    q[i] = {g.cx + sa[i] * hw * u.x + sb[i] * hh * v.x, g.cy + sa[i] * hw * u.y + sb[i] * hh * v.y};
  }
  return q;
}

// Category name <-> id, ids in first-appearance order.
class CategoryDictionary {
 public:
  int id_for(const std::string& name) {
    if (auto id = find(name)) return *id;
    names_.push_back(name);
    return static_cast<int>(names_.size() - 1);
  }
  std::optional<int> find(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return static_cast<int>(i);
    return std::nullopt;
  }
  const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  // One name per line; blank lines and '#' comments ignored.
  static CategoryDictionary from_text(std::string_view content) {
    CategoryDictionary d;
    text::for_each_line(content, [&](std::size_t, std::string_view raw) {
      const auto line = text::trim(raw);
      if (line.empty() || line.front() == '#') return;
      d.id_for(std::string(line));
    });
    return d;
  }

  std::string to_text() const {
    std::string out;
    for (std::size_t i = 0; i < names_.size(); ++i) out += std::to_string(i) + " " + names_[i] + "\n";
    return out;
  }

  friend bool operator==(const CategoryDictionary&, const CategoryDictionary&) = default;

 private:
  std::vector<std::string> names_;
};

struct Scene {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::vector<OrientedBox> boxes;
  std::vector<bool> difficult;  // parallel to boxes
  CategoryDictionary categories;
};

// Converts records to canonical boxes. When the dictionary is frozen, unknown
// categories are an error instead of being appended.
inline Scene build_scene(std::string image_id, int width, int height,
                         std::span<const DotaRecord> records, CategoryDictionary& dict,
                         bool filter_difficult = false, bool frozen_dictionary = false) {
  Scene s;
  s.image_id = std::move(image_id);
  s.width = width;
  s.height = height;
  for (const auto& r : records) {
    if (filter_difficult && r.difficult) continue;
    int cat = 0;
    if (frozen_dictionary) {
      const auto id = dict.find(r.category);
      if (!id) throw std::invalid_argument("scene " + s.image_id + ": unknown category '" + r.category + "'");
      cat = *id;
    } else {
      cat = dict.id_for(r.category);
    }
    OrientedBox g = quad_to_obb(r.quad);
    g.category = cat;
    s.boxes.push_back(g);
    s.difficult.push_back(r.difficult != 0);
  }
  s.categories = dict;
  return s;
}

struct TileSpec {
  int window = 600;
  int stride = 450;
  int resize_to = 800;

  void validate() const {
    if (window <= 0 || stride <= 0 || stride > window || resize_to <= 0) {
      throw std::invalid_argument("tiling needs 0 < stride <= window and resize_to > 0");
    }
  }
};

// Window origins along one axis: 0, stride, 2*stride, ... with the last
// window pulled back to end at the image border.
inline std::vector<int> window_starts(int dim, int window, int stride) {
  std::vector<int> out{0};
  int s = 0;
  while (s + window < dim) {
    s += stride;
    if (s + window > dim) s = std::max(dim - window, 0);
    if (s <= out.back()) break;
    out.push_back(s);
  }
  return out;
}

// Crops a scene into overlapping windows and rescales each to resize_to.
// A box goes to the first window (lowest y, then lowest x origin) whose closed
// extent, clipped to the image, holds its center. Centers outside the image
// are dropped.
inline std::vector<Scene> tile_scene(const Scene& scene, const TileSpec& tiles) {
  tiles.validate();
  const auto xs = window_starts(scene.width, tiles.window, tiles.stride);
  const auto ys = window_starts(scene.height, tiles.window, tiles.stride);
  const double scale = static_cast<double>(tiles.resize_to) / tiles.window;

  std::vector<Scene> out;
  for (int y0 : ys) {
    for (int x0 : xs) {
      Scene t;
      t.image_id = scene.image_id + "__" + std::to_string(x0) + "__" + std::to_string(y0);
      t.width = tiles.resize_to;
      t.height = tiles.resize_to;
      t.categories = scene.categories;
      out.push_back(std::move(t));
    }
  }
  const double win = tiles.window;
  const double width = scene.width, height = scene.height;
  auto owner = [&](const OrientedBox& g) -> std::optional<std::size_t> {
    std::size_t w = 0;
    for (int y0 : ys)
      for (int x0 : xs) {
        if (g.cx >= x0 && g.cx <= std::min(x0 + win, width) && g.cy >= y0 && g.cy <= std::min(y0 + win, height))
          return w;
        ++w;
      }
    return std::nullopt;
  };
  for (std::size_t b = 0; b < scene.boxes.size(); ++b) {
    const OrientedBox& g = scene.boxes[b];
    const auto w = owner(g);
    if (!w) continue;
    const int x0 = xs[*w % xs.size()];
    const int y0 = ys[*w / xs.size()];
    OrientedBox m = g;
    m.cx = (g.cx - x0) * scale;
    m.cy = (g.cy - y0) * scale;
    m.w = g.w * scale;
    m.h = g.h * scale;
    out[*w].boxes.push_back(m);
    out[*w].difficult.push_back(b < scene.difficult.size() && scene.difficult[b]);
  }
  return out;
}

// Sidecar image sizes: "scene_id,width,height" per line, '#' comments.
inline std::map<std::string, std::pair<int, int>> parse_dims(std::string_view content) {
  std::map<std::string, std::pair<int, int>> out;
  std::vector<std::size_t> bad;
  std::ostringstream msg;
  text::for_each_line(content, [&](std::size_t lineno, std::string_view raw) {
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') return;
    const auto f = text::split(line, ',');
    if (f.size() != 3) {
      bad.push_back(lineno);
      msg << "\n  line " << lineno << ": expected id,width,height";
      return;
    }
    const auto w = text::parse_int(text::trim(f[1]));
    const auto h = text::parse_int(text::trim(f[2]));
    if (!w || !h || *w <= 0 || *h <= 0) {
      bad.push_back(lineno);
      msg << "\n  line " << lineno << ": width and height must be positive integers";
      return;
    }
    out[std::string(text::trim(f[0]))] = {static_cast<int>(*w), static_cast<int>(*h)};
  });
  if (!bad.empty()) throw ParseError("malformed dimension file" + msg.str(), std::move(bad));
  return out;
}

}  // namespace rotassign
