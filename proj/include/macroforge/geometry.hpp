#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace mf {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct Rect {
  double x = 0.0;  // lower-left corner
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double x2() const { return x + w; }
  double y2() const { return y + h; }
  double area() const { return w * h; }
  Point center() const { return {x + w / 2.0, y + h / 2.0}; }

  Rect inflated(double margin) const {
    return {x - margin, y - margin, w + 2.0 * margin, h + 2.0 * margin};
  }
};

inline double intersection_area(const Rect& a, const Rect& b) {
  double dx = std::min(a.x2(), b.x2()) - std::max(a.x, b.x);
  double dy = std::min(a.y2(), b.y2()) - std::max(a.y, b.y);
  if (dx <= 0.0 || dy <= 0.0) return 0.0;
  return dx * dy;
}

inline Rect clip(const Rect& r, const Rect& bounds) {
  double x1 = std::max(r.x, bounds.x);
  double y1 = std::max(r.y, bounds.y);
  double x2 = std::min(r.x2(), bounds.x2());
  double y2 = std::min(r.y2(), bounds.y2());
  if (x2 <= x1 || y2 <= y1) return {x1, y1, 0.0, 0.0};
  return {x1, y1, x2 - x1, y2 - y1};
}

// Area of the union of rectangles via coordinate compression.
double union_area(const std::vector<Rect>& rects);

// Area of target covered by the union of rects.
double covered_area(const Rect& target, const std::vector<Rect>& rects);

}  // namespace mf
