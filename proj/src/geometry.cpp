#include "macroforge/geometry.hpp"

namespace mf {

double union_area(const std::vector<Rect>& rects) {
  std::vector<double> xs, ys;
  xs.reserve(rects.size() * 2);
  ys.reserve(rects.size() * 2);
  for (const auto& r : rects) {
    if (r.w <= 0.0 || r.h <= 0.0) continue;
    xs.push_back(r.x);
    xs.push_back(r.x2());
    ys.push_back(r.y);
    ys.push_back(r.y2());
  }
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  double total = 0.0;
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    for (size_t j = 0; j + 1 < ys.size(); ++j) {
      double cx = (xs[i] + xs[i + 1]) / 2.0;
      double cy = (ys[j] + ys[j + 1]) / 2.0;
      for (const auto& r : rects) {
        if (cx > r.x && cx < r.x2() && cy > r.y && cy < r.y2()) {
          total += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
          break;
        }
      }
    }
  }
  return total;
}

double covered_area(const Rect& target, const std::vector<Rect>& rects) {
  if (target.w <= 0.0 || target.h <= 0.0) return 0.0;
  std::vector<Rect> clipped;
  clipped.reserve(rects.size());
  for (const auto& r : rects) {
    Rect c = clip(r, target);
    if (c.w > 0.0 && c.h > 0.0) clipped.push_back(c);
  }
  return union_area(clipped);
}

}  // namespace mf
