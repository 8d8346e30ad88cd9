#include "macroforge/evaluator.hpp"

#include <sstream>

namespace mf {

double placement_hpwl(const Design& design,
                      const std::map<std::string, Point>& macro_positions,
                      const std::vector<CellCluster>& clusters,
                      const std::vector<Point>& centroids) {
  std::vector<Point> positions(design.instances.size());
  std::vector<bool> resolved(design.instances.size(), false);
  for (const auto& inst : design.instances) {
    if (inst.is_macro()) {
      auto it = macro_positions.find(inst.name);
      if (it == macro_positions.end())
        throw DesignError("unresolved pin: no position for macro '" + inst.name + "'");
      positions[inst.id] = it->second;
      resolved[inst.id] = true;
    }
  }
  for (const auto& cluster : clusters) {
    for (int id : cluster.member_cell_ids) {
      positions[id] = centroids[cluster.id];
      resolved[id] = true;
    }
  }

  double total = 0.0;
  for (const auto& net : design.nets) {
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (const auto& pin : net.pins) {
      Point p;
      if (pin.is_port) {
        p = {design.ports[pin.index].x, design.ports[pin.index].y};
      } else {
        if (!resolved[pin.index])
          throw DesignError("unresolved pin on instance '" +
                            design.instances[pin.index].name + "'");
        p = positions[pin.index];
      }
      p.x += pin.dx;
      p.y += pin.dy;
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    total += (max_x - min_x) + (max_y - min_y);
  }
  return total;
}

double total_overlap_area(const std::vector<Rect>& rects) {
  double total = 0.0;
  for (size_t i = 0; i < rects.size(); ++i)
    for (size_t j = i + 1; j < rects.size(); ++j)
      total += intersection_area(rects[i], rects[j]);
  return total;
}

namespace {

std::string group_color(int group_id) {
  // Rotate hues; fixed saturation/lightness keeps adjacent groups apart.
  int hue = (group_id * 47) % 360;
  std::ostringstream ss;
  ss << "hsl(" << hue << ",65%,62%)";
  return ss.str();
}

}  // namespace

std::string render_svg(const Design& design,
                       const std::map<std::string, Point>& macro_positions,
                       const std::vector<MacroGroup>& groups,
                       const IoRegions& io, const Ellipse* final_ellipse) {
  const double W = design.outline.width;
  const double H = design.outline.height;
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  // Flip y so the chip origin is bottom-left.
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W << " "
      << H << "\" width=\"800\" height=\"" << 800.0 * H / W << "\">\n";
  svg << "<g transform=\"translate(0," << H << ") scale(1,-1)\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H
      << "\" fill=\"#fafaf5\" stroke=\"#333\" stroke-width=\"" << W / 400.0
      << "\"/>\n";

  for (const auto& r : io.rects)
    svg << "<rect x=\"" << r.x << "\" y=\"" << r.y << "\" width=\"" << r.w
        << "\" height=\"" << r.h << "\" fill=\"#d33\" fill-opacity=\"0.18\"/>\n";

  if (final_ellipse)
    svg << "<ellipse cx=\"" << final_ellipse->center.x << "\" cy=\""
        << final_ellipse->center.y << "\" rx=\"" << final_ellipse->a
        << "\" ry=\"" << final_ellipse->b
        << "\" fill=\"none\" stroke=\"#888\" stroke-dasharray=\"2,2\" "
           "stroke-width=\""
        << W / 600.0 << "\"/>\n";

  std::map<int, int> group_of_macro;
  for (const auto& g : groups)
    for (int id : g.member_macro_ids) group_of_macro[id] = g.id;

  for (int id : design.macro_ids) {
    const Instance& inst = design.instances[id];
    auto it = macro_positions.find(inst.name);
    if (it == macro_positions.end()) continue;
    double x = it->second.x - inst.width / 2.0;
    double y = it->second.y - inst.height / 2.0;
    auto git = group_of_macro.find(id);
    std::string fill = git != group_of_macro.end() ? group_color(git->second)
                                                   : std::string("#cccc66");
    svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << inst.width
        << "\" height=\"" << inst.height << "\" fill=\"" << fill
        << "\" stroke=\"#222\" stroke-width=\"" << W / 800.0 << "\"/>\n";
  }

  for (const auto& port : design.ports) {
    double s = 0.006 * std::min(W, H);
    svg << "<rect x=\"" << port.x - s << "\" y=\"" << port.y - s
        << "\" width=\"" << 2 * s << "\" height=\"" << 2 * s
        << "\" fill=\"#36c\"/>\n";
  }

  svg << "</g>\n</svg>\n";
  return svg.str();
}

void StageTimer::start(const std::string& stage) {
  if (running_) stop();
  current_ = stage;
  started_ = std::chrono::steady_clock::now();
  running_ = true;
}

void StageTimer::stop() {
  if (!running_) return;
  auto now = std::chrono::steady_clock::now();
  seconds_[current_] +=
      std::chrono::duration<double>(now - started_).count();
  running_ = false;
}

double StageTimer::total() const {
  double total = 0.0;
  for (const auto& [stage, sec] : seconds_) total += sec;
  return total;
}

}  // namespace mf
