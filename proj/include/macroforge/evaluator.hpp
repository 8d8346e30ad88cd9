#pragma once

#include <chrono>
#include <map>
#include <string>

#include "macroforge/abplace.hpp"
#include "macroforge/connectivity.hpp"
#include "macroforge/geometry.hpp"
#include "macroforge/netlist.hpp"
#include "macroforge/relocator.hpp"

namespace mf {

struct Metrics {
  double hpwl = 0.0;
  double total_overlap = 0.0;
  double total_notch = 0.0;
  double mean_periphery_dist = 0.0;
  double total_displacement = 0.0;
  double io_overlap = 0.0;
  std::map<std::string, double> stage_seconds;
  double total_seconds = 0.0;
};

// Resolves every pin to a position: macros by the placement map, cells by
// their cluster centroid, ports at their fixed location.
double placement_hpwl(const Design& design,
                      const std::map<std::string, Point>& macro_positions,
                      const std::vector<CellCluster>& clusters,
                      const std::vector<Point>& centroids);

double total_overlap_area(const std::vector<Rect>& rects);

std::string render_svg(const Design& design,
                       const std::map<std::string, Point>& macro_positions,
                       const std::vector<MacroGroup>& groups,
                       const IoRegions& io, const Ellipse* final_ellipse);

// Wall-clock accumulator for the runtime breakdown.
class StageTimer {
 public:
  void start(const std::string& stage);
  void stop();
  std::map<std::string, double> breakdown() const { return seconds_; }
  double total() const;

 private:
  std::map<std::string, double> seconds_;
  std::string current_;
  std::chrono::steady_clock::time_point started_;
  bool running_ = false;
};

}  // namespace mf
