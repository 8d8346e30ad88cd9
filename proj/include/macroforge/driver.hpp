#pragma once

#include <map>
#include <string>

#include "macroforge/abplace.hpp"
#include "macroforge/connectivity.hpp"
#include "macroforge/evaluator.hpp"
#include "macroforge/netlist.hpp"
#include "macroforge/prototyper.hpp"
#include "macroforge/relocator.hpp"

namespace mf {

struct PipelineConfig {
  // Prototype density schedule.
  double td_init = 0.92;
  double td_finish = 0.5;
  // Ellipse schedule.
  double beta_init = 0.9;
  double beta_finish = 0.5;
  double gamma = std::pow(0.5 / 0.9, 0.1);
  // ABPlace.
  double lambda = 0.02;
  int abplace_max_iters = 500;
  double abplace_tol = 1e-6;
  // Relocating.
  CostWeights weights;
  int n_total = 100;
  int n_eps = 20;
  int n_pop = 5;
  double halo = 0.0;
  double io_depth_frac = 0.05;
  double io_width_frac = 0.05;
  double notch_threshold = -1.0;  // <= 0: 2x mean std-cell height
  // Outer loop.
  int max_outer_iters = 20;
  int target_clusters = 16;
  int d_max = 3;
  uint64_t seed = 1;
  // Prototype source: empty = internal placer, otherwise a file path.
  std::string prototype_file;
  PrototyperOptions prototyper;

  int n_min(int total_macros) const { return (total_macros + 9) / 10; }

  static PipelineConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

struct IterationLog {
  int k = 0;
  double density = 0.0;
  double ellipse_a = 0.0;
  double ellipse_b = 0.0;
  double prototype_hpwl = 0.0;
  double abplace_initial = 0.0;
  double abplace_final = 0.0;
  std::vector<double> abplace_trace;
  std::vector<RelocateEvent> relocate_events;
  int macros_placed = 0;
};

struct RunState {
  int k = 0;
  std::array<PackingTree, 4> trees;
  std::vector<std::optional<Point>> macro_positions;  // by instance id
  std::vector<MacroGroup> unplaced_groups;
  Ellipse ellipse;
  Prototype last_prototype;
  std::vector<IterationLog> log;

  int placed_count(const Design& design) const;
};

struct FinalPlacement {
  std::map<std::string, Point> macro_positions;
  Metrics metrics;
  std::vector<MacroGroup> groups;
  std::vector<CellCluster> clusters;
  std::vector<Point> centroids;
  IoRegions io;
  Ellipse last_ellipse;
  std::vector<IterationLog> log;
  int iterations = 0;
};

// The recursive pipeline: prototype, centroids, ellipse, angle
// optimization, relocating, fix; repeated until every macro is placed.
class Pipeline {
 public:
  Pipeline(const Design& design, const PipelineConfig& config);

  // One outer iteration; requires unplaced macros.
  void step(RunState& state);

  FinalPlacement run();

  const ConnectionMatrix& matrix() const { return matrix_; }
  const std::vector<MacroGroup>& groups() const { return groups_; }
  const std::vector<CellCluster>& clusters() const { return clusters_; }
  const IoRegions& io() const { return io_; }
  RunState initial_state() const;
  StageTimer& timer() { return timer_; }

 private:
  RelocateContext make_context(const std::vector<Point>& centroids,
                               const std::vector<Point>& ellipse_pos,
                               const RunState& state) const;

  const Design& design_;
  PipelineConfig config_;
  std::vector<MacroGroup> groups_;
  std::vector<CellCluster> clusters_;
  ConnectionMatrix matrix_;
  IoRegions io_;
  double notch_threshold_ = 0.0;
  double disp_ = 0.0;
  Rng rng_;
  std::vector<Point> centroids_;
  StageTimer timer_;
};

FinalPlacement run_pipeline(const Design& design, const PipelineConfig& config);

// placement.json / metrics.json serialization (byte-stable per run).
std::string placement_to_json(const FinalPlacement& placement);
std::map<std::string, Point> placement_from_json(const std::string& text);
std::string metrics_to_json(const Metrics& metrics);
std::string timing_to_json(const Metrics& metrics);

}  // namespace mf
