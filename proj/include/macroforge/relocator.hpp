#pragma once

#include <array>
#include <limits>

#include "macroforge/connectivity.hpp"
#include "macroforge/packing.hpp"

namespace mf {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct CostWeights {
  std::array<double, 7> w{0.4, 0.4, 1.0, 1.6, 1.6, 1.6, 1.0};
  std::array<double, 4> alpha{5.0, 0.5, 4.0, 1.0};
  // The preference formula mixes area and length units. When set, each of
  // its four terms is min-max scaled to [0,1] across the current groups and
  // corners before the alpha weights are applied.
  bool normalize_preference = false;
};

struct IoRegions {
  std::vector<Rect> rects;

  static IoRegions from_ports(const Design& design, double depth_frac,
                              double width_frac);

  // Union area of the keepouts inside the given window.
  double area_in(const Rect& window) const { return covered_area(window, rects); }
  double overlap_with(const Rect& r) const { return covered_area(r, rects); }
};

struct PreferenceMatrix {
  int n_groups = 0;
  std::vector<double> pref;  // n_groups x 4, -inf = banned

  double& at(int group, int corner) { return pref[static_cast<size_t>(group) * 4 + corner]; }
  double at(int group, int corner) const { return pref[static_cast<size_t>(group) * 4 + corner]; }

  // Highest non-banned entry; ties broken by (group, corner) ascending.
  // Returns false if every entry is banned.
  bool argmax(int& group, int& corner) const;
};

struct PenaltyVector {
  double disp = 0.0;
  double conn = 0.0;
  double peri = 0.0;
  double group_bb = 0.0;
  double corner_bb = 0.0;
  double io = 0.0;
  double notch = 0.0;

  double term(int t) const {
    switch (t) {
      case 0: return disp;
      case 1: return conn;
      case 2: return peri;
      case 3: return group_bb;
      case 4: return corner_bb;
      case 5: return io;
      default: return notch;
    }
  }
};

struct Candidate {
  Corner corner = Corner::BL;
  SlotRef slot;
  PackingTree tree;          // full corner tree including the group subtree
  PackedPlacement packed;    // result of packing `tree`
  std::vector<int> new_nodes;
  PenaltyVector raw;
  double cost = kInf;
  bool feasible = false;
};

// Everything cost evaluation needs besides the candidate itself.
struct RelocateContext {
  const Design* design = nullptr;
  const ConnectionMatrix* matrix = nullptr;
  IoRegions io;
  CostWeights weights;
  double halo = 0.0;
  double notch_threshold = 0.0;

  // Current layout state.
  std::vector<Rect> placed_rects;            // pre-placed (input-fixed) macros
  std::vector<std::pair<int, Point>> placed_macros;  // (macro ordinal, center)
  std::array<std::vector<Rect>, 4> corner_rects;
  std::vector<Point> cluster_pos;            // per cluster
  std::vector<Point> ellipse_pos;            // per macro ordinal (unplaced only valid)

  double macro_width(int macro_id) const { return design->instances[macro_id].width; }
  double macro_height(int macro_id) const { return design->instances[macro_id].height; }
};

PreferenceMatrix compute_preference(const std::vector<MacroGroup>& groups,
                                    const RelocateContext& ctx);

// Raw penalties of a feasible candidate. Infeasible candidates never get
// this far; they short-circuit to +inf.
PenaltyVector evaluate_raw(const Candidate& cand, const MacroGroup& group,
                           const RelocateContext& ctx);

// Min-max normalization per term across the batch; constant terms
// normalize to 0. Infeasible candidates keep +inf and are excluded from
// the statistics.
void score_batch(std::vector<Candidate*>& batch, const CostWeights& weights);

double notch_area(const std::vector<Rect>& rects, const ChipOutline& outline,
                  double threshold);

// Whether the candidate conflicts with the rest of the layout; fills the
// legality flags.
void check_conflicts(Candidate& cand, const MacroGroup& group,
                     const RelocateContext& ctx,
                     const std::vector<PlacedRect>& before);

std::vector<Candidate> try_assignment(const MacroGroup& group, Corner corner,
                                      const PackingTree& tree,
                                      const RelocateContext& ctx, int n_eps,
                                      Rng& rng);

Candidate corner_packing_search(std::vector<Candidate> seeds,
                                const MacroGroup& group,
                                const RelocateContext& ctx, int n_total,
                                int n_pop, Rng& rng);

struct RelocateBudgets {
  int n_total = 100;
  int n_eps = 20;
  int n_pop = 5;
  int n_min = 1;
};

struct RelocateEvent {
  int group_id = -1;
  Corner corner = Corner::BL;
  int slot_count = 0;
  double best_cost = 0.0;
};

struct RelocateResult {
  std::vector<int> placed_group_ids;
  std::vector<RelocateEvent> events;
  int macros_placed = 0;
};

// One pass of the macro relocating loop: places groups by descending
// preference until at least n_min macros are fixed (or no feasible
// assignment remains). Mutates the context's layout state and trees.
RelocateResult relocate(std::vector<MacroGroup>& unplaced_groups,
                        std::array<PackingTree, 4>& trees, RelocateContext& ctx,
                        const RelocateBudgets& budgets,
                        std::vector<std::optional<Point>>& macro_positions,
                        Rng& rng);

}  // namespace mf
