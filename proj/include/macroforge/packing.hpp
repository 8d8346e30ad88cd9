#pragma once

#include <span>
#include <vector>

#include "macroforge/geometry.hpp"
#include "macroforge/netlist.hpp"
#include "macroforge/rng.hpp"

namespace mf {

enum class Corner { BL = 0, BR = 1, TL = 2, TR = 3 };

inline Point corner_point(Corner c, const ChipOutline& outline) {
  switch (c) {
    case Corner::BL: return {0.0, 0.0};
    case Corner::BR: return {outline.width, 0.0};
    case Corner::TL: return {0.0, outline.height};
    default: return {outline.width, outline.height};
  }
}

struct TreeNode {
  int macro_id = -1;
  int left = -1;
  int right = -1;
  int parent = -1;
  bool used = false;
};

// One corner's B*-tree over an arena of nodes. Value-semantic and cheap
// to copy, so candidate trees can be snapshotted freely.
struct PackingTree {
  Corner corner = Corner::BL;
  std::vector<TreeNode> nodes;
  int root = -1;

  int size() const;
  bool empty() const { return root < 0; }
  std::vector<int> preorder() const;   // arena indices, pre-order
  std::vector<int> used_nodes() const; // arena indices, ascending
  int add_node(int macro_id);
  void check_consistent() const;       // debug aid, throws on corruption
};

// Empty child position: parent arena index (-1 for the root slot of an
// empty tree) plus which side.
struct SlotRef {
  int parent = -1;
  bool right = false;
};

struct PlacedRect {
  int macro_id = -1;
  Rect rect;  // chip coordinates, halo not included
};

struct PackedPlacement {
  std::vector<PlacedRect> rects;  // pre-order
  bool out_of_bounds = false;
  bool overlap_other_corner = false;
  bool moved_fixed = false;

  bool legal() const { return !out_of_bounds && !overlap_other_corner && !moved_fixed; }
};

struct MutationConfig {
  double continue_probability = 2.0 / 3.0;
};

// Macro dimensions, indexed by macro (instance) id.
struct MacroSizes {
  std::span<const double> widths;
  std::span<const double> heights;
};

PackedPlacement pack(const PackingTree& tree, const ChipOutline& outline,
                     const MacroSizes& sizes, double halo = 0.0);

// Applies one mutation operator: 0 = swap children, 1 = rotate-left,
// 2 = rotate-right (no-op when the pivot lacks the needed child).
void apply_mutation(PackingTree& tree, int op, int node, Rng& rng);

// Geometric-length mutation sequence; returns the number of operators applied.
int mutate(PackingTree& tree, const MutationConfig& config, Rng& rng);

std::vector<SlotRef> enumerate_slots(const PackingTree& tree);

// Attaches a randomly shaped subtree over the given macros at the slot.
// Returns the arena indices of the new nodes (first is the subtree root).
std::vector<int> attach_subtree(PackingTree& tree, const SlotRef& slot,
                                const std::vector<int>& group_macros, Rng& rng);

// Removes the subtree rooted at the given arena index.
void detach_subtree(PackingTree& tree, int subtree_root);

}  // namespace mf
