#include "macroforge/packing.hpp"

#include <map>
#include <stdexcept>

namespace mf {

int PackingTree::size() const {
  int count = 0;
  for (const auto& node : nodes)
    if (node.used) ++count;
  return count;
}

std::vector<int> PackingTree::preorder() const {
  std::vector<int> order;
  std::vector<int> stack;
  if (root >= 0) stack.push_back(root);
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    order.push_back(v);
    if (nodes[v].right >= 0) stack.push_back(nodes[v].right);
    if (nodes[v].left >= 0) stack.push_back(nodes[v].left);
  }
  return order;
}

std::vector<int> PackingTree::used_nodes() const {
  std::vector<int> out;
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].used) out.push_back(static_cast<int>(i));
  return out;
}

int PackingTree::add_node(int macro_id) {
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].used) {
      nodes[i] = TreeNode{macro_id, -1, -1, -1, true};
      return static_cast<int>(i);
    }
  }
  nodes.push_back(TreeNode{macro_id, -1, -1, -1, true});
  return static_cast<int>(nodes.size()) - 1;
}

void PackingTree::check_consistent() const {
  auto order = preorder();
  if (static_cast<int>(order.size()) != size())
    throw std::logic_error("packing tree is not a proper binary tree");
  for (int v : order) {
    for (int child : {nodes[v].left, nodes[v].right})
      if (child >= 0 && nodes[child].parent != v)
        throw std::logic_error("packing tree parent link mismatch");
  }
}

namespace {

// Piecewise-constant packed-height profile over the corner-local x-axis.
class Contour {
 public:
  Contour() { segments_[0.0] = 0.0; }

  double query(double x1, double x2) const {
    auto it = segments_.upper_bound(x1);
    --it;
    double top = 0.0;
    for (; it != segments_.end() && it->first < x2; ++it)
      top = std::max(top, it->second);
    return top;
  }

  void raise(double x1, double x2, double height) {
    double after = height_at(x2);
    auto lo = segments_.lower_bound(x1);
    auto hi = segments_.lower_bound(x2);
    segments_.erase(lo, hi);
    segments_[x1] = height;
    segments_[x2] = after;
  }

 private:
  double height_at(double x) const {
    auto it = segments_.upper_bound(x);
    --it;
    return it->second;
  }

  std::map<double, double> segments_;
};

Rect to_chip_coords(Corner corner, const ChipOutline& outline, double x,
                    double y, double w, double h) {
  double cx = x, cy = y;
  if (corner == Corner::BR || corner == Corner::TR) cx = outline.width - x - w;
  if (corner == Corner::TL || corner == Corner::TR) cy = outline.height - y - h;
  return {cx, cy, w, h};
}

}  // namespace

PackedPlacement pack(const PackingTree& tree, const ChipOutline& outline,
                     const MacroSizes& sizes, double halo) {
  PackedPlacement out;
  if (tree.empty()) return out;

  Contour contour;
  // Corner-local x of each placed node's halo box, assigned in pre-order:
  // root at the corner, a left child flush after its parent, a right
  // child above its parent at the same x.
  std::vector<double> local_x(tree.nodes.size(), 0.0);
  for (int v : tree.preorder()) {
    const TreeNode& node = tree.nodes[v];
    double w = sizes.widths[node.macro_id] + 2.0 * halo;
    double h = sizes.heights[node.macro_id] + 2.0 * halo;
    double x;
    if (node.parent < 0) {
      x = 0.0;
    } else if (tree.nodes[node.parent].left == v) {
      x = local_x[node.parent] +
          sizes.widths[tree.nodes[node.parent].macro_id] + 2.0 * halo;
    } else {
      x = local_x[node.parent];
    }
    local_x[v] = x;
    double y = contour.query(x, x + w);
    contour.raise(x, x + w, y + h);

    Rect halo_box = to_chip_coords(tree.corner, outline, x, y, w, h);
    Rect rect{halo_box.x + halo, halo_box.y + halo, w - 2.0 * halo, h - 2.0 * halo};
    out.rects.push_back({node.macro_id, rect});
    if (x + w > outline.width + 1e-9 || y + h > outline.height + 1e-9)
      out.out_of_bounds = true;
  }
  return out;
}

void apply_mutation(PackingTree& tree, int op, int node, Rng& rng) {
  (void)rng;
  TreeNode& n = tree.nodes[node];
  if (op == 0) {
    // Swap children.
    std::swap(n.left, n.right);
    return;
  }
  bool left_rot = op == 1;
  int pivot = node;
  int child = left_rot ? n.right : n.left;
  if (child < 0) return;  // degenerate: no-op

  TreeNode& c = tree.nodes[child];
  int grand = left_rot ? c.left : c.right;
  // Child takes the pivot's place.
  c.parent = n.parent;
  if (n.parent < 0) {
    tree.root = child;
  } else if (tree.nodes[n.parent].left == pivot) {
    tree.nodes[n.parent].left = child;
  } else {
    tree.nodes[n.parent].right = child;
  }
  if (left_rot) {
    c.left = pivot;
    n.right = grand;
  } else {
    c.right = pivot;
    n.left = grand;
  }
  n.parent = child;
  if (grand >= 0) tree.nodes[grand].parent = pivot;
}

int mutate(PackingTree& tree, const MutationConfig& config, Rng& rng) {
  int applied = 0;
  if (tree.empty()) return applied;
  while (rng.uniform() < config.continue_probability) {
    auto used = tree.used_nodes();
    int node = used[rng.uniform_int(0, static_cast<int>(used.size()) - 1)];
    int op = rng.uniform_int(0, 2);
    apply_mutation(tree, op, node, rng);
    ++applied;
  }
  return applied;
}

std::vector<SlotRef> enumerate_slots(const PackingTree& tree) {
  if (tree.empty()) return {SlotRef{-1, false}};
  std::vector<SlotRef> slots;
  for (int v : tree.preorder()) {
    if (tree.nodes[v].left < 0) slots.push_back({v, false});
    if (tree.nodes[v].right < 0) slots.push_back({v, true});
  }
  return slots;
}

std::vector<int> attach_subtree(PackingTree& tree, const SlotRef& slot,
                                const std::vector<int>& group_macros, Rng& rng) {
  std::vector<int> order = group_macros;
  rng.shuffle(order);

  std::vector<int> added;
  added.reserve(order.size());
  int sub_root = tree.add_node(order.front());
  added.push_back(sub_root);

  // Random shape: each further node lands in a random open slot of the
  // growing subtree.
  std::vector<SlotRef> open{{sub_root, false}, {sub_root, true}};
  for (size_t i = 1; i < order.size(); ++i) {
    int pick = rng.uniform_int(0, static_cast<int>(open.size()) - 1);
    SlotRef s = open[pick];
    open.erase(open.begin() + pick);
    int v = tree.add_node(order[i]);
    added.push_back(v);
    tree.nodes[v].parent = s.parent;
    (s.right ? tree.nodes[s.parent].right : tree.nodes[s.parent].left) = v;
    open.push_back({v, false});
    open.push_back({v, true});
  }

  tree.nodes[sub_root].parent = slot.parent;
  if (slot.parent < 0)
    tree.root = sub_root;
  else
    (slot.right ? tree.nodes[slot.parent].right : tree.nodes[slot.parent].left) =
        sub_root;
  return added;
}

void detach_subtree(PackingTree& tree, int subtree_root) {
  int parent = tree.nodes[subtree_root].parent;
  if (parent < 0) {
    tree.root = -1;
  } else if (tree.nodes[parent].left == subtree_root) {
    tree.nodes[parent].left = -1;
  } else {
    tree.nodes[parent].right = -1;
  }
  std::vector<int> stack{subtree_root};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (tree.nodes[v].left >= 0) stack.push_back(tree.nodes[v].left);
    if (tree.nodes[v].right >= 0) stack.push_back(tree.nodes[v].right);
    tree.nodes[v] = TreeNode{};
  }
}

}  // namespace mf
