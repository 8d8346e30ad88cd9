#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "macroforge/connectivity.hpp"
#include "macroforge/relocator.hpp"

using namespace mf;

namespace {

struct Fixture {
  Design design;
  ConnectionMatrix matrix;
  std::vector<CellCluster> clusters;
  RelocateContext ctx;
  std::vector<MacroGroup> groups;

  explicit Fixture(uint64_t seed = 1, int n_macros = 8) {
    design = generate_synthetic(seed, n_macros, 150, 220, {100, 100});
    clusters = cluster_cells(design, 4);
    matrix = build_matrix(design, clusters, extract_direct(design, clusters),
                          extract_dataflow(design, clusters, 3));
    groups = group_macros(design);
    ctx.design = &design;
    ctx.matrix = &matrix;
    ctx.io = IoRegions::from_ports(design, 0.05, 0.05);
    ctx.notch_threshold = 2.0;
    for (const CellCluster& c : clusters) ctx.cluster_pos.push_back({50, 50});
    // Ellipse stand-in: macros on a ring around the center.
    for (int i = 0; i < design.macro_count(); ++i) {
      double t = 2 * M_PI * i / design.macro_count();
      ctx.ellipse_pos.push_back({50 + 40 * std::cos(t), 50 + 40 * std::sin(t)});
    }
  }
};

}  // namespace

TEST_CASE("io keepouts are clipped rectangles") {
  Design d;
  d.outline = {100, 100};
  d.ports.push_back({0, "p", 0, 5});  // near the BL corner on the left edge
  IoRegions io = IoRegions::from_ports(d, 0.05, 0.1);
  REQUIRE(io.rects.size() == 1);
  const Rect& r = io.rects[0];
  CHECK(r.x == 0);
  CHECK(r.w == doctest::Approx(5));   // 5% of min(W,H) inward
  CHECK(r.y == doctest::Approx(0));   // span clipped at the boundary
  CHECK(r.y2() == doctest::Approx(10));
  CHECK(io.overlap_with({0, 0, 100, 100}) == doctest::Approx(r.area()));
}

TEST_CASE("preference formula hand check") {
  Fixture f;
  MacroGroup g;
  g.id = 0;
  g.member_macro_ids = {f.design.macro_ids[0]};
  g.width = 10;
  g.height = 10;  // A^MG = 100
  f.design.instances[f.design.macro_ids[0]].width = 10;
  f.design.instances[f.design.macro_ids[0]].height = 10;

  f.ctx.io.rects = {{0, 0, 5, 2}};            // 10 units inside BL quadrant
  f.ctx.corner_rects[0] = {{0, 0, 5, 8}};     // utilization 40, centroid (2.5,4)
  f.ctx.ellipse_pos[0] = {32.5, 44};          // dist to packed centroid = 50

  PreferenceMatrix pref = compute_preference({g}, f.ctx);
  CHECK(pref.at(0, 0) == doctest::Approx(5.0 * 100 - (0.5 * 40 + 4.0 * 10 + 1.0 * 50)));
  CHECK(pref.at(0, 0) == doctest::Approx(390.0));
}

TEST_CASE("argmax tie-break prefers lower group then lower corner") {
  Fixture f;
  MacroGroup a, b;
  a.id = 0;
  b.id = 1;
  a.member_macro_ids = {f.design.macro_ids[0]};
  b.member_macro_ids = {f.design.macro_ids[1]};
  a.width = b.width = 10;
  a.height = b.height = 10;
  f.ctx.io.rects.clear();
  for (auto& cr : f.ctx.corner_rects) cr.clear();
  f.ctx.ellipse_pos[0] = {50, 50};
  f.ctx.ellipse_pos[1] = {50, 50};  // equidistant from every corner

  PreferenceMatrix pref = compute_preference({a, b}, f.ctx);
  for (int c = 0; c < 4; ++c)
    CHECK(pref.at(0, c) == doctest::Approx(pref.at(1, c)));
  int gi = -1, ci = -1;
  REQUIRE(pref.argmax(gi, ci));
  CHECK(gi == 0);
  CHECK(ci == 0);
}

TEST_CASE("oversized keepout bans the corner column") {
  Fixture f;
  MacroGroup g;
  g.id = 0;
  g.member_macro_ids = {f.design.macro_ids[0]};
  g.width = 10;
  g.height = 10;
  f.ctx.io.rects = {{50, 0, 50, 30}};  // 1500 > half of the 2500 BR quadrant
  PreferenceMatrix pref = compute_preference({g}, f.ctx);
  CHECK(pref.at(0, 1) == -kInf);
  CHECK(pref.at(0, 0) > -kInf);
  int gi, ci;
  REQUIRE(pref.argmax(gi, ci));
  CHECK(ci != 1);
}

TEST_CASE("fully banned matrix reports no argmax") {
  PreferenceMatrix pref;
  pref.n_groups = 2;
  pref.pref.assign(8, -kInf);
  int gi, ci;
  CHECK_FALSE(pref.argmax(gi, ci));
}

TEST_CASE("notch area hand constructions") {
  ChipOutline outline{100, 100};
  CHECK(notch_area({}, outline, 5.0) == doctest::Approx(0.0));

  std::vector<Rect> gap2 = {{0, 0, 10, 40}, {12, 0, 10, 40}};
  CHECK(notch_area(gap2, outline, 5.0) == doctest::Approx(80.0));

  std::vector<Rect> gap10 = {{0, 0, 10, 40}, {20, 0, 10, 40}};
  CHECK(notch_area(gap10, outline, 5.0) == doctest::Approx(0.0));
}

TEST_CASE("two-candidate normalization preserves per-term rank") {
  Candidate lo, hi;
  lo.feasible = hi.feasible = true;
  lo.raw = {1, 2, 3, 4, 5, 6, 7};
  hi.raw = {2, 4, 6, 8, 10, 12, 14};
  std::vector<Candidate*> batch{&hi, &lo};
  CostWeights w;
  score_batch(batch, w);
  CHECK(lo.cost < hi.cost);
  CHECK(lo.cost == doctest::Approx(0.0));

  // Permutation invariance of the batch.
  Candidate lo2 = lo, hi2 = hi;
  std::vector<Candidate*> batch2{&lo2, &hi2};
  score_batch(batch2, w);
  CHECK(lo2.cost == doctest::Approx(lo.cost));
  CHECK(hi2.cost == doctest::Approx(hi.cost));
}

TEST_CASE("constant terms normalize to zero and infeasible stays infinite") {
  Candidate a, b, bad;
  a.feasible = b.feasible = true;
  a.raw = {3, 3, 3, 3, 3, 3, 3};
  b.raw = {3, 3, 3, 3, 3, 3, 3};
  bad.feasible = false;
  bad.cost = kInf;
  std::vector<Candidate*> batch{&a, &b, &bad};
  score_batch(batch, {});
  CHECK(a.cost == doctest::Approx(0.0));
  CHECK(b.cost == doctest::Approx(0.0));
  CHECK(bad.cost == kInf);
}

TEST_CASE("try_assignment on an empty corner") {
  Fixture f;
  MacroGroup g;
  g.id = 0;
  g.member_macro_ids = {f.design.macro_ids[0]};
  g.width = f.design.instances[f.design.macro_ids[0]].width;
  g.height = f.design.instances[f.design.macro_ids[0]].height;
  PackingTree tree;
  Rng rng(3);
  auto cands = try_assignment(g, Corner::BL, tree, f.ctx, 20, rng);
  REQUIRE(cands.size() == 1);  // empty tree has exactly one slot
  CHECK(cands[0].feasible);
  CHECK(cands[0].packed.rects[0].rect.x == doctest::Approx(0.0));
  CHECK(cands[0].packed.rects[0].rect.y == doctest::Approx(0.0));
}

TEST_CASE("oversized group yields no feasible candidate") {
  Fixture f;
  int m = f.design.macro_ids[0];
  f.design.instances[m].width = 150;  // wider than the die
  MacroGroup g;
  g.id = 0;
  g.member_macro_ids = {m};
  g.width = 150;
  g.height = 10;
  PackingTree tree;
  Rng rng(3);
  auto cands = try_assignment(g, Corner::BL, tree, f.ctx, 10, rng);
  CHECK(cands.empty());
}

TEST_CASE("slot coverage follows the k+1 law") {
  Fixture f;
  // Seed a 3-node tree in the corner.
  PackingTree tree;
  std::vector<int> pre{f.design.macro_ids[0], f.design.macro_ids[1],
                       f.design.macro_ids[2]};
  Rng rng(5);
  attach_subtree(tree, {-1, false}, pre, rng);
  REQUIRE(tree.size() == 3);

  MacroGroup g;
  g.id = 0;
  g.member_macro_ids = {f.design.macro_ids[3]};
  g.width = f.design.instances[f.design.macro_ids[3]].width;
  g.height = f.design.instances[f.design.macro_ids[3]].height;
  auto cands = try_assignment(g, Corner::BL, tree, f.ctx, 8, rng);
  CHECK(cands.size() <= 4);
  for (const Candidate& c : cands) CHECK(c.feasible);
}

TEST_CASE("corner_packing_search never loses to its seeds") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    Fixture f(seed);
    MacroGroup g;
    g.id = 0;
    g.member_macro_ids = {f.design.macro_ids[0], f.design.macro_ids[1]};
    g.width = f.design.instances[f.design.macro_ids[0]].width;
    g.height = f.design.instances[f.design.macro_ids[0]].height;
    f.design.instances[f.design.macro_ids[1]].width = g.width;
    f.design.instances[f.design.macro_ids[1]].height = g.height;
    PackingTree tree;
    Rng rng(seed);
    auto seeds = try_assignment(g, Corner::BL, tree, f.ctx, 20, rng);
    REQUIRE_FALSE(seeds.empty());
    double seed_best = kInf;
    for (const Candidate& c : seeds) seed_best = std::min(seed_best, c.cost);
    Candidate out = corner_packing_search(seeds, g, f.ctx, 100, 5, rng);
    CHECK(out.feasible);
    CHECK(out.cost <= seed_best + 1e-12);
  }
}

TEST_CASE("relocate places at least n_min macros legally") {
  Fixture f(2, 12);
  std::array<PackingTree, 4> trees;
  for (int c = 0; c < 4; ++c) trees[c].corner = static_cast<Corner>(c);
  std::vector<std::optional<Point>> positions(f.design.instances.size());
  std::vector<MacroGroup> groups = f.groups;
  Rng rng(9);
  RelocateBudgets budgets{100, 20, 5, 2};
  RelocateResult res = relocate(groups, trees, f.ctx, budgets, positions, rng);
  CHECK(res.macros_placed >= 2);

  std::vector<Rect> rects;
  for (int id : f.design.macro_ids) {
    if (!positions[id].has_value()) continue;
    const Instance& inst = f.design.instances[id];
    Rect r{positions[id]->x - inst.width / 2, positions[id]->y - inst.height / 2,
           inst.width, inst.height};
    CHECK(r.x >= -1e-9);
    CHECK(r.y >= -1e-9);
    CHECK(r.x2() <= 100 + 1e-9);
    CHECK(r.y2() <= 100 + 1e-9);
    rects.push_back(r);
  }
  for (size_t i = 0; i < rects.size(); ++i)
    for (size_t j = i + 1; j < rects.size(); ++j)
      CHECK(intersection_area(rects[i], rects[j]) <= 1e-9);
}

TEST_CASE("banned corner receives no macros end to end") {
  Fixture f(4, 8);
  f.ctx.io.rects = {{40, 0, 60, 55}};  // swamps the BR quadrant
  std::array<PackingTree, 4> trees;
  for (int c = 0; c < 4; ++c) trees[c].corner = static_cast<Corner>(c);
  std::vector<std::optional<Point>> positions(f.design.instances.size());
  std::vector<MacroGroup> groups = f.groups;
  Rng rng(11);
  RelocateBudgets budgets{100, 20, 5, 100};  // force placing everything
  relocate(groups, trees, f.ctx, budgets, positions, rng);
  CHECK(trees[1].empty());
  CHECK(f.ctx.corner_rects[1].empty());
}

TEST_CASE("zero weights are deterministic under a fixed seed") {
  auto run = [] {
    Fixture f(6, 8);
    f.ctx.weights.w = {0, 0, 0, 0, 0, 0, 0};
    std::array<PackingTree, 4> trees;
    for (int c = 0; c < 4; ++c) trees[c].corner = static_cast<Corner>(c);
    std::vector<std::optional<Point>> positions(f.design.instances.size());
    std::vector<MacroGroup> groups = f.groups;
    Rng rng(15);
    RelocateBudgets budgets{100, 20, 5, 100};
    relocate(groups, trees, f.ctx, budgets, positions, rng);
    return positions;
  };
  auto a = run();
  auto b = run();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].has_value() == b[i].has_value());
    if (a[i]) {
      CHECK(a[i]->x == b[i]->x);
      CHECK(a[i]->y == b[i]->y);
    }
  }
}

TEST_CASE("stuck layout raises an error") {
  Fixture f;
  for (Instance& inst : f.design.instances)
    if (inst.is_macro()) {
      inst.width = 150;  // nothing can ever fit
      inst.height = 150;
    }
  std::vector<MacroGroup> groups = f.groups;
  for (MacroGroup& g : groups) {
    g.width = 150;
    g.height = 150;
  }
  std::array<PackingTree, 4> trees;
  for (int c = 0; c < 4; ++c) trees[c].corner = static_cast<Corner>(c);
  std::vector<std::optional<Point>> positions(f.design.instances.size());
  Rng rng(1);
  RelocateBudgets budgets{40, 8, 4, 1};
  CHECK_THROWS_AS(relocate(groups, trees, f.ctx, budgets, positions, rng),
                  DesignError);
}
