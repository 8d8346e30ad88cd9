#include "macroforge/relocator.hpp"

#include <set>

namespace mf {

namespace {

Rect quadrant(Corner c, const ChipOutline& outline) {
  double hw = outline.width / 2.0, hh = outline.height / 2.0;
  switch (c) {
    case Corner::BL: return {0.0, 0.0, hw, hh};
    case Corner::BR: return {hw, 0.0, hw, hh};
    case Corner::TL: return {0.0, hh, hw, hh};
    default: return {hw, hh, hw, hh};
  }
}

std::vector<Rect> all_placed_rects(const RelocateContext& ctx) {
  std::vector<Rect> rects = ctx.placed_rects;
  for (const auto& corner : ctx.corner_rects)
    rects.insert(rects.end(), corner.begin(), corner.end());
  return rects;
}

Rect bounding_box(const std::vector<Rect>& rects) {
  if (rects.empty()) return {};
  double x1 = 1e300, y1 = 1e300, x2 = -1e300, y2 = -1e300;
  for (const auto& r : rects) {
    x1 = std::min(x1, r.x);
    y1 = std::min(y1, r.y);
    x2 = std::max(x2, r.x2());
    y2 = std::max(y2, r.y2());
  }
  return {x1, y1, x2 - x1, y2 - y1};
}

}  // namespace

IoRegions IoRegions::from_ports(const Design& design, double depth_frac,
                                double width_frac) {
  IoRegions io;
  const double W = design.outline.width;
  const double H = design.outline.height;
  double depth = depth_frac * std::min(W, H);
  Rect die{0.0, 0.0, W, H};
  double tol = 1e-9 * std::max(W, H);
  for (const auto& port : design.ports) {
    // Each port reserves a rectangle extending inward from its edge.
    Rect r;
    if (std::abs(port.y) <= tol || std::abs(port.y - H) <= tol) {
      double span = width_frac * W;
      r = {port.x - span / 2.0, port.y <= tol ? 0.0 : H - depth, span, depth};
    } else {
      double span = width_frac * H;
      r = {port.x <= tol ? 0.0 : W - depth, port.y - span / 2.0, depth, span};
    }
    r = clip(r, die);
    if (r.w > 0.0 && r.h > 0.0) io.rects.push_back(r);
  }
  return io;
}

bool PreferenceMatrix::argmax(int& group, int& corner) const {
  double best = -kInf;
  group = -1;
  for (int g = 0; g < n_groups; ++g) {
    for (int c = 0; c < 4; ++c) {
      double v = at(g, c);
      if (v > best && v > -kInf) {
        best = v;
        group = g;
        corner = c;
      }
    }
  }
  return group >= 0;
}

PreferenceMatrix compute_preference(const std::vector<MacroGroup>& groups,
                                    const RelocateContext& ctx) {
  const auto& alpha = ctx.weights.alpha;
  const Design& d = *ctx.design;
  PreferenceMatrix pref;
  pref.n_groups = static_cast<int>(groups.size());
  pref.pref.assign(static_cast<size_t>(pref.n_groups) * 4, 0.0);

  std::array<double, 4> util{}, io_area{};
  std::array<bool, 4> banned{};
  std::array<Point, 4> targets;
  for (int c = 0; c < 4; ++c) {
    Rect quad = quadrant(static_cast<Corner>(c), d.outline);
    // Distance is measured to the corner's packing frontier: the centroid
    // of what is already packed there (the die corner while it is empty).
    // The literal corner point would leave a group whose gravity sits
    // between two corners at an exact tie even when its strongly connected
    // partners are already packed in one of them.
    double cx = 0.0, cy = 0.0;
    for (const auto& r : ctx.corner_rects[c]) {
      util[c] += r.area();
      cx += r.area() * r.center().x;
      cy += r.area() * r.center().y;
    }
    targets[c] = util[c] > 0.0 ? Point{cx / util[c], cy / util[c]}
                               : corner_point(static_cast<Corner>(c), d.outline);
    io_area[c] = ctx.io.area_in(quad);
    banned[c] = io_area[c] > 0.5 * quad.area();
  }

  std::vector<double> areas(groups.size());
  std::vector<std::array<double, 4>> dists(groups.size());
  for (size_t g = 0; g < groups.size(); ++g) {
    const MacroGroup& group = groups[g];
    double group_area = 0.0, gx = 0.0, gy = 0.0;
    for (int id : group.member_macro_ids) {
      double area = d.instances[id].area();
      const Point& p = ctx.ellipse_pos[d.macro_ordinal(id)];
      group_area += area;
      gx += area * p.x;
      gy += area * p.y;
    }
    areas[g] = group_area;
    Point gravity{gx / group_area, gy / group_area};
    for (int c = 0; c < 4; ++c) dists[g][c] = distance(gravity, targets[c]);
  }

  auto scaler = [](double lo, double hi) {
    double span = hi - lo;
    return [lo, span](double v) { return span > 1e-12 ? (v - lo) / span : 0.0; };
  };
  if (ctx.weights.normalize_preference) {
    double alo = *std::min_element(areas.begin(), areas.end());
    double ahi = *std::max_element(areas.begin(), areas.end());
    double ulo = *std::min_element(util.begin(), util.end());
    double uhi = *std::max_element(util.begin(), util.end());
    double ilo = *std::min_element(io_area.begin(), io_area.end());
    double ihi = *std::max_element(io_area.begin(), io_area.end());
    double dlo = 1e300, dhi = -1e300;
    for (const auto& row : dists)
      for (double v : row) {
        dlo = std::min(dlo, v);
        dhi = std::max(dhi, v);
      }
    auto sa = scaler(alo, ahi), su = scaler(ulo, uhi), si = scaler(ilo, ihi),
         sd = scaler(dlo, dhi);
    for (size_t g = 0; g < groups.size(); ++g)
      for (int c = 0; c < 4; ++c)
        pref.at(static_cast<int>(g), c) =
            banned[c] ? -kInf
                      : alpha[0] * sa(areas[g]) -
                            (alpha[1] * su(util[c]) + alpha[2] * si(io_area[c]) +
                             alpha[3] * sd(dists[g][c]));
  } else {
    for (size_t g = 0; g < groups.size(); ++g)
      for (int c = 0; c < 4; ++c)
        pref.at(static_cast<int>(g), c) =
            banned[c] ? -kInf
                      : alpha[0] * areas[g] -
                            (alpha[1] * util[c] + alpha[2] * io_area[c] +
                             alpha[3] * dists[g][c]);
  }
  return pref;
}

double notch_area(const std::vector<Rect>& rects, const ChipOutline& outline,
                  double threshold) {
  if (threshold <= 0.0) return 0.0;
  Rect die{0.0, 0.0, outline.width, outline.height};
  std::vector<double> xs{0.0, outline.width}, ys{0.0, outline.height};
  std::vector<Rect> clipped;
  for (const auto& r : rects) {
    Rect c = clip(r, die);
    if (c.w <= 0.0 || c.h <= 0.0) continue;
    clipped.push_back(c);
    xs.push_back(c.x);
    xs.push_back(c.x2());
    ys.push_back(c.y);
    ys.push_back(c.y2());
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [](double a, double b) { return std::abs(a - b) < 1e-12; }),
           xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end(),
                       [](double a, double b) { return std::abs(a - b) < 1e-12; }),
           ys.end());

  int nx = static_cast<int>(xs.size()) - 1;
  int ny = static_cast<int>(ys.size()) - 1;
  if (nx <= 0 || ny <= 0) return 0.0;

  std::vector<char> occupied(static_cast<size_t>(nx) * ny, 0);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      double cx = (xs[i] + xs[i + 1]) / 2.0;
      double cy = (ys[j] + ys[j + 1]) / 2.0;
      for (const auto& r : clipped) {
        if (cx > r.x && cx < r.x2() && cy > r.y && cy < r.y2()) {
          occupied[static_cast<size_t>(j) * nx + i] = 1;
          break;
        }
      }
    }
  }

  // A free cell is a notch cell when the maximal free horizontal run
  // through it, or the maximal free vertical run, is narrower than the
  // threshold.
  std::vector<char> notch(static_cast<size_t>(nx) * ny, 0);
  for (int j = 0; j < ny; ++j) {
    int i = 0;
    while (i < nx) {
      if (occupied[static_cast<size_t>(j) * nx + i]) { ++i; continue; }
      int start = i;
      while (i < nx && !occupied[static_cast<size_t>(j) * nx + i]) ++i;
      double run = xs[i] - xs[start];
      if (run < threshold)
        for (int t = start; t < i; ++t) notch[static_cast<size_t>(j) * nx + t] = 1;
    }
  }
  for (int i = 0; i < nx; ++i) {
    int j = 0;
    while (j < ny) {
      if (occupied[static_cast<size_t>(j) * nx + i]) { ++j; continue; }
      int start = j;
      while (j < ny && !occupied[static_cast<size_t>(j) * nx + i]) ++j;
      double run = ys[j] - ys[start];
      if (run < threshold)
        for (int t = start; t < j; ++t) notch[static_cast<size_t>(t) * nx + i] = 1;
    }
  }

  double area = 0.0;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      if (notch[static_cast<size_t>(j) * nx + i])
        area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
  return area;
}

void check_conflicts(Candidate& cand, const MacroGroup& group,
                     const RelocateContext& ctx,
                     const std::vector<PlacedRect>& before) {
  const ChipOutline& outline = ctx.design->outline;
  for (const auto& pr : cand.packed.rects) {
    const Rect& r = pr.rect;
    if (r.x < -1e-9 || r.y < -1e-9 || r.x2() > outline.width + 1e-9 ||
        r.y2() > outline.height + 1e-9)
      cand.packed.out_of_bounds = true;
  }

  // Previously packed macros must keep their exact positions.
  for (const auto& ref : before) {
    for (const auto& pr : cand.packed.rects) {
      if (pr.macro_id != ref.macro_id) continue;
      if (std::abs(pr.rect.x - ref.rect.x) > 1e-9 ||
          std::abs(pr.rect.y - ref.rect.y) > 1e-9)
        cand.packed.moved_fixed = true;
      break;
    }
  }

  // Overlap against the other corners and pre-placed macros.
  std::vector<Rect> others = ctx.placed_rects;
  for (int c = 0; c < 4; ++c) {
    if (c == static_cast<int>(cand.corner)) continue;
    const auto& corner = ctx.corner_rects[c];
    others.insert(others.end(), corner.begin(), corner.end());
  }
  for (const auto& pr : cand.packed.rects) {
    Rect a = pr.rect.inflated(ctx.halo);
    for (const auto& o : others) {
      if (intersection_area(a, o.inflated(ctx.halo)) > 1e-9) {
        cand.packed.overlap_other_corner = true;
        break;
      }
    }
    if (cand.packed.overlap_other_corner) break;
  }

  cand.feasible = cand.packed.legal();
  (void)group;
}

PenaltyVector evaluate_raw(const Candidate& cand, const MacroGroup& group,
                           const RelocateContext& ctx) {
  const Design& d = *ctx.design;
  PenaltyVector p;

  std::vector<Rect> group_rects;
  std::set<int> group_ids(group.member_macro_ids.begin(),
                          group.member_macro_ids.end());
  for (const auto& pr : cand.packed.rects)
    if (group_ids.count(pr.macro_id)) group_rects.push_back(pr.rect);

  const int n_macros = d.macro_count();
  size_t gi = 0;
  for (const auto& pr : cand.packed.rects) {
    if (!group_ids.count(pr.macro_id)) continue;
    int ordinal = d.macro_ordinal(pr.macro_id);
    Point center = pr.rect.center();
    p.disp += distance(center, ctx.ellipse_pos[ordinal]);
    p.peri += std::min(std::min(pr.rect.x, d.outline.width - pr.rect.x2()),
                       std::min(pr.rect.y, d.outline.height - pr.rect.y2()));
    for (const auto& [po, ppos] : ctx.placed_macros)
      p.conn += distance(center, ppos) * ctx.matrix->at(ordinal, po);
    for (size_t c = 0; c < ctx.cluster_pos.size(); ++c)
      p.conn += distance(center, ctx.cluster_pos[c]) *
                ctx.matrix->at(ordinal, n_macros + static_cast<int>(c));
    p.io += ctx.io.overlap_with(pr.rect);
    ++gi;
  }
  (void)gi;

  p.group_bb = bounding_box(group_rects).area();

  for (int c = 0; c < 4; ++c) {
    if (c == static_cast<int>(cand.corner)) continue;
    p.corner_bb += bounding_box(ctx.corner_rects[c]).area();
  }
  std::vector<Rect> corner_now;
  for (const auto& pr : cand.packed.rects) corner_now.push_back(pr.rect);
  p.corner_bb += bounding_box(corner_now).area();

  std::vector<Rect> everything = ctx.placed_rects;
  for (int c = 0; c < 4; ++c) {
    if (c == static_cast<int>(cand.corner)) continue;
    const auto& corner = ctx.corner_rects[c];
    everything.insert(everything.end(), corner.begin(), corner.end());
  }
  everything.insert(everything.end(), corner_now.begin(), corner_now.end());
  p.notch = notch_area(everything, d.outline, ctx.notch_threshold);

  return p;
}

namespace {

struct TermStats {
  std::array<double, 7> lo, hi;
};

TermStats batch_stats(const std::vector<Candidate*>& batch) {
  TermStats s;
  s.lo.fill(kInf);
  s.hi.fill(-kInf);
  for (const Candidate* cand : batch) {
    if (!cand->feasible) continue;
    for (int t = 0; t < 7; ++t) {
      s.lo[t] = std::min(s.lo[t], cand->raw.term(t));
      s.hi[t] = std::max(s.hi[t], cand->raw.term(t));
    }
  }
  return s;
}

void score_with(std::vector<Candidate*>& batch, const TermStats& stats,
                const CostWeights& weights) {
  for (Candidate* cand : batch) {
    if (!cand->feasible) {
      cand->cost = kInf;
      continue;
    }
    double cost = 0.0;
    for (int t = 0; t < 7; ++t) {
      double span = stats.hi[t] - stats.lo[t];
      double norm =
          span > 1e-15 ? (cand->raw.term(t) - stats.lo[t]) / span : 0.0;
      cost += weights.w[t] * norm;
    }
    cand->cost = cost;
  }
}

}  // namespace

void score_batch(std::vector<Candidate*>& batch, const CostWeights& weights) {
  TermStats stats = batch_stats(batch);
  score_with(batch, stats, weights);
}

namespace {

// Interim comparison key used while evaluating within one slot, before
// the batch-wide normalization is possible.
double raw_weighted(const PenaltyVector& p, const CostWeights& w) {
  double s = 0.0;
  for (int t = 0; t < 7; ++t) s += w.w[t] * p.term(t);
  return s;
}

Candidate evaluate_candidate(PackingTree tree, Corner corner, SlotRef slot,
                             std::vector<int> new_nodes,
                             const MacroGroup& group,
                             const RelocateContext& ctx,
                             const MacroSizes& sizes,
                             const std::vector<PlacedRect>& before) {
  Candidate cand;
  cand.corner = corner;
  cand.slot = slot;
  cand.tree = std::move(tree);
  cand.new_nodes = std::move(new_nodes);
  cand.packed = pack(cand.tree, ctx.design->outline, sizes, ctx.halo);
  check_conflicts(cand, group, ctx, before);
  if (cand.feasible) cand.raw = evaluate_raw(cand, group, ctx);
  return cand;
}

MacroSizes make_sizes(const Design& d, std::vector<double>& ws,
                      std::vector<double>& hs) {
  ws.resize(d.instances.size());
  hs.resize(d.instances.size());
  for (const auto& inst : d.instances) {
    ws[inst.id] = inst.width;
    hs[inst.id] = inst.height;
  }
  return {ws, hs};
}

}  // namespace

std::vector<Candidate> try_assignment(const MacroGroup& group, Corner corner,
                                      const PackingTree& tree,
                                      const RelocateContext& ctx, int n_eps,
                                      Rng& rng) {
  std::vector<double> ws, hs;
  MacroSizes sizes = make_sizes(*ctx.design, ws, hs);

  std::vector<PlacedRect> before = pack(tree, ctx.design->outline, sizes, ctx.halo).rects;
  auto slots = enumerate_slots(tree);

  std::vector<Candidate> best_per_slot;
  for (const SlotRef& slot : slots) {
    Candidate best;
    bool have_best = false;
    for (int eval = 0; eval < n_eps; ++eval) {
      Candidate cand;
      if (!have_best || !best.feasible) {
        PackingTree work = tree;
        auto added = attach_subtree(work, slot, group.member_macro_ids, rng);
        cand = evaluate_candidate(std::move(work), corner, slot, std::move(added),
                                  group, ctx, sizes, before);
      } else {
        PackingTree work = best.tree;
        mutate(work, MutationConfig{}, rng);
        cand = evaluate_candidate(std::move(work), corner, slot, best.new_nodes,
                                  group, ctx, sizes, before);
      }
      if (!have_best ||
          (cand.feasible &&
           (!best.feasible || raw_weighted(cand.raw, ctx.weights) <
                                  raw_weighted(best.raw, ctx.weights)))) {
        best = std::move(cand);
        have_best = true;
      }
    }
    if (have_best && best.feasible) best_per_slot.push_back(std::move(best));
  }

  std::vector<Candidate*> batch;
  for (auto& cand : best_per_slot) batch.push_back(&cand);
  score_batch(batch, ctx.weights);
  return best_per_slot;
}

Candidate corner_packing_search(std::vector<Candidate> seeds,
                                const MacroGroup& group,
                                const RelocateContext& ctx, int n_total,
                                int n_pop, Rng& rng) {
  std::vector<double> ws, hs;
  MacroSizes sizes = make_sizes(*ctx.design, ws, hs);

  std::vector<PlacedRect> before;
  if (!seeds.empty()) {
    // Reference positions of the macros that were already in the corner.
    std::set<int> group_ids(group.member_macro_ids.begin(),
                            group.member_macro_ids.end());
    for (const auto& pr : seeds.front().packed.rects)
      if (!group_ids.count(pr.macro_id)) before.push_back(pr);
  }

  auto mutated_copy = [&](const Candidate& src) {
    PackingTree work = src.tree;
    mutate(work, MutationConfig{}, rng);
    return evaluate_candidate(std::move(work), src.corner, src.slot,
                              src.new_nodes, group, ctx, sizes, before);
  };

  // Normalization statistics are frozen at the seed batch: every candidate
  // in the search is scored on the same scale, so elitist truncation makes
  // the final cost provably no worse than the best seed.
  TermStats stats;
  std::vector<Candidate> population = seeds;
  {
    std::vector<Candidate*> batch;
    for (auto& cand : population) batch.push_back(&cand);
    stats = batch_stats(batch);
    score_with(batch, stats, ctx.weights);
  }
  std::sort(population.begin(), population.end(),
            [](const Candidate& a, const Candidate& b) { return a.cost < b.cost; });
  size_t i = 0;
  while (static_cast<int>(population.size()) < n_pop) {
    population.push_back(mutated_copy(seeds[i % seeds.size()]));
    ++i;
  }
  if (static_cast<int>(population.size()) > n_pop) population.resize(n_pop);

  int generations = n_pop > 0 ? n_total / n_pop : 0;
  for (int gen = 0; gen < generations; ++gen) {
    // Binary tournament, n_pop parents.
    std::vector<Candidate> offspring;
    offspring.reserve(n_pop);
    int psize = static_cast<int>(population.size());
    for (int s = 0; s < n_pop; ++s) {
      int a = rng.uniform_int(0, psize - 1);
      int b = rng.uniform_int(0, psize - 1);
      const Candidate& parent = population[a].cost <= population[b].cost
                                    ? population[a]
                                    : population[b];
      offspring.push_back(mutated_copy(parent));
    }
    // Elitist truncation over parents + offspring on the frozen scale.
    for (auto& cand : offspring) population.push_back(std::move(cand));
    std::vector<Candidate*> batch;
    for (auto& cand : population) batch.push_back(&cand);
    score_with(batch, stats, ctx.weights);
    std::stable_sort(population.begin(), population.end(),
                     [](const Candidate& a, const Candidate& b) {
                       return a.cost < b.cost;
                     });
    population.resize(n_pop);
  }

  // The seeds stay in the comparison pool, so the result can never lose
  // to the incoming population.
  std::vector<Candidate> final_batch = std::move(seeds);
  for (auto& cand : population) final_batch.push_back(std::move(cand));
  std::vector<Candidate*> batch;
  for (auto& cand : final_batch) batch.push_back(&cand);
  score_with(batch, stats, ctx.weights);
  size_t best = 0;
  for (size_t c = 1; c < final_batch.size(); ++c)
    if (final_batch[c].cost < final_batch[best].cost) best = c;
  return final_batch[best];
}

RelocateResult relocate(std::vector<MacroGroup>& unplaced_groups,
                        std::array<PackingTree, 4>& trees, RelocateContext& ctx,
                        const RelocateBudgets& budgets,
                        std::vector<std::optional<Point>>& macro_positions,
                        Rng& rng) {
  const Design& d = *ctx.design;
  RelocateResult result;

  int remaining = 0;
  for (const auto& g : unplaced_groups)
    remaining += static_cast<int>(g.member_macro_ids.size());
  int goal = std::min(budgets.n_min, remaining);

  std::set<std::pair<int, int>> masked;  // (group id, corner)
  while (result.macros_placed < goal) {
    PreferenceMatrix pref = compute_preference(unplaced_groups, ctx);
    for (size_t g = 0; g < unplaced_groups.size(); ++g)
      for (int c = 0; c < 4; ++c)
        if (masked.count({unplaced_groups[g].id, c}))
          pref.at(static_cast<int>(g), c) = -kInf;

    bool placed_one = false;
    int gi, ci;
    while (pref.argmax(gi, ci)) {
      const MacroGroup& group = unplaced_groups[gi];
      Corner corner = static_cast<Corner>(ci);
      auto candidates = try_assignment(group, corner, trees[ci], ctx,
                                       budgets.n_eps, rng);
      if (candidates.empty()) {
        masked.insert({group.id, ci});
        pref.at(gi, ci) = -kInf;
        continue;
      }
      Candidate best = corner_packing_search(std::move(candidates), group, ctx,
                                             budgets.n_total, budgets.n_pop, rng);

      // Apply: the corner tree and its rects are replaced wholesale.
      trees[ci] = best.tree;
      ctx.corner_rects[ci].clear();
      for (const auto& pr : best.packed.rects)
        ctx.corner_rects[ci].push_back(pr.rect);
      std::set<int> group_ids(group.member_macro_ids.begin(),
                              group.member_macro_ids.end());
      for (const auto& pr : best.packed.rects) {
        if (!group_ids.count(pr.macro_id)) continue;
        int ordinal = d.macro_ordinal(pr.macro_id);
        ctx.placed_macros.push_back({ordinal, pr.rect.center()});
        macro_positions[pr.macro_id] = pr.rect.center();
      }

      result.events.push_back({group.id, corner,
                               static_cast<int>(enumerate_slots(trees[ci]).size()),
                               best.cost});
      result.placed_group_ids.push_back(group.id);
      result.macros_placed += static_cast<int>(group.member_macro_ids.size());
      unplaced_groups.erase(unplaced_groups.begin() + gi);
      placed_one = true;
      break;
    }
    if (!placed_one) {
      if (result.macros_placed == 0)
        throw DesignError("relocate is stuck: no feasible group-corner assignment");
      break;
    }
  }
  return result;
}

}  // namespace mf
