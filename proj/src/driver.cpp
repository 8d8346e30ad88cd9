#include "macroforge/driver.hpp"

#include <fstream>

#include "json.hpp"

namespace mf {

using nlohmann::json;

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DesignError(std::string("config parse error: ") + e.what());
  }
  PipelineConfig c;
  auto num = [&](const char* key, double& out) {
    if (j.contains(key)) out = j.at(key).get<double>();
  };
  auto inum = [&](const char* key, int& out) {
    if (j.contains(key)) out = j.at(key).get<int>();
  };
  num("td_init", c.td_init);
  num("td_finish", c.td_finish);
  num("beta_init", c.beta_init);
  num("beta_finish", c.beta_finish);
  c.gamma = std::pow(c.beta_finish / c.beta_init, 0.1);
  num("gamma", c.gamma);
  num("lambda", c.lambda);
  inum("abplace_max_iters", c.abplace_max_iters);
  num("abplace_tol", c.abplace_tol);
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    if (w.contains("w")) {
      auto v = w.at("w").get<std::vector<double>>();
      if (v.size() != 7) throw DesignError("config: weights.w must have 7 entries");
      std::copy(v.begin(), v.end(), c.weights.w.begin());
    }
    if (w.contains("alpha")) {
      auto v = w.at("alpha").get<std::vector<double>>();
      if (v.size() != 4) throw DesignError("config: weights.alpha must have 4 entries");
      std::copy(v.begin(), v.end(), c.weights.alpha.begin());
    }
    if (w.contains("normalize_preference"))
      c.weights.normalize_preference = w.at("normalize_preference").get<bool>();
  }
  inum("n_total", c.n_total);
  inum("n_eps", c.n_eps);
  inum("n_pop", c.n_pop);
  num("halo", c.halo);
  num("io_depth_frac", c.io_depth_frac);
  num("io_width_frac", c.io_width_frac);
  num("notch_threshold", c.notch_threshold);
  inum("max_outer_iters", c.max_outer_iters);
  inum("target_clusters", c.target_clusters);
  inum("d_max", c.d_max);
  if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
  if (j.contains("prototype_file"))
    c.prototype_file = j.at("prototype_file").get<std::string>();
  inum("prototype_bin_grid", c.prototyper.bin_grid);
  inum("prototype_max_iters", c.prototyper.max_iters);
  return c;
}

std::string PipelineConfig::to_json_text() const {
  json j;
  j["td_init"] = td_init;
  j["td_finish"] = td_finish;
  j["beta_init"] = beta_init;
  j["beta_finish"] = beta_finish;
  j["gamma"] = gamma;
  j["lambda"] = lambda;
  j["abplace_max_iters"] = abplace_max_iters;
  j["abplace_tol"] = abplace_tol;
  j["weights"]["w"] = std::vector<double>(weights.w.begin(), weights.w.end());
  j["weights"]["alpha"] =
      std::vector<double>(weights.alpha.begin(), weights.alpha.end());
  j["weights"]["normalize_preference"] = weights.normalize_preference;
  j["n_total"] = n_total;
  j["n_eps"] = n_eps;
  j["n_pop"] = n_pop;
  j["halo"] = halo;
  j["io_depth_frac"] = io_depth_frac;
  j["io_width_frac"] = io_width_frac;
  j["notch_threshold"] = notch_threshold;
  j["max_outer_iters"] = max_outer_iters;
  j["target_clusters"] = target_clusters;
  j["d_max"] = d_max;
  j["seed"] = seed;
  if (!prototype_file.empty()) j["prototype_file"] = prototype_file;
  return j.dump(2);
}

int RunState::placed_count(const Design& design) const {
  int n = 0;
  for (int id : design.macro_ids)
    if (macro_positions[id].has_value()) ++n;
  return n;
}

Pipeline::Pipeline(const Design& design, const PipelineConfig& config)
    : design_(design), config_(config), rng_(config.seed) {
  design_.validate();
  timer_.start("clustering");
  ConnectivityOptions copts;
  copts.d_max = config_.d_max;
  groups_ = group_macros(design_, copts);
  clusters_ = cluster_cells(design_, config_.target_clusters);
  matrix_ = build_matrix(design_, clusters_,
                         extract_direct(design_, clusters_, copts.net_degree_cap),
                         extract_dataflow(design_, clusters_, config_.d_max));
  io_ = IoRegions::from_ports(design_, config_.io_depth_frac,
                              config_.io_width_frac);
  if (config_.notch_threshold > 0.0) {
    notch_threshold_ = config_.notch_threshold;
  } else {
    double sum = 0.0;
    for (int id : design_.cell_ids) sum += design_.instances[id].height;
    notch_threshold_ =
        design_.cell_ids.empty()
            ? std::min(design_.outline.width, design_.outline.height) / 64.0
            : 2.0 * sum / static_cast<double>(design_.cell_ids.size());
  }
  timer_.stop();
}

RunState Pipeline::initial_state() const {
  RunState state;
  for (int c = 0; c < 4; ++c) state.trees[c].corner = static_cast<Corner>(c);
  state.macro_positions.assign(design_.instances.size(), std::nullopt);
  for (int id : design_.macro_ids) {
    const Instance& inst = design_.instances[id];
    if (inst.fixed) state.macro_positions[id] = inst.fixed_pos;
  }
  for (const MacroGroup& g : groups_) {
    MacroGroup rest = g;
    std::erase_if(rest.member_macro_ids,
                  [&](int id) { return design_.instances[id].fixed; });
    if (!rest.member_macro_ids.empty()) state.unplaced_groups.push_back(rest);
  }
  return state;
}

RelocateContext Pipeline::make_context(const std::vector<Point>& centroids,
                                       const std::vector<Point>& ellipse_pos,
                                       const RunState& state) const {
  RelocateContext ctx;
  ctx.design = &design_;
  ctx.matrix = &matrix_;
  ctx.io = io_;
  ctx.weights = config_.weights;
  ctx.halo = config_.halo;
  ctx.notch_threshold = notch_threshold_;
  for (int id : design_.macro_ids) {
    const Instance& inst = design_.instances[id];
    if (inst.fixed) {
      ctx.placed_rects.push_back({inst.fixed_pos.x - inst.width / 2.0,
                                  inst.fixed_pos.y - inst.height / 2.0,
                                  inst.width, inst.height});
    }
    if (state.macro_positions[id].has_value()) {
      ctx.placed_macros.emplace_back(design_.macro_ordinal(id),
                                     *state.macro_positions[id]);
    }
  }
  std::vector<double> widths(design_.instances.size(), 0.0);
  std::vector<double> heights(design_.instances.size(), 0.0);
  for (const Instance& inst : design_.instances) {
    widths[inst.id] = inst.width;
    heights[inst.id] = inst.height;
  }
  MacroSizes sizes{widths, heights};
  for (int c = 0; c < 4; ++c) {
    PackedPlacement packed = pack(state.trees[c], design_.outline, sizes);
    for (const PlacedRect& pr : packed.rects) ctx.corner_rects[c].push_back(pr.rect);
  }
  ctx.cluster_pos = centroids;
  ctx.ellipse_pos = ellipse_pos;
  return ctx;
}

void Pipeline::step(RunState& state) {
  if (state.unplaced_groups.empty())
    throw DesignError("step called with no unplaced macros");
  int k = ++state.k;
  IterationLog log;
  log.k = k;

  DensitySchedule schedule{config_.td_init, config_.td_finish};
  log.density = schedule.at(k);

  timer_.start("prototype");
  Prototype proto;
  if (!config_.prototype_file.empty()) {
    proto = inject_prototype(design_, config_.prototype_file);
    for (int id : design_.macro_ids)
      if (state.macro_positions[id].has_value())
        proto.positions[id] = *state.macro_positions[id];
  } else {
    FixedPositions fixed(design_.instances.size());
    for (int id : design_.macro_ids) fixed[id] = state.macro_positions[id];
    proto = run_prototype(design_, fixed, schedule, k,
                          config_.seed * 1315423911ull + static_cast<uint64_t>(k),
                          config_.prototyper);
  }
  state.last_prototype = proto;
  centroids_ = cluster_centroids(design_, proto, clusters_);
  log.prototype_hpwl = proto.hpwl;
  timer_.stop();

  state.ellipse = build_ellipse(design_.outline, config_.beta_init,
                                config_.beta_finish, config_.gamma, k);
  log.ellipse_a = state.ellipse.a;
  log.ellipse_b = state.ellipse.b;

  timer_.start("abplace");
  AbProblem problem;
  std::vector<int> unplaced_ids;
  for (const MacroGroup& g : state.unplaced_groups)
    for (int id : g.member_macro_ids) unplaced_ids.push_back(id);
  std::vector<Point> proto_pos;
  for (int id : unplaced_ids) {
    const Instance& inst = design_.instances[id];
    problem.macros.push_back({inst.width, inst.height, design_.macro_ordinal(id)});
    proto_pos.push_back(proto.positions[id]);
  }
  for (int id : design_.macro_ids)
    if (state.macro_positions[id].has_value())
      problem.anchors.push_back(
          {*state.macro_positions[id], design_.macro_ordinal(id)});
  for (size_t c = 0; c < clusters_.size(); ++c)
    problem.anchors.push_back(
        {centroids_[c], design_.macro_count() + static_cast<int>(c)});
  problem.affinity = [this](int i, int j) { return matrix_.at(i, j); };
  problem.lambda = config_.lambda;
  std::vector<double> theta0 = project_macros(proto_pos, state.ellipse, rng_);
  AbResult ab = optimize(theta0, problem, state.ellipse,
                         {config_.abplace_max_iters, config_.abplace_tol});
  log.abplace_trace = ab.trace;
  log.abplace_initial = ab.trace.empty() ? 0.0 : ab.trace.front();
  log.abplace_final = ab.trace.empty() ? 0.0 : ab.trace.back();
  std::vector<Point> ellipse_pos(design_.macro_count());
  for (size_t i = 0; i < unplaced_ids.size(); ++i)
    ellipse_pos[design_.macro_ordinal(unplaced_ids[i])] =
        state.ellipse.point_at(ab.theta[i]);
  timer_.stop();

  timer_.start("relocate");
  RelocateContext ctx = make_context(centroids_, ellipse_pos, state);
  RelocateBudgets budgets{config_.n_total, config_.n_eps, config_.n_pop,
                          config_.n_min(design_.macro_count())};
  std::vector<char> was_placed(design_.instances.size(), 0);
  for (int id : design_.macro_ids)
    if (state.macro_positions[id].has_value()) was_placed[id] = 1;
  RelocateResult result = relocate(state.unplaced_groups, state.trees, ctx,
                                   budgets, state.macro_positions, rng_);
  for (int id : design_.macro_ids) {
    if (was_placed[id] || !state.macro_positions[id].has_value()) continue;
    disp_ += distance(*state.macro_positions[id],
                      ellipse_pos[design_.macro_ordinal(id)]);
  }
  log.relocate_events = result.events;
  log.macros_placed = result.macros_placed;
  timer_.stop();
  state.log.push_back(log);
}

FinalPlacement Pipeline::run() {
  RunState state = initial_state();
  while (!state.unplaced_groups.empty()) {
    if (state.k >= config_.max_outer_iters)
      throw DesignError("placement did not converge within " +
                        std::to_string(config_.max_outer_iters) +
                        " outer iterations");
    step(state);
  }

  // One last cell pass with every macro fixed, for the final centroids.
  timer_.start("prototype");
  Prototype final_proto;
  if (!config_.prototype_file.empty()) {
    final_proto = inject_prototype(design_, config_.prototype_file);
    for (int id : design_.macro_ids)
      if (state.macro_positions[id].has_value())
        final_proto.positions[id] = *state.macro_positions[id];
  } else {
    FixedPositions fixed(design_.instances.size());
    for (int id : design_.macro_ids) fixed[id] = state.macro_positions[id];
    DensitySchedule schedule{config_.td_init, config_.td_finish};
    final_proto = run_prototype(design_, fixed, schedule,
                                std::max(1, state.k), config_.seed * 7919ull,
                                config_.prototyper);
  }
  timer_.stop();

  FinalPlacement out;
  out.groups = groups_;
  out.clusters = clusters_;
  out.io = io_;
  out.last_ellipse = state.ellipse;
  out.log = state.log;
  out.iterations = state.k;
  out.centroids = cluster_centroids(design_, final_proto, clusters_);

  std::vector<Rect> rects;
  for (int id : design_.macro_ids) {
    const Instance& inst = design_.instances[id];
    if (!state.macro_positions[id].has_value())
      throw DesignError("internal error: macro " + inst.name + " left unplaced");
    Point p = *state.macro_positions[id];
    out.macro_positions[inst.name] = p;
    rects.push_back({p.x - inst.width / 2.0, p.y - inst.height / 2.0,
                     inst.width, inst.height});
  }

  Metrics& m = out.metrics;
  m.hpwl = placement_hpwl(design_, out.macro_positions, clusters_, out.centroids);
  m.total_overlap = total_overlap_area(rects);
  m.total_notch = notch_area(rects, design_.outline, notch_threshold_);
  double peri = 0.0;
  double io_ov = 0.0;
  for (const Rect& r : rects) {
    peri += std::min(std::min(r.x, r.y),
                     std::min(design_.outline.width - (r.x + r.w),
                              design_.outline.height - (r.y + r.h)));
    io_ov += io_.overlap_with(r);
  }
  m.mean_periphery_dist = rects.empty() ? 0.0 : peri / static_cast<double>(rects.size());
  m.total_displacement = disp_;
  m.io_overlap = io_ov;
  m.stage_seconds = timer_.breakdown();
  m.total_seconds = timer_.total();
  return out;
}

FinalPlacement run_pipeline(const Design& design, const PipelineConfig& config) {
  Pipeline pipeline(design, config);
  return pipeline.run();
}

std::string placement_to_json(const FinalPlacement& placement) {
  json arr = json::array();
  for (const auto& [name, p] : placement.macro_positions)
    arr.push_back({{"name", name}, {"x", p.x}, {"y", p.y}});
  json j;
  j["macros"] = std::move(arr);
  j["iterations"] = placement.iterations;
  return j.dump(2);
}

std::map<std::string, Point> placement_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DesignError(std::string("placement parse error: ") + e.what());
  }
  std::map<std::string, Point> out;
  for (const json& e : j.at("macros"))
    out[e.at("name").get<std::string>()] = {e.at("x").get<double>(),
                                            e.at("y").get<double>()};
  return out;
}

// Wall-clock numbers are kept out of metrics.json so identical runs stay
// byte-identical; they go to timing.json instead.
std::string metrics_to_json(const Metrics& metrics) {
  json j;
  j["hpwl"] = metrics.hpwl;
  j["total_overlap"] = metrics.total_overlap;
  j["total_notch"] = metrics.total_notch;
  j["mean_periphery_dist"] = metrics.mean_periphery_dist;
  j["total_displacement"] = metrics.total_displacement;
  j["io_overlap"] = metrics.io_overlap;
  return j.dump(2);
}

std::string timing_to_json(const Metrics& metrics) {
  json j;
  j["stage_seconds"] = metrics.stage_seconds;
  j["total_seconds"] = metrics.total_seconds;
  return j.dump(2);
}

}  // namespace mf
