#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "macroforge/driver.hpp"
#include "macroforge/tuner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mf::DesignError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mf::DesignError("cannot write " + path.string());
  out << text;
}

struct PlaceArgs {
  std::string design;
  std::string config;
  std::string out = ".";
  std::string prototype = "internal";
  uint64_t seed = 1;
  bool seed_set = false;
  bool trace = false;
  bool dump_connectivity = false;
  double abplace_lambda = -1.0;
  int abplace_iters = -1;
  double abplace_tol = -1.0;
};

mf::PipelineConfig resolve_config(const PlaceArgs& a) {
  mf::PipelineConfig config;
  if (!a.config.empty())
    config = mf::PipelineConfig::from_json_text(read_file(a.config));
  if (a.seed_set || a.config.empty()) config.seed = a.seed;
  if (a.prototype == "internal") {
    config.prototype_file.clear();
  } else if (a.prototype.rfind("file:", 0) == 0) {
    config.prototype_file = a.prototype.substr(5);
  } else {
    throw mf::DesignError("--prototype must be 'internal' or 'file:<path>'");
  }
  if (a.abplace_lambda >= 0.0) config.lambda = a.abplace_lambda;
  if (a.abplace_iters >= 0) config.abplace_max_iters = a.abplace_iters;
  if (a.abplace_tol >= 0.0) config.abplace_tol = a.abplace_tol;
  return config;
}

std::string connectivity_json(const mf::Pipeline& pipeline, const mf::Design& d) {
  json j;
  for (const mf::MacroGroup& g : pipeline.groups()) {
    json names = json::array();
    for (int id : g.member_macro_ids) names.push_back(d.instances[id].name);
    j["groups"].push_back({{"id", g.id},
                           {"width", g.width},
                           {"height", g.height},
                           {"members", std::move(names)}});
  }
  for (const mf::CellCluster& c : pipeline.clusters()) {
    json names = json::array();
    for (int id : c.member_cell_ids) names.push_back(d.instances[id].name);
    j["clusters"].push_back({{"id", c.id}, {"members", std::move(names)}});
  }
  const mf::ConnectionMatrix& m = pipeline.matrix();
  j["n_macros"] = m.n_macros;
  j["n_clusters"] = m.n_clusters;
  json rows = json::array();
  for (int i = 0; i < m.size(); ++i) {
    json row = json::array();
    for (int k = 0; k < m.size(); ++k) row.push_back(m.at(i, k));
    rows.push_back(std::move(row));
  }
  j["matrix"] = std::move(rows);
  return j.dump(2);
}

void write_trace(const fs::path& dir, const mf::FinalPlacement& placed) {
  fs::create_directories(dir);
  for (const mf::IterationLog& it : placed.log) {
    std::string tag = std::to_string(it.k);
    json j;
    j["k"] = it.k;
    j["density"] = it.density;
    j["ellipse"] = {{"a", it.ellipse_a}, {"b", it.ellipse_b}};
    j["prototype_hpwl"] = it.prototype_hpwl;
    j["abplace_initial"] = it.abplace_initial;
    j["abplace_final"] = it.abplace_final;
    j["macros_placed"] = it.macros_placed;
    write_file(dir / ("iter_" + tag + ".json"), j.dump(2));

    std::ostringstream csv;
    csv << "step,objective\n";
    for (size_t i = 0; i < it.abplace_trace.size(); ++i)
      csv << i << "," << it.abplace_trace[i] << "\n";
    write_file(dir / ("abplace_" + tag + ".csv"), csv.str());

    std::ostringstream jl;
    for (const mf::RelocateEvent& e : it.relocate_events) {
      json r;
      r["group"] = e.group_id;
      r["corner"] = static_cast<int>(e.corner);
      r["slot_count"] = e.slot_count;
      r["best_cost"] = e.best_cost;
      jl << r.dump() << "\n";
    }
    write_file(dir / ("relocate_" + tag + ".jsonl"), jl.str());
  }
}

int run_place(const PlaceArgs& a) {
  mf::Design design = mf::load_design(a.design);
  mf::PipelineConfig config = resolve_config(a);
  mf::Pipeline pipeline(design, config);
  mf::FinalPlacement placed = pipeline.run();

  fs::path out(a.out);
  fs::create_directories(out);
  write_file(out / "placement.json", mf::placement_to_json(placed));
  write_file(out / "metrics.json", mf::metrics_to_json(placed.metrics));
  write_file(out / "timing.json", mf::timing_to_json(placed.metrics));
  write_file(out / "layout.svg",
             mf::render_svg(design, placed.macro_positions, placed.groups,
                            placed.io, &placed.last_ellipse));
  if (a.dump_connectivity)
    write_file(out / "connectivity.json", connectivity_json(pipeline, design));
  if (a.trace) write_trace(out / "trace", placed);
  std::cout << "placed " << design.macro_count() << " macros in "
            << placed.iterations << " iterations, hpwl " << placed.metrics.hpwl
            << "\n";
  return 0;
}

mf::Metrics eval_placement(const mf::Design& design,
                           const std::map<std::string, mf::Point>& pos,
                           int target_clusters) {
  // Cells get a quick internal prototype with all macros fixed so HPWL can
  // resolve cell pins through cluster centroids.
  auto clusters = mf::cluster_cells(design, target_clusters);
  mf::FixedPositions fixed(design.instances.size());
  for (int id : design.macro_ids) {
    auto it = pos.find(design.instances[id].name);
    if (it == pos.end())
      throw mf::DesignError("placement missing macro " + design.instances[id].name);
    fixed[id] = it->second;
  }
  mf::Prototype proto = mf::run_prototype(design, fixed, {}, 11, 1);
  std::vector<mf::Point> centroids = mf::cluster_centroids(design, proto, clusters);

  mf::Metrics m;
  m.hpwl = mf::placement_hpwl(design, pos, clusters, centroids);
  std::vector<mf::Rect> rects;
  mf::IoRegions io = mf::IoRegions::from_ports(design, 0.05, 0.05);
  double peri = 0.0;
  for (int id : design.macro_ids) {
    const mf::Instance& inst = design.instances[id];
    mf::Point p = pos.at(inst.name);
    mf::Rect r{p.x - inst.width / 2.0, p.y - inst.height / 2.0, inst.width,
               inst.height};
    rects.push_back(r);
    peri += std::min(std::min(r.x, r.y),
                     std::min(design.outline.width - (r.x + r.w),
                              design.outline.height - (r.y + r.h)));
    m.io_overlap += io.overlap_with(r);
  }
  double cell_h = 0.0;
  for (int id : design.cell_ids) cell_h += design.instances[id].height;
  double threshold = design.cell_ids.empty()
                         ? std::min(design.outline.width, design.outline.height) / 64.0
                         : 2.0 * cell_h / static_cast<double>(design.cell_ids.size());
  m.total_overlap = mf::total_overlap_area(rects);
  m.total_notch = mf::notch_area(rects, design.outline, threshold);
  m.mean_periphery_dist =
      rects.empty() ? 0.0 : peri / static_cast<double>(rects.size());
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"macro placement engine"};
  app.require_subcommand(1);

  PlaceArgs pa;
  CLI::App* place = app.add_subcommand("place", "run the placement pipeline");
  place->add_option("--design", pa.design)->required();
  place->add_option("--config", pa.config);
  place->add_option("--seed", pa.seed)->each([&](const std::string&) { pa.seed_set = true; });
  place->add_option("--out", pa.out);
  place->add_option("--prototype", pa.prototype)
      ->description("internal | file:<path>");
  place->add_flag("--trace", pa.trace);
  place->add_flag("--dump-connectivity", pa.dump_connectivity);
  place->add_option("--abplace-lambda", pa.abplace_lambda);
  place->add_option("--abplace-iters", pa.abplace_iters);
  place->add_option("--abplace-tol", pa.abplace_tol);

  std::string e_design, e_placement;
  CLI::App* eval = app.add_subcommand("eval", "score an existing placement");
  eval->add_option("--design", e_design)->required();
  eval->add_option("--placement", e_placement)->required();

  std::string r_design, r_placement, r_out = "layout.svg";
  CLI::App* render = app.add_subcommand("render", "draw a placement as SVG");
  render->add_option("--design", r_design)->required();
  render->add_option("--placement", r_placement)->required();
  render->add_option("--out", r_out);

  std::string t_design, t_out = "tune_result.json";
  int t_budget = 50;
  uint64_t t_seed = 1;
  CLI::App* tune = app.add_subcommand("tune", "tune cost parameters");
  tune->add_option("--design", t_design)->required();
  tune->add_option("--budget", t_budget);
  tune->add_option("--seed", t_seed);
  tune->add_option("--out", t_out);

  uint64_t g_seed = 1;
  int g_macros = 8, g_cells = 200, g_nets = 300;
  double g_width = 100.0, g_height = 100.0;
  std::string g_out = "design.json";
  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic design");
  gen->add_option("--seed", g_seed);
  gen->add_option("--macros", g_macros);
  gen->add_option("--cells", g_cells);
  gen->add_option("--nets", g_nets);
  gen->add_option("--width", g_width);
  gen->add_option("--height", g_height);
  gen->add_option("--out", g_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*place) return run_place(pa);
    if (*eval) {
      mf::Design design = mf::load_design(e_design);
      auto pos = mf::placement_from_json(read_file(e_placement));
      std::cout << mf::metrics_to_json(eval_placement(design, pos, 16)) << "\n";
      return 0;
    }
    if (*render) {
      mf::Design design = mf::load_design(r_design);
      auto pos = mf::placement_from_json(read_file(r_placement));
      auto groups = mf::group_macros(design);
      mf::IoRegions io = mf::IoRegions::from_ports(design, 0.05, 0.05);
      write_file(r_out, mf::render_svg(design, pos, groups, io, nullptr));
      return 0;
    }
    if (*tune) {
      mf::Design design = mf::load_design(t_design);
      mf::PipelineConfig base;
      base.seed = t_seed;
      mf::TuneResult result = mf::tune(design, base, {t_budget});
      write_file(t_out, mf::tune_result_to_json(result));
      std::cout << "best objective " << result.best_objective << " at sample "
                << result.best_index << "\n";
      return 0;
    }
    if (*gen) {
      mf::Design design = mf::generate_synthetic(g_seed, g_macros, g_cells,
                                                 g_nets, {g_width, g_height});
      write_file(g_out, mf::save_design(design));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
