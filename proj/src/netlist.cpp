#include "macroforge/netlist.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "macroforge/rng.hpp"

namespace mf {

using nlohmann::json;

double Design::total_macro_area() const {
  double total = 0.0;
  for (int id : macro_ids) total += instances[id].area();
  return total;
}

int Design::macro_ordinal(int instance_id) const {
  auto it = std::lower_bound(macro_ids.begin(), macro_ids.end(), instance_id);
  if (it == macro_ids.end() || *it != instance_id) return -1;
  return static_cast<int>(it - macro_ids.begin());
}

int Design::cell_ordinal(int instance_id) const {
  auto it = std::lower_bound(cell_ids.begin(), cell_ids.end(), instance_id);
  if (it == cell_ids.end() || *it != instance_id) return -1;
  return static_cast<int>(it - cell_ids.begin());
}

void Design::rebuild_index() {
  macro_ids.clear();
  cell_ids.clear();
  for (const auto& inst : instances) {
    if (inst.is_macro())
      macro_ids.push_back(inst.id);
    else
      cell_ids.push_back(inst.id);
  }
}

void Design::validate() const {
  if (outline.width <= 0.0 || outline.height <= 0.0)
    throw DesignError("outline dimensions must be positive");
  std::unordered_map<std::string, int> seen;
  for (const auto& inst : instances) {
    if (inst.is_macro() && (inst.width <= 0.0 || inst.height <= 0.0))
      throw DesignError("macro '" + inst.name + "' has non-positive size");
    if (inst.is_macro() && inst.is_flip_flop)
      throw DesignError("macro '" + inst.name + "' cannot be a flip-flop");
    if (!seen.emplace(inst.name, inst.id).second)
      throw DesignError("duplicate name '" + inst.name + "'");
  }
  double port_tol = 1e-9 * std::max(outline.width, outline.height);
  for (const auto& port : ports) {
    if (!seen.emplace(port.name, port.id).second)
      throw DesignError("duplicate name '" + port.name + "'");
    double edge_dist =
        std::min(std::min(std::abs(port.x), std::abs(outline.width - port.x)),
                 std::min(std::abs(port.y), std::abs(outline.height - port.y)));
    if (port.x < -port_tol || port.x > outline.width + port_tol ||
        port.y < -port_tol || port.y > outline.height + port_tol ||
        edge_dist > port_tol)
      throw DesignError("port '" + port.name + "' is not on the chip boundary");
  }
  for (const auto& net : nets) {
    if (net.pins.size() < 2)
      throw DesignError("net '" + net.name + "' has fewer than 2 pins");
    for (const auto& pin : net.pins) {
      if (pin.is_port) {
        if (pin.index < 0 || pin.index >= static_cast<int>(ports.size()))
          throw DesignError("net '" + net.name + "' has an invalid port pin");
      } else if (pin.index < 0 ||
                 pin.index >= static_cast<int>(instances.size())) {
        throw DesignError("net '" + net.name + "' has an invalid instance pin");
      }
    }
  }
  if (total_macro_area() > outline.area() + 1e-9)
    throw DesignError("total macro area exceeds the outline area");
}

namespace {

std::vector<std::string> parse_hier(const json& j) {
  std::vector<std::string> hier;
  if (j.contains("hier"))
    for (const auto& seg : j.at("hier")) hier.push_back(seg.get<std::string>());
  return hier;
}

}  // namespace

Design parse_design(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DesignError(std::string("design parse error: ") + e.what());
  }

  Design d;
  try {
    d.outline.width = doc.at("outline").at("width").get<double>();
    d.outline.height = doc.at("outline").at("height").get<double>();

    std::unordered_map<std::string, PinRef> refs;
    auto add_instance = [&](const json& j, InstanceKind kind) {
      Instance inst;
      inst.id = static_cast<int>(d.instances.size());
      inst.name = j.at("name").get<std::string>();
      inst.kind = kind;
      inst.width = j.at("width").get<double>();
      inst.height = j.at("height").get<double>();
      inst.hier = parse_hier(j);
      if (kind == InstanceKind::StdCell)
        inst.is_flip_flop = j.value("is_ff", false);
      if (j.value("fixed", false)) {
        inst.fixed = true;
        inst.fixed_pos = {j.at("x").get<double>(), j.at("y").get<double>()};
      }
      refs[inst.name] = PinRef{inst.id, false, 0.0, 0.0};
      d.instances.push_back(std::move(inst));
    };
    if (doc.contains("macros"))
      for (const auto& j : doc.at("macros")) add_instance(j, InstanceKind::Macro);
    if (doc.contains("cells"))
      for (const auto& j : doc.at("cells")) add_instance(j, InstanceKind::StdCell);
    if (doc.contains("ports")) {
      for (const auto& j : doc.at("ports")) {
        Port port;
        port.id = static_cast<int>(d.ports.size());
        port.name = j.at("name").get<std::string>();
        port.x = j.at("x").get<double>();
        port.y = j.at("y").get<double>();
        refs[port.name] = PinRef{port.id, true, 0.0, 0.0};
        d.ports.push_back(std::move(port));
      }
    }
    if (doc.contains("nets")) {
      for (const auto& j : doc.at("nets")) {
        Net net;
        net.id = static_cast<int>(d.nets.size());
        net.name = j.value("name", "net" + std::to_string(net.id));
        for (const auto& pj : j.at("pins")) {
          std::string ref = pj.at("ref").get<std::string>();
          auto it = refs.find(ref);
          if (it == refs.end())
            throw DesignError("net '" + net.name +
                              "' references unknown name '" + ref + "'");
          PinRef pin = it->second;
          pin.dx = pj.value("dx", 0.0);
          pin.dy = pj.value("dy", 0.0);
          net.pins.push_back(pin);
        }
        d.nets.push_back(std::move(net));
      }
    }
  } catch (const json::exception& e) {
    throw DesignError(std::string("design parse error: ") + e.what());
  }

  d.rebuild_index();
  d.validate();
  return d;
}

Design load_design(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DesignError("cannot open design file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_design(ss.str());
}

std::string save_design(const Design& d) {
  json doc;
  doc["outline"] = {{"width", d.outline.width}, {"height", d.outline.height}};
  doc["macros"] = json::array();
  doc["cells"] = json::array();
  for (const auto& inst : d.instances) {
    json j = {{"name", inst.name},
              {"width", inst.width},
              {"height", inst.height},
              {"hier", inst.hier}};
    if (inst.is_macro()) {
      if (inst.fixed) {
        j["fixed"] = true;
        j["x"] = inst.fixed_pos.x;
        j["y"] = inst.fixed_pos.y;
      }
      doc["macros"].push_back(std::move(j));
    } else {
      j["is_ff"] = inst.is_flip_flop;
      doc["cells"].push_back(std::move(j));
    }
  }
  doc["ports"] = json::array();
  for (const auto& port : d.ports)
    doc["ports"].push_back({{"name", port.name}, {"x", port.x}, {"y", port.y}});
  doc["nets"] = json::array();
  for (const auto& net : d.nets) {
    json pins = json::array();
    for (const auto& pin : net.pins) {
      const std::string& ref =
          pin.is_port ? d.ports[pin.index].name : d.instances[pin.index].name;
      pins.push_back({{"ref", ref}, {"dx", pin.dx}, {"dy", pin.dy}});
    }
    doc["nets"].push_back({{"name", net.name}, {"pins", pins}});
  }
  return doc.dump(2);
}

Design generate_synthetic(uint64_t seed, int n_macros, int n_cells, int n_nets,
                          const ChipOutline& outline,
                          const SyntheticOptions& opts) {
  if (n_macros < 1) throw DesignError("generator requires at least one macro");
  if (opts.util_target > 0.6)
    throw DesignError("macro area budget exceeds 0.6 of the outline");
  Rng rng(seed * 0x5deece66dULL + 11);

  Design d;
  d.outline = outline;

  // Macro sizes: one footprint per hierarchy block, the way banked memories
  // of one subsystem share an SRAM type. Identical footprints inside a block
  // give the grouping stage real multi-macro groups to find.
  int fanout = std::max(2, opts.hier_fanout);
  std::vector<double> areas;
  std::vector<std::pair<double, double>> dims;
  {
    std::vector<double> block_raw(fanout), block_aspect(fanout);
    for (int b = 0; b < fanout; ++b) {
      block_raw[b] = rng.uniform(1.0, 2.0);
      block_aspect[b] = rng.uniform(0.6, 1.7);
    }
    for (int i = 0; i < n_macros; ++i) {
      int b = i * fanout / n_macros;
      areas.push_back(block_raw[b]);
      dims.push_back({block_aspect[b], 0.0});
    }
    double raw_total = 0.0;
    for (double a : areas) raw_total += a;
    double scale = opts.util_target * outline.area() / raw_total;
    for (int i = 0; i < n_macros; ++i) {
      double area = areas[i] * scale;
      double w = std::sqrt(area * dims[i].first);
      double h = area / w;
      dims[i] = {w, h};
    }
  }

  // Balanced hierarchy tree of configurable fanout over the cells.
  int depth = 1;
  long leaves = fanout;
  while (leaves * 16 < n_cells) {
    leaves *= fanout;
    ++depth;
  }
  auto leaf_path = [&](int leaf) {
    std::vector<std::string> path;
    int v = leaf;
    for (int lvl = depth - 1; lvl >= 0; --lvl) {
      int div = 1;
      for (int t = 0; t < lvl; ++t) div *= fanout;
      path.push_back("h" + std::to_string(depth - 1 - lvl) + "_" +
                     std::to_string(v / div % fanout));
    }
    return path;
  };

  for (int i = 0; i < n_macros; ++i) {
    Instance inst;
    inst.id = static_cast<int>(d.instances.size());
    inst.name = "m" + std::to_string(i);
    inst.kind = InstanceKind::Macro;
    inst.width = dims[i].first;
    inst.height = dims[i].second;
    inst.hier = {"top", "mblk_" + std::to_string(i * fanout / std::max(1, n_macros))};
    d.instances.push_back(std::move(inst));
  }
  for (int i = 0; i < n_cells; ++i) {
    Instance inst;
    inst.id = static_cast<int>(d.instances.size());
    inst.name = "c" + std::to_string(i);
    inst.kind = InstanceKind::StdCell;
    double side =
        std::sqrt(opts.cell_util * outline.area() / std::max(1, n_cells));
    inst.width = side;
    inst.height = side;
    inst.is_flip_flop = rng.uniform() < opts.ff_fraction;
    inst.hier = leaf_path(static_cast<int>(static_cast<long>(i) * leaves / std::max(1, n_cells)));
    d.instances.push_back(std::move(inst));
  }

  int n_ports = opts.n_ports > 0 ? opts.n_ports : std::max(4, n_macros);
  for (int i = 0; i < n_ports; ++i) {
    Port port;
    port.id = i;
    port.name = "p" + std::to_string(i);
    double t = (i + 0.5) / n_ports * 4.0;
    int edge = static_cast<int>(t);
    double frac = t - edge;
    switch (edge) {
      case 0: port.x = frac * outline.width; port.y = 0.0; break;
      case 1: port.x = outline.width; port.y = frac * outline.height; break;
      case 2: port.x = (1.0 - frac) * outline.width; port.y = outline.height; break;
      default: port.x = 0.0; port.y = (1.0 - frac) * outline.height; break;
    }
    d.ports.push_back(std::move(port));
  }

  d.rebuild_index();

  // Nets biased toward intra-hierarchy connectivity: most pins of a net
  // come from one hierarchy leaf, and macro pins favor the macro block
  // aligned with that leaf's top-level group, so connected macros share
  // hierarchy just like real designs.
  std::vector<std::vector<int>> block_macros(fanout);
  for (int i = 0; i < n_macros; ++i)
    block_macros[i * fanout / std::max(1, n_macros)].push_back(d.macro_ids[i]);
  long leaves_per_group = std::max(1L, leaves / fanout);
  // Bus nets: runs of 2-pin nets between consecutive macros of one block,
  // mimicking the wide point-to-point buses that tie real macro arrays
  // together. They give macro pairs connectivity weight comparable to the
  // dense cell-to-cell traffic.
  // Pairs form a ring per block and every pair receives the same number of
  // bus bits, the way uniform-width buses tie banked memories together.
  std::vector<std::pair<int, int>> bus_pairs;
  for (const auto& blk : block_macros) {
    for (size_t i = 0; i + 1 < blk.size(); ++i)
      bus_pairs.push_back({blk[i], blk[i + 1]});
    if (blk.size() > 2) bus_pairs.push_back({blk.back(), blk.front()});
  }
  int n_bus = bus_pairs.empty()
                  ? 0
                  : static_cast<int>(opts.bus_fraction * n_nets);
  for (int i = 0; i < n_bus; ++i) {
    Net net;
    net.id = i;
    net.name = "n" + std::to_string(i);
    auto [a, b] = bus_pairs[i % bus_pairs.size()];
    net.pins.push_back({a, false, 0.0, 0.0});
    net.pins.push_back({b, false, 0.0, 0.0});
    d.nets.push_back(std::move(net));
  }
  for (int i = n_bus; i < n_nets; ++i) {
    Net net;
    net.id = i;
    net.name = "n" + std::to_string(i);
    int q = rng.uniform_int(2, 5);
    int home_leaf = rng.uniform_int(0, static_cast<int>(leaves) - 1);
    int lo = static_cast<int>(static_cast<long>(home_leaf) * n_cells / leaves);
    int hi = static_cast<int>(static_cast<long>(home_leaf + 1) * n_cells / leaves) - 1;
    const std::vector<int>& home_macros =
        block_macros[static_cast<int>(home_leaf / leaves_per_group) % fanout];
    for (int p = 0; p < q; ++p) {
      double kind = rng.uniform();
      if (kind < 0.25 || n_cells == 0) {
        if (!home_macros.empty() && rng.uniform() < 0.8) {
          net.pins.push_back(
              {home_macros[rng.uniform_int(0, static_cast<int>(home_macros.size()) - 1)],
               false, 0.0, 0.0});
        } else {
          net.pins.push_back({d.macro_ids[rng.uniform_int(0, n_macros - 1)], false, 0.0, 0.0});
        }
      } else if (kind < 0.28) {
        net.pins.push_back({rng.uniform_int(0, n_ports - 1), true, 0.0, 0.0});
      } else if (kind < 0.92 && hi >= lo) {
        net.pins.push_back({d.cell_ids[rng.uniform_int(lo, hi)], false, 0.0, 0.0});
      } else {
        net.pins.push_back({d.cell_ids[rng.uniform_int(0, n_cells - 1)], false, 0.0, 0.0});
      }
    }
    d.nets.push_back(std::move(net));
  }

  d.validate();
  return d;
}

}  // namespace mf
