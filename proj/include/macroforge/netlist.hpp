#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "macroforge/geometry.hpp"

namespace mf {

struct DesignError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ChipOutline {
  double width = 0.0;
  double height = 0.0;

  Point center() const { return {width / 2.0, height / 2.0}; }
  double area() const { return width * height; }
};

enum class InstanceKind { Macro, StdCell };

struct Instance {
  int id = -1;
  std::string name;
  InstanceKind kind = InstanceKind::StdCell;
  double width = 0.0;
  double height = 0.0;
  bool is_flip_flop = false;
  std::vector<std::string> hier;
  // Optional pre-placed position (macro center); such macros are fixed
  // from the start of the pipeline.
  bool fixed = false;
  Point fixed_pos;

  bool is_macro() const { return kind == InstanceKind::Macro; }
  double area() const { return width * height; }
};

struct Port {
  int id = -1;
  std::string name;
  double x = 0.0;
  double y = 0.0;
};

// A pin is either an instance pin (with an offset from the instance
// center) or a chip-boundary port.
struct PinRef {
  int index = -1;
  bool is_port = false;
  double dx = 0.0;
  double dy = 0.0;
};

struct Net {
  int id = -1;
  std::string name;
  std::vector<PinRef> pins;
};

struct Design {
  ChipOutline outline;
  std::vector<Instance> instances;
  std::vector<Port> ports;
  std::vector<Net> nets;

  // Dense macro / cell orderings derived from the instance list.
  std::vector<int> macro_ids;  // instance ids, ascending
  std::vector<int> cell_ids;

  int macro_count() const { return static_cast<int>(macro_ids.size()); }
  int cell_count() const { return static_cast<int>(cell_ids.size()); }
  double total_macro_area() const;

  // Ordinal of an instance within macro_ids / cell_ids, -1 if not there.
  int macro_ordinal(int instance_id) const;
  int cell_ordinal(int instance_id) const;

  void rebuild_index();
  void validate() const;
};

Design load_design(const std::string& path);
Design parse_design(const std::string& json_text);
std::string save_design(const Design& design);

struct SyntheticOptions {
  int hier_fanout = 4;
  double ff_fraction = 0.3;
  double util_target = 0.45;  // total macro area / outline area
  double cell_util = 0.3;     // total std-cell area / outline area
  double bus_fraction = 0.25;  // fraction of nets forming macro-to-macro buses
  int n_ports = -1;           // default: max(4, n_macros)
};

Design generate_synthetic(uint64_t seed, int n_macros, int n_cells, int n_nets,
                          const ChipOutline& outline,
                          const SyntheticOptions& opts = {});

}  // namespace mf
