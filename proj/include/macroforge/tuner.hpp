#pragma once

#include <array>

#include "macroforge/driver.hpp"

namespace mf {

// Eight tunable knobs mapped into the unit cube: u[0] is the overlap
// weight lambda, u[1..7] scale the seven relocating cost weights (w = 2u).

struct TuneSpec {
  int budget = 50;
};

struct TunePoint {
  std::array<double, 8> u{};
  double objective = kInf;
  bool failed = false;
};

struct TuneResult {
  std::vector<TunePoint> history;
  int best_index = -1;
  PipelineConfig best_config;
  double best_objective = kInf;
  Metrics baseline_metrics;
};

std::array<double, 8> default_params(const PipelineConfig& base);
PipelineConfig apply_params(const PipelineConfig& base,
                            const std::array<double, 8>& u);

// Radical-inverse quasi-random sequence element (1-based index).
double halton(uint64_t index, int base);

// Sum of the three metric ratios against the baseline run; the baseline
// point itself scores exactly 3.
double tune_objective(const Metrics& m, const Metrics& baseline);

TuneResult tune(const Design& design, const PipelineConfig& base,
                const TuneSpec& spec);

// Emitted as tune_result.json; the top level doubles as a pipeline config
// holding the best parameters.
std::string tune_result_to_json(const TuneResult& result);

}  // namespace mf
