#pragma once

#include <functional>
#include <vector>

#include "macroforge/geometry.hpp"
#include "macroforge/netlist.hpp"
#include "macroforge/rng.hpp"

namespace mf {

struct Ellipse {
  double a = 0.0;  // semi-axis along x
  double b = 0.0;  // semi-axis along y
  Point center;

  Point point_at(double theta) const {
    return {center.x + a * std::cos(theta), center.y + b * std::sin(theta)};
  }
};

Ellipse build_ellipse(const ChipOutline& outline, double beta_init,
                      double beta_finish, double gamma, int k);

// One movable macro on the ellipse.
struct AbMacro {
  double width = 0.0;
  double height = 0.0;
  int entity = -1;  // row into the connection matrix
};

// Fixed connection target: a placed macro center or a cluster centroid.
struct AbAnchor {
  Point pos;
  int entity = -1;
};

struct AbProblem {
  std::vector<AbMacro> macros;
  std::vector<AbAnchor> anchors;
  // Affinity lookup by entity pair.
  std::function<double(int, int)> affinity;
  double lambda = 0.02;
  double epsilon = 1e-6;
};

struct AbEval {
  double value = 0.0;
  std::vector<double> gradient;
};

std::vector<double> project_macros(const std::vector<Point>& positions,
                                   const Ellipse& ellipse, Rng& rng);

AbEval objective(const std::vector<double>& theta, const AbProblem& problem,
                 const Ellipse& ellipse);

struct AbOptions {
  int max_iters = 500;
  double tol = 1e-6;  // relative objective change
};

struct AbResult {
  std::vector<double> theta;
  std::vector<double> trace;  // accepted objective values, non-increasing
};

AbResult optimize(std::vector<double> theta0, const AbProblem& problem,
                  const Ellipse& ellipse, const AbOptions& opts = {});

}  // namespace mf
