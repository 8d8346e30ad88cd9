#include "macroforge/abplace.hpp"

#include <cmath>
#include <stdexcept>

namespace mf {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap_angle(double t) {
  t = std::fmod(t, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}

// Smooth |x|: sqrt(x^2 + eps^2) - eps, with derivative x / sqrt(x^2+eps^2).
inline double smooth_abs(double x, double eps, double& deriv) {
  double r = std::sqrt(x * x + eps * eps);
  deriv = x / r;
  return r - eps;
}
}  // namespace

Ellipse build_ellipse(const ChipOutline& outline, double beta_init,
                      double beta_finish, double gamma, int k) {
  double scale = std::max(beta_finish, beta_init * std::pow(gamma, k - 1));
  Ellipse e;
  e.a = scale * outline.width / 2.0;
  e.b = scale * outline.height / 2.0;
  e.center = outline.center();
  return e;
}

std::vector<double> project_macros(const std::vector<Point>& positions,
                                   const Ellipse& ellipse, Rng& rng) {
  std::vector<double> theta(positions.size());
  for (size_t i = 0; i < positions.size(); ++i) {
    double dx = positions[i].x - ellipse.center.x;
    double dy = positions[i].y - ellipse.center.y;
    if (std::abs(dx) < 1e-12 && std::abs(dy) < 1e-12)
      theta[i] = rng.uniform(0.0, kTwoPi);  // degenerate: macro at the center
    else
      theta[i] = wrap_angle(std::atan2(dy, dx));
  }
  return theta;
}

AbEval objective(const std::vector<double>& theta, const AbProblem& problem,
                 const Ellipse& ellipse) {
  const size_t n = problem.macros.size();
  const double eps = problem.epsilon;
  AbEval out;
  out.gradient.assign(n, 0.0);

  std::vector<Point> pos(n);
  std::vector<double> dxdt(n), dydt(n);
  for (size_t i = 0; i < n; ++i) {
    pos[i] = ellipse.point_at(theta[i]);
    dxdt[i] = -ellipse.a * std::sin(theta[i]);
    dydt[i] = ellipse.b * std::cos(theta[i]);
  }

  auto smooth_dist = [&](const Point& p, const Point& q, double& ddx, double& ddy) {
    double dx = p.x - q.x, dy = p.y - q.y;
    double d = std::sqrt(dx * dx + dy * dy + eps * eps);
    ddx = dx / d;
    ddy = dy / d;
    return d;
  };

  // Connection term: for each unplaced macro i, distance to every other
  // entity weighted by affinity. Unplaced pairs appear in both orders.
  for (size_t i = 0; i < n; ++i) {
    int ei = problem.macros[i].entity;
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double a = problem.affinity(ei, problem.macros[j].entity);
      if (a == 0.0) continue;
      double ddx, ddy;
      double d = smooth_dist(pos[i], pos[j], ddx, ddy);
      out.value += d * a;
      out.gradient[i] += a * (ddx * dxdt[i] + ddy * dydt[i]);
      out.gradient[j] -= a * (ddx * dxdt[j] + ddy * dydt[j]);
    }
    for (const auto& anchor : problem.anchors) {
      double a = problem.affinity(ei, anchor.entity);
      if (a == 0.0) continue;
      double ddx, ddy;
      double d = smooth_dist(pos[i], anchor.pos, ddx, ddy);
      out.value += d * a;
      out.gradient[i] += a * (ddx * dxdt[i] + ddy * dydt[i]);
    }
  }

  // Overlap term over unordered unplaced pairs.
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      double half_w = (problem.macros[i].width + problem.macros[j].width) / 2.0;
      double half_h = (problem.macros[i].height + problem.macros[j].height) / 2.0;
      double dax, day;
      double ax = smooth_abs(pos[i].x - pos[j].x, eps, dax);
      double ay = smooth_abs(pos[i].y - pos[j].y, eps, day);
      double ux = half_w - ax;
      double uy = half_h - ay;
      if (ux <= 0.0 || uy <= 0.0) continue;  // clamp at zero
      out.value += problem.lambda * ux * uy;
      // d(ux*uy)/dtheta_i = -dax*dxdt_i*uy - day*dydt_i*ux
      double gx = -dax * uy;
      double gy = -day * ux;
      out.gradient[i] += problem.lambda * (gx * dxdt[i] + gy * dydt[i]);
      out.gradient[j] -= problem.lambda * (gx * dxdt[j] + gy * dydt[j]);
    }
  }

  return out;
}

AbResult optimize(std::vector<double> theta0, const AbProblem& problem,
                  const Ellipse& ellipse, const AbOptions& opts) {
  AbResult result;
  for (double& t : theta0) t = wrap_angle(t);
  result.theta = std::move(theta0);
  const size_t n = result.theta.size();
  if (n == 0) return result;

  AbEval eval = objective(result.theta, problem, ellipse);
  if (!std::isfinite(eval.value))
    throw std::runtime_error("abplace: objective is not finite at theta0");
  result.trace.push_back(eval.value);

  std::vector<double> step(n, 0.05);
  std::vector<double> proposal(n);
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    double gmax = 0.0;
    for (double g : eval.gradient) gmax = std::max(gmax, std::abs(g));
    if (!std::isfinite(gmax))
      throw std::runtime_error("abplace: gradient is not finite");
    if (gmax < 1e-14) break;

    // Per-parameter steps; halve all of them until the move improves.
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      for (size_t i = 0; i < n; ++i)
        proposal[i] = wrap_angle(result.theta[i] - step[i] * eval.gradient[i]);
      AbEval next = objective(proposal, problem, ellipse);
      if (next.value < eval.value) {
        double drop = eval.value - next.value;
        result.theta = proposal;
        eval = std::move(next);
        result.trace.push_back(eval.value);
        for (double& s : step) s = std::min(s * 1.2, 1.0);
        accepted = true;
        if (drop <= opts.tol * std::max(1.0, eval.value)) iter = opts.max_iters;
        break;
      }
      for (double& s : step) s *= 0.5;
    }
    if (!accepted) break;
  }

  // Coordinate refinement: gradient steps cannot reorder macros around the
  // ring (passing another macro raises the overlap term before lowering the
  // connection term), so sweep each macro over a full circle of candidate
  // angles and keep strict improvements. Each accepted move lowers the
  // objective, preserving the non-increasing trace. Only the terms touching
  // the moved macro are re-evaluated, so a sweep costs O(n * grid * n).
  auto contrib = [&](size_t i, double theta_i) {
    const double eps = problem.epsilon;
    Point pi = ellipse.point_at(theta_i);
    int ei = problem.macros[i].entity;
    double total = 0.0;
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      Point pj = ellipse.point_at(result.theta[j]);
      double a = problem.affinity(ei, problem.macros[j].entity);
      if (a != 0.0) {
        double dx = pi.x - pj.x, dy = pi.y - pj.y;
        // The full objective visits every macro pair in both orders.
        total += 2.0 * a * std::sqrt(dx * dx + dy * dy + eps * eps);
      }
      double dax, day;
      double ux = (problem.macros[i].width + problem.macros[j].width) / 2.0 -
                  smooth_abs(pi.x - pj.x, eps, dax);
      double uy = (problem.macros[i].height + problem.macros[j].height) / 2.0 -
                  smooth_abs(pi.y - pj.y, eps, day);
      if (ux > 0.0 && uy > 0.0) total += problem.lambda * ux * uy;
    }
    for (const auto& anchor : problem.anchors) {
      double a = problem.affinity(ei, anchor.entity);
      if (a == 0.0) continue;
      double dx = pi.x - anchor.pos.x, dy = pi.y - anchor.pos.y;
      total += a * std::sqrt(dx * dx + dy * dy + eps * eps);
    }
    return total;
  };

  const int n_grid = 96;
  double value = eval.value;
  for (int sweep = 0; sweep < 20; ++sweep) {
    bool moved = false;
    for (size_t i = 0; i < n; ++i) {
      double cur = contrib(i, result.theta[i]);
      double best_theta = result.theta[i];
      double best_delta = 0.0;
      for (int g = 0; g < n_grid; ++g) {
        double cand = wrap_angle(kTwoPi * g / n_grid);
        double delta = contrib(i, cand) - cur;
        if (delta < best_delta - 1e-12) {
          best_delta = delta;
          best_theta = cand;
        }
      }
      if (best_theta != result.theta[i]) {
        result.theta[i] = best_theta;
        value += best_delta;
        result.trace.push_back(value);
        moved = true;
      }
    }
    if (!moved) break;
  }
  return result;
}

}  // namespace mf
