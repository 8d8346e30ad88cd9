#include "macroforge/tuner.hpp"

#include <Eigen/Dense>

#include "json.hpp"

namespace mf {

namespace {

constexpr std::array<int, 8> kPrimes{2, 3, 5, 7, 11, 13, 17, 19};
constexpr double kEps = 1e-9;

std::array<double, 8> halton_point(uint64_t index) {
  std::array<double, 8> u;
  for (int d = 0; d < 8; ++d) u[d] = halton(index, kPrimes[d]);
  return u;
}

double sq_dist(const std::array<double, 8>& a, const std::array<double, 8>& b) {
  double s = 0.0;
  for (int d = 0; d < 8; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return s;
}

double kernel(const std::array<double, 8>& a, const std::array<double, 8>& b) {
  constexpr double ell = 0.3;
  return std::exp(-sq_dist(a, b) / (2.0 * ell * ell));
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double norm_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

// Gaussian-process surrogate over the finished points; picks the
// candidate with the highest expected improvement.
std::array<double, 8> propose(const std::vector<TunePoint>& history,
                              uint64_t candidate_offset) {
  std::vector<const TunePoint*> fin;
  for (const TunePoint& p : history)
    if (std::isfinite(p.objective)) fin.push_back(&p);
  if (fin.empty()) return halton_point(candidate_offset);

  const int n = static_cast<int>(fin.size());
  double mean = 0.0;
  for (const TunePoint* p : fin) mean += p->objective;
  mean /= n;
  double var = 0.0;
  for (const TunePoint* p : fin) {
    double d = p->objective - mean;
    var += d * d;
  }
  double scale = n > 1 ? std::sqrt(var / (n - 1)) : 1.0;
  if (scale < 1e-12) scale = 1.0;

  Eigen::MatrixXd K(n, n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    y(i) = (fin[i]->objective - mean) / scale;
    for (int j = 0; j < n; ++j) K(i, j) = kernel(fin[i]->u, fin[j]->u);
    K(i, i) += 1e-6;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  Eigen::VectorXd alpha = llt.solve(y);
  double best_y = y.minCoeff();

  std::array<double, 8> best_u = halton_point(candidate_offset);
  double best_ei = -1.0;
  for (uint64_t c = 0; c < 512; ++c) {
    std::array<double, 8> u = halton_point(candidate_offset + c);
    Eigen::VectorXd k(n);
    for (int i = 0; i < n; ++i) k(i) = kernel(u, fin[i]->u);
    double mu = k.dot(alpha);
    Eigen::VectorXd v = llt.matrixL().solve(k);
    double s2 = std::max(1e-12, 1.0 - v.squaredNorm());
    double s = std::sqrt(s2);
    double z = (best_y - mu) / s;
    double ei = (best_y - mu) * norm_cdf(z) + s * norm_pdf(z);
    if (ei > best_ei) {
      best_ei = ei;
      best_u = u;
    }
  }
  return best_u;
}

}  // namespace

double halton(uint64_t index, int base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % static_cast<uint64_t>(base));
    index /= static_cast<uint64_t>(base);
  }
  return r;
}

std::array<double, 8> default_params(const PipelineConfig& base) {
  std::array<double, 8> u;
  u[0] = base.lambda;
  for (int t = 0; t < 7; ++t) u[t + 1] = base.weights.w[t] / 2.0;
  return u;
}

PipelineConfig apply_params(const PipelineConfig& base,
                            const std::array<double, 8>& u) {
  PipelineConfig c = base;
  c.lambda = std::clamp(u[0], 1e-6, 1.0);
  for (int t = 0; t < 7; ++t) c.weights.w[t] = 2.0 * std::clamp(u[t + 1], 0.0, 1.0);
  return c;
}

double tune_objective(const Metrics& m, const Metrics& baseline) {
  auto ratio = [](double x, double x0) { return (x + kEps) / (x0 + kEps); };
  return ratio(m.hpwl, baseline.hpwl) +
         ratio(m.total_notch, baseline.total_notch) +
         ratio(m.mean_periphery_dist, baseline.mean_periphery_dist);
}

TuneResult tune(const Design& design, const PipelineConfig& base,
                const TuneSpec& spec) {
  if (spec.budget < 1) throw DesignError("tuning budget must be at least 1");
  TuneResult result;
  const int n_init = (spec.budget + 4) / 5;

  for (int i = 0; i < spec.budget; ++i) {
    std::array<double, 8> u;
    if (i == 0) {
      u = default_params(base);
    } else if (i < n_init) {
      u = halton_point(static_cast<uint64_t>(i));
    } else {
      u = propose(result.history, static_cast<uint64_t>(n_init));
    }
    TunePoint point;
    point.u = u;
    try {
      FinalPlacement placed = run_pipeline(design, apply_params(base, u));
      if (i == 0) result.baseline_metrics = placed.metrics;
      point.objective = tune_objective(placed.metrics, result.baseline_metrics);
    } catch (const DesignError&) {
      point.failed = true;
      point.objective = kInf;
      if (i == 0)
        throw DesignError("tuning baseline run failed; design is not placeable");
    }
    result.history.push_back(point);
    if (point.objective < result.best_objective) {
      result.best_objective = point.objective;
      result.best_index = i;
    }
  }
  result.best_config = apply_params(base, result.history[result.best_index].u);
  return result;
}

std::string tune_result_to_json(const TuneResult& result) {
  nlohmann::json j = nlohmann::json::parse(result.best_config.to_json_text());
  j["best_objective"] = result.best_objective;
  j["best_index"] = result.best_index;
  nlohmann::json hist = nlohmann::json::array();
  for (const TunePoint& p : result.history) {
    nlohmann::json e;
    e["params"] = std::vector<double>(p.u.begin(), p.u.end());
    if (p.failed)
      e["objective"] = "failed";
    else
      e["objective"] = p.objective;
    hist.push_back(e);
  }
  j["history"] = std::move(hist);
  return j.dump(2);
}

}  // namespace mf
