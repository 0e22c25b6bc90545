#include "prmrl/analysis.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "prmrl/errors.hpp"

namespace prmrl {

double expected_success(int n_s, int n_w) {
  if (n_s < 0 || n_w < 0 || n_s > n_w) throw PreconditionError("expected_success needs 0 <= n_s <= n_w");
  return (n_s + 1.0) / (n_w + 2.0);
}

double path_success(double p_n, double n_w) {
  if (p_n < 0.0 || p_n > 1.0 || n_w < 0.0) throw PreconditionError("path_success needs p_n in [0, 1], n_w >= 0");
  return std::pow(p_n, n_w);
}

double connectivity_ratio(double rho_o, double f) {
  if (rho_o < 0.0 || rho_o >= 1.0) throw PreconditionError("obstacle density must lie in [0, 1)");
  if (f < 0.0 || f > 1.0) throw PreconditionError("corner factor must lie in [0, 1]");
  return (1.0 - rho_o * f * f) / (1.0 - rho_o);
}

double per_step_collision(double d_safety, double sigma, int n_walls) {
  if (n_walls != 1 && n_walls != 2) throw PreconditionError("n_walls must be 1 or 2");
  if (!(sigma > 0.0)) throw PreconditionError("sigma_pos must be positive");
  return 0.5 * n_walls * std::erfc(d_safety / (std::numbers::sqrt2 * sigma));
}

double survival_probability(double d_safety, double sigma, int n_walls, double d_corr, double d_step) {
  if (!(d_step > 0.0)) throw PreconditionError("d_step must be positive");
  return std::pow(1.0 - per_step_collision(d_safety, sigma, n_walls), d_corr / d_step);
}

double simulate_corridor_survival(double d_safety, double sigma, int n_walls, double d_corr, double d_step,
                                  std::int64_t trials, Rng& rng) {
  if (n_walls != 1 && n_walls != 2) throw PreconditionError("n_walls must be 1 or 2");
  if (!(sigma > 0.0) || !(d_step > 0.0) || trials < 1) throw PreconditionError("invalid corridor simulation input");
  const auto steps = static_cast<std::int64_t>(std::llround(d_corr / d_step));
  std::normal_distribution<double> offset(0.0, sigma);
  std::int64_t survived = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    bool alive = true;
    for (std::int64_t s = 0; s < steps && alive; ++s) {
      const double y = offset(rng);
      alive = y > -d_safety && (n_walls == 1 || y < d_safety);
    }
    survived += alive;
  }
  return static_cast<double>(survived) / static_cast<double>(trials);
}

CostPrediction predicted_cost(const CostModelInputs& in) {
  if (in.density < 0.0 || in.free_area < 0.0 || in.policy_range < 0.0 || in.attempts < 0)
    throw PreconditionError("cost model inputs must be non-negative");
  if (!(in.step_length > 0.0)) throw PreconditionError("step_length must be positive");
  if (in.bounding_radius > 0.0) {
    const double c = in.policy_range / in.bounding_radius;
    if (!(c > 0.0) || c > 1.0) throw PreconditionError("cost model assumes 0 < d_pi / d <= 1");
  }
  CostPrediction p;
  p.nodes = in.free_area * in.density;
  p.neighbors = std::numbers::pi * in.policy_range * in.policy_range * in.density;
  p.checks = p.nodes * p.neighbors * in.attempts * (in.policy_range / in.step_length);
  return p;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("slope fit needs two or more (x, y) pairs");
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw PreconditionError("log-log fit needs positive values");
    a(i, 0) = std::log(x[i]);
    a(i, 1) = 1.0;
    b(i) = std::log(y[i]);
  }
  return a.colPivHouseholderQr().solve(b)(0);
}

}  // namespace prmrl
