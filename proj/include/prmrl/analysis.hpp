#pragma once

#include <cstdint>
#include <vector>

#include "prmrl/rng.hpp"

namespace prmrl {

/// Posterior mean of a Bernoulli rate under a uniform prior: (n_s + 1) / (n_w + 2).
double expected_success(int successes, int attempts);

/// p_n^{n_w}; n_w may be fractional (an average waypoint count).
double path_success(double edge_success, double waypoints);

/// (1 - rho_o f^2) / (1 - rho_o). Throws for rho_o outside [0, 1).
double connectivity_ratio(double obstacle_density, double corner_factor);

/// n_walls * 1/2 * erfc(d_safety / (sqrt(2) sigma)).
double per_step_collision(double d_safety, double sigma_pos, int n_walls);

/// (1 - per_step_collision)^(d_corr / d_step).
double survival_probability(double d_safety, double sigma_pos, int n_walls, double d_corr, double d_step);

/// Fraction of `trials` corridor walks with no lateral excursion past a wall.
/// Each of round(d_corr / d_step) steps draws an independent N(0, sigma)
/// offset from the centerline of travel; a wall sits d_safety to the right
/// and, when n_walls = 2, also d_safety to the left.
double simulate_corridor_survival(double d_safety, double sigma_pos, int n_walls, double d_corr, double d_step,
                                  std::int64_t trials, Rng& rng);

struct CostModelInputs {
  double free_area = 0.0;        // V_W, m^2
  double bounding_radius = 0.0;  // d; 0 skips the c = d_pi / d check
  int dimensions = 2;            // D_W
  double density = 0.0;          // rho_w, nodes per m^2
  double policy_range = 0.0;     // d_pi, m
  int attempts = 0;              // n_w
  double step_length = 0.2;      // v_max * dt, m
};

struct CostPrediction {
  double nodes = 0.0;      // V_W rho
  double neighbors = 0.0;  // pi d_pi^2 rho
  double checks = 0.0;     // nodes * neighbors * n_w * d_pi / step_length
};

/// Order-of-magnitude build cost. Predicts scaling exponents, not absolute counts.
CostPrediction predicted_cost(const CostModelInputs& in);

struct BuildCounters {
  std::uint64_t nodes = 0;
  std::uint64_t candidate_edges = 0;
  std::uint64_t accepted_edges = 0;
  std::uint64_t rollouts = 0;
  std::uint64_t collision_checks = 0;
  double wall_time_s = 0.0;
};

/// Least-squares slope of log(y) on log(x). Needs two or more positive pairs.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace prmrl
