#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cenmeta/model.hpp"

// Coordinate-descent solver for the design-parameter problem
//   max over (R_I, L, xi) of S, subject to the box bounds,
// where S is the STP, the inverse variance, the meta distribution at x0, or
// a weighted mix of STP and meta.
namespace cenmeta::opt {

enum class Objective { Stp, InverseVariance, Meta, Weighted };

Objective objective_from_string(const std::string& name);
std::string objective_to_string(Objective obj);

struct OptimizationProblem {
    Objective objective = Objective::Stp;
    double tau = 1.0; // linear SIR threshold
    double x0 = 0.9;  // reliability threshold for Meta / Weighted
    double eta = 0.5; // Weighted: eta * stp + (1 - eta) * meta(x0)
    // bounds and grid precisions; ri is R_c (fixed scheme, meters) or mu
    double ri_min = 0.0, ri_max = 0.0; // ri_max = 0: default (mu_max = 5)
    int l_min = 0, l_max = -1;         // l_max = -1: default M-1
    double xi_min = 1.0, xi_max = 0.0; // xi_max = 0: default N/C
    double ri_step = 0.0;              // 0: default 5 m (fixed) / 0.05 (flexible)
    double xi_step = 0.05;
    int max_rounds = 20;
    // starting point; NaN/-1 mean the default (midpoint R_I and xi,
    // L = floor((M-1)/2))
    double init_ri = -1.0;
    int init_l = -1;
    double init_xi = -1.0;
    int threads = 0; // parallel grid scans; 0 = hardware concurrency
};

// Fills the scheme-dependent defaults (bounds, steps, initial point).
OptimizationProblem resolve_problem(const OptimizationProblem& problem,
                                    const NetworkConfig& cfg);

// Parse the "optimize" section of a config document.
OptimizationProblem problem_from_json(const nlohmann::json& section);

struct TrajectoryPoint {
    int round = 0;
    char coordinate = '-'; // 'r', 'l', 'x', or '-' for the initial point
    double ri = 0.0;
    int l = 0;
    double xi = 1.0;
    double objective = 0.0;
};

struct OptimizationResult {
    double ri_star = 0.0;
    int l_star = 0;
    double xi_star = 1.0;
    double objective_value = 0.0;
    int rounds_used = 0;
    bool converged = false;        // improvement < 1e-6 over a full round
    bool budget_exhausted = false; // max_rounds hit first
    bool objective_capped = false; // inverse-variance sentinel was returned
    std::vector<TrajectoryPoint> trajectory;
};

// Objective value at one grid point (cfg's scheme kind is kept, its
// parameters replaced). The inverse-variance objective saturates at 1e12
// when the variance is numerically zero.
double evaluate_objective(const OptimizationProblem& problem, double ri, int l, double xi,
                          const NetworkConfig& cfg, bool* capped = nullptr);

// Cyclic exhaustive grid scans (R_I, then L, then xi) at the configured
// precisions until a full round improves by less than 1e-6 or the round
// budget runs out. Ties break toward the smaller coordinate value.
OptimizationResult coordinate_descent(const OptimizationProblem& problem,
                                      const NetworkConfig& cfg);

} // namespace cenmeta::opt
