#pragma once

#include <vector>

#include "cenmeta/model.hpp"

// Closed-form / quadrature evaluation of the interference-nulling load
// statistics, the interferer band decomposition, and the successful
// transmission probability (STP) for both IN schemes. All functions are
// pure; sweeps may evaluate them from many threads concurrently.
namespace cenmeta::analytic {

// Load statistics of the nulling machinery for one configuration:
//   theta_bar   mean number of IN requests received by a BS,
//   epsilon     probability a received request is not satisfied (L-cap),
//   theta_i_pmf P[Theta_I = theta], theta = 0..L, number of requests a BS
//               actually satisfies.
struct INLoadStats {
    double theta_bar = 0.0;
    double epsilon = 1.0;
    std::vector<double> theta_i_pmf;
};

// Mean number of IN requests received by a BS.
//   fixed:    pi lambda R_c^2 + exp(-pi lambda R_c^2 / xi) - 1
//   flexible: xi mu^2 - min(mu^2, 1)
double mean_in_requests(const NetworkConfig& cfg);

// Poisson PMF of the number of received IN requests.
double theta_r_pmf(double theta_bar, int theta);

// PMF of the number of requests satisfied by a BS: Poisson masses below L,
// the full Poisson tail collapsed onto theta = L.
std::vector<double> theta_i_pmf(double theta_bar, int max_in_dof);

// IN missing probability: chance that a BS which received the typical
// user's request does not null it, sum_{t>=L} ((t+1-L)/(t+1)!) tb^t e^-tb.
double in_missing_prob(double theta_bar, int max_in_dof);

INLoadStats in_load_stats(const NetworkConfig& cfg);

// Radial decomposition of the interference field around the typical user
// at serving distance z. Band a is the inner (nulling-covered) disk, band b
// the annulus between the two breakpoints, band c everything beyond; each
// carries its own effective interferer density.
struct Band {
    double density = 0.0; // m^-2
    double lo = 0.0;
    double hi = 0.0; // may be +infinity
};
struct InterfererBands {
    Band a, b, c;
    double a_coef = 1.0; // scheme coefficients entering q_0 / w_0
    double b_coef = 1.0;
};

InterfererBands interferer_bands(const NetworkConfig& cfg, const INLoadStats& stats,
                                 double z);

// F(x) = 2F1(-2/alpha, 1; 1-2/alpha; -x) - 1. Computed without cancellation
// for small x. Nonnegative and increasing, F(0) = 0.
double f_func(double x, double alpha);

// F~_m(x) = 2F1(1+m, m-2/alpha; m-2/alpha+1; -x) / (alpha m - 2), m >= 1.
double f_tilde(int m, double x, double alpha);

// First column q_0..q_{dim-1} of the Toeplitz exponent matrix for the fixed
// IN scheme at serving distance z and SIR threshold tau. q_0 is the Laplace
// exponent of the interference at s = tau z^alpha, q_m its scaled
// derivatives.
std::vector<double> q_vector(double z, double tau, const NetworkConfig& cfg,
                             const INLoadStats& stats, int dim);

// Toeplitz coefficients w_0..w_{dim-1} for the flexible IN scheme (z
// factors out of the flexible exponent, so these depend on tau only).
std::vector<double> w_vector(double tau, const NetworkConfig& cfg,
                             const INLoadStats& stats, int dim);

// Per-file STP (the requested file is in the cached set; under FUDC the
// value does not depend on which one).
double stp_fixed_file(double tau, const NetworkConfig& cfg);
double stp_flexible_file(double tau, const NetworkConfig& cfg);
double stp_file(double tau, const NetworkConfig& cfg); // dispatch on scheme

// Whole-network STP = hit mass x per-file STP.
double stp_total(double tau, const NetworkConfig& cfg);

// Solve for the fixed-scheme range R_c giving the same mean request load
// as the flexible scheme with coefficient mu (bisection, 1e-6 relative).
double match_fixed_range(double mu, double lambda_bs, double xi);

// Inverse matching: the mu whose flexible load equals the fixed load at
// r_c (closed form).
double match_flexible_coef(double r_c, double lambda_bs, double xi);

} // namespace cenmeta::analytic
