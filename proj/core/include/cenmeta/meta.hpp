#pragma once

#include <span>
#include <vector>

#include "cenmeta/model.hpp"

// Conditional-STP upper bound, its first and second moments, the
// beta-matched SIR meta distribution, and the CSTP variance.
namespace cenmeta::meta {

// Two-moment summary of the CSTP upper bound at one SIR threshold.
// kappa = (m1 - m2)(1 - m1) / (m2 - m1^2) is the matched beta parameter;
// `degenerate` marks configurations whose variance is numerically zero
// (beta fit replaced by a step at m1).
struct MomentSummary {
    double m1 = 1.0;
    double m2 = 1.0;
    double kappa = 0.0;
    double tau = 0.0;
    bool fixed_scheme = false;
    bool degenerate = false;
};

// CSTP upper bound for an explicit interferer set (radii of the non-nulled
// interfering BSs), serving distance z and theta satisfied requests:
//   sum_i (-1)^{i+1} C(M-theta, i) prod_x 1/(1 + i beta tau z^a |x|^-a)
// with beta = ((M-theta)!)^{-1/(M-theta)}. An empty set gives 1.
double upper_bound_cstp(std::span<const double> radii, double z, int theta, double tau,
                        const NetworkConfig& cfg);

// First moment of the upper bound (per file). The fixed scheme needs a
// serving-distance quadrature; the flexible scheme is closed form.
double m1_fixed(double tau, const NetworkConfig& cfg);
double m1_flexible(double tau, const NetworkConfig& cfg);
double m1_file(double tau, const NetworkConfig& cfg);

// H(omega, x, y) = int_omega (1 - 1/((1 + i x v^-a)(1 + j y v^-a))) v dv,
// the pairwise kernel of the second moment; hi may be +infinity.
// Symmetric: h_ij(lo, hi, x, y, i, j) == h_ij(lo, hi, y, x, j, i).
double h_ij(double lo, double hi, double x, double y, int i, int j, double alpha);

// Second moment of the upper bound (per file), quadruple sum over
// (theta1, theta2, i, j) with a serving-distance quadrature. The kernel
// table is memoized per z-node and the H symmetry halves the work.
// Capped at M <= 8 (the quadruple sum scales as (L+1)^2 M^2).
double m2_file(double tau, const NetworkConfig& cfg);

MomentSummary moments(double tau, const NetworkConfig& cfg);

// Beta-approximated meta distribution 1 - I_x(m1 kappa/(1-m1), kappa);
// falls back to a step at m1 for degenerate moments.
double beta_meta(const MomentSummary& ms, double x);

// Approximated CSTP variance m2 - m1^2, per file and hit-mass weighted.
double variance_file(double tau, const NetworkConfig& cfg);
double variance_total(double tau, const NetworkConfig& cfg);

// Whole-network meta distribution at reliability threshold x.
double meta_total(double x, double tau, const NetworkConfig& cfg);

// Meta curve on a reliability grid; per-file or scaled by hit mass.
struct MetaCurve {
    std::vector<double> x;
    std::vector<double> value;
    bool per_file = true;
};
MetaCurve meta_curve(const MomentSummary& ms, const NetworkConfig& cfg, bool per_file,
                     int grid_points = 201);

} // namespace cenmeta::meta
