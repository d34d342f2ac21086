#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

// Special functions and structured linear algebra shared by the analytic
// formulas. Everything here is pure and reentrant; the parameter regimes
// supported are the ones the network model actually produces (path-loss
// exponent alpha > 2, nonnegative SIR thresholds), not a general-purpose
// special-function library.
namespace cenmeta::specfun {

// Gauss hypergeometric function 2F1(a, b; c; -x) evaluated at a
// nonpositive argument, x >= 0. The raw Gauss series diverges for x > 1,
// so the argument is first mapped to w = x/(1+x) in [0,1) with a Pfaff
// transformation; of the two Pfaff variants the one whose transformed
// series converges absolutely at w = 1 is preferred.
// Relative accuracy about 1e-12 for the call-site parameter patterns.
// Throws std::runtime_error (with the parameters echoed) if the
// transformed series fails to converge.
double gauss_2f1_neg(double a, double b, double c, double x);

// B(a, b) = Gamma(a) Gamma(b) / Gamma(a+b), a, b > 0.
double beta_fn(double a, double b);

// Regularized incomplete beta function I_x(a, b), x in [0,1], a, b > 0.
double reg_inc_beta(double x, double a, double b);

// Regularized lower incomplete gamma function P(s, x) = gamma(s, x)/Gamma(s).
double reg_lower_gamma(double s, double x);

// sinc(x) = sin(pi x) / (pi x), with the limit value 1 at x = 0.
double sinc(double x);

// First column of exp(Q_D) for the D-by-D lower-triangular Toeplitz matrix
// Q_D with first column q[0..D-1]. Uses the exact column recurrence
//   entries[0] = exp(q[0]),
//   entries[m] = sum_{k<m} ((m-k)/m) q[m-k] entries[k],
// so the dense matrix is never formed. The entry sum equals the L1 induced
// norm of exp(Q_D) when the subdiagonal entries are nonnegative.
std::vector<double> lt_toeplitz_exp_column(std::span<const double> q, int dim);

// First column of W^{-1} where W is lower-triangular Toeplitz with diagonal
// d > 0 and strict subdiagonals -subdiag[0], -subdiag[1], ... (i.e. W has
// -w_m below the diagonal; subdiag[j] is w_{j+1}). Forward substitution:
//   entries[0] = 1/d,
//   entries[m] = (1/d) sum_{k<m} w_{m-k} entries[k].
// The entry sum equals ||W^{-1}||_1 for nonnegative subdiagonals.
// Throws std::domain_error for d <= 0 (singular or indefinite diagonal).
std::vector<double> lt_toeplitz_inv_column(double d, std::span<const double> subdiag,
                                           int dim);

struct QuadResult {
    double value = 0.0;
    double error = 0.0;    // absolute error estimate
    bool converged = true; // false if the subdivision limit was reached
};

namespace detail {

// Gauss-Kronrod 7-15 node pair on [-1, 1]; nodes are the nonnegative ones.
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
void kronrod_panel(F&& f, double a, double b, double& integral, double& err) {
    const double h = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(mid - h * kKronrodNodes[i]);
        fv[14 - i] = f(mid + h * kKronrodNodes[i]);
    }
    fv[7] = f(mid);
    double k15 = 0.0;
    for (int i = 0; i < 7; ++i) k15 += kKronrodWeights[i] * (fv[i] + fv[14 - i]);
    k15 += kKronrodWeights[7] * fv[7];
    double g7 = kGaussWeights[3] * fv[7];
    for (int i = 0; i < 3; ++i) g7 += kGaussWeights[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    integral = h * k15;
    err = std::abs(h * (k15 - g7));
}

template <class F>
void adapt(F&& f, double a, double b, double tol, int depth, QuadResult& out, int& budget) {
    double integral, err;
    kronrod_panel(f, a, b, integral, err);
    --budget;
    // the relative floor stops refinement chasing round-off noise
    const bool limited = depth >= 40 || budget <= 0 || b - a < 1e-300;
    if (err <= tol + 1e-14 * std::abs(integral) || limited) {
        out.value += integral;
        out.error += err;
        if (err > tol && limited) out.converged = false;
        return;
    }
    const double mid = 0.5 * (a + b);
    adapt(f, a, mid, 0.5 * tol, depth + 1, out, budget);
    adapt(f, mid, b, 0.5 * tol, depth + 1, out, budget);
}

} // namespace detail

// Adaptive Gauss-Kronrod quadrature of f over [lo, hi]; hi may be +infinity,
// in which case the tail is mapped to [0, 1) via v = lo + t/(1-t). The
// result satisfies |value - integral| <= tol * (1 + |value|) for smooth
// integrands; `converged` is false when the subdivision limit was hit.
template <class F>
QuadResult adaptive_quad(F&& f, double lo, double hi, double tol = 1e-8) {
    QuadResult out;
    int budget = 4000; // panel limit; exhaustion flags non-convergence
    if (std::isinf(hi)) {
        auto g = [&f, lo](double t) {
            const double om = 1.0 - t;
            const double v = lo + t / om;
            return f(v) / (om * om);
        };
        detail::adapt(g, 0.0, 1.0, tol, 0, out, budget);
    } else {
        if (hi <= lo) return out;
        detail::adapt(f, lo, hi, tol, 0, out, budget);
    }
    return out;
}

} // namespace cenmeta::specfun
