#include "cenmeta/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cenmeta/specfun.hpp"

namespace cenmeta::analytic {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Switch to the reciprocal-argument route above this; below it the Pfaff /
// raw series are cheap.
constexpr double kLargeX = 10.0;
} // namespace

double mean_in_requests(const NetworkConfig& cfg) {
    if (cfg.is_fixed()) {
        const double u = M_PI * cfg.lambda_bs * cfg.r_c() * cfg.r_c();
        return u + std::exp(-u / cfg.xi) - 1.0;
    }
    const double mu2 = cfg.mu() * cfg.mu();
    return cfg.xi * mu2 - std::min(mu2, 1.0);
}

double theta_r_pmf(double theta_bar, int theta) {
    if (theta < 0) return 0.0;
    if (theta_bar == 0.0) return theta == 0 ? 1.0 : 0.0;
    return std::exp(theta * std::log(theta_bar) - theta_bar - std::lgamma(theta + 1.0));
}

std::vector<double> theta_i_pmf(double theta_bar, int max_in_dof) {
    if (max_in_dof < 0) throw std::invalid_argument("theta_i_pmf: L must be >= 0");
    std::vector<double> pmf(static_cast<std::size_t>(max_in_dof) + 1);
    if (max_in_dof == 0) {
        pmf[0] = 1.0; // zero DoF reserved: no request is ever satisfied
        return pmf;
    }
    double below = 0.0;
    for (int t = 0; t < max_in_dof; ++t) {
        pmf[t] = theta_r_pmf(theta_bar, t);
        below += pmf[t];
    }
    // tail P[Theta_r >= L] = gamma(L, tb)/Gamma(L)
    pmf[max_in_dof] = theta_bar == 0.0
                          ? std::max(0.0, 1.0 - below)
                          : specfun::reg_lower_gamma(double(max_in_dof), theta_bar);
    return pmf;
}

double in_missing_prob(double theta_bar, int max_in_dof) {
    if (max_in_dof < 0) throw std::invalid_argument("in_missing_prob: L must be >= 0");
    if (max_in_dof == 0) return 1.0;
    if (theta_bar == 0.0) return 0.0;
    // sum_{t>=L} ((t+1-L)/(t+1)!) tb^t e^-tb, truncated at term < 1e-14 or
    // 200 terms; the Poisson tail decays superexponentially at in-scope loads.
    const int L = max_in_dof;
    double mass = theta_r_pmf(theta_bar, L); // tb^L e^-tb / L!
    double sum = 0.0;
    for (int t = L; t < L + 200; ++t) {
        const double term = mass * (t + 1.0 - L) / (t + 1.0);
        sum += term;
        if (term < 1e-14) break;
        mass *= theta_bar / (t + 1.0);
    }
    return std::min(sum, 1.0);
}

INLoadStats in_load_stats(const NetworkConfig& cfg) {
    INLoadStats s;
    s.theta_bar = mean_in_requests(cfg);
    s.epsilon = in_missing_prob(s.theta_bar, cfg.max_in_dof);
    s.theta_i_pmf = theta_i_pmf(s.theta_bar, cfg.max_in_dof);
    return s;
}

InterfererBands interferer_bands(const NetworkConfig& cfg, const INLoadStats& stats,
                                 double z) {
    if (!(z > 0.0)) throw std::invalid_argument("interferer_bands: z must be > 0");
    const double lam = cfg.lambda_bs;
    const double eps = stats.epsilon;
    const double xi = cfg.xi;
    InterfererBands bands;
    double lo, hi;
    if (cfg.is_fixed()) {
        const double rc = cfg.r_c();
        lo = std::min(z, rc);
        hi = std::max(z, rc);
        if (z < rc) {
            bands.a_coef = eps;
            bands.b_coef = 1.0;
        } else {
            bands.a_coef = 1.0;
            bands.b_coef = 1.0 - 1.0 / xi;
        }
    } else {
        const double mu = cfg.mu();
        lo = z * std::min(1.0, mu);
        hi = z * std::max(1.0, mu);
        if (mu < 1.0) {
            bands.a_coef = 1.0 - 1.0 / xi;
            bands.b_coef = 1.0;
        } else {
            bands.a_coef = 1.0;
            bands.b_coef = eps;
        }
    }
    bands.a = {eps * lam * (1.0 - 1.0 / xi), 0.0, lo};
    bands.b = {bands.a_coef * bands.b_coef * lam, lo, hi};
    bands.c = {lam, hi, kInf};
    return bands;
}

double f_func(double x, double alpha) {
    if (!(x >= 0.0)) throw std::domain_error("f_func: requires x >= 0");
    if (x == 0.0) return 0.0;
    const double a = -2.0 / alpha, b = 1.0, c = 1.0 - 2.0 / alpha;
    if (x <= 0.5) {
        // series without its leading 1, to keep F accurate near 0
        double term = 1.0;
        double sum = 0.0;
        for (int k = 0; k < 200; ++k) {
            term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * (-x);
            sum += term;
            if (std::abs(term) <= 1e-16 * std::abs(sum)) break;
        }
        return sum;
    }
    if (x <= kLargeX) return specfun::gauss_2f1_neg(a, b, c, x) - 1.0;
    // exact reciprocal-argument identity, obtained by splitting the band
    // integral (r^2/2) F(s r^-alpha) = int_r^inf at the origin:
    //   F(x) = x^{2/a}/sinc(2/a) - 1 + (2/((a+2)x)) 2F1(1,1+2/a;2+2/a;-1/x)
    const double corr = specfun::gauss_2f1_neg(1.0, 1.0 + 2.0 / alpha, 2.0 + 2.0 / alpha, 1.0 / x);
    return std::pow(x, 2.0 / alpha) / specfun::sinc(2.0 / alpha) - 1.0 +
           2.0 / ((alpha + 2.0) * x) * corr;
}

double f_tilde(int m, double x, double alpha) {
    if (m < 1) throw std::invalid_argument("f_tilde: m must be >= 1");
    if (!(x >= 0.0)) throw std::domain_error("f_tilde: requires x >= 0");
    const double am = m - 2.0 / alpha;
    if (x <= kLargeX) return specfun::gauss_2f1_neg(1.0 + m, am, am + 1.0, x) / (alpha * m - 2.0);
    // reciprocal-argument identity (same derivation as for F):
    //   F~_m(x) = B(m-2/a,1+2/a)/a x^{2/a-m}
    //           - x^{-(m+1)}/(a+2) 2F1(1+m,1+2/a;2+2/a;-1/x)
    const double corr =
        specfun::gauss_2f1_neg(1.0 + m, 1.0 + 2.0 / alpha, 2.0 + 2.0 / alpha, 1.0 / x);
    return specfun::beta_fn(am, 1.0 + 2.0 / alpha) / alpha * std::pow(x, 2.0 / alpha - m) -
           std::pow(x, -(m + 1.0)) / (alpha + 2.0) * corr;
}

namespace {

// Band integrals of the Laplace-exponent kernels over [r, infinity) at
// s = tau z^alpha, evaluated through F / F~_m with the reciprocal-argument
// route so that r -> 0 and huge s r^-alpha stay finite:
//   tail0(r,s)  = int_r^inf (1 - 1/(1+s v^-a)) v dv            = (r^2/2) F(s r^-a)
//   tail_m(r,s) = int_r^inf (s v^-a)^m v / (1+s v^-a)^{1+m} dv = s^m r^{2-am} F~_m(s r^-a)
// with the r = 0 values s^{2/a}/(2 sinc(2/a)) and s^{2/a} B(m-2/a,1+2/a)/a.

double full0(double s, double alpha) {
    return std::pow(s, 2.0 / alpha) / (2.0 * specfun::sinc(2.0 / alpha));
}

double full_m(int m, double s, double alpha) {
    return std::pow(s, 2.0 / alpha) * specfun::beta_fn(m - 2.0 / alpha, 1.0 + 2.0 / alpha) / alpha;
}

double tail0(double r, double s, double alpha) {
    if (s == 0.0) return 0.0;
    if (r == 0.0) return full0(s, alpha);
    const double x = s / std::pow(r, alpha);
    if (x <= kLargeX) return 0.5 * r * r * f_func(x, alpha);
    const double corr =
        specfun::gauss_2f1_neg(1.0, 1.0 + 2.0 / alpha, 2.0 + 2.0 / alpha, 1.0 / x);
    return full0(s, alpha) - 0.5 * r * r + r * r / ((alpha + 2.0) * x) * corr;
}

double tail_m(int m, double r, double s, double alpha) {
    if (s == 0.0) return 0.0;
    if (r == 0.0) return full_m(m, s, alpha);
    const double x = s / std::pow(r, alpha);
    if (x <= kLargeX) return std::pow(x, m) * r * r * f_tilde(m, x, alpha);
    const double corr =
        specfun::gauss_2f1_neg(1.0 + m, 1.0 + 2.0 / alpha, 2.0 + 2.0 / alpha, 1.0 / x);
    return full_m(m, s, alpha) - r * r / ((alpha + 2.0) * x) * corr;
}

} // namespace

std::vector<double> q_vector(double z, double tau, const NetworkConfig& cfg,
                             const INLoadStats& stats, int dim) {
    if (!(z > 0.0)) throw std::invalid_argument("q_vector: z must be > 0");
    if (!(tau >= 0.0)) throw std::invalid_argument("q_vector: tau must be >= 0");
    if (dim < 1) throw std::invalid_argument("q_vector: dim must be >= 1");
    if (!cfg.is_fixed()) throw std::invalid_argument("q_vector: fixed scheme only");
    std::vector<double> q(static_cast<std::size_t>(dim), 0.0);
    if (tau == 0.0) return q;

    const double alpha = cfg.alpha;
    const double lam = cfg.lambda_bs;
    const double rc = cfg.r_c();
    const double eps = stats.epsilon;
    const double eps_band = eps * (1.0 - 1.0 / cfg.xi);
    double a_coef, b_coef;
    if (z < rc) {
        a_coef = eps;
        b_coef = 1.0;
    } else {
        a_coef = 1.0;
        b_coef = 1.0 - 1.0 / cfg.xi;
    }
    const double s = tau * std::pow(z, alpha);

    q[0] = -2.0 * M_PI * lam *
           (eps_band * full0(s, alpha) + a_coef / cfg.xi * tail0(z, s, alpha) +
            b_coef * (1.0 - eps) * tail0(rc, s, alpha));
    for (int m = 1; m < dim; ++m) {
        q[m] = 2.0 * M_PI * lam *
               (eps_band * full_m(m, s, alpha) + a_coef / cfg.xi * tail_m(m, z, s, alpha) +
                b_coef * (1.0 - eps) * tail_m(m, rc, s, alpha));
    }
    return q;
}

std::vector<double> w_vector(double tau, const NetworkConfig& cfg,
                             const INLoadStats& stats, int dim) {
    if (!(tau >= 0.0)) throw std::invalid_argument("w_vector: tau must be >= 0");
    if (dim < 1) throw std::invalid_argument("w_vector: dim must be >= 1");
    if (cfg.is_fixed()) throw std::invalid_argument("w_vector: flexible scheme only");
    std::vector<double> w(static_cast<std::size_t>(dim), 0.0);
    if (tau == 0.0) return w;

    // z factors out of the flexible exponent: with radii normalized by z the
    // band boundaries are mu and 1, and the kernels are evaluated at s = tau.
    const double alpha = cfg.alpha;
    const double mu = cfg.mu();
    const double eps = stats.epsilon;
    const double eps_band = eps * (1.0 - 1.0 / cfg.xi);
    double a_coef, b_coef;
    if (mu < 1.0) {
        a_coef = 1.0 - 1.0 / cfg.xi;
        b_coef = 1.0;
    } else {
        a_coef = 1.0;
        b_coef = eps;
    }
    w[0] = 2.0 * (eps_band * full0(tau, alpha) + a_coef * (1.0 - eps) * tail0(mu, tau, alpha) +
                  b_coef / cfg.xi * tail0(1.0, tau, alpha));
    for (int m = 1; m < dim; ++m) {
        w[m] = 2.0 * (eps_band * full_m(m, tau, alpha) +
                      a_coef * (1.0 - eps) * tail_m(m, mu, tau, alpha) +
                      b_coef / cfg.xi * tail_m(m, 1.0, tau, alpha));
    }
    return w;
}

namespace {

// Sum of the first `dim` entries of the exp(Q) column, for every dim at
// once: the column entries are the power-series coefficients of exp(Q(t)),
// so they do not depend on the matrix dimension and prefix sums give the
// L1 norms of all leading blocks in one pass.
double theta_mixture_exp_norm(const std::vector<double>& q, const std::vector<double>& pmf,
                              int antennas) {
    const auto col = specfun::lt_toeplitz_exp_column(q, antennas);
    double total = 0.0;
    double prefix = 0.0;
    const int max_dof = static_cast<int>(pmf.size()) - 1;
    for (int m = 0; m < antennas; ++m) {
        prefix += col[m];
        const int theta = antennas - 1 - m; // prefix length m+1 = M - theta
        if (theta <= max_dof) total += pmf[theta] * prefix;
    }
    return total;
}

} // namespace

double stp_fixed_file(double tau, const NetworkConfig& cfg) {
    if (!cfg.is_fixed()) throw std::invalid_argument("stp_fixed_file: scheme is not fixed");
    if (tau == 0.0) return 1.0;
    const INLoadStats stats = in_load_stats(cfg);
    const double rc = cfg.r_c();
    auto integrand = [&](double z) {
        const double fz = serving_distance_pdf(z, cfg.lambda_bs, cfg.xi);
        if (fz <= 0.0 || z <= 0.0) return 0.0;
        const auto q = q_vector(z, tau, cfg, stats, cfg.antennas);
        return theta_mixture_exp_norm(q, stats.theta_i_pmf, cfg.antennas) * fz;
    };
    // a^fx/b^fx and the band boundaries switch at z = R_c, so the integrand
    // is only piecewise smooth; integrate each piece separately.
    double value = 0.0;
    if (rc > 0.0) value += specfun::adaptive_quad(integrand, 0.0, rc).value;
    value += specfun::adaptive_quad(integrand, rc, kInf).value;
    return std::clamp(value, 0.0, 1.0);
}

double stp_flexible_file(double tau, const NetworkConfig& cfg) {
    if (cfg.is_fixed()) throw std::invalid_argument("stp_flexible_file: scheme is not flexible");
    if (tau == 0.0) return 1.0;
    const INLoadStats stats = in_load_stats(cfg);
    const auto w = w_vector(tau, cfg, stats, cfg.antennas);
    const double diag = 1.0 / cfg.xi + w[0];
    if (!(diag > 0.0))
        throw std::runtime_error("stp_flexible_file: nonpositive Toeplitz diagonal");
    const auto col = specfun::lt_toeplitz_inv_column(
        diag, std::span<const double>(w).subspan(1), cfg.antennas);
    double total = 0.0;
    double prefix = 0.0;
    for (int m = 0; m < cfg.antennas; ++m) {
        prefix += col[m];
        const int theta = cfg.antennas - 1 - m;
        if (theta <= cfg.max_in_dof) total += stats.theta_i_pmf[theta] * prefix;
    }
    return std::clamp(total / cfg.xi, 0.0, 1.0);
}

double stp_file(double tau, const NetworkConfig& cfg) {
    return cfg.is_fixed() ? stp_fixed_file(tau, cfg) : stp_flexible_file(tau, cfg);
}

double stp_total(double tau, const NetworkConfig& cfg) {
    const auto pop = zipf_popularity(cfg.library_size, cfg.gamma_z);
    const auto design = fudc_design(pop, cfg.cache_size, cfg.xi);
    return design.hit_mass * stp_file(tau, cfg);
}

double match_fixed_range(double mu, double lambda_bs, double xi) {
    if (!(mu >= 0.0)) throw std::invalid_argument("match_fixed_range: mu must be >= 0");
    const double mu2 = mu * mu;
    const double target = xi * mu2 - std::min(mu2, 1.0); // flexible-scheme load
    if (target <= 0.0) return 0.0;
    auto excess = [&](double r) {
        const double u = M_PI * lambda_bs * r * r;
        return u + std::exp(-u / xi) - 1.0 - target;
    };
    double lo = 0.0;
    double hi = 10.0 * std::sqrt(xi * mu2 / (M_PI * lambda_bs));
    while (excess(hi) < 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) < 0.0 ? lo : hi) = mid;
        if (hi - lo <= 1e-6 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

double match_flexible_coef(double r_c, double lambda_bs, double xi) {
    if (!(r_c >= 0.0)) throw std::invalid_argument("match_flexible_coef: r_c must be >= 0");
    const double u = M_PI * lambda_bs * r_c * r_c;
    const double target = u + std::exp(-u / xi) - 1.0;
    if (target <= 0.0) return 0.0;
    // xi mu^2 - min(mu^2, 1) = target, solved on the mu<1 / mu>=1 branches
    if (target <= xi - 1.0) return std::sqrt(target / (xi - 1.0));
    return std::sqrt((target + 1.0) / xi);
}

} // namespace cenmeta::analytic
