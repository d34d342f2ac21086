#include "cenmeta/meta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cenmeta/analytic.hpp"
#include "cenmeta/specfun.hpp"

namespace cenmeta::meta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double binom(int n, int k) {
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

double beta_factor(int diversity) {
    return std::pow(std::tgamma(diversity + 1.0), -1.0 / diversity);
}

// (theta, i) lattice of diversity-order factors i * beta_theta, shared by
// the moment sums. products[theta][i-1] = i * beta_{M-theta}.
struct ThetaLattice {
    std::vector<double> pmf;
    std::vector<std::vector<double>> products;
};

ThetaLattice make_lattice(const NetworkConfig& cfg) {
    ThetaLattice lat;
    lat.pmf = analytic::in_load_stats(cfg).theta_i_pmf;
    lat.products.resize(cfg.max_in_dof + 1);
    for (int theta = 0; theta <= cfg.max_in_dof; ++theta) {
        const int d = cfg.antennas - theta;
        const double beta = beta_factor(d);
        lat.products[theta].resize(d);
        for (int i = 1; i <= d; ++i) lat.products[theta][i - 1] = i * beta;
    }
    return lat;
}

} // namespace

double upper_bound_cstp(std::span<const double> radii, double z, int theta, double tau,
                        const NetworkConfig& cfg) {
    if (theta < 0 || theta > cfg.max_in_dof)
        throw std::invalid_argument("upper_bound_cstp: theta out of range");
    const int d = cfg.antennas - theta;
    const double beta = beta_factor(d);
    double value = 0.0;
    for (int i = 1; i <= d; ++i) {
        double prod = 1.0;
        for (double r : radii)
            prod /= 1.0 + i * beta * tau * std::pow(z, cfg.alpha) * std::pow(r, -cfg.alpha);
        value += (i % 2 == 1 ? 1.0 : -1.0) * binom(d, i) * prod;
    }
    return std::clamp(value, 0.0, 1.0);
}

double m1_fixed(double tau, const NetworkConfig& cfg) {
    if (!cfg.is_fixed()) throw std::invalid_argument("m1_fixed: scheme is not fixed");
    if (tau == 0.0) return 1.0;
    const auto stats = analytic::in_load_stats(cfg);
    const auto lat = make_lattice(cfg);
    const double rc = cfg.r_c();
    // E[exp(q_0)] per (theta, i) with threshold i beta tau; one quadrature
    // pass over the whole mixture.
    auto integrand = [&](double z) {
        const double fz = serving_distance_pdf(z, cfg.lambda_bs, cfg.xi);
        if (fz <= 0.0 || z <= 0.0) return 0.0;
        double mix = 0.0;
        for (int theta = 0; theta <= cfg.max_in_dof; ++theta) {
            const int d = cfg.antennas - theta;
            double inner = 0.0;
            for (int i = 1; i <= d; ++i) {
                const double q0 =
                    analytic::q_vector(z, lat.products[theta][i - 1] * tau, cfg, stats, 1)[0];
                inner += (i % 2 == 1 ? 1.0 : -1.0) * binom(d, i) * std::exp(q0);
            }
            mix += lat.pmf[theta] * inner;
        }
        return mix * fz;
    };
    double value = 0.0;
    if (rc > 0.0) value += specfun::adaptive_quad(integrand, 0.0, rc).value;
    value += specfun::adaptive_quad(integrand, rc, kInf).value;
    return std::clamp(value, 0.0, 1.0);
}

double m1_flexible(double tau, const NetworkConfig& cfg) {
    if (cfg.is_fixed()) throw std::invalid_argument("m1_flexible: scheme is not flexible");
    if (tau == 0.0) return 1.0;
    const auto stats = analytic::in_load_stats(cfg);
    const auto lat = make_lattice(cfg);
    double value = 0.0;
    for (int theta = 0; theta <= cfg.max_in_dof; ++theta) {
        const int d = cfg.antennas - theta;
        double inner = 0.0;
        for (int i = 1; i <= d; ++i) {
            const double w0 =
                analytic::w_vector(lat.products[theta][i - 1] * tau, cfg, stats, 1)[0];
            inner += (i % 2 == 1 ? 1.0 : -1.0) * binom(d, i) / (1.0 + cfg.xi * w0);
        }
        value += lat.pmf[theta] * inner;
    }
    return std::clamp(value, 0.0, 1.0);
}

double m1_file(double tau, const NetworkConfig& cfg) {
    return cfg.is_fixed() ? m1_fixed(tau, cfg) : m1_flexible(tau, cfg);
}

double h_ij(double lo, double hi, double x, double y, int i, int j, double alpha) {
    if (!(lo >= 0.0) || (!(hi >= lo) && !std::isinf(hi)))
        throw std::invalid_argument("h_ij: invalid interval");
    const double ix = i * x, jy = j * y;
    if (ix == 0.0 && jy == 0.0) return 0.0;
    auto kernel = [ix, jy, alpha](double v) {
        if (v <= 0.0) return 0.0;
        const double p = std::pow(v, -alpha);
        const double a = ix == 0.0 ? 0.0 : ix * p;
        const double b = jy == 0.0 ? 0.0 : jy * p;
        // 1 - 1/((1+a)(1+b)) = (a + b + ab)/((1+a)(1+b)); the second form
        // avoids cancellation where a, b are tiny (large v)
        if (a > 0.5 || b > 0.5) return (1.0 - 1.0 / ((1.0 + a) * (1.0 + b))) * v;
        return (a + b + a * b) / ((1.0 + a) * (1.0 + b)) * v;
    };
    if (!std::isinf(hi)) return specfun::adaptive_quad(kernel, lo, hi).value;
    // Tail [r, inf): the kernel decays like v^{1-alpha}, so substitute
    // u = (r/v)^{alpha-2}; the transformed integrand tends to a constant at
    // u = 0 for every alpha > 2.
    double value = 0.0;
    double r = lo;
    if (r == 0.0) {
        value += specfun::adaptive_quad(kernel, 0.0, 1.0).value;
        r = 1.0;
    }
    const double inv_am2 = 1.0 / (alpha - 2.0);
    auto tail_integrand = [&kernel, r, inv_am2](double u) {
        if (u <= 0.0) return 0.0;
        const double v = r * std::pow(u, -inv_am2);
        const double dv = r * inv_am2 * std::pow(u, -inv_am2 - 1.0);
        return kernel(v) * dv;
    };
    value += specfun::adaptive_quad(tail_integrand, 0.0, 1.0).value;
    return value;
}

namespace {

// Distinct i*beta products with (theta, i) -> lattice-index map; the H
// table is computed once per z-node over the sorted-pair upper triangle.
struct ProductIndex {
    std::vector<double> values;               // distinct, ascending
    std::vector<std::vector<int>> index_of;   // [theta][i-1] -> index
};

ProductIndex build_product_index(const ThetaLattice& lat) {
    ProductIndex pi;
    pi.index_of.resize(lat.products.size());
    for (std::size_t t = 0; t < lat.products.size(); ++t)
        for (double v : lat.products[t]) pi.values.push_back(v);
    std::sort(pi.values.begin(), pi.values.end());
    pi.values.erase(std::unique(pi.values.begin(), pi.values.end()), pi.values.end());
    for (std::size_t t = 0; t < lat.products.size(); ++t) {
        pi.index_of[t].resize(lat.products[t].size());
        for (std::size_t k = 0; k < lat.products[t].size(); ++k) {
            pi.index_of[t][k] = static_cast<int>(
                std::lower_bound(pi.values.begin(), pi.values.end(), lat.products[t][k]) -
                pi.values.begin());
        }
    }
    return pi;
}

} // namespace

double m2_file(double tau, const NetworkConfig& cfg) {
    if (cfg.antennas > 8)
        throw std::invalid_argument("m2_file: capped at M <= 8 (quadruple-sum cost)");
    if (tau == 0.0) return 1.0;
    const auto stats = analytic::in_load_stats(cfg);
    const auto lat = make_lattice(cfg);
    const auto pidx = build_product_index(lat);
    const int np = static_cast<int>(pidx.values.size());
    const int L = cfg.max_in_dof;

    // sum over the lattice for one z given the pairwise exponent table
    auto assemble = [&](const std::vector<double>& zint) {
        double total = 0.0;
        for (int t1 = 0; t1 <= L; ++t1) {
            const int d1 = cfg.antennas - t1;
            for (int t2 = 0; t2 <= L; ++t2) {
                const int d2 = cfg.antennas - t2;
                const double w12 = lat.pmf[t1] * lat.pmf[t2];
                for (int i = 1; i <= d1; ++i) {
                    const int ki = pidx.index_of[t1][i - 1];
                    for (int j = 1; j <= d2; ++j) {
                        const int kj = pidx.index_of[t2][j - 1];
                        const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
                        const int a = std::min(ki, kj), b = std::max(ki, kj);
                        total += w12 * sign * binom(d1, i) * binom(d2, j) *
                                 zint[a * np + b];
                    }
                }
            }
        }
        return total;
    };

    auto integrand = [&](double z) {
        const double fz = serving_distance_pdf(z, cfg.lambda_bs, cfg.xi);
        if (fz <= 0.0 || z <= 0.0) return 0.0;
        const auto bands = analytic::interferer_bands(cfg, stats, z);
        const double za = std::pow(z, cfg.alpha);
        std::vector<double> table(static_cast<std::size_t>(np) * np, 0.0);
        for (int a = 0; a < np; ++a) {
            const double x = pidx.values[a] * tau * za;
            for (int b = a; b < np; ++b) {
                const double y = pidx.values[b] * tau * za;
                const double expo =
                    bands.a.density * h_ij(bands.a.lo, bands.a.hi, x, y, 1, 1, cfg.alpha) +
                    bands.b.density * h_ij(bands.b.lo, bands.b.hi, x, y, 1, 1, cfg.alpha) +
                    bands.c.density * h_ij(bands.c.lo, bands.c.hi, x, y, 1, 1, cfg.alpha);
                table[a * np + b] = std::exp(-2.0 * M_PI * expo);
            }
        }
        return assemble(table) * fz;
    };

    double value = 0.0;
    if (cfg.is_fixed() && cfg.r_c() > 0.0) {
        value += specfun::adaptive_quad(integrand, 0.0, cfg.r_c()).value;
        value += specfun::adaptive_quad(integrand, cfg.r_c(), kInf).value;
    } else if (cfg.is_fixed()) {
        value = specfun::adaptive_quad(integrand, 0.0, kInf).value;
    } else {
        // flexible scheme: the band radii scale with z, so
        // H(z omega, x z^a, y z^a) = z^2 H(omega, x, y) and the pairwise
        // table is z-independent; compute it once at z = 1.
        const auto bands = analytic::interferer_bands(cfg, stats, 1.0);
        std::vector<double> coef(static_cast<std::size_t>(np) * np, 0.0);
        for (int a = 0; a < np; ++a) {
            const double x = pidx.values[a] * tau;
            for (int b = a; b < np; ++b) {
                const double y = pidx.values[b] * tau;
                coef[a * np + b] =
                    bands.a.density * h_ij(bands.a.lo, bands.a.hi, x, y, 1, 1, cfg.alpha) +
                    bands.b.density * h_ij(bands.b.lo, bands.b.hi, x, y, 1, 1, cfg.alpha) +
                    bands.c.density * h_ij(bands.c.lo, bands.c.hi, x, y, 1, 1, cfg.alpha);
            }
        }
        auto flex_integrand = [&](double z) {
            const double fz = serving_distance_pdf(z, cfg.lambda_bs, cfg.xi);
            if (fz <= 0.0 || z <= 0.0) return 0.0;
            const double z2 = z * z;
            std::vector<double> table(coef.size(), 0.0);
            for (int a = 0; a < np; ++a)
                for (int b = a; b < np; ++b)
                    table[a * np + b] = std::exp(-2.0 * M_PI * z2 * coef[a * np + b]);
            return assemble(table) * fz;
        };
        value = specfun::adaptive_quad(flex_integrand, 0.0, kInf).value;
    }
    return std::clamp(value, 0.0, 1.0);
}

MomentSummary moments(double tau, const NetworkConfig& cfg) {
    MomentSummary ms;
    ms.tau = tau;
    ms.fixed_scheme = cfg.is_fixed();
    ms.m1 = m1_file(tau, cfg);
    ms.m2 = m2_file(tau, cfg);
    const double var = ms.m2 - ms.m1 * ms.m1;
    ms.degenerate = var < 1e-12 || ms.m1 >= 1.0 - 1e-9 || ms.m1 <= 1e-9;
    ms.kappa = ms.degenerate ? 0.0 : (ms.m1 - ms.m2) * (1.0 - ms.m1) / var;
    return ms;
}

double beta_meta(const MomentSummary& ms, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("beta_meta: x must be in [0,1]");
    if (x == 0.0) return 1.0;
    if (x == 1.0) return 0.0;
    if (ms.degenerate) return x < ms.m1 ? 1.0 : 0.0; // zero-variance limit
    const double a = ms.m1 * ms.kappa / (1.0 - ms.m1);
    return 1.0 - specfun::reg_inc_beta(x, a, ms.kappa);
}

double variance_file(double tau, const NetworkConfig& cfg) {
    const auto ms = moments(tau, cfg);
    return std::max(0.0, ms.m2 - ms.m1 * ms.m1);
}

double variance_total(double tau, const NetworkConfig& cfg) {
    const auto pop = zipf_popularity(cfg.library_size, cfg.gamma_z);
    const auto design = fudc_design(pop, cfg.cache_size, cfg.xi);
    return design.hit_mass * variance_file(tau, cfg);
}

double meta_total(double x, double tau, const NetworkConfig& cfg) {
    const auto pop = zipf_popularity(cfg.library_size, cfg.gamma_z);
    const auto design = fudc_design(pop, cfg.cache_size, cfg.xi);
    return design.hit_mass * beta_meta(moments(tau, cfg), x);
}

MetaCurve meta_curve(const MomentSummary& ms, const NetworkConfig& cfg, bool per_file,
                     int grid_points) {
    if (grid_points < 2) throw std::invalid_argument("meta_curve: need >= 2 grid points");
    double scale = 1.0;
    if (!per_file) {
        const auto pop = zipf_popularity(cfg.library_size, cfg.gamma_z);
        scale = fudc_design(pop, cfg.cache_size, cfg.xi).hit_mass;
    }
    MetaCurve curve;
    curve.per_file = per_file;
    curve.x.resize(grid_points);
    curve.value.resize(grid_points);
    for (int k = 0; k < grid_points; ++k) {
        const double x = double(k) / (grid_points - 1);
        curve.x[k] = x;
        curve.value[k] = scale * beta_meta(ms, x);
    }
    return curve;
}

} // namespace cenmeta::meta
