#include "cenmeta/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cenmeta::specfun {

namespace {

constexpr int kSeriesMax = 400000;
constexpr double kSeriesEps = 1e-15;

// Plain Gauss series sum_{k>=0} (a)_k (b)_k / ((c)_k k!) w^k for |w| < 1.
double gauss_series(double a, double b, double c, double w, bool& ok) {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 0; k < kSeriesMax; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * w;
        sum += term;
        if (std::abs(term) <= kSeriesEps * std::abs(sum)) {
            ok = true;
            return sum;
        }
    }
    ok = false;
    return sum;
}

[[noreturn]] void fail_2f1(double a, double b, double c, double x) {
    std::ostringstream os;
    os << "gauss_2f1_neg: series did not converge for a=" << a << " b=" << b
       << " c=" << c << " x=" << x;
    throw std::runtime_error(os.str());
}

} // namespace

double gauss_2f1_neg(double a, double b, double c, double x) {
    if (!(x >= 0.0)) throw std::domain_error("gauss_2f1_neg: requires x >= 0");
    if (x == 0.0) return 1.0;
    // Small arguments: the raw alternating series converges geometrically.
    if (x <= 0.5) {
        bool ok = false;
        const double s = gauss_series(a, b, c, -x, ok);
        if (!ok) fail_2f1(a, b, c, x);
        return s;
    }
    // Pfaff transforms, w = x/(1+x) in (0,1):
    //   2F1(a,b;c;-x) = (1+x)^{-b} 2F1(c-a, b; c; w)
    //                 = (1+x)^{-a} 2F1(a, c-b; c; w)
    // Prefer the variant with larger c - a' - b': its series converges
    // absolutely at w = 1, so large x stays tractable.
    const double w = x / (1.0 + x);
    const double gap_swap_a = a - b; // c - (c-a) - b for parameters (c-a, b; c)
    const double gap_swap_b = b - a; // c - a - (c-b) for parameters (a, c-b; c)
    bool ok = false;
    double s;
    if (gap_swap_a >= gap_swap_b) {
        s = std::pow(1.0 + x, -b) * gauss_series(c - a, b, c, w, ok);
    } else {
        s = std::pow(1.0 + x, -a) * gauss_series(a, c - b, c, w, ok);
    }
    if (!ok) fail_2f1(a, b, c, x);
    return s;
}

double beta_fn(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("beta_fn: requires a, b > 0");
    const double lb = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    const double v = std::exp(lb);
    if (!std::isfinite(v)) throw std::overflow_error("beta_fn: overflow");
    return v;
}

namespace {

// Continued fraction for I_x(a,b), Lentz's method (converges fast for
// x < (a+1)/(a+b+2); the symmetry relation covers the rest).
double betacf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 3e-16) return h;
    }
    throw std::runtime_error("reg_inc_beta: continued fraction did not converge");
}

} // namespace

double reg_inc_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("reg_inc_beta: requires a, b > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("reg_inc_beta: requires x in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double lfront =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(lfront);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double reg_lower_gamma(double s, double x) {
    if (!(s > 0.0)) throw std::domain_error("reg_lower_gamma: requires s > 0");
    if (!(x >= 0.0)) throw std::domain_error("reg_lower_gamma: requires x >= 0");
    if (x == 0.0) return 0.0;
    const double lgs = std::lgamma(s);
    if (x < s + 1.0) {
        // series for P(s,x)
        double ap = s;
        double sum = 1.0 / s;
        double del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-16)
                return sum * std::exp(-x + s * std::log(x) - lgs);
        }
        throw std::runtime_error("reg_lower_gamma: series did not converge");
    }
    // continued fraction for Q(s,x)
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - s, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 3e-16) {
            const double q = std::exp(-x + s * std::log(x) - lgs) * h;
            return 1.0 - q;
        }
    }
    throw std::runtime_error("reg_lower_gamma: continued fraction did not converge");
}

double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = M_PI * x;
    return std::sin(px) / px;
}

std::vector<double> lt_toeplitz_exp_column(std::span<const double> q, int dim) {
    if (dim < 1) throw std::domain_error("lt_toeplitz_exp_column: dim must be >= 1");
    if (q.size() < static_cast<std::size_t>(dim))
        throw std::domain_error("lt_toeplitz_exp_column: q shorter than dim");
    std::vector<double> x(static_cast<std::size_t>(dim));
    x[0] = std::exp(q[0]);
    for (int m = 1; m < dim; ++m) {
        double acc = 0.0;
        for (int k = 0; k < m; ++k) acc += (double(m - k) / m) * q[m - k] * x[k];
        x[m] = acc;
    }
    return x;
}

std::vector<double> lt_toeplitz_inv_column(double d, std::span<const double> subdiag,
                                           int dim) {
    if (dim < 1) throw std::domain_error("lt_toeplitz_inv_column: dim must be >= 1");
    if (!(d > 0.0)) throw std::domain_error("lt_toeplitz_inv_column: diagonal must be positive");
    if (dim > 1 && subdiag.size() < static_cast<std::size_t>(dim - 1))
        throw std::domain_error("lt_toeplitz_inv_column: subdiag shorter than dim-1");
    std::vector<double> y(static_cast<std::size_t>(dim));
    y[0] = 1.0 / d;
    for (int m = 1; m < dim; ++m) {
        double acc = 0.0;
        for (int k = 0; k < m; ++k) acc += subdiag[m - k - 1] * y[k];
        y[m] = acc / d;
    }
    return y;
}

} // namespace cenmeta::specfun
