#include "cenmeta/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "cenmeta/analytic.hpp"
#include "cenmeta/meta.hpp"

namespace cenmeta::opt {

namespace {
constexpr double kImproveTol = 1e-6;
constexpr double kVarianceFloor = 1e-12;
constexpr double kCapSentinel = 1e12;
} // namespace

Objective objective_from_string(const std::string& name) {
    if (name == "stp") return Objective::Stp;
    if (name == "inverse_variance") return Objective::InverseVariance;
    if (name == "meta") return Objective::Meta;
    if (name == "weighted") return Objective::Weighted;
    throw std::invalid_argument("objective must be one of stp, inverse_variance, meta, weighted");
}

std::string objective_to_string(Objective obj) {
    switch (obj) {
        case Objective::Stp: return "stp";
        case Objective::InverseVariance: return "inverse_variance";
        case Objective::Meta: return "meta";
        case Objective::Weighted: return "weighted";
    }
    return "stp";
}

OptimizationProblem resolve_problem(const OptimizationProblem& in, const NetworkConfig& cfg) {
    OptimizationProblem p = in;
    if (p.ri_max <= 0.0) {
        // mu_max = 5 for the flexible scheme; the fixed bound is the
        // load-matched range of mu = 5
        p.ri_max = cfg.is_fixed() ? analytic::match_fixed_range(5.0, cfg.lambda_bs, cfg.xi)
                                  : 5.0;
    }
    if (p.ri_step <= 0.0) p.ri_step = cfg.is_fixed() ? 5.0 : 0.05;
    if (p.l_max < 0) p.l_max = cfg.antennas - 1;
    if (p.xi_max <= 0.0) p.xi_max = double(cfg.library_size) / cfg.cache_size;
    if (p.init_ri < 0.0) p.init_ri = 0.5 * (p.ri_min + p.ri_max);
    if (p.init_l < 0) p.init_l = std::clamp((cfg.antennas - 1) / 2, p.l_min, p.l_max);
    if (p.init_xi < 0.0) p.init_xi = 0.5 * (p.xi_min + p.xi_max);
    if (p.ri_min > p.ri_max || p.l_min > p.l_max || p.xi_min > p.xi_max)
        throw std::invalid_argument("optimize: empty bounds");
    if (p.eta < 0.0 || p.eta > 1.0) throw std::invalid_argument("optimize: eta must be in [0,1]");
    return p;
}

OptimizationProblem problem_from_json(const nlohmann::json& sec) {
    OptimizationProblem p;
    if (sec.contains("objective")) p.objective = objective_from_string(sec.at("objective"));
    if (sec.contains("tau_db")) p.tau = std::pow(10.0, sec.at("tau_db").get<double>() / 10.0);
    if (sec.contains("x0")) p.x0 = sec.at("x0").get<double>();
    if (sec.contains("eta")) p.eta = sec.at("eta").get<double>();
    if (sec.contains("ri_min")) p.ri_min = sec.at("ri_min").get<double>();
    if (sec.contains("ri_max")) p.ri_max = sec.at("ri_max").get<double>();
    if (sec.contains("ri_step")) p.ri_step = sec.at("ri_step").get<double>();
    if (sec.contains("l_min")) p.l_min = sec.at("l_min").get<int>();
    if (sec.contains("l_max")) p.l_max = sec.at("l_max").get<int>();
    if (sec.contains("xi_min")) p.xi_min = sec.at("xi_min").get<double>();
    if (sec.contains("xi_max")) p.xi_max = sec.at("xi_max").get<double>();
    if (sec.contains("xi_step")) p.xi_step = sec.at("xi_step").get<double>();
    if (sec.contains("max_rounds")) p.max_rounds = sec.at("max_rounds").get<int>();
    if (sec.contains("init_ri")) p.init_ri = sec.at("init_ri").get<double>();
    if (sec.contains("init_l")) p.init_l = sec.at("init_l").get<int>();
    if (sec.contains("init_xi")) p.init_xi = sec.at("init_xi").get<double>();
    return p;
}

double evaluate_objective(const OptimizationProblem& problem, double ri, int l, double xi,
                          const NetworkConfig& cfg, bool* capped) {
    NetworkConfig point = cfg;
    point.max_in_dof = l;
    point.xi = xi;
    if (point.is_fixed())
        point.scheme = FixedIN{ri};
    else
        point.scheme = FlexibleIN{ri};
    point.validate();
    if (capped) *capped = false;
    switch (problem.objective) {
        case Objective::Stp:
            return analytic::stp_total(problem.tau, point);
        case Objective::InverseVariance: {
            const double v = meta::variance_total(problem.tau, point);
            if (v < kVarianceFloor) { // zero-variance limit, e.g. tau -> 0
                if (capped) *capped = true;
                return kCapSentinel;
            }
            return 1.0 / v;
        }
        case Objective::Meta:
            return meta::meta_total(problem.x0, problem.tau, point);
        case Objective::Weighted:
            if (problem.eta == 1.0) return analytic::stp_total(problem.tau, point);
            if (problem.eta == 0.0) return meta::meta_total(problem.x0, problem.tau, point);
            return problem.eta * analytic::stp_total(problem.tau, point) +
                   (1.0 - problem.eta) * meta::meta_total(problem.x0, problem.tau, point);
    }
    return 0.0;
}

namespace {

std::vector<double> grid_points(double lo, double hi, double step) {
    std::vector<double> pts;
    const int n = std::max(0, int(std::floor((hi - lo) / step + 1e-9)));
    pts.reserve(n + 2);
    for (int k = 0; k <= n; ++k) pts.push_back(lo + k * step);
    if (pts.back() < hi - 1e-12 * std::max(1.0, std::abs(hi))) pts.push_back(hi);
    return pts;
}

// argmax over a candidate list; ties break toward the first (smaller)
// candidate. Evaluations fan out over a small thread pool.
struct ScanResult {
    int best_index = 0;
    double best_value = 0.0;
    bool any_capped = false;
};

template <class Eval>
ScanResult parallel_argmax(int n_candidates, int threads, Eval&& eval) {
    std::vector<double> values(n_candidates);
    std::vector<char> capped(n_candidates, 0);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= n_candidates) return;
            bool c = false;
            values[k] = eval(k, &c);
            capped[k] = c;
        }
    };
    int pool_size = threads > 0 ? threads : int(std::thread::hardware_concurrency());
    pool_size = std::max(1, std::min(pool_size, n_candidates));
    if (pool_size == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < pool_size; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    ScanResult res;
    res.best_value = values[0];
    for (int k = 1; k < n_candidates; ++k)
        if (values[k] > res.best_value) {
            res.best_value = values[k];
            res.best_index = k;
        }
    for (char c : capped) res.any_capped |= bool(c);
    return res;
}

} // namespace

OptimizationResult coordinate_descent(const OptimizationProblem& raw,
                                      const NetworkConfig& cfg) {
    const OptimizationProblem p = resolve_problem(raw, cfg);
    OptimizationResult res;
    double ri = std::clamp(p.init_ri, p.ri_min, p.ri_max);
    int l = std::clamp(p.init_l, p.l_min, p.l_max);
    double xi = std::clamp(p.init_xi, p.xi_min, p.xi_max);

    bool capped = false;
    double value = evaluate_objective(p, ri, l, xi, cfg, &capped);
    res.objective_capped |= capped;
    res.trajectory.push_back({0, '-', ri, l, xi, value});

    const auto ri_grid = grid_points(p.ri_min, p.ri_max, p.ri_step);
    const auto xi_grid = grid_points(p.xi_min, p.xi_max, p.xi_step);
    std::vector<int> l_grid;
    for (int k = p.l_min; k <= p.l_max; ++k) l_grid.push_back(k);

    for (int round = 1; round <= p.max_rounds; ++round) {
        const double round_start = value;

        auto scan_ri = parallel_argmax(int(ri_grid.size()), p.threads, [&](int k, bool* c) {
            return evaluate_objective(p, ri_grid[k], l, xi, cfg, c);
        });
        if (scan_ri.best_value > value) {
            value = scan_ri.best_value;
            ri = ri_grid[scan_ri.best_index];
        }
        res.objective_capped |= scan_ri.any_capped;
        res.trajectory.push_back({round, 'r', ri, l, xi, value});

        auto scan_l = parallel_argmax(int(l_grid.size()), p.threads, [&](int k, bool* c) {
            return evaluate_objective(p, ri, l_grid[k], xi, cfg, c);
        });
        if (scan_l.best_value > value) {
            value = scan_l.best_value;
            l = l_grid[scan_l.best_index];
        }
        res.objective_capped |= scan_l.any_capped;
        res.trajectory.push_back({round, 'l', ri, l, xi, value});

        auto scan_xi = parallel_argmax(int(xi_grid.size()), p.threads, [&](int k, bool* c) {
            return evaluate_objective(p, ri, l, xi_grid[k], cfg, c);
        });
        if (scan_xi.best_value > value) {
            value = scan_xi.best_value;
            xi = xi_grid[scan_xi.best_index];
        }
        res.objective_capped |= scan_xi.any_capped;
        res.trajectory.push_back({round, 'x', ri, l, xi, value});

        res.rounds_used = round;
        if (value - round_start < kImproveTol) {
            res.converged = true;
            break;
        }
    }
    res.budget_exhausted = !res.converged;
    res.ri_star = ri;
    res.l_star = l;
    res.xi_star = xi;
    // re-verify: the reported value is the objective evaluated at the point
    res.objective_value = evaluate_objective(p, ri, l, xi, cfg, &capped);
    res.objective_capped |= capped;
    return res;
}

} // namespace cenmeta::opt
