#include "cenmeta/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace cenmeta::mc {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t index, std::uint64_t attempt) {
    std::uint64_t mix = seed ^ (index * 0x9e3779b97f4a7c15ull) ^ (attempt << 48);
    for (auto& s : state_) s = splitmix64(mix);
}

// xoshiro256++
std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RngStream::uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::exponential() { return -std::log1p(-uniform()); }

double RngStream::gamma_int(int shape) {
    double acc = 0.0;
    for (int k = 0; k < shape; ++k) acc += exponential();
    return acc;
}

int RngStream::poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
        // Knuth product method
        const double limit = std::exp(-mean);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }
    // split recursively; counts of disjoint halves are independent Poissons
    const double half = 0.5 * mean;
    return poisson(half) + poisson(mean - half);
}

double auto_region_radius(const NetworkConfig& cfg) {
    const double base = 10.0 * std::sqrt(cfg.xi / (M_PI * cfg.lambda_bs));
    const double mean_serving = 0.5 * std::sqrt(cfg.xi / cfg.lambda_bs);
    const double r_in = cfg.is_fixed() ? cfg.r_c() : cfg.mu() * mean_serving;
    return std::max(base, 20.0 * r_in);
}

namespace {

// Uniform grid over the simulation square for nearest-cacher and
// disk-neighborhood queries.
class BsGrid {
  public:
    BsGrid(const std::vector<std::array<double, 2>>& pts, double region, double cell)
        : pts_(pts), cell_(cell), half_(region) {
        n_ = std::max(1, int(std::ceil(2.0 * region / cell)));
        cells_.resize(std::size_t(n_) * n_);
        for (std::int32_t i = 0; i < std::int32_t(pts.size()); ++i)
            cells_[cell_index(pts[i][0], pts[i][1])].push_back(i);
    }

    template <class Visit>
    void visit_disk(double x, double y, double radius, Visit&& visit) const {
        const int cx0 = clampi(int(std::floor((x - radius + half_) / cell_)));
        const int cx1 = clampi(int(std::floor((x + radius + half_) / cell_)));
        const int cy0 = clampi(int(std::floor((y - radius + half_) / cell_)));
        const int cy1 = clampi(int(std::floor((y + radius + half_) / cell_)));
        const double r2 = radius * radius;
        for (int cy = cy0; cy <= cy1; ++cy)
            for (int cx = cx0; cx <= cx1; ++cx)
                for (std::int32_t id : cells_[std::size_t(cy) * n_ + cx]) {
                    const double dx = pts_[id][0] - x, dy = pts_[id][1] - y;
                    if (dx * dx + dy * dy < r2) visit(id);
                }
    }

    // nearest point satisfying pred; returns -1 if none
    template <class Pred>
    std::int32_t nearest_if(double x, double y, Pred&& pred) const {
        const int cx = clampi(int(std::floor((x + half_) / cell_)));
        const int cy = clampi(int(std::floor((y + half_) / cell_)));
        std::int32_t best = -1;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (int ring = 0; ring < 2 * n_; ++ring) {
            // cells in this ring cannot contain anything closer than
            // (ring-1) * cell; stop once the current best beats that
            if (best >= 0) {
                const double reach = (ring - 1.0) * cell_;
                if (reach > 0.0 && best_d2 <= reach * reach) break;
            }
            bool any_cell = false;
            for (int cyy = cy - ring; cyy <= cy + ring; ++cyy) {
                if (cyy < 0 || cyy >= n_) continue;
                const bool edge_row = (cyy == cy - ring || cyy == cy + ring);
                for (int cxx = cx - ring; cxx <= cx + ring;
                     cxx += edge_row ? 1 : std::max(1, 2 * ring)) {
                    if (cxx < 0 || cxx >= n_) continue;
                    any_cell = true;
                    for (std::int32_t id : cells_[std::size_t(cyy) * n_ + cxx]) {
                        if (!pred(id)) continue;
                        const double dx = pts_[id][0] - x, dy = pts_[id][1] - y;
                        const double d2 = dx * dx + dy * dy;
                        if (d2 < best_d2) {
                            best_d2 = d2;
                            best = id;
                        }
                    }
                }
            }
            if (!any_cell && ring >= n_) break;
        }
        return best;
    }

  private:
    int clampi(int c) const { return std::clamp(c, 0, n_ - 1); }
    std::size_t cell_index(double x, double y) const {
        return std::size_t(clampi(int(std::floor((y + half_) / cell_)))) * n_ +
               clampi(int(std::floor((x + half_) / cell_)));
    }

    const std::vector<std::array<double, 2>>& pts_;
    double cell_;
    double half_;
    int n_ = 1;
    std::vector<std::vector<std::int32_t>> cells_;
};

// inverse-CDF sampler over file popularity truncated to the first n files
struct FileSampler {
    std::vector<double> cdf;
    explicit FileSampler(const Popularity& pop, int n_trunc) {
        cdf.resize(n_trunc);
        double acc = 0.0;
        for (int i = 0; i < n_trunc; ++i) {
            acc += pop.weights[i];
            cdf[i] = acc;
        }
        for (auto& v : cdf) v /= acc;
        cdf.back() = 1.0;
    }
    std::int32_t draw(RngStream& rng) const {
        const double u = rng.uniform();
        return std::int32_t(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    }
};

struct TopologyAttempt {
    TopologyRealization topo;
    bool ok = false;
};

TopologyAttempt try_sample(const NetworkConfig& cfg, double region, double guard,
                           RngStream& rng) {
    TopologyAttempt out;
    TopologyRealization& topo = out.topo;
    const auto pop = zipf_popularity(cfg.library_size, cfg.gamma_z);
    const auto design = fudc_design(pop, cfg.cache_size, cfg.xi);
    const int n_c = design.cached_set_size;

    // base stations: PPP(lambda) on the disk
    const int n_bs = rng.poisson(cfg.lambda_bs * M_PI * region * region);
    if (n_bs == 0) return out;
    topo.bs_points.resize(n_bs);
    for (auto& p : topo.bs_points) {
        // uniform point on the disk by radius inversion
        const double r = region * std::sqrt(rng.uniform());
        const double phi = 2.0 * M_PI * rng.uniform();
        p = {r * std::cos(phi), r * std::sin(phi)};
    }

    // caches: C distinct files from the N_c most popular, per BS
    const int blocks = (n_c + 63) / 64;
    std::vector<std::uint64_t> masks(std::size_t(n_bs) * blocks, 0);
    topo.caches.resize(n_bs);
    {
        std::vector<std::int32_t> pool(n_c);
        for (int b = 0; b < n_bs; ++b) {
            std::iota(pool.begin(), pool.end(), 0);
            auto& cache = topo.caches[b];
            cache.resize(cfg.cache_size);
            for (int k = 0; k < cfg.cache_size; ++k) {
                const int pick = k + int(rng.uniform() * (n_c - k));
                std::swap(pool[k], pool[std::min(pick, n_c - 1)]);
                cache[k] = pool[k];
                masks[std::size_t(b) * blocks + cache[k] / 64] |= 1ull << (cache[k] % 64);
            }
            std::sort(cache.begin(), cache.end());
        }
    }
    auto caches_file = [&](std::int32_t bs, std::int32_t file) {
        return (masks[std::size_t(bs) * blocks + file / 64] >> (file % 64)) & 1ull;
    };

    const BsGrid grid(topo.bs_points, region, 1.0 / std::sqrt(cfg.lambda_bs));

    // typical user at the origin; request restricted to the cached set
    const FileSampler typical_sampler(pop, n_c);
    topo.typical_request = typical_sampler.draw(rng);
    topo.serving_bs = grid.nearest_if(
        0.0, 0.0, [&](std::int32_t id) { return bool(caches_file(id, topo.typical_request)); });
    if (topo.serving_bs < 0) return out; // no cacher in the region: resample
    {
        const auto& p = topo.bs_points[topo.serving_bs];
        topo.serving_distance = std::hypot(p[0], p[1]);
    }

    // Background served users, one per BS (full load). Their positions are
    // drawn at a serving-distance-law displacement from their BS,
    // independent of the rest of the process: a uniform pick among literally
    // associated users is size-biased toward dense neighborhoods and
    // overshoots the mean request load by ~20% for the fixed scheme, which
    // is a correlation the load analysis deliberately ignores.
    topo.served_user_per_bs.assign(n_bs, {0.0, 0.0});
    topo.has_served_user.assign(n_bs, 1);
    std::vector<double> served_dist(n_bs, 0.0);
    topo.served_file_per_bs.assign(n_bs, 0);
    auto& served_file = topo.served_file_per_bs;
    const double xi_over_pil = cfg.xi / (M_PI * cfg.lambda_bs);
    for (int b = 0; b < n_bs; ++b) {
        const double z = std::sqrt(rng.exponential() * xi_over_pil);
        const double phi = 2.0 * M_PI * rng.uniform();
        topo.served_user_per_bs[b] = {topo.bs_points[b][0] + z * std::cos(phi),
                                      topo.bs_points[b][1] + z * std::sin(phi)};
        served_dist[b] = z;
        served_file[b] = typical_sampler.draw(rng);
    }
    // Slivnyak conditioning: the serving BS serves the typical user
    topo.served_user_per_bs[topo.serving_bs] = {0.0, 0.0};
    served_dist[topo.serving_bs] = topo.serving_distance;
    served_file[topo.serving_bs] = topo.typical_request;

    // IN requests from background served users: every BS strictly inside a
    // served user's IN range gets one request, except the user's own BS and
    // BSs that cache the user's file while being nearer than its serving
    // distance (those would have been the serving BS).
    std::vector<int> requests(n_bs, 0);
    const bool fixed = cfg.is_fixed();
    for (int b = 0; b < n_bs; ++b) {
        if (b == topo.serving_bs) continue;
        const double z = served_dist[b];
        const double range = fixed ? cfg.r_c() : cfg.mu() * z;
        if (range <= 0.0) continue;
        const auto& up = topo.served_user_per_bs[b];
        const std::int32_t file = served_file[b];
        grid.visit_disk(up[0], up[1], range, [&](std::int32_t id) {
            if (id == b) return;
            const double dx = topo.bs_points[id][0] - up[0];
            const double dy = topo.bs_points[id][1] - up[1];
            if (dx * dx + dy * dy < z * z && caches_file(id, file)) return;
            requests[id] += 1;
        });
    }

    // interior load statistics before the typical user's requests are added
    topo.interior_request_counts.clear();
    for (int b = 0; b < n_bs; ++b) {
        const auto& p = topo.bs_points[b];
        if (p[0] * p[0] + p[1] * p[1] <= guard * guard)
            topo.interior_request_counts.push_back(requests[b]);
    }

    topo.satisfied_at_serving = std::min(requests[topo.serving_bs], cfg.max_in_dof);

    // the typical user's own requests and the resulting nulling decisions
    const double typical_range = fixed ? cfg.r_c() : cfg.mu() * topo.serving_distance;
    std::vector<char> in_range(n_bs, 0);
    if (typical_range > 0.0) {
        grid.visit_disk(0.0, 0.0, typical_range, [&](std::int32_t id) {
            if (id != topo.serving_bs) {
                in_range[id] = 1;
                requests[id] += 1;
            }
        });
    }
    topo.interferers.reserve(n_bs - 1);
    for (int b = 0; b < n_bs; ++b) {
        if (b == topo.serving_bs) continue;
        const auto& p = topo.bs_points[b];
        TopologyRealization::Interferer itf{std::hypot(p[0], p[1]), false};
        if (in_range[b]) {
            const int load = requests[b];
            // load <= L: every request satisfied; otherwise the BS picks L
            // of its `load` requesters uniformly at random
            itf.nulled = load <= cfg.max_in_dof ||
                         rng.uniform() * load < double(cfg.max_in_dof);
        }
        topo.interferers.push_back(itf);
    }
    out.ok = true;
    return out;
}

} // namespace

TopologyRealization sample_topology(const NetworkConfig& cfg, const MonteCarloConfig& mc_cfg,
                                    RngStream& rng) {
    const double region =
        mc_cfg.region_radius > 0.0 ? mc_cfg.region_radius : auto_region_radius(cfg);
    const double guard = mc_cfg.guard_radius > 0.0 ? mc_cfg.guard_radius : 0.5 * region;
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto res = try_sample(cfg, region, guard, rng);
        if (res.ok) {
            res.topo.resample_attempts = attempt;
            return res.topo;
        }
    }
    throw std::runtime_error("sample_topology: no serving BS found in 100 attempts; "
                             "region too small for this configuration");
}

double cstp_of_topology(const TopologyRealization& topo, double tau, const NetworkConfig& cfg,
                        int n_fading, RngStream& rng) {
    if (n_fading < 1) throw std::invalid_argument("cstp_of_topology: n_fading must be >= 1");
    const int diversity = cfg.antennas - topo.satisfied_at_serving;
    const double z_gain = std::pow(topo.serving_distance, -cfg.alpha);
    std::vector<double> weights;
    weights.reserve(topo.interferers.size());
    for (const auto& itf : topo.interferers)
        if (!itf.nulled) weights.push_back(std::pow(itf.radius, -cfg.alpha));
    int hits = 0;
    for (int f = 0; f < n_fading; ++f) {
        const double signal = rng.gamma_int(diversity) * z_gain;
        double interference = 0.0;
        for (const double w : weights) interference += rng.exponential() * w;
        if (signal >= tau * interference) ++hits;
    }
    return double(hits) / n_fading;
}

CstpSampleSet run_campaign(const NetworkConfig& cfg, const MonteCarloConfig& mc_cfg,
                           double tau) {
    cfg.validate();
    if (mc_cfg.n_topologies < 1 || mc_cfg.n_fading < 1)
        throw std::invalid_argument("run_campaign: counts must be >= 1");
    const int n = mc_cfg.n_topologies;
    CstpSampleSet set;
    set.samples.assign(n, 0.0);
    set.seed = mc_cfg.seed;
    set.config_hash = config_hash(cfg);
    set.n_fading = mc_cfg.n_fading;
    set.typical_theta_hist.assign(cfg.max_in_dof + 1, 0.0);

    std::vector<int> resamples(n, 0);
    std::vector<int> theta_at_serving(n, 0);
    std::vector<double> interior_sum(n, 0.0);
    std::vector<std::int64_t> interior_cnt(n, 0);

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int t = next.fetch_add(1);
            if (t >= n) return;
            RngStream rng(mc_cfg.seed, std::uint64_t(t), 0);
            const auto topo = sample_topology(cfg, mc_cfg, rng);
            set.samples[t] = cstp_of_topology(topo, tau, cfg, mc_cfg.n_fading, rng);
            resamples[t] = topo.resample_attempts;
            theta_at_serving[t] = topo.satisfied_at_serving;
            interior_sum[t] = std::accumulate(topo.interior_request_counts.begin(),
                                              topo.interior_request_counts.end(), 0.0);
            interior_cnt[t] = std::int64_t(topo.interior_request_counts.size());
        }
    };
    int n_threads = mc_cfg.threads > 0 ? mc_cfg.threads
                                       : int(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min(n_threads, n));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    set.resample_count = std::accumulate(resamples.begin(), resamples.end(), 0);
    const double total_cnt = double(std::accumulate(interior_cnt.begin(), interior_cnt.end(),
                                                    std::int64_t(0)));
    set.mean_interior_requests =
        total_cnt > 0 ? std::accumulate(interior_sum.begin(), interior_sum.end(), 0.0) / total_cnt
                      : 0.0;
    for (int t = 0; t < n; ++t) set.typical_theta_hist[theta_at_serving[t]] += 1.0 / n;
    return set;
}

EmpiricalSummary empirical_summaries(const CstpSampleSet& set,
                                     std::span<const double> x_grid) {
    if (set.samples.empty()) throw std::invalid_argument("empirical_summaries: no samples");
    EmpiricalSummary s;
    const auto n = double(set.samples.size());
    s.stp = std::accumulate(set.samples.begin(), set.samples.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : set.samples) ss += (v - s.stp) * (v - s.stp);
    s.variance = set.samples.size() > 1 ? ss / (n - 1.0) : 0.0;
    s.ccdf.resize(x_grid.size());
    for (std::size_t k = 0; k < x_grid.size(); ++k) {
        int count = 0;
        for (double v : set.samples) count += v > x_grid[k] ? 1 : 0;
        s.ccdf[k] = count / n;
    }
    return s;
}

void write_sample_set(const std::string& csv_path, const CstpSampleSet& set,
                      const NetworkConfig& cfg) {
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw std::runtime_error("write_sample_set: cannot open " + csv_path);
    csv << "topology_index,cstp\n";
    char buf[64];
    for (std::size_t t = 0; t < set.samples.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%zu,%.9g\n", t, set.samples[t]);
        csv << buf;
    }
    nlohmann::json meta;
    meta["config"] = network_config_to_json(cfg);
    meta["config_hash"] = set.config_hash;
    meta["seed"] = set.seed;
    meta["n_topologies"] = set.samples.size();
    meta["n_fading"] = set.n_fading;
    meta["resample_count"] = set.resample_count;
    std::ofstream side(csv_path + ".meta.json", std::ios::binary);
    if (!side) throw std::runtime_error("write_sample_set: cannot open sidecar");
    side << meta.dump(2) << "\n";
}

} // namespace cenmeta::mc
