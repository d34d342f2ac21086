#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cenmeta/model.hpp"

// Ground-truth Monte Carlo of the network: topology sampling, caching,
// content-centric association, interference-nulling dynamics, fading, and
// empirical STP / variance / meta-distribution estimation. The empirical
// curves are the verification oracle for every analytic expression.
namespace cenmeta::mc {

struct MonteCarloConfig {
    int n_topologies = 2000;
    int n_fading = 500;
    // 0 = auto: disk radius max(10 sqrt(xi/(pi lambda)), 20 R_in) where R_in
    // is R_c (fixed) or mu times the mean serving distance (flexible);
    // guard = half the region. Interior statistics are collected inside the
    // guard radius where edge effects are negligible.
    double region_radius = 0.0;
    double guard_radius = 0.0;
    std::uint64_t seed = 1;
    int threads = 0; // 0 = hardware concurrency
};

double auto_region_radius(const NetworkConfig& cfg);

// Deterministic per-topology random stream: a 64-bit generator seeded by
// mixing (seed, topology index, attempt), so campaigns can fan out across
// threads without changing any draw.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t index, std::uint64_t attempt);

    std::uint64_t next_u64();
    double uniform();                  // [0, 1)
    double uniform(double lo, double hi);
    double exponential();              // Exp(1)
    double gamma_int(int shape);       // Gamma(shape, 1), integer shape
    int poisson(double mean);

  private:
    std::uint64_t state_[4];
};

// One sampled network around the typical user at the origin.
struct TopologyRealization {
    std::vector<std::array<double, 2>> bs_points;
    std::vector<std::vector<std::int32_t>> caches; // sorted file ids per BS
    // served user position and requested file per BS
    std::vector<std::array<double, 2>> served_user_per_bs;
    std::vector<char> has_served_user;
    std::vector<std::int32_t> served_file_per_bs;
    std::int32_t typical_request = 0; // file id in [0, N_c)
    int serving_bs = -1;
    double serving_distance = 0.0;
    int satisfied_at_serving = 0;     // theta at the serving BS, <= L
    struct Interferer {
        double radius;
        bool nulled;
    };
    std::vector<Interferer> interferers; // all BSs except the serving one
    // IN requests received by BSs inside the guard radius, counting
    // background served users only (the typical user's own requests are a
    // Palm-conditioning artifact and would bias the mean-load estimate)
    std::vector<int> interior_request_counts;
    int resample_attempts = 0;
};

TopologyRealization sample_topology(const NetworkConfig& cfg, const MonteCarloConfig& mc_cfg,
                                    RngStream& rng);

// Fraction of fading draws with SIR >= tau: serving gain Gamma(M-theta, 1),
// interferer gains Exp(1), nulled interferers removed.
double cstp_of_topology(const TopologyRealization& topo, double tau, const NetworkConfig& cfg,
                        int n_fading, RngStream& rng);

struct CstpSampleSet {
    std::vector<double> samples; // one CSTP per topology, in [0,1]
    std::uint64_t seed = 0;
    std::string config_hash;
    int n_fading = 0;
    int resample_count = 0;
    // campaign diagnostics
    double mean_interior_requests = 0.0;   // estimates theta_bar
    std::vector<double> typical_theta_hist; // empirical P[Theta_I = theta]
};

// Runs n_topologies independent topologies (parallel over a thread pool);
// the result is identical for any thread count and any fixed seed.
CstpSampleSet run_campaign(const NetworkConfig& cfg, const MonteCarloConfig& mc_cfg,
                           double tau);

struct EmpiricalSummary {
    double stp = 0.0;
    double variance = 0.0;            // unbiased sample variance
    std::vector<double> ccdf;         // P[sample > x] on the given grid
};

EmpiricalSummary empirical_summaries(const CstpSampleSet& set,
                                     std::span<const double> x_grid);

// Sample-set emission: CSV (topology_index, cstp) plus a JSON metadata
// sidecar at <csv_path>.meta.json with the config echo, seed and resample
// count.
void write_sample_set(const std::string& csv_path, const CstpSampleSet& set,
                      const NetworkConfig& cfg);

} // namespace cenmeta::mc
