#pragma once

#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace cenmeta {

// Interference-nulling scheme selector. Fixed uses one IN radius for every
// user; Flexible scales the radius with each user's own serving distance.
struct FixedIN {
    double r_c = 0.0; // IN range in meters, >= 0
};
struct FlexibleIN {
    double mu = 0.0; // IN coefficient (range = mu * serving distance), >= 0
};
using INScheme = std::variant<FixedIN, FlexibleIN>;

// Physical, caching and nulling parameters of the network. SIR analysis is
// noise-free, so tx_power_dbm is carried for completeness but never enters
// the math.
struct NetworkConfig {
    int antennas = 8;         // M, per BS
    int max_in_dof = 2;       // L, antennas reserved for nulling, 0..M-1
    double alpha = 4.0;       // path-loss exponent, > 2
    double lambda_bs = 1e-4;  // BS density, m^-2
    double lambda_u = 8e-4;   // user density, m^-2
    int library_size = 100;   // N
    int cache_size = 40;      // C <= N
    double gamma_z = 0.8;     // Zipf exponent, >= 0
    double xi = 1.75;         // file diversity gain, 1 <= xi <= N/C
    INScheme scheme = FlexibleIN{0.8};
    double tx_power_dbm = 46.0;

    bool is_fixed() const { return std::holds_alternative<FixedIN>(scheme); }
    double r_c() const { return std::get<FixedIN>(scheme).r_c; }
    double mu() const { return std::get<FlexibleIN>(scheme).mu; }
    // IN range parameter regardless of scheme (R_c or mu).
    double ri() const;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

// File request probabilities, normalized and nonincreasing.
struct Popularity {
    std::vector<double> weights;
};

// Zipf popularity a_n proportional to n^-gamma_z over n = 1..n_files.
Popularity zipf_popularity(int n_files, double gamma_z);

// Parameters of the flexible uniform distribution caching policy: each BS
// stores cache_size files drawn uniformly from the cached_set_size most
// popular ones. xi = 1 reduces to most-popular caching, xi = N/C to uniform
// distribution caching.
struct CacheDesign {
    int cached_set_size = 0;   // N_c
    double caching_prob = 1.0; // T_c = C / N_c
    double hit_mass = 1.0;     // sum of popularity over the cached set
};

CacheDesign fudc_design(const Popularity& pop, int cache_size, double xi);

// PDF of the distance between a user and its nearest file-caching BS,
// 2 pi (lambda/xi) z exp(-pi (lambda/xi) z^2).
double serving_distance_pdf(double z, double lambda_bs, double xi);

// Config document I/O. The document is flat JSON with exactly the
// NetworkConfig field names (M, L, alpha, lambda_bs, lambda_u, N, C,
// gamma_z, xi, scheme, tx_power_dbm) plus "r_c" or "mu" depending on the
// scheme; optional "optimize", "sweep" and "montecarlo" sections are left
// untouched for the consumers that understand them.
NetworkConfig network_config_from_json(const nlohmann::json& doc);
nlohmann::json network_config_to_json(const NetworkConfig& cfg);
NetworkConfig load_network_config(const std::string& path);

// FNV-1a hash of the canonical (sorted-key) serialization, as a hex string.
// Identifies a configuration in reports and sample-set metadata.
std::string config_hash(const NetworkConfig& cfg);

} // namespace cenmeta
