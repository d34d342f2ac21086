#include "cenmeta/model.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cenmeta {

double NetworkConfig::ri() const {
    return is_fixed() ? r_c() : mu();
}

void NetworkConfig::validate() const {
    auto bad = [](const std::string& field, const std::string& why) {
        throw std::invalid_argument("NetworkConfig." + field + ": " + why);
    };
    if (antennas < 1) bad("M", "must be >= 1");
    if (max_in_dof < 0 || max_in_dof > antennas - 1) bad("L", "must satisfy 0 <= L <= M-1");
    if (!(alpha > 2.0)) bad("alpha", "must be > 2");
    if (!(lambda_bs > 0.0)) bad("lambda_bs", "must be positive");
    if (!(lambda_u > 0.0)) bad("lambda_u", "must be positive");
    if (library_size < 1) bad("N", "must be >= 1");
    if (cache_size < 1 || cache_size > library_size) bad("C", "must satisfy 1 <= C <= N");
    if (!(gamma_z >= 0.0)) bad("gamma_z", "must be >= 0");
    const double xi_max = double(library_size) / cache_size;
    if (!(xi >= 1.0 && xi <= xi_max)) bad("xi", "must satisfy 1 <= xi <= N/C");
    if (is_fixed()) {
        if (!(r_c() >= 0.0)) bad("r_c", "must be >= 0");
    } else {
        if (!(mu() >= 0.0)) bad("mu", "must be >= 0");
    }
}

Popularity zipf_popularity(int n_files, double gamma_z) {
    if (n_files < 1) throw std::invalid_argument("zipf_popularity: N must be >= 1");
    Popularity pop;
    pop.weights.resize(static_cast<std::size_t>(n_files));
    double total = 0.0;
    for (int n = 1; n <= n_files; ++n) {
        const double w = std::pow(double(n), -gamma_z);
        pop.weights[n - 1] = w;
        total += w;
    }
    for (auto& w : pop.weights) w /= total;
    return pop;
}

CacheDesign fudc_design(const Popularity& pop, int cache_size, double xi) {
    const int n_files = static_cast<int>(pop.weights.size());
    if (cache_size < 1 || cache_size > n_files)
        throw std::invalid_argument("fudc_design: need 1 <= C <= N");
    const double xi_max = double(n_files) / cache_size;
    if (!(xi >= 1.0 && xi <= xi_max))
        throw std::invalid_argument("fudc_design: need 1 <= xi <= N/C");
    CacheDesign d;
    d.cached_set_size = static_cast<int>(std::lround(xi * cache_size));
    d.cached_set_size = std::max(cache_size, std::min(n_files, d.cached_set_size));
    d.caching_prob = double(cache_size) / d.cached_set_size;
    d.hit_mass = 0.0;
    for (int n = 0; n < d.cached_set_size; ++n) d.hit_mass += pop.weights[n];
    return d;
}

double serving_distance_pdf(double z, double lambda_bs, double xi) {
    if (z < 0.0) return 0.0;
    const double a = M_PI * lambda_bs / xi;
    return 2.0 * a * z * std::exp(-a * z * z);
}

NetworkConfig network_config_from_json(const nlohmann::json& doc) {
    NetworkConfig cfg;
    auto get = [&doc](const char* key, auto& out) {
        if (!doc.contains(key)) {
            throw std::invalid_argument(std::string("config: missing field \"") + key + "\"");
        }
        try {
            out = doc.at(key).get<std::remove_reference_t<decltype(out)>>();
        } catch (const nlohmann::json::exception&) {
            throw std::invalid_argument(std::string("config: field \"") + key +
                                        "\" has the wrong type");
        }
    };
    get("M", cfg.antennas);
    get("L", cfg.max_in_dof);
    get("alpha", cfg.alpha);
    get("lambda_bs", cfg.lambda_bs);
    get("lambda_u", cfg.lambda_u);
    get("N", cfg.library_size);
    get("C", cfg.cache_size);
    get("gamma_z", cfg.gamma_z);
    get("xi", cfg.xi);
    get("tx_power_dbm", cfg.tx_power_dbm);
    std::string scheme;
    get("scheme", scheme);
    if (scheme == "fixed") {
        double r_c = 0.0;
        get("r_c", r_c);
        cfg.scheme = FixedIN{r_c};
    } else if (scheme == "flexible") {
        double mu = 0.0;
        get("mu", mu);
        cfg.scheme = FlexibleIN{mu};
    } else {
        throw std::invalid_argument("config: scheme must be \"fixed\" or \"flexible\"");
    }
    cfg.validate();
    return cfg;
}

nlohmann::json network_config_to_json(const NetworkConfig& cfg) {
    nlohmann::json doc;
    doc["M"] = cfg.antennas;
    doc["L"] = cfg.max_in_dof;
    doc["alpha"] = cfg.alpha;
    doc["lambda_bs"] = cfg.lambda_bs;
    doc["lambda_u"] = cfg.lambda_u;
    doc["N"] = cfg.library_size;
    doc["C"] = cfg.cache_size;
    doc["gamma_z"] = cfg.gamma_z;
    doc["xi"] = cfg.xi;
    doc["tx_power_dbm"] = cfg.tx_power_dbm;
    if (cfg.is_fixed()) {
        doc["scheme"] = "fixed";
        doc["r_c"] = cfg.r_c();
    } else {
        doc["scheme"] = "flexible";
        doc["mu"] = cfg.mu();
    }
    return doc;
}

NetworkConfig load_network_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config: " + path + " is not valid JSON: " + e.what());
    }
    return network_config_from_json(doc);
}

std::string config_hash(const NetworkConfig& cfg) {
    const std::string canon = network_config_to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

} // namespace cenmeta
