#pragma once

#include <string>
#include <string_view>

namespace xorsim {

enum class DemandKind { Uniform, Zipf, MandelbrotZipf };

struct DemandLaw {
    DemandKind kind = DemandKind::Uniform;
    double alpha = 1.4;
    double q = 2.0;

    static DemandLaw uniform() { return {}; }
    static DemandLaw zipf(double alpha) { return {DemandKind::Zipf, alpha, 0.0}; }
    static DemandLaw mandelbrot_zipf(double alpha = 1.4, double q = 2.0)
    {
        return {DemandKind::MandelbrotZipf, alpha, q};
    }

    bool operator==(const DemandLaw&) const = default;
};

// Parses "uniform", "zipf(0.8)", "mandelbrot_zipf(1.4,2.0)". Bare "zipf" means
// alpha 0.8 and bare "mandelbrot_zipf" means (1.4, 2.0).
DemandLaw parse_demand_law(std::string_view text);
std::string to_string(const DemandLaw& law);

struct SystemConfig {
    int n_files = 100;          // N
    int subfiles_per_file = 10; // B
    int n_caches = 5;           // K, at most 64 (side information is a bitmask)
    int queue_depth = 10;       // Q
    int max_deadline = 20;      // D
    int horizon = 50;           // H
    double cache_fraction = 0.30;
    DemandLaw demand_law;
    double erasure_prob = 0.0;

    int n_packets() const { return n_files * subfiles_per_file; }
    int cache_size() const;
    int max_pairs() const { return queue_depth * (queue_depth - 1) / 2; }
    int action_count() const { return 2 * max_pairs() + 1; }
    int unicast_action() const { return 2 * max_pairs(); }

    // Throws ConfigError naming the first offending field.
    void validate() const;

    bool operator==(const SystemConfig&) const = default;
};

// Key/value text, one "key = value" per line, '#' starts a comment. Keys are the
// SystemConfig field names; missing keys keep their defaults, unknown keys and
// malformed values throw ConfigError. The result is validated.
SystemConfig parse_config(std::string_view text, SystemConfig base = {});
SystemConfig load_config_file(const std::string& path, SystemConfig base = {});
void apply_config_key(SystemConfig& cfg, const std::string& key, const std::string& value);
std::string to_string(const SystemConfig& cfg);

} // namespace xorsim
