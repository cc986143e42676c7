#include "xorsim/config.hpp"
#include "xorsim/errors.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace xorsim {

namespace {

std::string trim(std::string_view s)
{
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string s)
{
    for (auto& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

int parse_int(const std::string& key, const std::string& v)
{
    int out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError(fmt::format("{}: expected an integer, got '{}'", key, v));
    return out;
}

double parse_double(const std::string& key, const std::string& v)
{
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, v));
    return out;
}

} // namespace

DemandLaw parse_demand_law(std::string_view text)
{
    std::string s = lower(trim(text));
    std::string name = s;
    std::vector<double> args;
    if (auto open = s.find('('); open != std::string::npos) {
        if (s.back() != ')')
            throw ConfigError(fmt::format("demand_law: unbalanced parentheses in '{}'", s));
        name = trim(s.substr(0, open));
        std::stringstream in(s.substr(open + 1, s.size() - open - 2));
        std::string tok;
        while (std::getline(in, tok, ','))
            args.push_back(parse_double("demand_law", trim(tok)));
    }
    for (auto& c : name)
        if (c == '-')
            c = '_';

    DemandLaw law;
    if (name == "uniform") {
        if (!args.empty())
            throw ConfigError("demand_law: uniform takes no parameters");
        law = DemandLaw::uniform();
    } else if (name == "zipf") {
        if (args.size() > 1)
            throw ConfigError("demand_law: zipf takes one parameter");
        law = DemandLaw::zipf(args.empty() ? 0.8 : args[0]);
    } else if (name == "mandelbrot_zipf") {
        if (args.size() == 1 || args.size() > 2)
            throw ConfigError("demand_law: mandelbrot_zipf takes (alpha, q)");
        law = args.empty() ? DemandLaw::mandelbrot_zipf() : DemandLaw::mandelbrot_zipf(args[0], args[1]);
    } else {
        throw ConfigError(fmt::format("demand_law: unknown law '{}'", name));
    }
    if (law.kind != DemandKind::Uniform && !(law.alpha > 0.0))
        throw ConfigError("demand_law: alpha must be positive");
    if (law.kind == DemandKind::MandelbrotZipf && !(law.q >= 0.0))
        throw ConfigError("demand_law: q must be nonnegative");
    return law;
}

std::string to_string(const DemandLaw& law)
{
    switch (law.kind) {
    case DemandKind::Uniform:
        return "uniform";
    case DemandKind::Zipf:
        return fmt::format("zipf({})", law.alpha);
    case DemandKind::MandelbrotZipf:
        return fmt::format("mandelbrot_zipf({},{})", law.alpha, law.q);
    }
    return "uniform";
}

int SystemConfig::cache_size() const
{
    return static_cast<int>(std::floor(cache_fraction * static_cast<double>(n_packets())));
}

void SystemConfig::validate() const
{
    auto fail = [](const char* field, const std::string& why) {
        throw ConfigError(fmt::format("{}: {}", field, why));
    };
    if (n_files < 1)
        fail("n_files", "must be at least 1");
    if (subfiles_per_file < 1)
        fail("subfiles_per_file", "must be at least 1");
    if (n_caches < 2 || n_caches > 64)
        fail("n_caches", "must be in 2..64");
    if (queue_depth < 2)
        fail("queue_depth", "must be at least 2");
    if (max_deadline < 1)
        fail("max_deadline", "must be at least 1");
    if (horizon < 1)
        fail("horizon", "must be at least 1");
    if (!(cache_fraction > 0.0 && cache_fraction < 1.0))
        fail("cache_fraction", "must lie strictly between 0 and 1");
    if (cache_size() < 1)
        fail("cache_fraction", "floor(cache_fraction * n_files * subfiles_per_file) must be at least 1");
    if (!(erasure_prob >= 0.0 && erasure_prob <= 1.0))
        fail("erasure_prob", "must lie in [0, 1]");
    if (demand_law.kind != DemandKind::Uniform && !(demand_law.alpha > 0.0))
        fail("demand_law", "alpha must be positive");
}

void apply_config_key(SystemConfig& cfg, const std::string& key, const std::string& value)
{
    if (key == "n_files")
        cfg.n_files = parse_int(key, value);
    else if (key == "subfiles_per_file")
        cfg.subfiles_per_file = parse_int(key, value);
    else if (key == "n_caches")
        cfg.n_caches = parse_int(key, value);
    else if (key == "queue_depth")
        cfg.queue_depth = parse_int(key, value);
    else if (key == "max_deadline")
        cfg.max_deadline = parse_int(key, value);
    else if (key == "horizon")
        cfg.horizon = parse_int(key, value);
    else if (key == "cache_fraction")
        cfg.cache_fraction = parse_double(key, value);
    else if (key == "demand_law")
        cfg.demand_law = parse_demand_law(value);
    else if (key == "erasure_prob")
        cfg.erasure_prob = parse_double(key, value);
    else
        throw ConfigError(fmt::format("{}: unknown configuration key", key));
}

SystemConfig parse_config(std::string_view text, SystemConfig base)
{
    std::stringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::string t = trim(line);
        if (t.empty())
            continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(fmt::format("line {}: expected 'key = value'", lineno));
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(fmt::format("line {}: empty key or value", lineno));
        apply_config_key(base, key, value);
    }
    base.validate();
    return base;
}

SystemConfig load_config_file(const std::string& path, SystemConfig base)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open config file '{}'", path));
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), base);
}

std::string to_string(const SystemConfig& c)
{
    return fmt::format("n_files = {}\nsubfiles_per_file = {}\nn_caches = {}\nqueue_depth = {}\n"
                       "max_deadline = {}\nhorizon = {}\ncache_fraction = {}\ndemand_law = {}\n"
                       "erasure_prob = {}\n",
                       c.n_files, c.subfiles_per_file, c.n_caches, c.queue_depth, c.max_deadline, c.horizon,
                       c.cache_fraction, to_string(c.demand_law), c.erasure_prob);
}

} // namespace xorsim
