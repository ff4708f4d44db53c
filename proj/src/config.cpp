#include "anderson/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace anderson {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

} // namespace

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected `key = value`");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) +
                                           ": empty key");
        if (cfg.values_.count(key))
            throw ConfigError("config: duplicate key `" + key + "`");
        cfg.values_[key] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_string(buf.str());
}

bool Config::has(const std::string& key) const {
    const bool present = values_.count(key) != 0;
    if (present) accessed_.insert(key);
    return present;
}

const std::string& Config::raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("config: missing key `" + key + "`");
    accessed_.insert(key);
    return it->second;
}

std::string Config::get_string(const std::string& key) const { return raw(key); }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return values_.count(key) ? raw(key) : fallback;
}

double Config::get_double(const std::string& key) const {
    const std::string& s = raw(key);
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (trim(s.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("config: key `" + key + "` is not a number: " + s);
}

double Config::get_double(const std::string& key, double fallback) const {
    return values_.count(key) ? get_double(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key) const {
    const double v = get_double(key);
    const std::int64_t i = static_cast<std::int64_t>(v);
    if (static_cast<double>(i) != v)
        throw ConfigError("config: key `" + key + "` is not an integer");
    return i;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    return values_.count(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_uint(const std::string& key) const {
    const std::string& s = raw(key);
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(s, &used);
        if (trim(s.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("config: key `" + key + "` is not an unsigned integer: " + s);
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
    return values_.count(key) ? get_uint(key) : fallback;
}

std::vector<double> Config::get_list(const std::string& key) const {
    std::string s = raw(key);
    s = trim(s);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']')
            throw ConfigError("config: unterminated list for key `" + key + "`");
        s = s.substr(1, s.size() - 2);
    }
    std::vector<double> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("config: bad list entry `" + item + "` for key `" + key + "`");
        }
    }
    if (out.empty()) throw ConfigError("config: empty list for key `" + key + "`");
    return out;
}

std::vector<double> Config::get_list(const std::string& key,
                                     const std::vector<double>& fallback) const {
    return values_.count(key) ? get_list(key) : fallback;
}

void Config::finalize() const {
    std::vector<std::string> unknown;
    for (const auto& [k, v] : values_)
        if (!accessed_.count(k)) unknown.push_back(k);
    if (!unknown.empty()) {
        std::string msg = "config: unknown keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }
}

std::string Config::canonical_text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

std::string Config::hash() const {
    const std::string text = canonical_text();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PotentialModel model_from_config(const Config& cfg) {
    const std::string variant = cfg.get_string("model.variant");
    if (variant == "riesz") {
        return PotentialModel::riesz(static_cast<int>(cfg.get_int("model.d")),
                                     cfg.get_double("model.alpha"),
                                     cfg.get_double("model.c_gamma"));
    }
    if (variant == "newtonian") {
        return PotentialModel::newtonian(static_cast<int>(cfg.get_int("model.d")),
                                         cfg.get_double("model.p"));
    }
    if (variant == "fractional") {
        return PotentialModel::fractional(cfg.get_list("model.hurst"));
    }
    if (variant == "white1d") {
        if (cfg.has("model.d") && cfg.get_int("model.d") != 1)
            throw ConfigError("config: white1d requires model.d = 1");
        return PotentialModel::white_noise_1d();
    }
    throw ConfigError("config: unknown model.variant `" + variant + "`");
}

GridSpec grid_from_config(const Config& cfg, int d) {
    try {
        return GridSpec(d, cfg.get_double("grid.half_width"),
                        cfg.get_int("grid.n"));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

} // namespace anderson
