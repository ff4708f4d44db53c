#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "anderson/grid.hpp"
#include "anderson/potentials.hpp"

namespace anderson {

/// Configuration problems map to process exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// `key = value` configuration text with dotted section keys.
/// '#' starts a comment; list values use brackets: key = [1, 2, 3].
/// Keys are tracked on access; finalize() rejects any key never read.
class Config {
public:
    static Config parse_string(const std::string& text);
    static Config parse_file(const std::string& path);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_uint(const std::string& key) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    std::vector<double> get_list(const std::string& key) const;
    std::vector<double> get_list(const std::string& key,
                                 const std::vector<double>& fallback) const;

    /// Throws ConfigError naming every key that was never accessed.
    void finalize() const;

    /// Canonicalized config text: sorted `key = value` lines.
    std::string canonical_text() const;

    /// FNV-1a hash of the canonical text, as fixed-width hex.
    std::string hash() const;

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> accessed_;
    const std::string& raw(const std::string& key) const;
};

/// Model/grid blocks shared by the experiment configs.
PotentialModel model_from_config(const Config& cfg);
GridSpec grid_from_config(const Config& cfg, int d);

} // namespace anderson
