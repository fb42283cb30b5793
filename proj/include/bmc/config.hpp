#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

// Minimal key-value experiment config: [section] headers, key = value lines,
// '#' comments, quoted or bare scalar values.

namespace bmc {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ConfigFile {
  public:
    static ConfigFile parse(const std::string& text);
    static ConfigFile parse_file(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    long long get_int(const std::string& section, const std::string& key,
                      long long fallback) const;
    bool get_bool(const std::string& section, const std::string& key,
                  bool fallback) const;
    std::vector<double> get_doubles(const std::string& section,
                                    const std::string& key,
                                    const std::vector<double>& fallback) const;

    // FNV-1a of the raw file bytes: the provenance stamp on every output row
    std::uint64_t hash() const { return hash_; }

  private:
    const std::string* find(const std::string& section,
                            const std::string& key) const;

    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::uint64_t hash_ = 0;
};

} // namespace bmc
