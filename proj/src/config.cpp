#include "bmc/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bmc {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile cfg;
    cfg.hash_ = fnv1a(text);
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // strip comments outside quotes
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

const std::string* ConfigFile::find(const std::string& section,
                                    const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

std::string ConfigFile::get_string(const std::string& section,
                                   const std::string& key,
                                   const std::string& fallback) const {
    const std::string* v = find(section, key);
    return v ? *v : fallback;
}

double ConfigFile::get_double(const std::string& section,
                              const std::string& key, double fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    char* end = nullptr;
    const double x = std::strtod(v->c_str(), &end);
    if (end == v->c_str() || *end != '\0')
        throw ConfigError("bad number for " + section + "." + key + ": " + *v);
    return x;
}

long long ConfigFile::get_int(const std::string& section,
                              const std::string& key, long long fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    char* end = nullptr;
    const long long x = std::strtoll(v->c_str(), &end, 10);
    if (end == v->c_str() || *end != '\0')
        throw ConfigError("bad integer for " + section + "." + key + ": " + *v);
    return x;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw ConfigError("bad boolean for " + section + "." + key + ": " + *v);
}

std::vector<double> ConfigFile::get_doubles(
    const std::string& section, const std::string& key,
    const std::vector<double>& fallback) const {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    std::string spaced = *v;
    for (char& c : spaced)
        if (c == ',') c = ' ';
    std::vector<double> out;
    std::string item;
    std::istringstream in(spaced);
    while (in >> item) {
        char* end = nullptr;
        const double x = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0')
            throw ConfigError("bad list entry for " + section + "." + key +
                              ": " + item);
        out.push_back(x);
    }
    if (out.empty())
        throw ConfigError("empty list for " + section + "." + key);
    return out;
}

} // namespace bmc
