#include "rca/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rca/common.hpp"

namespace rca {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\''))) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
        if (!ok) return false;
    }
    return true;
}

}  // namespace

Config Config::parse_text(const std::string& text, const std::string& origin) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: expected key = value at " + origin + ":" +
                              std::to_string(line_no));
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)));
        if (!valid_key(key)) {
            throw ConfigError("config: bad key '" + key + "' at " + origin + ":" +
                              std::to_string(line_no));
        }
        if (cfg.entries_.count(key)) {
            throw ConfigError("config: duplicate key '" + key + "' at " + origin + ":" +
                              std::to_string(line_no));
        }
        cfg.entries_[key] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

void Config::set(const std::string& key, const std::string& value) {
    if (!valid_key(key)) throw ConfigError("config: bad key '" + key + "'");
    entries_[key] = value;
}

bool Config::contains(const std::string& key) const { return entries_.count(key) > 0; }

std::string Config::take(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("config: missing required key '" + key + "'");
    accessed_.insert(key);
    return it->second;
}

std::string Config::get_string(const std::string& key) { return take(key); }

std::string Config::get_string(const std::string& key, const std::string& fallback) {
    if (!contains(key)) return fallback;
    return take(key);
}

double Config::get_double(const std::string& key) {
    const std::string v = take(key);
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end == v.c_str() || *end != '\0' || errno == ERANGE) {
        throw ConfigError("config: key '" + key + "' is not a number: '" + v + "'");
    }
    return x;
}

double Config::get_double(const std::string& key, double fallback) {
    if (!contains(key)) return fallback;
    return get_double(key);
}

std::int64_t Config::get_int(const std::string& key) {
    const std::string v = take(key);
    errno = 0;
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || end == v.c_str() || *end != '\0' || errno == ERANGE) {
        throw ConfigError("config: key '" + key + "' is not an integer: '" + v + "'");
    }
    return x;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) {
    if (!contains(key)) return fallback;
    return get_int(key);
}

std::uint64_t Config::get_uint(const std::string& key) {
    const std::int64_t x = get_int(key);
    if (x < 0) throw ConfigError("config: key '" + key + "' must be non-negative");
    return static_cast<std::uint64_t>(x);
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) {
    if (!contains(key)) return fallback;
    return get_uint(key);
}

bool Config::get_bool(const std::string& key) {
    const std::string v = take(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: key '" + key + "' is not a boolean: '" + v + "'");
}

bool Config::get_bool(const std::string& key, bool fallback) {
    if (!contains(key)) return fallback;
    return get_bool(key);
}

void Config::finish() const {
    std::string unknown;
    for (const auto& [key, value] : entries_) {
        (void)value;
        if (!accessed_.count(key)) {
            if (!unknown.empty()) unknown += ", ";
            unknown += key;
        }
    }
    if (!unknown.empty()) throw ConfigError("config: unknown key(s): " + unknown);
}

std::uint64_t Config::hash() const {
    // std::map iterates in sorted key order, so the fold is canonical.
    std::string canon;
    for (const auto& [key, value] : entries_) {
        canon += key;
        canon += '=';
        canon += value;
        canon += '\n';
    }
    return fnv1a64(canon);
}

std::string Config::hash_hex() const { return hex64(hash()); }

}  // namespace rca
