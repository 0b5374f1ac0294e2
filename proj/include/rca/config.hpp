#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace rca {

// Flat key = value configuration ('#' comments, optional quotes on values).
// Every key must be consumed by a typed getter before finish() is called;
// leftovers are configuration errors, catching typos early. hash() folds the
// canonical sorted key=value listing, so semantically identical files agree.
class Config {
public:
    Config() = default;

    static Config parse_file(const std::string& path);
    static Config parse_text(const std::string& text, const std::string& origin);

    void set(const std::string& key, const std::string& value);  // flag overrides
    bool contains(const std::string& key) const;

    std::string get_string(const std::string& key);
    std::string get_string(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key);
    double get_double(const std::string& key, double fallback);
    std::int64_t get_int(const std::string& key);
    std::int64_t get_int(const std::string& key, std::int64_t fallback);
    std::uint64_t get_uint(const std::string& key);
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback);
    bool get_bool(const std::string& key);
    bool get_bool(const std::string& key, bool fallback);

    // Throws ConfigError naming every never-accessed key.
    void finish() const;

    std::uint64_t hash() const;
    std::string hash_hex() const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::string take(const std::string& key);

    std::map<std::string, std::string> entries_;
    mutable std::set<std::string> accessed_;
};

}  // namespace rca
