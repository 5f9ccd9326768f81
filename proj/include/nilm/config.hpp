#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nilm {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Minimal TOML-style configuration: [section] headers, key = value lines,
// '#' comments. Values are integers, floats, booleans or quoted strings.
class Config {
public:
    struct Value {
        enum class Type { Int, Float, Bool, String } type = Type::String;
        std::int64_t i = 0;
        double f = 0.0;
        bool b = false;
        std::string s;
        int line = 0;
    };

    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin = "<string>");

    // "section.key=value" flag overrides, parsed with the same value grammar.
    void apply_override(const std::string& spec);

    bool has(const std::string& section, const std::string& key) const;
    std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t fallback) const;
    double get_float(const std::string& section, const std::string& key, double fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::string get_string(const std::string& section, const std::string& key, std::string fallback) const;

    // Every present key must be declared: "section.key" entries.
    void require_known(const std::vector<std::string>& known_keys) const;

    // Canonical text (sorted sections and keys) for manifests and hashing.
    std::string canonical() const;

    const std::string& origin() const { return origin_; }

private:
    std::string origin_;
    std::map<std::string, std::map<std::string, Value>> sections_;

    const Value* find(const std::string& section, const std::string& key) const;
    [[noreturn]] void type_error(const std::string& section, const std::string& key, const Value& v,
                                 const char* wanted) const;
};

// FNV-1a over the canonical config text, hex-encoded; stable run identifier.
std::string config_hash(const Config& cfg);

} // namespace nilm
