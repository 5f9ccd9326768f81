#include "nilm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nilm/serialize.hpp"

namespace nilm {

namespace {

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

Config::Value parse_value(const std::string& raw, int line, const std::string& where) {
    Config::Value v;
    v.line = line;
    const std::string s = strip(raw);
    if (s.empty()) throw ConfigError(where + ": empty value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') throw ConfigError(where + ": unterminated string");
        v.type = Config::Value::Type::String;
        v.s = s.substr(1, s.size() - 2);
        return v;
    }
    if (s == "true" || s == "false") {
        v.type = Config::Value::Type::Bool;
        v.b = s == "true";
        return v;
    }
    // Integer first, then float.
    {
        std::int64_t i = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), i);
        if (ec == std::errc{} && p == s.data() + s.size()) {
            v.type = Config::Value::Type::Int;
            v.i = i;
            return v;
        }
    }
    {
        double f = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), f);
        if (ec == std::errc{} && p == s.data() + s.size()) {
            v.type = Config::Value::Type::Float;
            v.f = f;
            return v;
        }
    }
    throw ConfigError(where + ": cannot parse value '" + s + "'");
}

} // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            section = strip(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError(where + ": empty section name");
            cfg.sections_[section]; // sections may be empty
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = strip(line.substr(0, eq));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (section.empty()) throw ConfigError(where + ": key outside of any [section]");
        cfg.sections_[section][key] = parse_value(line.substr(eq + 1), line_no, where);
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

void Config::apply_override(const std::string& spec) {
    const auto eq = spec.find('=');
    const auto dot = spec.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("override must look like section.key=value: " + spec);
    const std::string section = strip(spec.substr(0, dot));
    const std::string key = strip(spec.substr(dot + 1, eq - dot - 1));
    if (section.empty() || key.empty()) throw ConfigError("override must name section.key: " + spec);
    sections_[section][key] = parse_value(spec.substr(eq + 1), 0, "<override " + spec + ">");
}

const Config::Value* Config::find(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    return &k->second;
}

bool Config::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

void Config::type_error(const std::string& section, const std::string& key, const Value& v,
                        const char* wanted) const {
    throw ConfigError(origin_ + ":" + std::to_string(v.line) + ": [" + section + "]." + key + " must be " +
                      wanted);
}

std::int64_t Config::get_int(const std::string& section, const std::string& key, std::int64_t fallback) const {
    const Value* v = find(section, key);
    if (!v) return fallback;
    if (v->type != Value::Type::Int) type_error(section, key, *v, "an integer");
    return v->i;
}

double Config::get_float(const std::string& section, const std::string& key, double fallback) const {
    const Value* v = find(section, key);
    if (!v) return fallback;
    if (v->type == Value::Type::Float) return v->f;
    if (v->type == Value::Type::Int) return static_cast<double>(v->i);
    type_error(section, key, *v, "a number");
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const Value* v = find(section, key);
    if (!v) return fallback;
    if (v->type != Value::Type::Bool) type_error(section, key, *v, "true or false");
    return v->b;
}

std::string Config::get_string(const std::string& section, const std::string& key, std::string fallback) const {
    const Value* v = find(section, key);
    if (!v) return fallback;
    if (v->type != Value::Type::String) type_error(section, key, *v, "a quoted string");
    return v->s;
}

void Config::require_known(const std::vector<std::string>& known_keys) const {
    for (const auto& [section, keys] : sections_) {
        for (const auto& [key, value] : keys) {
            const std::string path = section + "." + key;
            if (std::find(known_keys.begin(), known_keys.end(), path) == known_keys.end())
                throw ConfigError(origin_ + ":" + std::to_string(value.line) + ": unknown key [" + section +
                                  "]." + key);
        }
    }
}

std::string Config::canonical() const {
    std::ostringstream out;
    for (const auto& [section, keys] : sections_) {
        out << '[' << section << "]\n";
        for (const auto& [key, v] : keys) {
            out << key << " = ";
            switch (v.type) {
            case Value::Type::Int: out << v.i; break;
            case Value::Type::Float: out << format_double(v.f); break;
            case Value::Type::Bool: out << (v.b ? "true" : "false"); break;
            case Value::Type::String: out << '"' << v.s << '"'; break;
            }
            out << '\n';
        }
    }
    return out.str();
}

std::string config_hash(const Config& cfg) {
    const std::string text = cfg.canonical();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace nilm
