#pragma once

// Run configuration files: flat `key = value` lines grouped under
// `[section]` headers. Values are numbers, bare words, "quoted strings" or
// single-line arrays `[a, b, c]`. `#` starts a comment outside quotes.
//
// Every lookup is recorded with its resolved value (defaults included) so a
// run can echo its full configuration, and keys nobody asked for are
// rejected by reject_unknown().

#include <cerrno>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "qtrap/errors.hpp"

namespace qtrap {

/// Configuration problem tied to one key; the message names the key.
class ConfigError : public ValidationError {
public:
    ConfigError(const std::string& key, const std::string& problem) : ValidationError("config: " + key + ": " + problem) {}
};

class ConfigIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string strip_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
    }
    return std::string(line);
}

inline std::string unquote(std::string_view s) {
    s = trim(s);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return std::string(s.substr(1, s.size() - 2));
    return std::string(s);
}

}  // namespace detail

struct ConfigValue {
    std::string scalar;
    std::vector<std::string> items;
    bool is_array = false;
    int line = 0;
};

class Config {
public:
    static Config parse(std::string_view text, std::filesystem::path base_dir = {}) {
        Config cfg;
        cfg.base_dir_ = std::move(base_dir);
        std::string section;
        std::istringstream in{std::string(text)};
        std::string raw;
        int line_no = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            const std::string stripped = detail::strip_comment(raw);
            const std::string_view line = detail::trim(stripped);
            if (line.empty()) continue;
            const std::string where = "line " + std::to_string(line_no);
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError(where, "unterminated section header");
                section = std::string(detail::trim(line.substr(1, line.size() - 2)));
                if (section.empty()) throw ConfigError(where, "empty section name");
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ConfigError(where, "expected `key = value`");
            const std::string key_name(detail::trim(line.substr(0, eq)));
            if (key_name.empty()) throw ConfigError(where, "missing key");
            const std::string key = section.empty() ? key_name : section + "." + key_name;
            if (cfg.values_.count(key)) throw ConfigError(key, "duplicate key (" + where + ")");

            ConfigValue v;
            v.line = line_no;
            const std::string_view rhs = detail::trim(line.substr(eq + 1));
            if (rhs.empty()) throw ConfigError(key, "missing value");
            if (rhs.front() == '[') {
                if (rhs.back() != ']') throw ConfigError(key, "unterminated array");
                v.is_array = true;
                const std::string_view body = detail::trim(rhs.substr(1, rhs.size() - 2));
                std::size_t start = 0;
                while (!body.empty() && start <= body.size()) {
                    const auto comma = body.find(',', start);
                    const std::string_view item =
                        detail::trim(body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
                    if (item.empty()) throw ConfigError(key, "empty array element");
                    v.items.push_back(detail::unquote(item));
                    if (comma == std::string_view::npos) break;
                    start = comma + 1;
                }
            } else {
                v.scalar = detail::unquote(rhs);
            }
            cfg.values_.emplace(key, std::move(v));
        }
        return cfg;
    }

    static Config load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigIoError("cannot read config file " + path.string());
        std::stringstream buf;
        buf << in.rdbuf();
        return parse(buf.str(), path.parent_path());
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    bool has_section(const std::string& section) const {
        const std::string prefix = section + ".";
        for (const auto& [k, v] : values_)
            if (k.rfind(prefix, 0) == 0) return true;
        return false;
    }

    std::string string(const std::string& key, std::optional<std::string> fallback = {}) const {
        const ConfigValue* v = scalar_value(key, fallback.has_value());
        const std::string out = v ? v->scalar : *fallback;
        resolved_[key] = out;
        return out;
    }

    std::string choice(const std::string& key, const std::set<std::string>& allowed,
                       std::optional<std::string> fallback = {}) const {
        const std::string out = string(key, std::move(fallback));
        if (!allowed.count(out)) {
            std::string options;
            for (const auto& a : allowed) options += (options.empty() ? "" : "|") + a;
            throw ConfigError(key, "expected one of " + options + ", got '" + out + "'");
        }
        return out;
    }

    double number(const std::string& key, std::optional<double> fallback = {}) const {
        const ConfigValue* v = scalar_value(key, fallback.has_value());
        const double out = v ? to_double(key, v->scalar) : *fallback;
        resolved_[key] = out;
        return out;
    }

    long long integer(const std::string& key, std::optional<long long> fallback = {}) const {
        const ConfigValue* v = scalar_value(key, fallback.has_value());
        const long long out = v ? to_integer(key, v->scalar) : *fallback;
        resolved_[key] = out;
        return out;
    }

    std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = {}) const {
        std::vector<double> out;
        if (const ConfigValue* v = array_value(key, fallback.has_value())) {
            for (const auto& item : v->items) out.push_back(to_double(key, item));
        } else {
            out = *fallback;
        }
        resolved_[key] = out;
        return out;
    }

    std::vector<long long> integers(const std::string& key, std::optional<std::vector<long long>> fallback = {}) const {
        std::vector<long long> out;
        if (const ConfigValue* v = array_value(key, fallback.has_value())) {
            for (const auto& item : v->items) out.push_back(to_integer(key, item));
        } else {
            out = *fallback;
        }
        resolved_[key] = out;
        return out;
    }

    /// Path relative to the config file's directory unless absolute.
    std::filesystem::path path(const std::string& key) const {
        const std::filesystem::path p = string(key);
        return p.is_absolute() || base_dir_.empty() ? p : base_dir_ / p;
    }

    /// Throws on the first key (in sorted order) that no lookup consumed.
    void reject_unknown() const {
        for (const auto& [k, v] : values_)
            if (!resolved_.contains(k)) throw ConfigError(k, "unknown key (line " + std::to_string(v.line) + ")");
    }

    /// Every key looked up so far with its resolved value, sorted by key.
    nlohmann::ordered_json resolved() const {
        nlohmann::ordered_json out = nlohmann::ordered_json::object();
        for (const auto& [k, v] : resolved_.items()) out[k] = v;
        return out;
    }

private:
    const ConfigValue* find(const std::string& key, bool optional) const {
        const auto it = values_.find(key);
        if (it == values_.end()) {
            if (!optional) throw ConfigError(key, "required key is missing");
            return nullptr;
        }
        return &it->second;
    }

    const ConfigValue* scalar_value(const std::string& key, bool optional) const {
        const ConfigValue* v = find(key, optional);
        if (v && v->is_array) throw ConfigError(key, "expected a scalar, got an array");
        return v;
    }

    const ConfigValue* array_value(const std::string& key, bool optional) const {
        const ConfigValue* v = find(key, optional);
        if (v && !v->is_array) throw ConfigError(key, "expected an array `[...]`");
        return v;
    }

    static double to_double(const std::string& key, const std::string& s) {
        double out = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(out))
            throw ConfigError(key, "expected a number, got '" + s + "'");
        return out;
    }

    static long long to_integer(const std::string& key, const std::string& s) {
        long long out = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec != std::errc{} || ptr != s.data() + s.size()) throw ConfigError(key, "expected an integer, got '" + s + "'");
        return out;
    }

    std::map<std::string, ConfigValue> values_;
    std::filesystem::path base_dir_;
    mutable nlohmann::json resolved_ = nlohmann::json::object();  // std::map-backed, so sorted
};

}  // namespace qtrap
