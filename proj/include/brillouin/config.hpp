#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "csv.hpp"

namespace brillouin {

/// Flat `key = value` configuration: one pair per line, `#` starts a comment,
/// later assignments win. Reads from files, merges command-line overrides,
/// and validates against a declared key set so typos fail loudly.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig from_string(const std::string& text) {
        KeyValueConfig cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty()) throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static KeyValueConfig from_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open config " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_string(buf.str());
    }

    /// Overrides of the form key=value, applied after file contents.
    void apply_override(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) throw std::runtime_error("override must look like key=value: " + assignment);
        const std::string key = trim(assignment.substr(0, eq));
        const std::string value = trim(assignment.substr(eq + 1));
        if (key.empty()) throw std::runtime_error("override with empty key: " + assignment);
        values_[key] = value;
    }

    void require_known_keys(const std::set<std::string>& allowed) const {
        for (const auto& [key, value] : values_)
            if (!allowed.count(key)) throw std::runtime_error("unknown config key: " + key);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return parse_double(it->second);
        } catch (const std::exception&) {
            throw std::runtime_error("config key " + key + ": not a number: " + it->second);
        }
    }

    long long get_int(const std::string& key, long long fallback) const {
        const double v = get_double(key, static_cast<double>(fallback));
        return static_cast<long long>(v);
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& v = it->second;
        if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "off" || v == "no") return false;
        throw std::runtime_error("config key " + key + ": not a boolean: " + v);
    }

    std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<double> out;
        for (const std::string& cell : split(it->second, ','))
            if (!trim(cell).empty()) out.push_back(parse_double(cell));
        return out;
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    /// Deterministic serialization (sorted keys) for provenance sidecars.
    std::string to_string() const {
        std::string out;
        for (const auto& [key, value] : values_) {
            out += key;
            out += " = ";
            out += value;
            out += '\n';
        }
        return out;
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
        while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
        return s.substr(b, e - b);
    }

    std::map<std::string, std::string> values_;
};

}  // namespace brillouin
