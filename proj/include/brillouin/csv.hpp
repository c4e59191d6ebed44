#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "spectrum.hpp"

namespace brillouin {

/// Shortest round-trip decimal form of a double (std::to_chars), so that
/// parse(format(x)) == x exactly and re-serialization is byte-stable.
inline std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

inline double parse_double(const std::string& text) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) throw std::runtime_error("not a number: '" + text + "'");
    return value;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

/// Spectrum CSV: header `frequency_ghz,intensity[,mask]`, one pixel per row,
/// LF line endings. Frequencies are stored in GHz; intensities pass through
/// unscaled.
inline std::string spectrum_to_csv(const Spectrum& s) {
    s.validate();
    std::string out = s.mask.empty() ? "frequency_ghz,intensity\n" : "frequency_ghz,intensity,mask\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += format_double(s.frequencies_hz[i] / 1e9);
        out += ',';
        out += format_double(s.intensities[i]);
        if (!s.mask.empty()) {
            out += ',';
            out += s.mask[i] ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

inline Spectrum spectrum_from_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("spectrum csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line, ',');
    if (header.size() < 2 || header[0] != "frequency_ghz" || header[1] != "intensity")
        throw std::runtime_error("spectrum csv: expected header frequency_ghz,intensity[,mask]");
    const bool has_mask = header.size() >= 3 && header[2] == "mask";
    if (header.size() > (has_mask ? 3u : 2u)) throw std::runtime_error("spectrum csv: unexpected columns");

    Spectrum s;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size()) throw std::runtime_error("spectrum csv: ragged row");
        s.frequencies_hz.push_back(parse_double(cells[0]) * 1e9);
        s.intensities.push_back(parse_double(cells[1]));
        if (has_mask) s.mask.push_back(parse_double(cells[2]) != 0.0 ? 1 : 0);
    }
    s.validate();
    return s;
}

inline Spectrum read_spectrum_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return spectrum_from_csv(in);
}

/// Atomic file write: temp file in the same directory, then rename.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw std::runtime_error("cannot rename " + tmp.string() + " -> " + path);
}

inline void write_spectrum_csv(const std::string& path, const Spectrum& s) {
    write_file_atomic(path, spectrum_to_csv(s));
}

}  // namespace brillouin
