#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathgibbs/grid_path.hpp"

namespace pathgibbs {

// Locale-independent float formatting, 17 significant digits (round-trips).
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

// --- CSV path format: header "t,x1,..,xd", one row per grid point -----------

inline void write_path_csv(const GridPath& p, std::ostream& os) {
    os << "t";
    for (int i = 0; i < p.dim(); ++i) os << ",x" << (i + 1);
    os << "\n";
    for (std::size_t k = 0; k < p.points(); ++k) {
        os << format_double(p.time_at(k));
        for (int i = 0; i < p.dim(); ++i) os << "," << format_double(p.at(k, i));
        os << "\n";
    }
}

inline void write_path_csv(const GridPath& p, const std::string& file) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot open " + file);
    write_path_csv(p, os);
}

inline GridPath read_path_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("path csv: empty");
    int dim = 0;
    for (char c : line)
        if (c == ',') ++dim;
    std::vector<double> times;
    std::vector<double> vals;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        times.push_back(std::strtod(cell.c_str(), nullptr));
        for (int i = 0; i < dim; ++i) {
            std::getline(ls, cell, ',');
            vals.push_back(std::strtod(cell.c_str(), nullptr));
        }
    }
    if (times.size() < 2) throw std::runtime_error("path csv: too few rows");
    std::size_t n = times.size() - 1;
    int level = 0;
    while ((static_cast<std::size_t>(1) << level) < n) ++level;
    if ((static_cast<std::size_t>(1) << level) != n)
        throw std::runtime_error("path csv: point count is not 2^L + 1");
    GridPath p(times.front(), times.back(), level, dim);
    for (std::size_t k = 0; k <= n; ++k)
        for (int i = 0; i < dim; ++i)
            p.at(k, i) = vals[k * dim + i];
    return p;
}

// --- Binary block: JSON header line, then little-endian float64 payload -----
//
// Header records dim/level/interval and the payload count. Multiple blocks may
// be concatenated in one file (ensemble streaming).

inline void write_path_binary(const GridPath& p, std::ostream& os) {
    nlohmann::json h;
    h["dim"] = p.dim();
    h["level"] = p.level();
    h["interval"] = {p.t0(), p.t1()};
    h["count"] = p.values().size();
    std::string hs = h.dump();
    os << hs << "\n";
    static_assert(sizeof(double) == 8);
    os.write(reinterpret_cast<const char*>(p.values().data()),
             static_cast<std::streamsize>(p.values().size() * sizeof(double)));
}

inline GridPath read_path_binary(std::istream& is) {
    std::string hs;
    if (!std::getline(is, hs)) throw std::runtime_error("binary block: missing header");
    nlohmann::json h = nlohmann::json::parse(hs);
    GridPath p(h["interval"][0].get<double>(), h["interval"][1].get<double>(),
               h["level"].get<int>(), h["dim"].get<int>());
    std::size_t count = h["count"].get<std::size_t>();
    if (count != p.values().size()) throw std::runtime_error("binary block: count mismatch");
    is.read(reinterpret_cast<char*>(p.values().data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) throw std::runtime_error("binary block: truncated payload");
    return p;
}

} // namespace pathgibbs
