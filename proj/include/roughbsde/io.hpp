#pragma once

// Serialization: fields to a flat binary layout (bit-exact) or CSV with
// round-trip-exact decimal formatting, time fields to a manifest directory,
// expansions and path functionals to CSV, reports to JSON.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "roughbsde/haar.hpp"
#include "roughbsde/occupation.hpp"
#include "roughbsde/time_field.hpp"

namespace roughbsde {

using ordered_json = nlohmann::ordered_json;

inline constexpr uint64_t kFieldMagic = 0x52424644464c4431ULL;  // "RBFDFLD1"

inline void write_field_binary(const Field& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    uint64_t magic = kFieldMagic;
    int32_t d = f.grid.d, n = f.grid.n, ch = f.channels;
    double l = f.grid.half_width;
    os.write(reinterpret_cast<const char*>(&magic), 8);
    os.write(reinterpret_cast<const char*>(&d), 4);
    os.write(reinterpret_cast<const char*>(&n), 4);
    os.write(reinterpret_cast<const char*>(&l), 8);
    os.write(reinterpret_cast<const char*>(&ch), 4);
    os.write(reinterpret_cast<const char*>(f.data.data()),
             static_cast<std::streamsize>(f.data.size() * sizeof(double)));
}

inline Field read_field_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    uint64_t magic = 0;
    int32_t d = 0, n = 0, ch = 0;
    double l = 0;
    is.read(reinterpret_cast<char*>(&magic), 8);
    if (magic != kFieldMagic) throw std::runtime_error(path + ": not a field file");
    is.read(reinterpret_cast<char*>(&d), 4);
    is.read(reinterpret_cast<char*>(&n), 4);
    is.read(reinterpret_cast<char*>(&l), 8);
    is.read(reinterpret_cast<char*>(&ch), 4);
    Field f(GridSpec(d, n, l), ch);
    is.read(reinterpret_cast<char*>(f.data.data()),
            static_cast<std::streamsize>(f.data.size() * sizeof(double)));
    if (!is) throw std::runtime_error(path + ": truncated field file");
    return f;
}

// %.17g round-trips doubles exactly through strtod
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_field_csv(const Field& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << "# d=" << f.grid.d << " n=" << f.grid.n << " half_width=" << format_double(f.grid.half_width)
       << " channels=" << f.channels << "\n";
    for (long i = 0; i < f.nodes(); ++i) {
        for (int c = 0; c < f.channels; ++c) {
            if (c) os << ",";
            os << format_double(f.at(c, i));
        }
        os << "\n";
    }
}

inline Field read_field_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string header;
    std::getline(is, header);
    int d = 0, n = 0, ch = 0;
    double l = 0;
    if (std::sscanf(header.c_str(), "# d=%d n=%d half_width=%lf channels=%d", &d, &n, &l, &ch) != 4)
        throw std::runtime_error(path + ": bad CSV field header");
    Field f(GridSpec(d, n, l), ch);
    std::string line;
    for (long i = 0; i < f.nodes(); ++i) {
        if (!std::getline(is, line)) throw std::runtime_error(path + ": truncated CSV field");
        const char* p = line.c_str();
        char* end = nullptr;
        for (int c = 0; c < ch; ++c) {
            f.at(c, i) = std::strtod(p, &end);
            p = (*end == ',') ? end + 1 : end;
        }
    }
    return f;
}

// Time field as a directory: manifest.json plus one binary field per node.
inline void write_time_field(const TimeField& u, const std::string& dir) {
    std::filesystem::create_directories(dir);
    ordered_json man;
    man["horizon"] = u.tgrid.horizon;
    man["steps"] = u.tgrid.steps;
    man["channels"] = u.channels();
    std::vector<std::string> files;
    for (int k = 0; k <= u.tgrid.steps; ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "snap_%05d.bin", k);
        write_field_binary(u.at(k), dir + "/" + name);
        files.emplace_back(name);
    }
    man["snapshots"] = files;
    std::ofstream os(dir + "/manifest.json");
    os << man.dump(2) << "\n";
}

inline TimeField read_time_field(const std::string& dir) {
    std::ifstream is(dir + "/manifest.json");
    if (!is) throw std::runtime_error("cannot open " + dir + "/manifest.json");
    ordered_json man = ordered_json::parse(is);
    TimeGrid tg(man["horizon"].get<double>(), man["steps"].get<int>());
    std::vector<std::string> files = man["snapshots"].get<std::vector<std::string>>();
    Field first = read_field_binary(dir + "/" + files.at(0));
    TimeField u(tg, first.grid, first.channels);
    u.at(0) = std::move(first);
    for (int k = 1; k <= tg.steps; ++k) u.at(k) = read_field_binary(dir + "/" + files.at(k));
    return u;
}

inline void write_haar_csv(const HaarExpansion& e, const std::string& path) {
    std::ofstream os(path);
    os << "j,m,value\n";
    for (int j = -1; j <= e.cap; ++j)
        for (int m = -e.cap; m <= e.cap; ++m)
            os << j << "," << m << "," << format_double(e.coeff(j, m)) << "\n";
}

inline void write_functionals_csv(const std::vector<PathFunctional>& fns, const std::string& path) {
    std::ofstream os(path);
    os << "path_id,t";
    if (!fns.empty())
        for (int c = 0; c < fns[0].dim; ++c) os << ",c" << c;
    os << "\n";
    for (size_t i = 0; i < fns.size(); ++i)
        for (int k = 0; k <= fns[i].tgrid.steps; ++k) {
            os << i << "," << format_double(fns[i].tgrid.node(k));
            for (int c = 0; c < fns[i].dim; ++c) os << "," << format_double(fns[i].value(k, c));
            os << "\n";
        }
}

inline void write_levels_csv(const std::vector<std::pair<int, double>>& rows,
                             const std::string& path) {
    std::ofstream os(path);
    os << "j,tail_norm\n";
    for (auto& [j, v] : rows) os << j << "," << format_double(v) << "\n";
}

inline void write_json(const ordered_json& j, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << j.dump(2) << "\n";
}

}  // namespace roughbsde
