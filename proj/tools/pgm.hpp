#pragma once

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include "uq/error.hpp"
#include "uq/pipeline.hpp"

namespace uq {

// Binary PGM (P5, maxval 255). Intensity is the value's rank within the
// map (smallest value black, largest white, ties share an intensity), so
// the structure stays visible whatever the dynamic range; a constant map
// renders black. The top image row is the largest y. Exact values live in
// the paired CSV.
inline void write_pgm(const std::string& path, const GridMap& map) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot write '" + path + "'");
    }
    const auto n = map.resolution;
    std::vector<double> sorted(map.values);
    std::sort(sorted.begin(), sorted.end());
    const double denom = sorted.size() > 1 ? static_cast<double>(sorted.size() - 1) : 1.0;
    out << "P5\n" << n << " " << n << "\n255\n";
    for (std::size_t iy = n; iy-- > 0;) {
        for (std::size_t ix = 0; ix < n; ++ix) {
            const double v = map.values[iy * n + ix];
            const auto rank = std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
            const double scaled = static_cast<double>(rank) / denom;
            out.put(static_cast<char>(static_cast<unsigned char>(scaled * 255.0 + 0.5)));
        }
    }
}

}  // namespace uq
