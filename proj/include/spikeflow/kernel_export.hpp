#pragma once

// Kernel images and grids. Each (kernel, delay slot) becomes one file whose
// rows stack the input channels vertically: c * rh rows of rw values.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "spikeflow/fileutil.hpp"
#include "spikeflow/layers.hpp"

namespace spikeflow {

enum class KernelFormat { Csv, Pgm };

/// Weights as displayed: W_exc + beta * W_inh for kernels with inhibition.
inline std::vector<double> display_weights(const Kernel& k, double beta) {
    std::vector<double> w = k.exc;
    if (k.has_inh())
        for (std::size_t i = 0; i < w.size(); ++i) w[i] += beta * k.inh[i];
    return w;
}

inline std::vector<double> slot_grid(const Kernel& k, const std::vector<double>& w, int map, int d) {
    std::vector<double> g;
    g.reserve(std::size_t(k.c) * k.rh * k.rw);
    for (int c = 0; c < k.c; ++c)
        for (int y = 0; y < k.rh; ++y)
            for (int x = 0; x < k.rw; ++x) g.push_back(w[k.index(map, c, d, y, x)]);
    return g;
}

inline void write_grid_csv(std::ostream& out, const std::vector<double>& g, int cols) {
    out.precision(17);
    for (std::size_t i = 0; i < g.size(); ++i) out << g[i] << ((i + 1) % std::size_t(cols) == 0 ? '\n' : ',');
}

/// 8-bit binary PGM; brightness maps [lo, hi] linearly onto [0, 255].
inline void write_grid_pgm(std::ostream& out, const std::vector<double>& g, int cols, double lo, double hi) {
    const int rows = static_cast<int>(g.size()) / cols;
    out << "P5\n" << cols << ' ' << rows << "\n255\n";
    const double span = hi > lo ? hi - lo : 1.0;
    for (double v : g) out.put(static_cast<char>(std::lround(std::clamp((v - lo) / span, 0.0, 1.0) * 255.0)));
}

/// Writes every kernel of a layer into `dir`; returns the written paths.
inline std::vector<std::filesystem::path> export_kernels(const Kernel& k, double beta, const std::string& layer,
                                                         const std::filesystem::path& dir, KernelFormat fmt) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (!std::filesystem::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
    const std::vector<double> w = display_weights(k, beta);
    const auto [lo_it, hi_it] = std::minmax_element(w.begin(), w.end());
    const double lo = std::min(0.0, *lo_it), hi = *hi_it;
    std::vector<std::filesystem::path> paths;
    for (int map = 0; map < k.f; ++map)
        for (int d = 0; d < k.m; ++d) {
            std::string name = layer + "_k" + std::to_string(map);
            if (k.m > 1) name += "_d" + std::to_string(d);
            name += fmt == KernelFormat::Csv ? ".csv" : ".pgm";
            const auto path = dir / name;
            const auto g = slot_grid(k, w, map, d);
            atomic_write(path, [&](std::ostream& out) {
                if (fmt == KernelFormat::Csv) write_grid_csv(out, g, k.rw);
                else write_grid_pgm(out, g, k.rw, lo, hi);
            });
            paths.push_back(path);
        }
    return paths;
}

}  // namespace spikeflow
