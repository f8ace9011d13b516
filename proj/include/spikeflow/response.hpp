#pragma once

// Neural response of a trained network as a function of ventral flow, using
// synthetic streams from the planar-scene generator.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "spikeflow/events.hpp"
#include "spikeflow/network.hpp"

namespace spikeflow {

struct ResponseStimulus {
    Pattern pattern;
    CameraModel camera;
    std::int64_t duration_us = 500000;
};

struct ResponseRow {
    double wx = 0, wy = 0;
    std::vector<double> map_rates;    // spikes/ms per map of the probed layer
    std::vector<double> dense_rates;  // spikes/ms per neuron of the last layer, if it is dense
};

struct ResponseTable {
    std::string layer;
    std::vector<ResponseRow> rows;
};

/// Flow points for a square grid over [lo, hi]^2 with n samples per axis;
/// with axes_only, only points with wx == 0 or wy == 0 are kept.
inline std::vector<std::pair<double, double>> flow_grid(double lo, double hi, int n, bool axes_only) {
    if (n < 1) throw std::invalid_argument("grid needs at least one sample per axis");
    std::vector<double> ticks;
    for (int i = 0; i < n; ++i) ticks.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    std::vector<std::pair<double, double>> pts;
    for (double wy : ticks)
        for (double wx : ticks)
            if (!axes_only || wx == 0 || wy == 0) pts.emplace_back(wx, wy);
    return pts;
}

/// Rate of every map of `layer` (spikes/ms summed over its neurons) and of
/// every neuron of a trailing dense layer, per grid point.
inline ResponseTable response_curve(Network& net, std::size_t layer,
                                    const std::vector<std::pair<double, double>>& grid,
                                    const ResponseStimulus& stim) {
    const NetworkConfig& cfg = net.config();
    const int scale = cfg.downsample ? 2 : 1;
    const std::size_t last = net.size() - 1;
    const bool dense = net.layer(last).config().kind == LayerKind::Dense;
    ResponseTable table;
    table.layer = net.layer(layer).config().name;
    for (auto [wx, wy] : grid) {
        EventStream s = generate_events(stim.pattern, motion_from_flow(wx, wy), stim.camera, stim.duration_us,
                                        cfg.width * scale, cfg.height * scale);
        InferenceRecord rec = net.infer(s);
        const double ms = static_cast<double>(stim.duration_us) / 1000.0;
        ResponseRow row{wx, wy, {}, {}};
        const LayerRecord& lr = rec.layers[layer];
        const std::size_t plane = std::size_t(lr.shape.h) * lr.shape.w;
        row.map_rates.assign(std::size_t(lr.shape.c), 0.0);
        for (std::size_t n = 0; n < lr.counts.size(); ++n) row.map_rates[n / plane] += static_cast<double>(lr.counts[n]);
        for (double& r : row.map_rates) r /= ms;
        if (dense && last != layer)
            for (std::uint64_t c : rec.layers[last].counts) row.dense_rates.push_back(static_cast<double>(c) / ms);
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline void write_response_csv(std::ostream& out, const ResponseTable& t) {
    out << "wx,wy";
    if (!t.rows.empty()) {
        for (std::size_t k = 0; k < t.rows[0].map_rates.size(); ++k) out << ',' << t.layer << "_k" << k;
        for (std::size_t k = 0; k < t.rows[0].dense_rates.size(); ++k) out << ",dense_n" << k;
    }
    out << '\n';
    out.precision(10);
    for (const ResponseRow& r : t.rows) {
        out << r.wx << ',' << r.wy;
        for (double v : r.map_rates) out << ',' << v;
        for (double v : r.dense_rates) out << ',' << v;
        out << '\n';
    }
}

}  // namespace spikeflow
