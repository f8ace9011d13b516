#pragma once

// Optical flow from trained multisynaptic kernels by histogram matching, and
// hue/brightness color coding of flow vectors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spikeflow/layers.hpp"

namespace spikeflow {

class FlowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SlotPair {
    int d_min = 0, d_max = 0;  // slot indices
};

struct KernelFlow {
    double u = 0, v = 0;              // theta / (tau_max - tau_min), px/ms scale of the fit
    double theta_u = 0, theta_v = 0;  // least-squares slopes of the histogram differences
    double tau_min = 0, tau_max = 0;  // ms
    // Slope rescaled by sum((x - mean)^2) / slot mass: the centroid shift per ms.
    double rate_u = 0, rate_v = 0;
};

/// Total excitatory weight of every delay slot of map k.
inline std::vector<double> slot_totals(const Kernel& k, int map) {
    std::vector<double> t(std::size_t(k.m), 0.0);
    for (int c = 0; c < k.c; ++c)
        for (int d = 0; d < k.m; ++d)
            for (int y = 0; y < k.rh; ++y)
                for (int x = 0; x < k.rw; ++x) t[d] += k.exc[k.index(map, c, d, y, x)];
    return t;
}

/// The two most distant slots whose total weight reaches gamma times the
/// largest slot total.
inline SlotPair select_slots(const std::vector<double>& totals, double gamma) {
    if (!(gamma >= 0 && gamma <= 1)) throw std::invalid_argument("gamma must lie in [0, 1]");
    if (totals.size() < 2) throw FlowError("kernel has fewer than two delay slots");
    const double top = *std::max_element(totals.begin(), totals.end());
    int lo = -1, hi = -1;
    for (int d = 0; d < static_cast<int>(totals.size()); ++d)
        if (totals[d] >= gamma * top) {
            if (lo < 0) lo = d;
            hi = d;
        }
    if (lo < 0 || lo == hi) throw FlowError("fewer than two delay slots pass the gamma threshold");
    return {lo, hi};
}

inline SlotPair select_slots(const Kernel& k, int map, double gamma) { return select_slots(slot_totals(k, map), gamma); }

namespace detail {

// Sums mirror-image pairs together so that reflecting the kernel along the
// summed axis reproduces every histogram bin bit for bit.
inline double symmetric_sum(const std::vector<double>& a) {
    const std::size_t n = a.size();
    double s = 0;
    for (std::size_t i = 0; i < n / 2; ++i) s += a[i] + a[n - 1 - i];
    if (n % 2) s += a[n / 2];
    return s;
}

// Least-squares slope of d against abscissa 0..n-1; pairs opposite bins so a
// reversed input yields exactly the negated slope.
inline double ls_slope(const std::vector<double>& d) {
    const std::size_t n = d.size();
    if (n < 2) return 0.0;
    const double mid = (static_cast<double>(n) - 1.0) / 2.0;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n / 2; ++i) {
        const double c = static_cast<double>(i) - mid;  // negative
        num += c * (d[i] - d[n - 1 - i]);
        den += 2 * c * c;
    }
    return num / den;
}

inline double centered_moment(std::size_t n) {
    const double r = static_cast<double>(n);
    return r * (r * r - 1.0) / 12.0;
}

}  // namespace detail

/// Per-axis weight histograms of slot d (summed over channels and the other axis).
inline void slot_histograms(const Kernel& k, int map, int d, std::vector<double>& hx, std::vector<double>& hy) {
    hx.assign(std::size_t(k.rw), 0.0);
    hy.assign(std::size_t(k.rh), 0.0);
    std::vector<double> line;
    for (int x = 0; x < k.rw; ++x) {
        line.clear();
        for (int y = 0; y < k.rh; ++y) {
            double s = 0;
            for (int c = 0; c < k.c; ++c) s += k.exc[k.index(map, c, d, y, x)];
            line.push_back(s);
        }
        hx[x] = detail::symmetric_sum(line);
    }
    for (int y = 0; y < k.rh; ++y) {
        line.clear();
        for (int x = 0; x < k.rw; ++x) {
            double s = 0;
            for (int c = 0; c < k.c; ++c) s += k.exc[k.index(map, c, d, y, x)];
            line.push_back(s);
        }
        hy[y] = detail::symmetric_sum(line);
    }
}

inline KernelFlow kernel_flow(const Kernel& k, int map, const std::vector<double>& tau_ms, double gamma) {
    if (static_cast<int>(tau_ms.size()) != k.m) throw std::invalid_argument("delay list does not match kernel");
    const SlotPair p = select_slots(k, map, gamma);
    std::vector<double> hx0, hy0, hx1, hy1;
    slot_histograms(k, map, p.d_min, hx0, hy0);
    slot_histograms(k, map, p.d_max, hx1, hy1);
    std::vector<double> dx(hx0.size()), dy(hy0.size());
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = hx1[i] - hx0[i];
    for (std::size_t i = 0; i < dy.size(); ++i) dy[i] = hy1[i] - hy0[i];

    KernelFlow f;
    f.tau_min = tau_ms[p.d_min];
    f.tau_max = tau_ms[p.d_max];
    const double span = f.tau_max - f.tau_min;
    f.theta_u = detail::ls_slope(dx);
    f.theta_v = detail::ls_slope(dy);
    f.u = f.theta_u / span;
    f.v = f.theta_v / span;
    const double mass = 0.5 * (detail::symmetric_sum(hx0) + detail::symmetric_sum(hx1));
    if (mass > 0) {
        f.rate_u = f.u * detail::centered_moment(dx.size()) / mass;
        f.rate_v = f.v * detail::centered_moment(dy.size()) / mass;
    }
    return f;
}

// ---------------------------------------------------------------------------
// Color coding.

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Neutral color for zero flow.
inline constexpr Rgb kNeutral{0, 0, 0};

struct FlowColor {
    double hue = 0;         // degrees in [0, 360), direction atan2(v, u)
    double brightness = 0;  // |flow| / max |flow| over the set
    Rgb rgb;
};

inline Rgb hsv_to_rgb(double h_deg, double s, double v) {
    const double c = v * s;
    const double hp = std::fmod(h_deg, 360.0) / 60.0;
    const double x = c * (1 - std::fabs(std::fmod(hp, 2.0) - 1));
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(hp)) {
        case 0: r = c, g = x; break;
        case 1: r = x, g = c; break;
        case 2: g = c, b = x; break;
        case 3: g = x, b = c; break;
        case 4: r = x, b = c; break;
        default: r = c, b = x; break;
    }
    const double m = v - c;
    auto q = [](double t) { return static_cast<std::uint8_t>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0)); };
    return {q(r + m), q(g + m), q(b + m)};
}

/// Hue from direction, brightness from speed normalized to the largest speed.
inline std::vector<FlowColor> colorize(const std::vector<std::pair<double, double>>& flows) {
    double top = 0;
    for (auto [u, v] : flows) top = std::max(top, std::hypot(u, v));
    std::vector<FlowColor> out;
    out.reserve(flows.size());
    for (auto [u, v] : flows) {
        FlowColor c;
        const double mag = std::hypot(u, v);
        if (top > 0 && mag > 0) {
            c.hue = std::atan2(v, u) * 180.0 / std::numbers::pi;
            if (c.hue < 0) c.hue += 360.0;
            c.brightness = mag / top;
            c.rgb = hsv_to_rgb(c.hue, 1.0, c.brightness);
        } else {
            c.rgb = kNeutral;
        }
        out.push_back(c);
    }
    return out;
}

/// Binary P6 raster.
inline void write_ppm(std::ostream& out, int width, int height, const std::vector<Rgb>& pixels) {
    if (pixels.size() != std::size_t(width) * height) throw std::invalid_argument("pixel count does not match raster");
    out << "P6\n" << width << ' ' << height << "\n255\n";
    for (const Rgb& p : pixels) {
        const char px[3] = {static_cast<char>(p.r), static_cast<char>(p.g), static_cast<char>(p.b)};
        out.write(px, 3);
    }
}

/// One pixel per kernel, laid out row-major on a near-square grid.
inline void write_flow_ppm(std::ostream& out, const std::vector<FlowColor>& colors) {
    const int n = static_cast<int>(colors.size());
    const int cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))));
    const int rows = std::max(1, (n + cols - 1) / cols);
    std::vector<Rgb> px(std::size_t(rows) * cols, kNeutral);
    for (int i = 0; i < n; ++i) px[i] = colors[i].rgb;
    write_ppm(out, cols, rows, px);
}

inline void write_flow_csv(std::ostream& out, const std::vector<KernelFlow>& flows, double input_scale = 1.0) {
    out << "# flow in pixels/ms at the layer input resolution; multiply by " << input_scale
        << " for network input pixels\n";
    out << "kernel,u,v,theta_u,theta_v,tau_min_ms,tau_max_ms\n";
    out.precision(10);
    for (std::size_t k = 0; k < flows.size(); ++k) {
        const KernelFlow& f = flows[k];
        out << k << ',' << f.u << ',' << f.v << ',' << f.theta_u << ',' << f.theta_v << ',' << f.tau_min << ','
            << f.tau_max << '\n';
    }
}

}  // namespace spikeflow
