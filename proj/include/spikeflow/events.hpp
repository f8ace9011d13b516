#pragma once

// Event data model, synthetic DVS rendering and stream transforms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace spikeflow {

struct Event {
    std::int64_t t = 0;  // microseconds since sequence start
    std::int32_t x = 0;
    std::int32_t y = 0;
    std::int8_t p = 1;   // -1 or +1

    friend bool operator==(const Event&, const Event&) = default;
};

/// Total order used everywhere a stream is (re)sorted: (t, y, x, p).
inline bool event_order(const Event& a, const Event& b) {
    return std::tie(a.t, a.y, a.x, a.p) < std::tie(b.t, b.y, b.x, b.p);
}

struct EventStream {
    int width = 0;
    int height = 0;
    std::int64_t duration = 0;  // microseconds
    std::vector<Event> events;

    friend bool operator==(const EventStream&, const EventStream&) = default;

    void sort() { std::stable_sort(events.begin(), events.end(), event_order); }
};

class EventError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws EventError if any event violates the stream invariants.
inline void validate(const EventStream& s) {
    if (s.width <= 0 || s.height <= 0)
        throw EventError("stream resolution must be positive");
    for (std::size_t i = 0; i < s.events.size(); ++i) {
        const Event& e = s.events[i];
        if (e.p != 1 && e.p != -1)
            throw EventError("event " + std::to_string(i) + ": polarity must be -1 or +1");
        if (e.x < 0 || e.y < 0 || e.x >= s.width || e.y >= s.height)
            throw EventError("event " + std::to_string(i) + ": coordinates outside " +
                             std::to_string(s.width) + "x" + std::to_string(s.height));
        if (e.t < 0) throw EventError("event " + std::to_string(i) + ": negative timestamp");
        if (i > 0 && e.t < s.events[i - 1].t)
            throw EventError("event " + std::to_string(i) + ": timestamps not monotone");
    }
}

struct CameraModel {
    double contrast = 0.15;       // log-intensity threshold C
    double frame_rate_hz = 1000;  // rendering rate
    double focal_px = 100;        // pinhole focal length in pixels
};

/// Camera ego-motion relative to a fronto-parallel textured plane.
struct PlanarMotion {
    double U = 0, V = 0, W = 0;  // camera-frame velocities, length/s
    double Z0 = 1;               // distance to the plane along the optical axis
};

struct FlowObservables {
    double wx = 0, wy = 0, D = 0;  // ventral flow (1/s) and divergence (1/s)
};

inline FlowObservables flow_observables(const PlanarMotion& m) {
    if (!(m.Z0 > 0)) throw std::invalid_argument("Z0 must be positive");
    return {-m.U / m.Z0, -m.V / m.Z0, 2.0 * m.W / m.Z0};
}

/// Motion that produces the requested ventral flow at unit distance.
inline PlanarMotion motion_from_flow(double wx, double wy, double D = 0.0) {
    return PlanarMotion{-wx, -wy, D / 2.0, 1.0};
}

enum class PatternKind { Checkerboard, Bar, Noise };
enum class Orientation { Vertical, Horizontal };

/// Texture painted on the plane. Coordinates are image pixels at Z0, origin at
/// the image center at t = 0.
struct Pattern {
    PatternKind kind = PatternKind::Checkerboard;
    double size = 8;  // checkerboard square side, bar width, or noise lattice spacing
    Orientation orientation = Orientation::Vertical;  // bars only
    double dark = 0.2;
    double bright = 1.0;
    std::uint64_t seed = 0;  // noise only
};

namespace detail {

// Integral of the +-1 square wave of half-period p (positive on [0, p)).
inline double square_wave_integral(double x, double p) {
    double u = std::fmod(x, 2 * p);
    if (u < 0) u += 2 * p;
    return u < p ? u : 2 * p - u;
}

inline double square_wave_mean(double a, double b, double p) {
    if (b - a <= 0) return 1.0;
    return (square_wave_integral(b, p) - square_wave_integral(a, p)) / (b - a);
}

// Fraction of [a, b] covered by [lo, hi].
inline double coverage(double a, double b, double lo, double hi) {
    double overlap = std::max(0.0, std::min(b, hi) - std::max(a, lo));
    return overlap / (b - a);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Smooth value noise in [0, 1]: random lattice values, smoothstep-blended.
inline double value_noise(double x, double y, double spacing, std::uint64_t seed) {
    const double gx = x / spacing, gy = y / spacing;
    const double fx = std::floor(gx), fy = std::floor(gy);
    const auto ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy);
    auto lattice = [&](std::int64_t a, std::int64_t b) {
        std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(a) * 0x632be59bd9b4e019ULL ^
                                                       static_cast<std::uint64_t>(b)));
        return static_cast<double>(h >> 11) * 0x1.0p-53;
    };
    auto smooth = [](double t) { return t * t * (3 - 2 * t); };
    const double tx = smooth(gx - fx), ty = smooth(gy - fy);
    const double top = lattice(ix, iy) * (1 - tx) + lattice(ix + 1, iy) * tx;
    const double bottom = lattice(ix, iy + 1) * (1 - tx) + lattice(ix + 1, iy + 1) * tx;
    return top * (1 - ty) + bottom * ty;
}

}  // namespace detail

/// Area-averaged intensity of a texture over an axis-aligned texture-space box.
inline double box_intensity(const Pattern& pat, double x0, double x1, double y0, double y1) {
    double bright_fraction = 0;
    switch (pat.kind) {
        case PatternKind::Checkerboard: {
            double mx = detail::square_wave_mean(x0, x1, pat.size);
            double my = detail::square_wave_mean(y0, y1, pat.size);
            bright_fraction = 0.5 * (1.0 - mx * my);
            break;
        }
        case PatternKind::Bar: {
            double h = pat.size / 2;
            double dark_fraction = pat.orientation == Orientation::Vertical
                                       ? detail::coverage(x0, x1, -h, h)
                                       : detail::coverage(y0, y1, -h, h);
            bright_fraction = 1.0 - dark_fraction;
            break;
        }
        case PatternKind::Noise: {
            // two octaves, box-averaged on a 4x4 sample grid
            double acc = 0;
            for (int j = 0; j < 4; ++j)
                for (int i = 0; i < 4; ++i) {
                    const double x = x0 + (x1 - x0) * (i + 0.5) / 4, y = y0 + (y1 - y0) * (j + 0.5) / 4;
                    acc += 0.65 * detail::value_noise(x, y, pat.size, pat.seed) +
                           0.35 * detail::value_noise(x, y, pat.size / 2, pat.seed + 1);
                }
            bright_fraction = acc / 16;
            break;
        }
    }
    return pat.dark + (pat.bright - pat.dark) * bright_fraction;
}

/// Renderer for a texture seen by a camera undergoing planar motion.
/// Callable as (x, y, t_seconds) -> intensity of pixel (x, y).
class PlanarScene {
public:
    PlanarScene(Pattern pattern, PlanarMotion motion, CameraModel camera, int width, int height)
        : pattern_(pattern), flow_(flow_observables(motion)), camera_(camera),
          cx_(width / 2.0), cy_(height / 2.0) {}

    double operator()(int x, int y, double t) const {
        double scale = 1.0 - 0.5 * flow_.D * t;
        if (!(scale > 0)) throw std::domain_error("camera reached the textured plane");
        double sx = camera_.focal_px * flow_.wx * t;
        double sy = camera_.focal_px * flow_.wy * t;
        double x0 = (x - cx_) * scale - sx, x1 = (x + 1 - cx_) * scale - sx;
        double y0 = (y - cy_) * scale - sy, y1 = (y + 1 - cy_) * scale - sy;
        return box_intensity(pattern_, x0, x1, y0, y1);
    }

private:
    Pattern pattern_;
    FlowObservables flow_;
    CameraModel camera_;
    double cx_, cy_;
};

/// Emit DVS events for an arbitrary intensity renderer `intensity(x, y, t_s)`.
///
/// Frames are rendered at camera.frame_rate_hz; log-intensity is linearly
/// interpolated between frames. Each pixel keeps a reference level that moves by
/// exactly C at every emitted event, so one event is produced per crossing of a
/// multiple of C away from the level at the previous event.
template <typename Renderer>
EventStream render_events(Renderer&& intensity, const CameraModel& camera, std::int64_t duration_us,
                          int width, int height) {
    if (duration_us <= 0) throw std::invalid_argument("duration must be positive");
    if (width <= 0 || height <= 0) throw std::invalid_argument("resolution must be positive");
    if (!(camera.contrast > 0)) throw std::invalid_argument("contrast threshold must be positive");
    if (!(camera.frame_rate_hz > 0)) throw std::invalid_argument("frame rate must be positive");

    // Guards exact threshold hits (e.g. a doubling with C = ln 2) against rounding.
    constexpr double kEps = 1e-9;
    const double C = camera.contrast;
    const double frame_s = 1.0 / camera.frame_rate_hz;
    const auto frames = static_cast<std::int64_t>(
        std::ceil(static_cast<double>(duration_us) * 1e-6 * camera.frame_rate_hz - 1e-12));

    const std::size_t npix = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<double> ref(npix), prev(npix);
    auto log_at = [&](int x, int y, double t) {
        double v = intensity(x, y, t);
        if (!(v > 0)) throw std::domain_error("intensity must be positive everywhere");
        return std::log(v);
    };
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) ref[y * width + x] = prev[y * width + x] = log_at(x, y, 0.0);

    EventStream out{width, height, duration_us, {}};
    for (std::int64_t k = 1; k <= frames; ++k) {
        const double t0 = static_cast<double>(k - 1) * frame_s;
        const double t1 = static_cast<double>(k) * frame_s;
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * width + x;
                const double l0 = prev[i];
                const double l1 = log_at(x, y, t1);
                prev[i] = l1;
                if (l1 == l0) continue;
                const std::int8_t pol = l1 > l0 ? 1 : -1;
                while (pol * (l1 - ref[i]) >= C - kEps) {
                    ref[i] += pol * C;
                    double frac = std::clamp((ref[i] - l0) / (l1 - l0), 0.0, 1.0);
                    auto t_us = static_cast<std::int64_t>(std::floor((t0 + frac * frame_s) * 1e6 + 1e-6));
                    if (t_us >= duration_us) continue;
                    out.events.push_back({t_us, x, y, pol});
                }
            }
        }
    }
    out.sort();
    return out;
}

inline EventStream generate_events(const Pattern& pattern, const PlanarMotion& motion,
                                   const CameraModel& camera, std::int64_t duration_us, int width,
                                   int height) {
    return render_events(PlanarScene(pattern, motion, camera, width, height), camera, duration_us,
                         width, height);
}

struct Flips {
    bool horizontal = false;
    bool vertical = false;
    bool polarity = false;
};

/// Draws the three independent fair coin flips for a seed, in the order
/// horizontal, vertical, polarity.
inline Flips draw_flips(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    Flips f;
    f.horizontal = coin(rng);
    f.vertical = coin(rng);
    f.polarity = coin(rng);
    return f;
}

inline EventStream augment(EventStream s, const Flips& f) {
    for (Event& e : s.events) {
        if (f.horizontal) e.x = s.width - 1 - e.x;
        if (f.vertical) e.y = s.height - 1 - e.y;
        if (f.polarity) e.p = static_cast<std::int8_t>(-e.p);
    }
    s.sort();
    return s;
}

inline EventStream augment(EventStream s, std::uint64_t seed) { return augment(std::move(s), draw_flips(seed)); }

inline EventStream downsample_half(EventStream s) {
    s.width = (s.width + 1) / 2;
    s.height = (s.height + 1) / 2;
    for (Event& e : s.events) {
        e.x /= 2;
        e.y /= 2;
    }
    s.sort();
    return s;
}

}  // namespace spikeflow
