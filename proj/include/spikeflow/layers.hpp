#pragma once

// Layer types of the motion-perception hierarchy and the clocked convolutional
// engine shared by all of them. Every non-input layer is treated as a (possibly
// multisynaptic) convolution: Merge is a 1x1 all-ones kernel, Pooling a
// non-overlapping block kernel with identity channel mapping, and Dense a
// kernel covering the whole input plane with a 1x1 output grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "spikeflow/neuron.hpp"
#include "spikeflow/plasticity.hpp"

namespace spikeflow {

enum class LayerKind { Input, SSConv, Merge, MSConv, Pooling, Dense };

inline const char* kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Input: return "input";
        case LayerKind::SSConv: return "ssconv";
        case LayerKind::Merge: return "merge";
        case LayerKind::MSConv: return "msconv";
        case LayerKind::Pooling: return "pooling";
        case LayerKind::Dense: return "dense";
    }
    return "?";
}

inline LayerKind parse_kind(const std::string& s) {
    for (LayerKind k : {LayerKind::Input, LayerKind::SSConv, LayerKind::Merge, LayerKind::MSConv,
                        LayerKind::Pooling, LayerKind::Dense})
        if (s == kind_name(k)) return k;
    throw std::invalid_argument("unknown layer kind '" + s + "'");
}

struct LayerConfig {
    std::string name;
    LayerKind kind = LayerKind::SSConv;
    int r = 1;  // receptive field side
    int s = 1;  // stride
    int f = 1;  // maps
    int m = 1;  // synapses per connection
    double tau_min = 1, tau_max = 1;  // ms
    double beta = 0;
    NeuronParams neuron;
    bool plastic = false;
};

struct Shape {
    int c = 0, h = 0, w = 0;
    std::size_t size() const { return static_cast<std::size_t>(c) * h * w; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Delay of each synaptic slot in ms, linearly spaced over [tau_min, tau_max].
inline std::vector<double> delay_slots(const LayerConfig& cfg) {
    std::vector<double> tau(static_cast<std::size_t>(cfg.m));
    for (int d = 0; d < cfg.m; ++d)
        tau[d] = cfg.m == 1 ? cfg.tau_min
                            : cfg.tau_min + (cfg.tau_max - cfg.tau_min) * d / static_cast<double>(cfg.m - 1);
    return tau;
}

/// Shared weights, laid out [map][channel][delay][ky][kx].
struct Kernel {
    int f = 0, c = 0, m = 0, rh = 0, rw = 0;
    std::vector<double> exc;
    std::vector<double> inh;  // empty unless the layer has inhibitory synapses

    Kernel() = default;
    Kernel(int maps, int channels, int slots, int h, int w, double w_exc, bool with_inh)
        : f(maps), c(channels), m(slots), rh(h), rw(w), exc(std::size_t(maps) * map_size_of(channels, slots, h, w), w_exc) {
        if (with_inh) inh.assign(exc.size(), 0.0);
    }

    static std::size_t map_size_of(int c, int m, int h, int w) { return std::size_t(c) * m * h * w; }
    std::size_t map_size() const { return map_size_of(c, m, rh, rw); }
    std::size_t index(int k, int ch, int d, int y, int x) const {
        return (((std::size_t(k) * c + ch) * m + d) * rh + y) * rw + x;
    }
    bool has_inh() const { return !inh.empty(); }

    std::span<double> exc_map(int k) { return {exc.data() + k * map_size(), map_size()}; }
    std::span<const double> exc_map(int k) const { return {exc.data() + k * map_size(), map_size()}; }
    std::span<double> inh_map(int k) { return {inh.data() + k * map_size(), map_size()}; }
    std::span<const double> inh_map(int k) const { return {inh.data() + k * map_size(), map_size()}; }

    friend bool operator==(const Kernel&, const Kernel&) = default;
};

// ---------------------------------------------------------------------------
// Single-neuron forcing functions (gather form). Spike and trace vectors use
// the kernel's per-map layout [channel][delay][ky][kx].

/// Excitatory drive minus the largest receptive-field trace sum among the
/// neuron's neighborhood (each entry of `neighborhood_traces` is one neuron's
/// receptive-field trace vector, the neuron itself included).
inline double forcing_ssconv(std::span<const double> w, std::span<const std::uint8_t> spikes,
                             std::span<const std::vector<double>> neighborhood_traces) {
    double drive = 0;
    for (std::size_t j = 0; j < w.size(); ++j)
        if (spikes[j]) drive += w[j];
    double hmax = 0;
    bool first = true;
    for (const auto& xb : neighborhood_traces) {
        double sum = std::accumulate(xb.begin(), xb.end(), 0.0);
        hmax = first ? sum : std::max(hmax, sum);
        first = false;
    }
    return drive - hmax;
}

inline double forcing_msconv(std::span<const double> w_exc, std::span<const double> w_inh, double beta,
                             std::span<const std::uint8_t> spikes,
                             std::span<const std::vector<double>> neighborhood_traces) {
    std::vector<double> eff(w_exc.size());
    for (std::size_t j = 0; j < eff.size(); ++j) eff[j] = w_exc[j] + beta * w_inh[j];
    return forcing_ssconv(eff, spikes, neighborhood_traces);
}

inline double forcing_dense(std::span<const double> w, std::span<const std::uint8_t> spikes,
                            std::span<const double> traces) {
    double acc = 0;
    for (std::size_t j = 0; j < w.size(); ++j) acc += (spikes[j] ? w[j] : 0.0) - traces[j];
    return acc;
}

/// Unit-weight pass-through used by Merge (all channels at one location) and
/// Pooling (one channel over a block): the count of incoming spikes.
inline double forcing_passthrough(std::span<const std::uint8_t> spikes) {
    return static_cast<double>(std::count_if(spikes.begin(), spikes.end(), [](auto s) { return s != 0; }));
}

// ---------------------------------------------------------------------------
// Winner-take-all.

struct WtaPolicy {
    int radius = 0;          // Chebyshev radius in output-grid units
    bool cross_map = true;
};

struct WtaCandidate {
    int map = 0, y = 0, x = 0;
    double v = 0;
};

struct WtaResult {
    std::vector<WtaCandidate> winners;
    std::vector<WtaCandidate> suppressed;  // candidates that lost
};

/// Resolves simultaneous threshold crossings. Candidates are visited by
/// descending potential (ties by ascending map, y, x); each surviving candidate
/// wins and silences everything within the policy neighborhood.
/// `silence(map, y, x)` is invoked for every non-winner neuron inside a
/// winner's neighborhood, candidate or not; `maps`, `h`, `w` bound the grid.
template <typename Silence>
WtaResult wta_resolve(std::vector<WtaCandidate> candidates, const WtaPolicy& policy, int maps, int h, int w,
                      Silence&& silence) {
    std::sort(candidates.begin(), candidates.end(), [](const WtaCandidate& a, const WtaCandidate& b) {
        if (a.v != b.v) return a.v > b.v;
        return std::tie(a.map, a.y, a.x) < std::tie(b.map, b.y, b.x);
    });
    std::vector<std::uint8_t> blocked(std::size_t(maps) * h * w, 0);
    auto at = [&](int k, int y, int x) { return (std::size_t(k) * h + y) * w + x; };
    WtaResult res;
    for (const WtaCandidate& c : candidates) {
        if (blocked[at(c.map, c.y, c.x)]) {
            res.suppressed.push_back(c);
            continue;
        }
        res.winners.push_back(c);
        int k0 = policy.cross_map ? 0 : c.map, k1 = policy.cross_map ? maps - 1 : c.map;
        for (int k = k0; k <= k1; ++k)
            for (int y = std::max(0, c.y - policy.radius); y <= std::min(h - 1, c.y + policy.radius); ++y)
                for (int x = std::max(0, c.x - policy.radius); x <= std::min(w - 1, c.x + policy.radius); ++x) {
                    if (k == c.map && y == c.y && x == c.x) continue;
                    if (!blocked[at(k, y, x)]) {
                        blocked[at(k, y, x)] = 1;
                        silence(k, y, x);
                    }
                }
        blocked[at(c.map, c.y, c.x)] = 1;
    }
    return res;
}

/// Elementwise mean of per-winner kernel updates.
inline std::vector<double> shared_kernel_update(std::span<const std::vector<double>> contributions) {
    if (contributions.empty()) throw std::invalid_argument("shared_kernel_update: no winners");
    std::vector<double> mean(contributions.front().size(), 0.0);
    for (const auto& c : contributions) {
        if (c.size() != mean.size()) throw std::invalid_argument("shared_kernel_update: shape mismatch");
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += c[j];
    }
    for (double& v : mean) v /= static_cast<double>(contributions.size());
    return mean;
}

// ---------------------------------------------------------------------------
// Clocked layer engine.

enum class Homeostasis { None, Self, NeighborhoodMax };

struct LearningState {
    bool enabled = false;
    RuleKind rule = RuleKind::Ours;
    StdpParams stdp;
    std::vector<double> losses;     // L of every postsynaptic update, in order
    std::size_t kernel_updates = 0;
};

class ConvLayer {
public:
    ConvLayer(LayerConfig cfg, Shape in, double dt_ms, double w_init)
        : cfg_(std::move(cfg)), in_(in), dt_(dt_ms) {
        cfg_.neuron.check();
        const bool dense = cfg_.kind == LayerKind::Dense;
        rh_ = dense ? in_.h : cfg_.r;
        rw_ = dense ? in_.w : cfg_.r;
        stride_ = dense ? 1 : cfg_.s;
        if (rh_ > in_.h || rw_ > in_.w)
            throw std::invalid_argument("layer " + cfg_.name + ": receptive field larger than input");
        int f = cfg_.f;
        if (cfg_.kind == LayerKind::Merge) f = 1;
        if (cfg_.kind == LayerKind::Pooling) f = in_.c;
        out_ = Shape{f, (in_.h - rh_) / stride_ + 1, (in_.w - rw_) / stride_ + 1};

        tau_ = delay_slots(cfg_);
        for (double t : tau_) {
            auto steps = static_cast<long>(std::lround(t / dt_));
            if (steps < 1) throw std::invalid_argument("layer " + cfg_.name + ": delays must be at least one step");
            if (!tau_steps_.empty() && steps <= static_cast<long>(tau_steps_.back()))
                throw std::invalid_argument("layer " + cfg_.name + ": delay slots collapse after rounding");
            tau_steps_.push_back(static_cast<std::size_t>(steps));
        }
        const std::size_t max_delay = tau_steps_.back();

        switch (cfg_.kind) {
            case LayerKind::SSConv:
            case LayerKind::MSConv: homeo_ = Homeostasis::NeighborhoodMax; break;
            case LayerKind::Dense: homeo_ = Homeostasis::Self; break;
            default: homeo_ = Homeostasis::None; break;
        }

        const bool with_inh = cfg_.kind == LayerKind::MSConv;
        kernel_ = Kernel(out_.c, in_.c, cfg_.m, rh_, rw_, w_init, with_inh);
        if (cfg_.kind == LayerKind::Merge) std::fill(kernel_.exc.begin(), kernel_.exc.end(), 1.0);
        if (cfg_.kind == LayerKind::Pooling) {
            std::fill(kernel_.exc.begin(), kernel_.exc.end(), 0.0);
            for (int k = 0; k < out_.c; ++k)
                for (int y = 0; y < rh_; ++y)
                    for (int x = 0; x < rw_; ++x) kernel_.exc[kernel_.index(k, k, 0, y, x)] = 1.0;
        }
        refresh_effective();

        delays_ = DelayBuffer(in_.size(), max_delay);
        trace_ring_.assign(max_delay + 2, std::vector<double>(in_.size(), 0.0));
        box_ring_.assign(max_delay + 2, std::vector<double>(out_.h * std::size_t(out_.w), 0.0));
        state_ = NeuronGridState(out_.size(), cfg_.neuron.v_rest);
        forcing_.assign(out_.size(), 0.0);
        homeo_term_.assign(std::size_t(out_.h) * out_.w, 0.0);
        plane_.assign(std::size_t(in_.h) * in_.w, 0.0);
        integral_.assign(std::size_t(in_.h + 1) * (in_.w + 1), 0.0);
    }

    const LayerConfig& config() const { return cfg_; }
    Shape input_shape() const { return in_; }
    Shape output_shape() const { return out_; }
    int stride() const { return stride_; }
    int rf_h() const { return rh_; }
    int rf_w() const { return rw_; }
    const std::vector<double>& delays_ms() const { return tau_; }
    const std::vector<std::size_t>& delay_steps() const { return tau_steps_; }
    Homeostasis homeostasis() const { return homeo_; }

    Kernel& kernel() { return kernel_; }
    const Kernel& kernel() const { return kernel_; }
    void set_kernel(Kernel k) {
        if (k.f != kernel_.f || k.c != kernel_.c || k.m != kernel_.m || k.rh != kernel_.rh || k.rw != kernel_.rw ||
            k.has_inh() != kernel_.has_inh())
            throw std::invalid_argument("layer " + cfg_.name + ": kernel shape mismatch");
        kernel_ = std::move(k);
        refresh_effective();
    }
    double beta() const { return beta_override_ >= 0 ? beta_override_ : cfg_.beta; }
    /// Inference-time inhibition scale; negative restores the configured value.
    void set_beta(double b) {
        beta_override_ = b;
        refresh_effective();
    }

    LearningState& learning() { return learn_; }
    const LearningState& learning() const { return learn_; }

    bool has_wta() const { return cfg_.plastic; }
    WtaPolicy wta_policy() const {
        if (learn_.enabled) return {cfg_.kind == LayerKind::Dense ? 0 : cfg_.r / 2, true};
        return {0, true};
    }

    const NeuronGridState& state() const { return state_; }
    std::span<const std::uint8_t> spikes() const { return state_.s; }
    std::span<const double> forcing() const { return forcing_; }
    std::size_t last_winner_count() const { return last_winners_; }
    const WtaResult& last_wta() const { return last_wta_; }

    /// Receptive-field traces of output neuron (oy, ox) in kernel map layout.
    std::vector<double> rf_traces(int oy, int ox) const {
        std::vector<double> x(kernel_.map_size());
        std::size_t n = 0;
        for (int c = 0; c < in_.c; ++c)
            for (int d = 0; d < cfg_.m; ++d) {
                const auto& frame = trace_ring_[ring_index(tau_steps_[d])];
                for (int ky = 0; ky < rh_; ++ky)
                    for (int kx = 0; kx < rw_; ++kx)
                        x[n++] = frame[in_index(c, oy * stride_ + ky, ox * stride_ + kx)];
            }
        return x;
    }

    /// Receptive-field delayed spikes of output neuron (oy, ox) in kernel map layout.
    std::vector<std::uint8_t> rf_spikes(int oy, int ox) const {
        std::vector<std::uint8_t> s(kernel_.map_size());
        std::size_t n = 0;
        for (int c = 0; c < in_.c; ++c)
            for (int d = 0; d < cfg_.m; ++d) {
                auto frame = delays_.at(tau_steps_[d]);
                for (int ky = 0; ky < rh_; ++ky)
                    for (int kx = 0; kx < rw_; ++kx)
                        s[n++] = frame[in_index(c, oy * stride_ + ky, ox * stride_ + kx)];
            }
        return s;
    }

    void reset() {
        state_.reset(cfg_.neuron.v_rest);
        delays_.clear();
        for (auto& f : trace_ring_) std::fill(f.begin(), f.end(), 0.0);
        for (auto& b : box_ring_) std::fill(b.begin(), b.end(), 0.0);
        std::fill(forcing_.begin(), forcing_.end(), 0.0);
        last_winners_ = 0;
    }

    /// Advance one clock step given the presynaptic spikes emitted at `now`.
    void step(std::span<const std::uint8_t> input, double now) {
        delays_.push(input);
        advance_traces(input);
        compute_forcing();
        integrate(now);
        if (has_wta()) fire_with_wta(now);
        else {
            fire_and_reset(state_, cfg_.neuron, now);
            last_winners_ = 0;
        }
    }

    /// Threads used for membrane integration; output does not depend on it.
    void set_workers(unsigned n) { workers_ = std::max(1u, n); }
    unsigned workers() const { return workers_; }

private:
    void integrate(double now) {
        const std::size_t n = state_.size();
        if (workers_ <= 1 || n < 4096) {
            integrate_membrane(state_, forcing_, cfg_.neuron, dt_, now, 0, n);
            return;
        }
        std::vector<std::jthread> pool;
        const std::size_t chunk = (n + workers_ - 1) / workers_;
        for (unsigned w = 0; w < workers_; ++w) {
            const std::size_t b = std::min(n, w * chunk), e = std::min(n, b + chunk);
            pool.emplace_back([this, now, b, e] { integrate_membrane(state_, forcing_, cfg_.neuron, dt_, now, b, e); });
        }
    }

    std::size_t in_index(int c, int y, int x) const { return (std::size_t(c) * in_.h + y) * in_.w + x; }
    std::size_t out_index(int k, int y, int x) const { return (std::size_t(k) * out_.h + y) * out_.w + x; }
    std::size_t ring_index(std::size_t steps_ago) const {
        return (ring_head_ + trace_ring_.size() - steps_ago) % trace_ring_.size();
    }

    void refresh_effective() {
        eff_ = kernel_.exc;
        if (kernel_.has_inh()) {
            const double b = beta();
            for (std::size_t j = 0; j < eff_.size(); ++j) eff_[j] += b * kernel_.inh[j];
        }
    }

    // Slot d's trace equals the undelayed trace tau_d steps ago (same recursion
    // on a shifted spike train), so only the undelayed trace is advanced.
    void advance_traces(std::span<const std::uint8_t> input) {
        if (homeo_ == Homeostasis::None && !learn_.enabled) return;
        const auto& prev = trace_ring_[ring_head_];
        ring_head_ = (ring_head_ + 1) % trace_ring_.size();
        auto& cur = trace_ring_[ring_head_];
        std::copy(prev.begin(), prev.end(), cur.begin());
        update_traces(cur, input, cfg_.neuron, dt_);

        auto& box = box_ring_[ring_head_];
        if (homeo_ == Homeostasis::None) return;
        // channel-summed plane, integral image, receptive-field box sums
        std::fill(plane_.begin(), plane_.end(), 0.0);
        const std::size_t hw = std::size_t(in_.h) * in_.w;
        for (int c = 0; c < in_.c; ++c)
            for (std::size_t i = 0; i < hw; ++i) plane_[i] += cur[c * hw + i];
        const int W1 = in_.w + 1;
        for (int y = 0; y < in_.h; ++y) {
            double row = 0;
            for (int x = 0; x < in_.w; ++x) {
                row += plane_[std::size_t(y) * in_.w + x];
                integral_[std::size_t(y + 1) * W1 + x + 1] = integral_[std::size_t(y) * W1 + x + 1] + row;
            }
        }
        for (int oy = 0; oy < out_.h; ++oy)
            for (int ox = 0; ox < out_.w; ++ox) {
                int y0 = oy * stride_, x0 = ox * stride_, y1 = y0 + rh_, x1 = x0 + rw_;
                box[std::size_t(oy) * out_.w + ox] = integral_[std::size_t(y1) * W1 + x1] -
                                                     integral_[std::size_t(y0) * W1 + x1] -
                                                     integral_[std::size_t(y1) * W1 + x0] +
                                                     integral_[std::size_t(y0) * W1 + x0];
            }
    }

    // Explicit Euler: the homeostasis term reads the trace as it stood before
    // this step's delayed spikes were added (one extra step back in the ring).
    void compute_forcing() {
        const std::size_t plane = std::size_t(out_.h) * out_.w;
        if (homeo_ == Homeostasis::None) {
            std::fill(homeo_term_.begin(), homeo_term_.end(), 0.0);
        } else {
            std::vector<double>& sum = homeo_sum_;
            sum.assign(plane, 0.0);
            for (std::size_t d = 0; d < tau_steps_.size(); ++d) {
                const auto& box = box_ring_[ring_index(tau_steps_[d] + 1)];
                for (std::size_t i = 0; i < plane; ++i) sum[i] += box[i];
            }
            if (homeo_ == Homeostasis::Self) {
                homeo_term_ = sum;
            } else {
                for (int oy = 0; oy < out_.h; ++oy)
                    for (int ox = 0; ox < out_.w; ++ox) {
                        double m = sum[std::size_t(oy) * out_.w + ox];
                        for (int y = std::max(0, oy - 1); y <= std::min(out_.h - 1, oy + 1); ++y)
                            for (int x = std::max(0, ox - 1); x <= std::min(out_.w - 1, ox + 1); ++x)
                                m = std::max(m, sum[std::size_t(y) * out_.w + x]);
                        homeo_term_[std::size_t(oy) * out_.w + ox] = m;
                    }
            }
        }
        for (int k = 0; k < out_.c; ++k)
            for (std::size_t i = 0; i < plane; ++i) forcing_[k * plane + i] = -homeo_term_[i];

        const std::size_t hw = std::size_t(in_.h) * in_.w;
        const std::size_t msize = kernel_.map_size();
        for (std::size_t d = 0; d < tau_steps_.size(); ++d) {
            for (std::uint32_t idx : delays_.active(tau_steps_[d])) {
                const int c = static_cast<int>(idx / hw);
                const int y = static_cast<int>((idx % hw) / in_.w);
                const int x = static_cast<int>(idx % in_.w);
                const int oy_lo = std::max(0, ceil_div(y - rh_ + 1, stride_));
                const int oy_hi = std::min(out_.h - 1, y / stride_);
                const int ox_lo = std::max(0, ceil_div(x - rw_ + 1, stride_));
                const int ox_hi = std::min(out_.w - 1, x / stride_);
                for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                    const int ky = y - oy * stride_;
                    for (int ox = ox_lo; ox <= ox_hi; ++ox) {
                        const int kx = x - ox * stride_;
                        const std::size_t off = kernel_.index(0, c, static_cast<int>(d), ky, kx);
                        for (int k = 0; k < out_.c; ++k)
                            forcing_[out_index(k, oy, ox)] += eff_[k * msize + off];
                    }
                }
            }
        }
    }

    static int ceil_div(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }

    void fire_with_wta(double now) {
        std::vector<WtaCandidate> cand;
        for (int k = 0; k < out_.c; ++k)
            for (int y = 0; y < out_.h; ++y)
                for (int x = 0; x < out_.w; ++x) {
                    std::size_t i = out_index(k, y, x);
                    state_.s[i] = 0;
                    if (!state_.refractory(i, now) && state_.v[i] >= cfg_.neuron.v_th)
                        cand.push_back({k, y, x, state_.v[i]});
                }
        if (cand.empty()) {
            last_winners_ = 0;
            last_wta_ = {};
            return;
        }
        last_wta_ = wta_resolve(std::move(cand), wta_policy(), out_.c, out_.h, out_.w,
                                [&](int k, int y, int x) { state_.silence(out_index(k, y, x), cfg_.neuron, now); });
        for (const auto& w : last_wta_.winners) {
            std::size_t i = out_index(w.map, w.y, w.x);
            state_.s[i] = 1;
            state_.silence(i, cfg_.neuron, now);
        }
        last_winners_ = last_wta_.winners.size();
        if (learn_.enabled) apply_plasticity(last_wta_.winners);
    }

    void apply_plasticity(const std::vector<WtaCandidate>& winners) {
        const std::size_t msize = kernel_.map_size();
        const double w_init = learn_.stdp.w_init;
        std::vector<std::vector<double>> per_map_xhat;
        for (int k = 0; k < out_.c; ++k) {
            per_map_xhat.clear();
            for (const auto& w : winners)
                if (w.map == k) {
                    auto x = rf_traces(w.y, w.x);
                    normalize_traces(x);
                    per_map_xhat.push_back(std::move(x));
                }
            if (per_map_xhat.empty()) continue;
            auto exc = kernel_.exc_map(k);
            std::vector<double> d_exc(msize, 0.0), d_inh(kernel_.has_inh() ? msize : 0, 0.0);
            for (const auto& xh : per_map_xhat)
                for (std::size_t j = 0; j < msize; ++j) {
                    d_exc[j] += rule_update(learn_.rule, exc[j], xh[j], learn_.stdp, w_init);
                    if (kernel_.has_inh())
                        d_inh[j] += rule_update(learn_.rule, kernel_.inh_map(k)[j], xh[j], learn_.stdp, -w_init);
                }
            const double n = static_cast<double>(per_map_xhat.size());
            for (std::size_t j = 0; j < msize; ++j) exc[j] += d_exc[j] / n;
            if (kernel_.has_inh()) {
                auto inh = kernel_.inh_map(k);
                for (std::size_t j = 0; j < msize; ++j) inh[j] += d_inh[j] / n;
            }
            ++learn_.kernel_updates;

            std::vector<double> w_hat(exc.begin(), exc.end());
            normalize_traces(w_hat);
            for (const auto& xh : per_map_xhat) learn_.losses.push_back(convergence_metric(xh, w_hat));

            const double b = beta();
            for (std::size_t j = 0; j < msize; ++j)
                eff_[k * msize + j] = exc[j] + (kernel_.has_inh() ? b * kernel_.inh_map(k)[j] : 0.0);
        }
    }

    LayerConfig cfg_;
    Shape in_, out_;
    double dt_;
    int rh_ = 1, rw_ = 1, stride_ = 1;
    std::vector<double> tau_;
    std::vector<std::size_t> tau_steps_;
    Homeostasis homeo_ = Homeostasis::None;
    Kernel kernel_;
    std::vector<double> eff_;
    double beta_override_ = -1;

    DelayBuffer delays_;
    std::vector<std::vector<double>> trace_ring_;
    std::vector<std::vector<double>> box_ring_;
    std::size_t ring_head_ = 0;
    NeuronGridState state_;
    std::vector<double> forcing_, homeo_term_, homeo_sum_, plane_, integral_;

    LearningState learn_;
    unsigned workers_ = 1;
    std::size_t last_winners_ = 0;
    WtaResult last_wta_;
};

}  // namespace spikeflow
