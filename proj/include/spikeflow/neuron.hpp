#pragma once

// Adaptive LIF neuron state machinery: presynaptic traces with exact decay,
// forward-Euler membrane integration, threshold firing with refractoriness,
// and the ring buffer realizing synaptic transmission delays.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace spikeflow {

struct NeuronParams {
    double v_rest = 0.0;
    double v_reset = 0.0;
    double v_th = 0.5;
    double lambda_v = 5.0;   // ms
    double refr = 3.0;       // ms
    double lambda_x = 5.0;   // ms
    double alpha = 0.4;      // trace jump per spike

    void check() const {
        if (!(lambda_v > 0)) throw std::invalid_argument("lambda_v must be positive");
        if (!(lambda_x > 0)) throw std::invalid_argument("lambda_x must be positive");
        if (refr < 0) throw std::invalid_argument("refractory period must be non-negative");
        if (!(v_th > v_rest)) throw std::invalid_argument("v_th must exceed v_rest");
        if (alpha < 0) throw std::invalid_argument("alpha must be non-negative");
    }
};

inline double decay_factor(double dt, double lambda) { return std::exp(-dt / lambda); }

/// X <- X * exp(-dt/lambda_x) + alpha * s for every slot; `delayed` holds the
/// binary presynaptic spike per slot, aligned with `traces`.
inline void update_traces(std::span<double> traces, std::span<const std::uint8_t> delayed,
                          const NeuronParams& p, double dt) {
    assert(traces.size() == delayed.size());
    const double k = decay_factor(dt, p.lambda_x);
    for (std::size_t i = 0; i < traces.size(); ++i) {
        traces[i] *= k;
        if (delayed[i]) traces[i] += p.alpha;
    }
}

/// Synapses of a fully connected projection, indexed (post, pre, delay slot).
struct SynapseTensor {
    std::size_t n_post = 0, n_pre = 0, n_delay = 0;
    std::vector<double> W, X;
    std::vector<double> tau;  // ms per delay slot, strictly increasing

    SynapseTensor() = default;
    SynapseTensor(std::size_t post, std::size_t pre, std::vector<double> delays, double w0)
        : n_post(post), n_pre(pre), n_delay(delays.size()), W(post * pre * delays.size(), w0),
          X(post * pre * delays.size(), 0.0), tau(std::move(delays)) {
        for (std::size_t d = 1; d < tau.size(); ++d)
            if (!(tau[d] > tau[d - 1])) throw std::invalid_argument("delays must be strictly increasing");
    }

    std::size_t index(std::size_t i, std::size_t j, std::size_t d) const { return (i * n_pre + j) * n_delay + d; }

    /// Advance every trace one step; delayed(j, d) is s_j(t - tau_d).
    template <typename Delayed>
    void update_traces(Delayed&& delayed, const NeuronParams& p, double dt) {
        const double k = decay_factor(dt, p.lambda_x);
        for (std::size_t i = 0; i < n_post; ++i)
            for (std::size_t j = 0; j < n_pre; ++j)
                for (std::size_t d = 0; d < n_delay; ++d) {
                    double& x = X[index(i, j, d)];
                    x = x * k + (delayed(j, d) ? p.alpha : 0.0);
                }
    }

    /// Forcing of the fully connected adaptive neuron: sum of W*s - X.
    template <typename Delayed>
    double forcing(std::size_t i, Delayed&& delayed) const {
        double acc = 0;
        for (std::size_t j = 0; j < n_pre; ++j)
            for (std::size_t d = 0; d < n_delay; ++d) {
                std::size_t k = index(i, j, d);
                acc += (delayed(j, d) ? W[k] : 0.0) - X[k];
            }
        return acc;
    }
};

struct NeuronGridState {
    std::vector<double> v;
    std::vector<double> refr_until;  // ms; refractory while now < refr_until
    std::vector<std::uint8_t> s;

    NeuronGridState() = default;
    explicit NeuronGridState(std::size_t n, double v0 = 0.0)
        : v(n, v0), refr_until(n, -1e300), s(n, 0) {}

    std::size_t size() const { return v.size(); }
    bool refractory(std::size_t i, double now) const { return now < refr_until[i]; }

    void reset(double v0) {
        std::fill(v.begin(), v.end(), v0);
        std::fill(refr_until.begin(), refr_until.end(), -1e300);
        std::fill(s.begin(), s.end(), std::uint8_t{0});
    }

    /// Reset plus refractory period, used for firing and for WTA suppression.
    void silence(std::size_t i, const NeuronParams& p, double now) {
        v[i] = p.v_reset;
        refr_until[i] = now + p.refr;
    }
};

/// Forward Euler on lambda_v dv/dt = -(v - v_rest) + i for the index range
/// [begin, end). Refractory neurons are left pinned.
inline void integrate_membrane(NeuronGridState& st, std::span<const double> forcing, const NeuronParams& p,
                               double dt, double now, std::size_t begin, std::size_t end) {
    const double g = dt / p.lambda_v;
    for (std::size_t i = begin; i < end; ++i) {
        if (st.refractory(i, now)) continue;
        st.v[i] += g * (-(st.v[i] - p.v_rest) + forcing[i]);
    }
}

inline void integrate_membrane(NeuronGridState& st, std::span<const double> forcing, const NeuronParams& p,
                               double dt, double now) {
    if (!(dt < p.lambda_v)) throw std::invalid_argument("explicit Euler needs dt < lambda_v");
    integrate_membrane(st, forcing, p, dt, now, 0, st.size());
}

/// Threshold check (inclusive). Firing neurons reset and become refractory.
/// Returns the number of spikes; flags are left in st.s.
inline std::size_t fire_and_reset(NeuronGridState& st, const NeuronParams& p, double now) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < st.size(); ++i) {
        st.s[i] = 0;
        if (st.refractory(i, now) || st.v[i] < p.v_th) continue;
        st.s[i] = 1;
        st.silence(i, p, now);
        ++n;
    }
    return n;
}

/// Ring of binary spike frames at one-step granularity. at(k) is the frame
/// pushed k steps ago (at(0) is the newest).
class DelayBuffer {
public:
    DelayBuffer() = default;
    DelayBuffer(std::size_t frame_size, std::size_t max_delay_steps)
        : frame_size_(frame_size), depth_(max_delay_steps + 1),
          frames_(depth_, std::vector<std::uint8_t>(frame_size, 0)), active_(depth_) {}

    void push(std::span<const std::uint8_t> frame) {
        assert(frame.size() == frame_size_);
        head_ = (head_ + 1) % depth_;
        std::copy(frame.begin(), frame.end(), frames_[head_].begin());
        auto& act = active_[head_];
        act.clear();
        for (std::uint32_t i = 0; i < frame.size(); ++i)
            if (frame[i]) act.push_back(i);
    }

    std::span<const std::uint8_t> at(std::size_t steps_ago) const {
        assert(steps_ago < depth_);
        return frames_[(head_ + depth_ - steps_ago) % depth_];
    }

    /// Indices of the spiking entries of at(steps_ago).
    std::span<const std::uint32_t> active(std::size_t steps_ago) const {
        assert(steps_ago < depth_);
        return active_[(head_ + depth_ - steps_ago) % depth_];
    }

    void clear() {
        for (auto& f : frames_) std::fill(f.begin(), f.end(), std::uint8_t{0});
        for (auto& a : active_) a.clear();
    }

    std::size_t depth() const { return depth_; }
    std::size_t frame_size() const { return frame_size_; }

private:
    std::size_t frame_size_ = 0;
    std::size_t depth_ = 1;
    std::size_t head_ = 0;
    std::vector<std::vector<std::uint8_t>> frames_;
    std::vector<std::vector<std::uint32_t>> active_;
};

}  // namespace spikeflow
