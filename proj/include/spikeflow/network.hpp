#pragma once

// Layer stack assembly, clocked replay of event streams, layer-by-layer
// training with the moving-average convergence stop, and postsynaptic traces.

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spikeflow/config.hpp"
#include "spikeflow/events.hpp"
#include "spikeflow/layers.hpp"

namespace spikeflow {

/// Bins a stream into binary input frames of shape (2, h, w); channel 0 holds
/// positive events, channel 1 negative ones.
class InputBinner {
public:
    InputBinner(const EventStream& s, double dt_ms) : s_(s), bin_us_(dt_ms * 1000.0) {
        frame_.assign(std::size_t(2) * s.height * s.width, 0);
    }

    std::size_t steps() const {
        return static_cast<std::size_t>(std::ceil(static_cast<double>(s_.duration) / bin_us_ - 1e-9));
    }

    /// Frame for step k; steps must be requested in increasing order.
    std::span<const std::uint8_t> frame(std::size_t k) {
        std::fill(frame_.begin(), frame_.end(), std::uint8_t{0});
        const double end = static_cast<double>(k + 1) * bin_us_;
        const std::size_t plane = std::size_t(s_.height) * s_.width;
        while (next_ < s_.events.size() && static_cast<double>(s_.events[next_].t) < end) {
            const Event& e = s_.events[next_++];
            frame_[(e.p > 0 ? 0 : plane) + std::size_t(e.y) * s_.width + e.x] = 1;
        }
        return frame_;
    }

private:
    const EventStream& s_;
    double bin_us_;
    std::size_t next_ = 0;
    std::vector<std::uint8_t> frame_;
};

struct SpikeRecord {
    std::uint32_t step = 0;
    std::uint32_t map = 0, y = 0, x = 0;
};

struct LayerRecord {
    std::string name;
    Shape shape;
    std::vector<SpikeRecord> spikes;
    std::vector<std::uint64_t> counts;  // spikes per neuron
    std::vector<double> trace;          // postsynaptic trace y at the last step
    std::vector<double> trace_mean;     // y averaged over all steps
};

struct InferenceRecord {
    std::size_t steps = 0;
    double dt_ms = 1;
    std::vector<LayerRecord> layers;
    std::vector<std::vector<double>> output_traces;  // y of the last layer per step
};

struct TrainSchedule {
    std::vector<EventStream> pool;
    std::size_t max_presentations = 100;
    std::uint64_t seed = 0;
    RuleKind rule = RuleKind::Ours;
    bool augment = true;
    bool stop_on_convergence = true;
    /// Called after every presentation with its 1-based index.
    std::function<void(std::size_t, const ConvLayer&)> on_presentation;
};

struct TrainLog {
    std::vector<double> losses;          // L of every postsynaptic update
    std::vector<double> moving_average;  // windowed mean after every update
    std::size_t presentations = 0;
    bool converged = false;
};

/// Windowed running mean with O(1) updates.
class MovingAverage {
public:
    explicit MovingAverage(std::size_t window) : window_(window) {}
    double push(double v) {
        buf_.push_back(v);
        sum_ += v;
        if (buf_.size() > window_) {
            sum_ -= buf_.front();
            buf_.pop_front();
        }
        return value();
    }
    double value() const { return buf_.empty() ? 0.0 : std::max(0.0, sum_ / static_cast<double>(buf_.size())); }
    bool full() const { return buf_.size() >= window_; }

private:
    std::size_t window_;
    std::deque<double> buf_;
    double sum_ = 0;
};

class Network {
public:
    explicit Network(NetworkConfig cfg) : cfg_(std::move(cfg)) {
        validate(cfg_);
        Shape shape{2, cfg_.height, cfg_.width};
        for (const LayerConfig& L : cfg_.layers) {
            layers_.emplace_back(L, shape, cfg_.dt_ms, cfg_.stdp.w_init);
            layers_.back().learning().stdp = cfg_.stdp;
            shape = layers_.back().output_shape();
        }
        y_.resize(layers_.size());
        for (std::size_t i = 0; i < layers_.size(); ++i) y_[i].assign(layers_[i].output_shape().size(), 0.0);
    }

    const NetworkConfig& config() const { return cfg_; }
    std::size_t size() const { return layers_.size(); }
    ConvLayer& layer(std::size_t i) { return layers_.at(i); }
    const ConvLayer& layer(std::size_t i) const { return layers_.at(i); }
    Shape input_shape() const { return {2, cfg_.height, cfg_.width}; }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < layers_.size(); ++i)
            if (layers_[i].config().name == name) return i;
        throw std::invalid_argument("no layer named '" + name + "'");
    }

    void set_workers(unsigned n) {
        for (auto& l : layers_) l.set_workers(n);
    }

    void reset() {
        for (auto& l : layers_) l.reset();
        for (auto& y : y_) std::fill(y.begin(), y.end(), 0.0);
    }

    /// Applies the configured downsampling and checks the resolution.
    EventStream prepare(EventStream s) const {
        if (cfg_.downsample) s = downsample_half(std::move(s));
        if (s.width != cfg_.width || s.height != cfg_.height)
            throw std::invalid_argument("stream resolution " + std::to_string(s.width) + "x" +
                                        std::to_string(s.height) + " does not match network input " +
                                        std::to_string(cfg_.width) + "x" + std::to_string(cfg_.height));
        return s;
    }

    /// Replays a prepared stream from a reset state through layers [0, depth).
    /// `on_step(k)` runs after every step.
    template <typename OnStep>
    void run(const EventStream& s, std::size_t depth, OnStep&& on_step) {
        reset();
        InputBinner bins(s, cfg_.dt_ms);
        const std::size_t steps = bins.steps();
        const double ky = std::exp(-cfg_.dt_ms / cfg_.lambda_y_ms);
        for (std::size_t k = 0; k < steps; ++k) {
            const double now = static_cast<double>(k) * cfg_.dt_ms;
            std::span<const std::uint8_t> in = bins.frame(k);
            for (std::size_t i = 0; i < depth; ++i) {
                layers_[i].step(in, now);
                in = layers_[i].spikes();
                auto& y = y_[i];
                for (std::size_t n = 0; n < y.size(); ++n) y[n] = y[n] * ky + (in[n] ? 1.0 / cfg_.lambda_y_ms : 0.0);
            }
            if (!on_step(k)) break;
        }
    }

    const std::vector<double>& postsynaptic_trace(std::size_t i) const { return y_.at(i); }

    InferenceRecord infer(const EventStream& raw) {
        EventStream s = prepare(raw);
        for (auto& l : layers_) l.learning().enabled = false;
        InferenceRecord rec;
        rec.dt_ms = cfg_.dt_ms;
        for (const auto& l : layers_) {
            LayerRecord lr;
            lr.name = l.config().name;
            lr.shape = l.output_shape();
            lr.counts.assign(lr.shape.size(), 0);
            lr.trace_mean.assign(lr.shape.size(), 0.0);
            rec.layers.push_back(std::move(lr));
        }
        run(s, layers_.size(), [&](std::size_t k) {
            for (std::size_t i = 0; i < layers_.size(); ++i) {
                LayerRecord& lr = rec.layers[i];
                auto sp = layers_[i].spikes();
                const std::size_t plane = std::size_t(lr.shape.h) * lr.shape.w;
                for (std::size_t n = 0; n < sp.size(); ++n) {
                    if (sp[n]) {
                        ++lr.counts[n];
                        lr.spikes.push_back({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(n / plane),
                                             static_cast<std::uint32_t>((n % plane) / lr.shape.w),
                                             static_cast<std::uint32_t>(n % lr.shape.w)});
                    }
                    lr.trace_mean[n] += y_[i][n];
                }
            }
            rec.output_traces.push_back(y_.back());
            rec.steps = k + 1;
            return true;
        });
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            rec.layers[i].trace = y_[i];
            if (rec.steps > 0)
                for (double& v : rec.layers[i].trace_mean) v /= static_cast<double>(rec.steps);
        }
        return rec;
    }

    /// Trains layer `idx` with all earlier layers frozen. Each presentation is a
    /// presentation_ms window cut at a random offset from a pool sequence drawn
    /// uniformly, optionally augmented.
    TrainLog train_layer(std::size_t idx, const TrainSchedule& sched) {
        ConvLayer& target = layers_.at(idx);
        if (!target.config().plastic)
            throw std::invalid_argument("layer '" + target.config().name + "' is not plastic");
        if (sched.max_presentations > 0 && sched.pool.empty())
            throw std::invalid_argument("training pool is empty");
        for (auto& l : layers_) l.learning().enabled = false;
        target.learning().enabled = true;
        target.learning().rule = sched.rule;
        target.learning().stdp = cfg_.stdp;
        target.learning().losses.clear();

        std::vector<EventStream> pool;
        pool.reserve(sched.pool.size());
        for (const auto& s : sched.pool) pool.push_back(prepare(s));

        TrainLog log;
        MovingAverage avg(cfg_.stdp.window);
        std::mt19937_64 rng(sched.seed);
        const auto window_us = static_cast<std::int64_t>(std::llround(cfg_.presentation_ms * 1000.0));
        for (std::size_t p = 0; p < sched.max_presentations && !log.converged; ++p) {
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            const EventStream& src = pool[pick(rng)];
            const std::int64_t slack = std::max<std::int64_t>(0, src.duration - window_us);
            std::uniform_int_distribution<std::int64_t> offset_dist(0, slack);
            const std::int64_t offset = offset_dist(rng);
            const std::uint64_t aug_seed = rng();
            EventStream clip = cut(src, offset, window_us);
            if (sched.augment) clip = augment(std::move(clip), aug_seed);

            std::size_t seen = 0;
            auto& losses = target.learning().losses;
            run(clip, idx + 1, [&](std::size_t) {
                for (; seen < losses.size() && !log.converged; ++seen) {
                    log.losses.push_back(losses[seen]);
                    log.moving_average.push_back(avg.push(losses[seen]));
                    if (sched.stop_on_convergence && avg.full() && avg.value() < cfg_.stdp.l_th) log.converged = true;
                }
                return !log.converged;
            });
            losses.clear();
            log.presentations = p + 1;
            if (sched.on_presentation) sched.on_presentation(p + 1, target);
        }
        target.learning().enabled = false;
        return log;
    }

    /// Window [offset, offset + length) of a stream, rebased to start at 0.
    static EventStream cut(const EventStream& s, std::int64_t offset, std::int64_t length) {
        EventStream out{s.width, s.height, std::min(length, std::max<std::int64_t>(0, s.duration - offset)), {}};
        if (out.duration <= 0) out.duration = length;
        auto lo = std::lower_bound(s.events.begin(), s.events.end(), offset,
                                   [](const Event& e, std::int64_t t) { return e.t < t; });
        for (auto it = lo; it != s.events.end() && it->t < offset + length; ++it) {
            Event e = *it;
            e.t -= offset;
            out.events.push_back(e);
        }
        return out;
    }

private:
    NetworkConfig cfg_;
    std::vector<ConvLayer> layers_;
    std::vector<std::vector<double>> y_;
};

}  // namespace spikeflow
