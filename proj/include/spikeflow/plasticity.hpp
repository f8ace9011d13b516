#pragma once

// Trace-based multiplicative STDP with a closed-form equilibrium, the
// mean-square convergence metric, and two reference rules used for comparison.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace spikeflow {

struct StdpParams {
    double eta = 1e-4;
    double a = 0.0;        // steepness offset, must stay below 1
    double w_init = 0.5;
    double l_th = 5e-2;    // convergence threshold on the moving average of L
    std::size_t window = 200;

    void check() const {
        if (!(eta > 0)) throw std::invalid_argument("eta must be positive");
        if (!(a < 1)) throw std::invalid_argument("a must be below 1");
        if (window == 0) throw std::invalid_argument("convergence window must be positive");
    }
};

enum class RuleKind { Ours, Kheradpisheh, Shrestha };

inline RuleKind parse_rule(std::string_view s) {
    if (s == "ours") return RuleKind::Ours;
    if (s == "kheradpisheh") return RuleKind::Kheradpisheh;
    if (s == "shrestha") return RuleKind::Shrestha;
    throw std::invalid_argument("unknown STDP rule '" + std::string(s) + "'");
}

inline const char* rule_name(RuleKind r) {
    switch (r) {
        case RuleKind::Ours: return "ours";
        case RuleKind::Kheradpisheh: return "kheradpisheh";
        case RuleKind::Shrestha: return "shrestha";
    }
    return "?";
}

/// In-place X / max(X); an all-zero (or empty-max) vector stays all zeros.
inline void normalize_traces(std::span<double> x) {
    if (x.empty()) return;
    double m = *std::max_element(x.begin(), x.end());
    if (!(m > 0)) {
        std::fill(x.begin(), x.end(), 0.0);
        return;
    }
    for (double& v : x) v /= m;
}

/// LTP + LTD for one synapse.
inline double stdp_update(double w, double x_hat, double eta, double a, double w_init) {
    double ltp = std::exp(-(w - w_init)) * (std::exp(x_hat) - a);
    double ltd = -std::exp(w - w_init) * (std::exp(1.0 - x_hat) - a);
    return eta * (ltp + ltd);
}

inline double stdp_update(double w, double x_hat, const StdpParams& p) {
    return stdp_update(w, x_hat, p.eta, p.a, p.w_init);
}

/// Weight at which LTP and LTD balance for a given normalized trace.
inline double equilibrium_weight(double x_hat, double a, double w_init) {
    if (!(a < 1)) throw std::invalid_argument("a must be below 1");
    return 0.5 * std::log((std::exp(x_hat) - a) / (std::exp(1.0 - x_hat) - a)) + w_init;
}

/// Mean of (X_hat - W_hat)^2; W_hat is the weight vector normalized to its max.
inline double convergence_metric(std::span<const double> x_hat, std::span<const double> w_hat) {
    if (x_hat.size() != w_hat.size()) throw std::invalid_argument("convergence_metric: shape mismatch");
    if (x_hat.empty()) return 0.0;
    double acc = 0;
    for (std::size_t i = 0; i < x_hat.size(); ++i) {
        double d = x_hat[i] - w_hat[i];
        acc += d * d;
    }
    return acc / static_cast<double>(x_hat.size());
}

/// Synapse eligibility for the reference rules: trace at or above half the max.
inline bool eligible(double x_hat) { return x_hat >= 0.5; }

inline double comparison_update(RuleKind rule, double w, bool potentiate, const StdpParams& p) {
    switch (rule) {
        case RuleKind::Kheradpisheh: {
            double mag = p.eta * w * (1.0 - w);
            return potentiate ? mag : -mag;
        }
        case RuleKind::Shrestha:
            return potentiate ? p.eta * std::exp(-(w - p.w_init)) : -p.eta * std::exp(w - p.w_init);
        case RuleKind::Ours: break;
    }
    throw std::invalid_argument("comparison_update: rule has no eligibility form");
}

/// Weight change for any rule given the synapse's normalized trace; w_init is
/// passed separately so inhibitory synapses can use their own center.
inline double rule_update(RuleKind rule, double w, double x_hat, const StdpParams& p, double w_init) {
    if (rule == RuleKind::Ours) return stdp_update(w, x_hat, p.eta, p.a, w_init);
    StdpParams q = p;
    q.w_init = w_init;
    return comparison_update(rule, w, eligible(x_hat), q);
}

}  // namespace spikeflow
