#pragma once

// Network configuration: sectioned text file with a [global] section and one
// [layer.<name>] section per layer, in pipeline order.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spikeflow/fileutil.hpp"
#include "spikeflow/layers.hpp"
#include "spikeflow/plasticity.hpp"

namespace spikeflow {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NetworkConfig {
    double dt_ms = 1.0;
    std::uint64_t seed = 0;
    int width = 0, height = 0;  // network input resolution
    StdpParams stdp;
    double presentation_ms = 500;
    double lambda_y_ms = 50;
    bool downsample = false;    // halve incoming streams before presenting them
    std::vector<LayerConfig> layers;
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& where, const std::string& field, const std::string& what) {
    throw ConfigError(where + ": field '" + field + "' " + what);
}

}  // namespace detail

/// Range and shape-chain checks; throws ConfigError naming the layer and field.
inline void validate(const NetworkConfig& cfg) {
    using detail::config_fail;
    if (!(cfg.dt_ms > 0)) config_fail("global", "dt_ms", "must be positive");
    if (cfg.width <= 0) config_fail("global", "width", "must be positive");
    if (cfg.height <= 0) config_fail("global", "height", "must be positive");
    if (!(cfg.stdp.eta > 0)) config_fail("global", "eta", "must be positive");
    if (!(cfg.stdp.a < 1)) config_fail("global", "a", "must be below 1");
    if (!(cfg.stdp.l_th >= 0)) config_fail("global", "l_th", "must be non-negative");
    if (cfg.stdp.window == 0) config_fail("global", "window", "must be positive");
    if (!(cfg.presentation_ms > 0)) config_fail("global", "presentation_ms", "must be positive");
    if (!(cfg.lambda_y_ms > 0)) config_fail("global", "lambda_y_ms", "must be positive");
    if (cfg.layers.empty()) throw ConfigError("config defines no layers");

    int c = 2, h = cfg.height, w = cfg.width;
    for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
        const LayerConfig& L = cfg.layers[i];
        const std::string where = "layer '" + L.name + "'";
        if (L.kind == LayerKind::Input) config_fail(where, "kind", "input layer is implicit; remove this section");
        if (L.r < 1) config_fail(where, "r", "must be at least 1");
        if (L.s < 1) config_fail(where, "s", "must be at least 1");
        if (L.f < 1) config_fail(where, "f", "must be at least 1");
        if (L.m < 1) config_fail(where, "m", "must be at least 1");
        if (!(L.tau_min >= cfg.dt_ms)) config_fail(where, "tau_min_ms", "must be at least one timestep");
        if (!(L.tau_max >= L.tau_min)) config_fail(where, "tau_max_ms", "must not be below tau_min_ms");
        if (!(L.beta >= 0 && L.beta <= 1)) config_fail(where, "beta", "must lie in [0, 1]");
        if (!(L.neuron.v_th > L.neuron.v_rest)) config_fail(where, "v_th", "must exceed the resting potential");
        if (!(L.neuron.lambda_v > cfg.dt_ms)) config_fail(where, "lambda_v_ms", "must exceed dt_ms");
        if (!(L.neuron.lambda_x > 0)) config_fail(where, "lambda_x_ms", "must be positive");
        if (!(L.neuron.alpha >= 0)) config_fail(where, "alpha", "must be non-negative");
        if (!(L.neuron.refr >= 0)) config_fail(where, "refr_ms", "must be non-negative");
        const bool multi = L.kind == LayerKind::MSConv;
        if (multi && L.m < 2) config_fail(where, "m", "must exceed 1 for msconv");
        if (!multi && L.m != 1) config_fail(where, "m", "must be 1 for " + std::string(kind_name(L.kind)));
        if (multi && L.m > 1) {
            auto tau = delay_slots(L);
            long prev = 0;
            for (double t : tau) {
                long steps = std::lround(t / cfg.dt_ms);
                if (steps <= prev) config_fail(where, "tau_max_ms", "gives delay slots that collide at this dt");
                prev = steps;
            }
        }
        if ((L.kind == LayerKind::Merge || L.kind == LayerKind::Pooling) && L.plastic)
            config_fail(where, "plastic", "must be false for " + std::string(kind_name(L.kind)));
        if (L.kind == LayerKind::Merge && (L.r != 1 || L.s != 1)) config_fail(where, "r", "must be 1 for merge");
        if (L.kind == LayerKind::Pooling && L.s != L.r) config_fail(where, "s", "must equal r for pooling");

        switch (L.kind) {
            case LayerKind::Merge: c = 1; break;
            case LayerKind::Pooling:
            case LayerKind::SSConv:
            case LayerKind::MSConv:
                if (L.r > h || L.r > w)
                    config_fail(where, "r", "exceeds the " + std::to_string(w) + "x" + std::to_string(h) +
                                                " input of this layer");
                if (L.kind != LayerKind::Pooling) c = L.f;
                h = (h - L.r) / L.s + 1;
                w = (w - L.r) / L.s + 1;
                break;
            case LayerKind::Dense:
                c = L.f;
                h = w = 1;
                break;
            case LayerKind::Input: break;
        }
    }
}

namespace detail {

template <typename T>
T get_field(const boost::property_tree::ptree& sec, const std::string& where, const std::string& key,
            std::optional<T> fallback) {
    auto node = sec.get_child_optional(boost::property_tree::ptree::path_type(key, '\0'));
    if (!node) {
        if (fallback) return *fallback;
        config_fail(where, key, "is missing");
    }
    auto value = node->get_value_optional<T>();
    if (!value) config_fail(where, key, "has invalid value '" + node->data() + "'");
    return *value;
}

inline bool get_bool(const boost::property_tree::ptree& sec, const std::string& where, const std::string& key,
                     bool fallback) {
    auto node = sec.get_child_optional(boost::property_tree::ptree::path_type(key, '\0'));
    if (!node) return fallback;
    const std::string& v = node->data();
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    config_fail(where, key, "has invalid boolean '" + v + "'");
}

}  // namespace detail

inline NetworkConfig parse_config(std::istream& in) {
    namespace pt = boost::property_tree;
    using detail::get_field;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
    }
    NetworkConfig cfg;
    bool have_global = false;
    for (const auto& [name, sec] : tree) {
        if (name == "global") {
            have_global = true;
            const std::string where = "global";
            cfg.dt_ms = get_field<double>(sec, where, "dt_ms", 1.0);
            cfg.seed = get_field<std::uint64_t>(sec, where, "seed", std::uint64_t{0});
            cfg.width = get_field<int>(sec, where, "width", std::nullopt);
            cfg.height = get_field<int>(sec, where, "height", std::nullopt);
            cfg.stdp.eta = get_field<double>(sec, where, "eta", 1e-4);
            cfg.stdp.a = get_field<double>(sec, where, "a", 0.0);
            cfg.stdp.w_init = get_field<double>(sec, where, "w_init", 0.5);
            cfg.stdp.l_th = get_field<double>(sec, where, "l_th", 5e-2);
            cfg.stdp.window = get_field<std::size_t>(sec, where, "window", std::size_t{200});
            cfg.presentation_ms = get_field<double>(sec, where, "presentation_ms", 500.0);
            cfg.lambda_y_ms = get_field<double>(sec, where, "lambda_y_ms", 50.0);
            cfg.downsample = detail::get_bool(sec, where, "downsample", false);
            for (const auto& [key, _] : sec)
                if (key != "dt_ms" && key != "seed" && key != "width" && key != "height" && key != "eta" &&
                    key != "a" && key != "w_init" && key != "l_th" && key != "window" && key != "presentation_ms" &&
                    key != "lambda_y_ms" && key != "downsample")
                    detail::config_fail(where, key, "is not a known key");
        } else if (name.rfind("layer.", 0) == 0) {
            LayerConfig L;
            L.name = name.substr(6);
            const std::string where = "layer '" + L.name + "'";
            try {
                L.kind = parse_kind(get_field<std::string>(sec, where, "kind", std::nullopt));
            } catch (const std::invalid_argument& e) {
                detail::config_fail(where, "kind", e.what());
            }
            const bool dense = L.kind == LayerKind::Dense;
            const bool passthrough = L.kind == LayerKind::Merge || L.kind == LayerKind::Pooling;
            L.r = get_field<int>(sec, where, "r", dense || L.kind == LayerKind::Merge ? std::optional<int>(1) : std::nullopt);
            L.s = get_field<int>(sec, where, "s", std::optional<int>(L.kind == LayerKind::Pooling ? L.r : 1));
            L.f = get_field<int>(sec, where, "f", passthrough ? std::optional<int>(1) : std::nullopt);
            L.m = get_field<int>(sec, where, "m", 1);
            L.tau_min = get_field<double>(sec, where, "tau_min_ms", 1.0);
            L.tau_max = get_field<double>(sec, where, "tau_max_ms", L.tau_min);
            L.beta = get_field<double>(sec, where, "beta", 0.0);
            L.neuron.v_th = get_field<double>(sec, where, "v_th", passthrough ? std::optional<double>(0.001) : std::nullopt);
            L.neuron.lambda_v = get_field<double>(sec, where, "lambda_v_ms", 5.0);
            L.neuron.lambda_x = get_field<double>(sec, where, "lambda_x_ms", L.neuron.lambda_v);
            L.neuron.alpha = get_field<double>(sec, where, "alpha", passthrough ? std::optional<double>(0.0) : std::nullopt);
            L.neuron.refr = get_field<double>(sec, where, "refr_ms", 3.0);
            L.plastic = detail::get_bool(sec, where, "plastic", !passthrough);
            for (const auto& [key, _] : sec)
                if (key != "kind" && key != "r" && key != "s" && key != "f" && key != "m" && key != "tau_min_ms" &&
                    key != "tau_max_ms" && key != "beta" && key != "v_th" && key != "lambda_v_ms" &&
                    key != "lambda_x_ms" && key != "alpha" && key != "refr_ms" && key != "plastic")
                    detail::config_fail(where, key, "is not a known key");
            cfg.layers.push_back(std::move(L));
        } else {
            throw ConfigError("unknown config section [" + name + "]");
        }
    }
    if (!have_global) throw ConfigError("config is missing the [global] section");
    validate(cfg);
    return cfg;
}

inline NetworkConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline NetworkConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    return parse_config(in);
}

inline std::string format_config(const NetworkConfig& cfg) {
    std::ostringstream o;
    o.precision(17);
    o << "[global]\n"
      << "dt_ms = " << cfg.dt_ms << "\nseed = " << cfg.seed << "\nwidth = " << cfg.width
      << "\nheight = " << cfg.height << "\neta = " << cfg.stdp.eta << "\na = " << cfg.stdp.a
      << "\nw_init = " << cfg.stdp.w_init << "\nl_th = " << cfg.stdp.l_th << "\nwindow = " << cfg.stdp.window
      << "\npresentation_ms = " << cfg.presentation_ms << "\nlambda_y_ms = " << cfg.lambda_y_ms
      << "\ndownsample = " << (cfg.downsample ? "true" : "false") << "\n";
    for (const LayerConfig& L : cfg.layers) {
        o << "\n[layer." << L.name << "]\nkind = " << kind_name(L.kind) << "\nr = " << L.r << "\ns = " << L.s
          << "\nf = " << L.f << "\nm = " << L.m << "\ntau_min_ms = " << L.tau_min << "\ntau_max_ms = " << L.tau_max
          << "\nbeta = " << L.beta << "\nv_th = " << L.neuron.v_th << "\nlambda_v_ms = " << L.neuron.lambda_v
          << "\nlambda_x_ms = " << L.neuron.lambda_x << "\nalpha = " << L.neuron.alpha
          << "\nrefr_ms = " << L.neuron.refr << "\nplastic = " << (L.plastic ? "true" : "false") << "\n";
    }
    return o.str();
}

/// Checkerboard architecture with the published layer parameters, sized for a
/// width x height input.
inline NetworkConfig checkerboard_config(int width, int height) {
    NetworkConfig cfg;
    cfg.width = width;
    cfg.height = height;
    auto layer = [](std::string name, LayerKind kind, int r, int s, int f, int m, double t0, double t1, double vth,
                    double lambda, double alpha, bool plastic) {
        LayerConfig L;
        L.name = std::move(name);
        L.kind = kind;
        L.r = r;
        L.s = s;
        L.f = f;
        L.m = m;
        L.tau_min = t0;
        L.tau_max = t1;
        L.neuron.v_th = vth;
        L.neuron.lambda_v = lambda;
        L.neuron.lambda_x = lambda;
        L.neuron.alpha = alpha;
        L.neuron.refr = 3.0;
        L.plastic = plastic;
        return L;
    };
    cfg.layers.push_back(layer("ssconv", LayerKind::SSConv, 7, 1, 4, 1, 1, 1, 0.5, 5, 0.4, true));
    cfg.layers.push_back(layer("merge", LayerKind::Merge, 1, 1, 1, 1, 1, 1, 0.001, 5, 0.0, false));
    cfg.layers.push_back(layer("msconv", LayerKind::MSConv, 7, 2, 16, 10, 1, 50, 0.5, 5, 0.25, true));
    cfg.layers.back().beta = 0.5;
    cfg.layers.push_back(layer("pooling", LayerKind::Pooling, 8, 8, 16, 1, 1, 1, 0.001, 5, 0.0, false));
    cfg.layers.push_back(layer("dense", LayerKind::Dense, 1, 1, 16, 1, 1, 1, 0.5, 5, 0.25, true));
    return cfg;
}

}  // namespace spikeflow
