#pragma once

// Command-line driver. run() parses argv, validates every input, and only then
// computes and writes outputs (atomically). Exit codes: 0 success, 1 invalid
// input or usage, 2 I/O failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spikeflow/spikeflow.hpp"

namespace spikeflow::cli {

/// Invalid arguments or input contents; maps to exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

namespace fs = std::filesystem;

inline UsageError flag_error(const std::string& flag, const std::string& what) {
    return UsageError(flag + ": " + what);
}

inline NetworkConfig read_config(const fs::path& path) {
    try {
        return load_config(path);
    } catch (const ConfigError& e) {
        throw flag_error("--config", e.what());
    }
}

inline WeightsFile read_weights_flag(const fs::path& path, const std::string& flag = "--weights") {
    try {
        return load_weights_file(path);
    } catch (const FormatError& e) {
        throw flag_error(flag, e.what());
    }
}

/// Network from --config (checked against the stored weights) or, without a
/// config, from the config embedded in the weights file.
inline Network build_network(const std::optional<fs::path>& config, const WeightsFile& wf) {
    Network net(config ? read_config(*config) : wf.config);
    try {
        apply_weights(net, wf);
    } catch (const FormatError& e) {
        throw flag_error("--weights", std::string(e.what()) + (config ? " (see --config)" : ""));
    }
    return net;
}

inline bool is_event_file(const fs::path& p) {
    const std::string ext = p.extension().string();
    return ext == ".csv" || ext == ".txt" || ext == ".bin" || ext == ".evt";
}

/// All event files of a directory in lexicographic path order.
inline std::vector<EventStream> read_data_dir(const fs::path& dir, const Network& net) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && is_event_file(entry.path())) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw flag_error("--data-dir", "no event files (.csv, .txt, .bin, .evt) in " + dir.string());
    std::vector<EventStream> pool;
    for (const auto& f : files) {
        try {
            pool.push_back(read_events(f));
            (void)net.prepare(pool.back());
        } catch (const IoError&) {
            throw;
        } catch (const std::exception& e) {
            throw flag_error("--data-dir", f.filename().string() + ": " + e.what());
        }
    }
    return pool;
}

inline std::size_t layer_flag(const Network& net, const std::string& name, const std::string& flag = "--layer") {
    try {
        return net.index_of(name);
    } catch (const std::exception&) {
        std::string known;
        for (std::size_t i = 0; i < net.size(); ++i) known += (i ? ", " : "") + net.layer(i).config().name;
        throw flag_error(flag, "no layer named '" + name + "' (layers: " + known + ")");
    }
}

inline std::size_t first_of_kind(const Network& net, LayerKind kind, const std::string& flag) {
    for (std::size_t i = 0; i < net.size(); ++i)
        if (net.layer(i).config().kind == kind) return i;
    throw flag_error(flag, std::string("network has no ") + kind_name(kind) + " layer; name one explicitly");
}

/// Input pixels of the network per pixel of layer `idx`'s input.
inline double input_scale(const Network& net, std::size_t idx) {
    double s = net.config().downsample ? 2.0 : 1.0;
    for (std::size_t i = 0; i < idx; ++i) s *= net.layer(i).stride();
    return s;
}

inline Pattern make_pattern(const std::string& kind, double size, const std::string& orientation, double contrast_dark,
                            std::uint64_t seed) {
    Pattern p;
    p.kind = kind == "bar" ? PatternKind::Bar : kind == "noise" ? PatternKind::Noise : PatternKind::Checkerboard;
    p.size = size;
    p.orientation = orientation == "horizontal" ? Orientation::Horizontal : Orientation::Vertical;
    p.dark = contrast_dark;
    p.seed = seed;
    return p;
}

struct GenOpts {
    std::string pattern = "checkerboard";
    double wx = 0, wy = 0, divergence = 0;
    double duration_ms = 0;
    int width = 64, height = 64;
    double contrast = 0.15;
    double size = 8;
    std::string orientation = "vertical";
    double dark = 0.2;
    std::uint64_t seed = 0;
    double focal = 100;
    std::string out;
};

inline int cmd_gen(const GenOpts& o, std::ostream& log) {
    if (!(o.duration_ms > 0)) throw flag_error("--duration-ms", "duration must be positive");
    if (o.width <= 0) throw flag_error("--width", "must be positive");
    if (o.height <= 0) throw flag_error("--height", "must be positive");
    if (!(o.contrast > 0)) throw flag_error("--contrast", "must be positive");
    if (!(o.size > 0)) throw flag_error("--size", "must be positive");
    if (!(o.dark > 0 && o.dark <= 1)) throw flag_error("--dark", "must lie in (0, 1]");
    if (!(o.focal > 0)) throw flag_error("--focal", "must be positive");
    CameraModel cam;
    cam.contrast = o.contrast;
    cam.focal_px = o.focal;
    const Pattern pat = make_pattern(o.pattern, o.size, o.orientation, o.dark, o.seed);
    const auto duration_us = static_cast<std::int64_t>(std::llround(o.duration_ms * 1000.0));
    EventStream s = generate_events(pat, motion_from_flow(o.wx, o.wy, o.divergence), cam, duration_us, o.width,
                                    o.height);
    write_events(s, o.out);
    log << "wrote " << s.events.size() << " events to " << o.out << '\n';
    return 0;
}

struct TrainOpts {
    std::string config, data_dir, layer, weights_in, weights_out, log_out;
    std::optional<std::uint64_t> seed;
    std::size_t max_presentations = 100;
    unsigned workers = 1;
    bool no_augment = false;
};

inline int cmd_train(const TrainOpts& o, std::ostream& log) {
    NetworkConfig cfg = read_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    Network net(cfg);
    if (!o.weights_in.empty()) {
        WeightsFile wf = read_weights_flag(o.weights_in, "--weights-in");
        try {
            apply_weights(net, wf);
        } catch (const FormatError& e) {
            throw flag_error("--weights-in", e.what());
        }
    }
    std::vector<std::size_t> targets;
    if (!o.layer.empty()) {
        const std::size_t idx = layer_flag(net, o.layer);
        if (!net.layer(idx).config().plastic) throw flag_error("--layer", "layer '" + o.layer + "' is not plastic");
        targets.push_back(idx);
    } else {
        for (std::size_t i = 0; i < net.size(); ++i)
            if (net.layer(i).config().plastic) targets.push_back(i);
    }
    if (targets.empty()) throw flag_error("--config", "network has no plastic layer");
    TrainSchedule sched;
    sched.pool = read_data_dir(o.data_dir, net);
    sched.max_presentations = o.max_presentations;
    sched.augment = !o.no_augment;
    net.set_workers(o.workers);

    std::ostringstream csv;
    csv << "layer,update,loss,moving_average\n";
    csv.precision(10);
    for (std::size_t idx : targets) {
        sched.seed = cfg.seed + idx;
        const TrainLog tl = net.train_layer(idx, sched);
        const std::string& name = net.layer(idx).config().name;
        for (std::size_t i = 0; i < tl.losses.size(); ++i)
            csv << name << ',' << i << ',' << tl.losses[i] << ',' << tl.moving_average[i] << '\n';
        log << "layer " << name << ": " << tl.presentations << " presentations, " << tl.losses.size()
            << " updates, " << (tl.converged ? "converged" : "not converged");
        if (!tl.moving_average.empty()) log << ", moving average " << tl.moving_average.back();
        log << '\n';
    }
    save_weights(net, o.weights_out);
    if (!o.log_out.empty()) atomic_write(o.log_out, [&](std::ostream& out) { out << csv.str(); });
    return 0;
}

struct InferOpts {
    std::optional<std::string> config;
    std::string weights, events, spikes_out, traces_out;
    std::optional<double> beta;
};

inline int cmd_infer(const InferOpts& o, std::ostream& log) {
    WeightsFile wf = read_weights_flag(o.weights);
    Network net = build_network(o.config ? std::optional<fs::path>(*o.config) : std::nullopt, wf);
    EventStream s;
    try {
        s = read_events(o.events);
        (void)net.prepare(s);
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw flag_error("--events", e.what());
    }
    if (o.beta) {
        if (!(*o.beta >= 0)) throw flag_error("--beta", "must be non-negative");
        for (std::size_t i = 0; i < net.size(); ++i)
            if (net.layer(i).kernel().has_inh()) net.layer(i).set_beta(*o.beta);
    }
    const InferenceRecord rec = net.infer(s);
    if (!o.spikes_out.empty())
        atomic_write(o.spikes_out, [&](std::ostream& out) {
            out << "t_ms,layer,map,y,x\n";
            out.precision(10);
            for (const LayerRecord& lr : rec.layers)
                for (const SpikeRecord& sp : lr.spikes)
                    out << (sp.step + 1) * rec.dt_ms << ',' << lr.name << ',' << sp.map << ',' << sp.y << ','
                        << sp.x << '\n';
        });
    if (!o.traces_out.empty())
        atomic_write(o.traces_out, [&](std::ostream& out) {
            out << "t_ms";
            const std::size_t n = rec.output_traces.empty() ? 0 : rec.output_traces[0].size();
            for (std::size_t j = 0; j < n; ++j) out << ",y" << j;
            out << '\n';
            out.precision(10);
            for (std::size_t k = 0; k < rec.output_traces.size(); ++k) {
                out << (k + 1) * rec.dt_ms;
                for (double v : rec.output_traces[k]) out << ',' << v;
                out << '\n';
            }
        });
    for (const LayerRecord& lr : rec.layers) log << "layer " << lr.name << ": " << lr.spikes.size() << " spikes\n";
    return 0;
}

struct ExportOpts {
    std::string weights, layer, out_dir, format = "csv";
    std::optional<double> beta;
};

inline int cmd_export(const ExportOpts& o, std::ostream& log) {
    Network net = build_network(std::nullopt, read_weights_flag(o.weights));
    const std::size_t idx = layer_flag(net, o.layer);
    const ConvLayer& l = net.layer(idx);
    const double beta = o.beta ? *o.beta : l.config().beta;
    const auto paths = export_kernels(l.kernel(), beta, l.config().name, o.out_dir,
                                      o.format == "pgm" ? KernelFormat::Pgm : KernelFormat::Csv);
    log << "wrote " << paths.size() << " files to " << o.out_dir << '\n';
    return 0;
}

struct FlowOpts {
    std::string weights, layer, out, ppm;
    double gamma = 0.5;
};

inline int cmd_flow(const FlowOpts& o, std::ostream& log) {
    if (!(o.gamma >= 0 && o.gamma <= 1)) throw flag_error("--gamma", "must lie in [0, 1]");
    Network net = build_network(std::nullopt, read_weights_flag(o.weights));
    const std::size_t idx = o.layer.empty() ? first_of_kind(net, LayerKind::MSConv, "--layer") : layer_flag(net, o.layer);
    const ConvLayer& l = net.layer(idx);
    if (l.kernel().m < 2) throw flag_error("--layer", "layer '" + l.config().name + "' has no delay slots to compare");
    std::vector<KernelFlow> flows;
    std::vector<std::pair<double, double>> uv;
    for (int k = 0; k < l.kernel().f; ++k) {
        KernelFlow f;
        try {
            f = kernel_flow(l.kernel(), k, l.delays_ms(), o.gamma);
        } catch (const FlowError& e) {
            log << "kernel " << k << ": " << e.what() << "; reported as zero flow\n";
        }
        flows.push_back(f);
        uv.emplace_back(f.u, f.v);
    }
    const double scale = input_scale(net, idx);
    atomic_write(o.out, [&](std::ostream& out) { write_flow_csv(out, flows, scale); });
    if (!o.ppm.empty()) atomic_write(o.ppm, [&](std::ostream& out) { write_flow_ppm(out, colorize(uv)); });
    log << "wrote flow of " << flows.size() << " kernels to " << o.out << '\n';
    return 0;
}

struct ResponseOpts {
    std::optional<std::string> config;
    std::string weights, out, layer, grid = "-2:2:9", pattern = "checkerboard";
    bool axes_only = false;
    double size = 8;
    double duration_ms = 500;
    double contrast = 0.15;
    std::optional<double> beta;
};

inline std::vector<std::pair<double, double>> parse_grid(const std::string& text) {
    double lo = 0, hi = 0;
    int n = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof())
        throw flag_error("--grid", "expected lo:hi:n, got '" + text + "'");
    if (n < 1 || n > 1000) throw flag_error("--grid", "sample count must lie in [1, 1000]");
    if (!(hi >= lo)) throw flag_error("--grid", "hi must not be below lo");
    return flow_grid(lo, hi, n, false);
}

inline int cmd_response(const ResponseOpts& o, std::ostream& log) {
    auto grid = parse_grid(o.grid);
    if (o.axes_only) std::erase_if(grid, [](auto p) { return p.first != 0 && p.second != 0; });
    if (!(o.duration_ms > 0)) throw flag_error("--duration-ms", "duration must be positive");
    if (!(o.contrast > 0)) throw flag_error("--contrast", "must be positive");
    Network net = build_network(o.config ? std::optional<fs::path>(*o.config) : std::nullopt,
                                read_weights_flag(o.weights));
    const std::size_t idx = o.layer.empty() ? first_of_kind(net, LayerKind::MSConv, "--layer") : layer_flag(net, o.layer);
    if (o.beta) {
        if (!(*o.beta >= 0)) throw flag_error("--beta", "must be non-negative");
        net.layer(idx).set_beta(*o.beta);
    }
    ResponseStimulus stim;
    stim.pattern = make_pattern(o.pattern, o.size, "vertical", 0.2, 0);
    stim.camera.contrast = o.contrast;
    stim.duration_us = static_cast<std::int64_t>(std::llround(o.duration_ms * 1000.0));
    const ResponseTable t = response_curve(net, idx, grid, stim);
    atomic_write(o.out, [&](std::ostream& out) { write_response_csv(out, t); });
    log << "wrote " << t.rows.size() << " response rows to " << o.out << '\n';
    return 0;
}

struct CompareOpts {
    std::string rule, config, data_dir, hist_out, layer;
    std::optional<std::uint64_t> seed;
    std::size_t max_presentations = 100;
    unsigned workers = 1;
};

inline constexpr int kHistogramBins = 50;

/// Snapshot rows at every 1% of the presentation budget.
struct WeightTimeline {
    std::vector<int> percent;
    std::vector<std::size_t> presentation;
    std::vector<std::vector<double>> weights;
};

inline void write_histogram_csv(std::ostream& out, const WeightTimeline& tl, RuleKind rule, const std::string& layer,
                                double w_init) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& w : tl.weights)
        for (double v : w) lo = std::min(lo, v), hi = std::max(hi, v);
    const double width = hi > lo ? (hi - lo) / kHistogramBins : 1.0;
    out.precision(10);
    out << "# rule=" << rule_name(rule) << " layer=" << layer << " range=" << lo << ',' << hi << " bins="
        << kHistogramBins << '\n';
    out << "percent,presentation,w_min,w_max,max_dev";
    for (int b = 0; b < kHistogramBins; ++b) out << ",bin" << b;
    out << '\n';
    for (std::size_t r = 0; r < tl.weights.size(); ++r) {
        const auto& w = tl.weights[r];
        std::vector<std::size_t> counts(kHistogramBins, 0);
        double mn = w.front(), mx = w.front(), dev = 0;
        for (double v : w) {
            const int b = std::clamp(static_cast<int>((v - lo) / width), 0, kHistogramBins - 1);
            ++counts[b];
            mn = std::min(mn, v), mx = std::max(mx, v), dev = std::max(dev, std::fabs(v - w_init));
        }
        out << tl.percent[r] << ',' << tl.presentation[r] << ',' << mn << ',' << mx << ',' << dev;
        for (std::size_t c : counts) out << ',' << c;
        out << '\n';
    }
}

inline int cmd_compare(const CompareOpts& o, std::ostream& log) {
    RuleKind rule{};
    try {
        rule = parse_rule(o.rule);
    } catch (const std::invalid_argument& e) {
        throw flag_error("--rule", e.what());
    }
    if (o.max_presentations == 0) throw flag_error("--max-presentations", "must be positive");
    NetworkConfig cfg = read_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    Network net(cfg);
    std::size_t idx = 0;
    if (o.layer.empty()) {
        while (idx < net.size() && !net.layer(idx).config().plastic) ++idx;
        if (idx == net.size()) throw flag_error("--config", "network has no plastic layer");
    } else {
        idx = layer_flag(net, o.layer);
        if (!net.layer(idx).config().plastic) throw flag_error("--layer", "layer '" + o.layer + "' is not plastic");
    }
    TrainSchedule sched;
    sched.pool = read_data_dir(o.data_dir, net);
    sched.max_presentations = o.max_presentations;
    sched.seed = cfg.seed + idx;
    sched.rule = rule;
    sched.stop_on_convergence = false;
    net.set_workers(o.workers);

    WeightTimeline tl;
    int next_percent = 1;
    sched.on_presentation = [&](std::size_t p, const ConvLayer& l) {
        while (next_percent <= 100 &&
               p >= std::max<std::size_t>(1, (o.max_presentations * next_percent + 99) / 100)) {
            tl.percent.push_back(next_percent++);
            tl.presentation.push_back(p);
            tl.weights.push_back(l.kernel().exc);
        }
    };
    net.train_layer(idx, sched);
    atomic_write(o.hist_out, [&](std::ostream& out) {
        write_histogram_csv(out, tl, rule, net.layer(idx).config().name, cfg.stdp.w_init);
    });
    log << "wrote " << tl.weights.size() << " histogram rows to " << o.hist_out << '\n';
    return 0;
}

}  // namespace detail

/// Runs one command; diagnostics go to `err`, progress summaries to `log`.
inline int run(int argc, const char* const* argv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    using namespace detail;
    CLI::App app{"Spiking optical-flow network: event generation, training, inference and analysis", "spikeflow"};
    app.require_subcommand(1);
    const auto existing = CLI::ExistingFile;
    const auto kinds = CLI::IsMember({"checkerboard", "bar", "noise"});

    GenOpts gen;
    auto* g = app.add_subcommand("gen", "Render a synthetic event sequence of a textured plane");
    g->add_option("--pattern", gen.pattern, "checkerboard, bar or noise")->check(kinds);
    g->add_option("--wx", gen.wx, "ventral flow along x, 1/s");
    g->add_option("--wy", gen.wy, "ventral flow along y, 1/s");
    g->add_option("--divergence", gen.divergence, "flow divergence, 1/s");
    g->add_option("--duration-ms", gen.duration_ms, "sequence length in ms")->required();
    g->add_option("--width", gen.width, "sensor width in pixels");
    g->add_option("--height", gen.height, "sensor height in pixels");
    g->add_option("--contrast", gen.contrast, "log-intensity event threshold");
    g->add_option("--size", gen.size, "square side, bar width or noise spacing in pixels");
    g->add_option("--orientation", gen.orientation, "bar orientation")->check(CLI::IsMember({"vertical", "horizontal"}));
    g->add_option("--dark", gen.dark, "intensity of dark texture regions (bright is 1)");
    g->add_option("--seed", gen.seed, "noise texture seed");
    g->add_option("--focal", gen.focal, "focal length in pixels");
    g->add_option("--out", gen.out, "output file (.csv/.txt for text, anything else binary)")->required();

    TrainOpts train;
    auto* t = app.add_subcommand("train", "Train plastic layers layer by layer");
    t->add_option("--config", train.config, "network config (INI)")->required()->check(existing);
    t->add_option("--data-dir", train.data_dir, "directory of event files")->required()->check(CLI::ExistingDirectory);
    t->add_option("--layer", train.layer, "train only this layer (default: every plastic layer in order)");
    t->add_option("--seed", train.seed, "override the config seed");
    t->add_option("--max-presentations", train.max_presentations, "presentation budget per layer");
    t->add_option("--weights-in", train.weights_in, "start from these weights")->check(existing);
    t->add_option("--weights-out", train.weights_out, "output weights file")->required();
    t->add_option("--log-out", train.log_out, "per-update loss CSV");
    t->add_option("--workers", train.workers, "membrane integration threads")->check(CLI::Range(1u, 256u));
    t->add_flag("--no-augment", train.no_augment, "disable random flips");

    InferOpts infer;
    auto* i = app.add_subcommand("infer", "Run a trained network on an event file");
    i->add_option("--config", infer.config, "config to check the weights against")->check(existing);
    i->add_option("--weights", infer.weights, "weights file")->required()->check(existing);
    i->add_option("--events", infer.events, "event file")->required()->check(existing);
    i->add_option("--spikes-out", infer.spikes_out, "spike CSV of every layer");
    i->add_option("--traces-out", infer.traces_out, "postsynaptic traces of the last layer per step");
    i->add_option("--beta", infer.beta, "inhibition scale for multisynaptic layers");

    ExportOpts exp;
    auto* e = app.add_subcommand("export-kernels", "Write kernel grids as CSV or PGM");
    e->add_option("--weights", exp.weights, "weights file")->required()->check(existing);
    e->add_option("--layer", exp.layer, "layer name")->required();
    e->add_option("--out-dir", exp.out_dir, "output directory")->required();
    e->add_option("--format", exp.format, "csv or pgm")->check(CLI::IsMember({"csv", "pgm"}));
    e->add_option("--beta", exp.beta, "inhibition scale used for display");

    FlowOpts flow;
    auto* f = app.add_subcommand("flow", "Optical flow of every multisynaptic kernel");
    f->add_option("--weights", flow.weights, "weights file")->required()->check(existing);
    f->add_option("--layer", flow.layer, "layer name (default: first msconv)");
    f->add_option("--gamma", flow.gamma, "slot selection threshold in [0, 1]");
    f->add_option("--out", flow.out, "flow CSV")->required();
    f->add_option("--ppm", flow.ppm, "color-coded flow raster, one pixel per kernel");

    ResponseOpts resp;
    auto* r = app.add_subcommand("response", "Layer response over a grid of ventral flows");
    r->add_option("--config", resp.config, "config to check the weights against")->check(existing);
    r->add_option("--weights", resp.weights, "weights file")->required()->check(existing);
    r->add_option("--grid", resp.grid, "lo:hi:n samples per axis, 1/s");
    r->add_flag("--axes-only", resp.axes_only, "keep only points on the wx and wy axes");
    r->add_option("--layer", resp.layer, "probed layer (default: first msconv)");
    r->add_option("--pattern", resp.pattern, "stimulus texture")->check(kinds);
    r->add_option("--size", resp.size, "texture scale in pixels");
    r->add_option("--duration-ms", resp.duration_ms, "stimulus length per grid point");
    r->add_option("--contrast", resp.contrast, "log-intensity event threshold");
    r->add_option("--beta", resp.beta, "inhibition scale of the probed layer");
    r->add_option("--out", resp.out, "response CSV")->required();

    CompareOpts cmp;
    auto* c = app.add_subcommand("stdp-compare", "Weight histograms during training under a chosen STDP rule");
    c->add_option("--rule", cmp.rule, "ours, kheradpisheh or shrestha")
        ->required()
        ->check(CLI::IsMember({"ours", "kheradpisheh", "shrestha"}));
    c->add_option("--config", cmp.config, "network config (INI)")->required()->check(existing);
    c->add_option("--data-dir", cmp.data_dir, "directory of event files")->required()->check(CLI::ExistingDirectory);
    c->add_option("--hist-out", cmp.hist_out, "histogram CSV")->required();
    c->add_option("--layer", cmp.layer, "trained layer (default: first plastic)");
    c->add_option("--seed", cmp.seed, "override the config seed");
    c->add_option("--max-presentations", cmp.max_presentations, "presentation budget");
    c->add_option("--workers", cmp.workers, "membrane integration threads")->check(CLI::Range(1u, 256u));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, log, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*g) return cmd_gen(gen, log);
        if (*t) return cmd_train(train, log);
        if (*i) return cmd_infer(infer, log);
        if (*e) return cmd_export(exp, log);
        if (*f) return cmd_flow(flow, log);
        if (*r) return cmd_response(resp, log);
        if (*c) return cmd_compare(cmp, log);
    } catch (const IoError& ex) {
        err << "spikeflow: " << ex.what() << '\n';
        return 2;
    } catch (const std::filesystem::filesystem_error& ex) {
        err << "spikeflow: " << ex.what() << '\n';
        return 2;
    } catch (const std::exception& ex) {
        err << "spikeflow: " << ex.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace spikeflow::cli
