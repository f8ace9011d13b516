#pragma once

// SPKWTS01 weights container.
//
//   magic "SPKWTS01" | u32 version | u32 layer count | u32 config length, config text
//   per layer: u32 name length, name | u8 kind | u32 f, c, m, rh, rw, stride
//              | f64 tau[m] | u8 has_inh | f64 exc[f*c*m*rh*rw] | f64 inh[...] if has_inh
//
// All integers and floats are little-endian. The embedded config text makes a
// weights file self-contained: the network can be rebuilt from it alone.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spikeflow/config.hpp"
#include "spikeflow/fileutil.hpp"
#include "spikeflow/layers.hpp"
#include "spikeflow/network.hpp"

namespace spikeflow {

inline constexpr std::array<char, 8> kWeightsMagic = {'S', 'P', 'K', 'W', 'T', 'S', '0', '1'};
inline constexpr std::uint32_t kWeightsVersion = 1;

struct LayerWeights {
    std::string name;
    LayerKind kind = LayerKind::SSConv;
    int stride = 1;
    std::vector<double> tau;
    Kernel kernel;
};

struct WeightsFile {
    NetworkConfig config;
    std::vector<LayerWeights> layers;
};

namespace detail {

inline void write_string(std::ostream& out, const std::string& s) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in, std::size_t limit) {
    auto n = read_le<std::uint32_t>(in);
    if (n > limit) throw FormatError("string field too long");
    std::string s(n, '\0');
    if (n && !in.read(s.data(), n)) throw FormatError("truncated file");
    return s;
}

inline void write_doubles(std::ostream& out, const std::vector<double>& v) {
    for (double x : v) write_le<double>(out, x);
}

inline std::vector<double> read_doubles(std::istream& in, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = read_le<double>(in);
    return v;
}

}  // namespace detail

inline WeightsFile snapshot(const Network& net) {
    WeightsFile wf;
    wf.config = net.config();
    for (std::size_t i = 0; i < net.size(); ++i) {
        const ConvLayer& l = net.layer(i);
        wf.layers.push_back({l.config().name, l.config().kind, l.stride(), l.delays_ms(), l.kernel()});
    }
    return wf;
}

inline void write_weights(const WeightsFile& wf, std::ostream& out) {
    out.write(kWeightsMagic.data(), 8);
    write_le<std::uint32_t>(out, kWeightsVersion);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(wf.layers.size()));
    detail::write_string(out, format_config(wf.config));
    for (const LayerWeights& L : wf.layers) {
        detail::write_string(out, L.name);
        write_le<std::uint8_t>(out, static_cast<std::uint8_t>(L.kind));
        const Kernel& k = L.kernel;
        for (int d : {k.f, k.c, k.m, k.rh, k.rw, L.stride}) write_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
        detail::write_doubles(out, L.tau);
        write_le<std::uint8_t>(out, k.has_inh() ? 1 : 0);
        detail::write_doubles(out, k.exc);
        if (k.has_inh()) detail::write_doubles(out, k.inh);
    }
}

inline WeightsFile read_weights(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), 8) || magic != kWeightsMagic) throw FormatError("bad weights file magic");
    auto version = read_le<std::uint32_t>(in);
    if (version != kWeightsVersion)
        throw FormatError("unsupported weights file version " + std::to_string(version) + " (reader supports " +
                          std::to_string(kWeightsVersion) + ")");
    auto count = read_le<std::uint32_t>(in);
    WeightsFile wf;
    try {
        wf.config = parse_config_string(detail::read_string(in, 1u << 20));
    } catch (const ConfigError& e) {
        throw FormatError(std::string("embedded config: ") + e.what());
    }
    if (count != wf.config.layers.size()) throw FormatError("layer count does not match embedded config");
    for (std::uint32_t i = 0; i < count; ++i) {
        LayerWeights L;
        L.name = detail::read_string(in, 4096);
        auto kind = read_le<std::uint8_t>(in);
        if (kind > static_cast<std::uint8_t>(LayerKind::Dense)) throw FormatError("unknown layer kind tag");
        L.kind = static_cast<LayerKind>(kind);
        std::array<std::uint32_t, 6> dims{};
        for (auto& d : dims) {
            d = read_le<std::uint32_t>(in);
            if (d == 0 || d > (1u << 16)) throw FormatError("implausible layer dimension");
        }
        Kernel& k = L.kernel;
        k.f = int(dims[0]), k.c = int(dims[1]), k.m = int(dims[2]), k.rh = int(dims[3]), k.rw = int(dims[4]);
        L.stride = int(dims[5]);
        L.tau = detail::read_doubles(in, k.m);
        auto has_inh = read_le<std::uint8_t>(in);
        const std::size_t n = std::size_t(k.f) * k.map_size();
        if (n > (std::size_t(1) << 28)) throw FormatError("implausible kernel size");
        k.exc = detail::read_doubles(in, n);
        if (has_inh) k.inh = detail::read_doubles(in, n);
        wf.layers.push_back(std::move(L));
    }
    return wf;
}

inline void save_weights(const Network& net, const std::filesystem::path& path) {
    WeightsFile wf = snapshot(net);
    atomic_write(path, [&](std::ostream& out) { write_weights(wf, out); });
}

inline WeightsFile load_weights_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_weights(in);
}

/// Copies stored kernels into a network built from a compatible config.
inline void apply_weights(Network& net, const WeightsFile& wf) {
    if (wf.layers.size() != net.size()) throw FormatError("weights file has a different layer count");
    for (std::size_t i = 0; i < net.size(); ++i) {
        const LayerWeights& L = wf.layers[i];
        ConvLayer& l = net.layer(i);
        if (L.kind != l.config().kind || L.name != l.config().name)
            throw FormatError("weights for layer '" + L.name + "' do not match layer '" + l.config().name + "'");
        try {
            l.set_kernel(L.kernel);
        } catch (const std::invalid_argument& e) {
            throw FormatError(e.what());
        }
    }
}

/// Rebuilds the network stored in a weights file.
inline Network load_network(const std::filesystem::path& path) {
    WeightsFile wf = load_weights_file(path);
    Network net(wf.config);
    apply_weights(net, wf);
    return net;
}

}  // namespace spikeflow
