#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "spikeflow/config.hpp"
#include "spikeflow/flow.hpp"
#include "spikeflow/kernel_export.hpp"
#include "spikeflow/network.hpp"
#include "spikeflow/response.hpp"

using namespace spikeflow;
namespace fs = std::filesystem;

namespace {

Kernel blank(int r, int m, int c = 1, int f = 1) { return Kernel(f, c, m, r, r, 0.0, false); }

// Textbook least squares: slope = sum((x - xbar)(d - dbar)) / sum((x - xbar)^2).
double ls_oracle(const std::vector<double>& d) {
    const double n = static_cast<double>(d.size());
    double xbar = (n - 1) / 2, dbar = 0;
    for (double v : d) dbar += v / n;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        num += (static_cast<double>(i) - xbar) * (d[i] - dbar);
        den += (static_cast<double>(i) - xbar) * (static_cast<double>(i) - xbar);
    }
    return num / den;
}

Kernel random_kernel(std::mt19937_64& rng, int r, int m, int c) {
    std::uniform_real_distribution<double> u(0, 1);
    Kernel k = blank(r, m, c);
    for (double& w : k.exc) w = u(rng);
    return k;
}

std::vector<double> linear_taus(int m, double lo, double hi) {
    LayerConfig L;
    L.m = m;
    L.tau_min = lo;
    L.tau_max = hi;
    return delay_slots(L);
}

Kernel mirror_x(const Kernel& k) {
    Kernel out = k;
    for (int c = 0; c < k.c; ++c)
        for (int d = 0; d < k.m; ++d)
            for (int y = 0; y < k.rh; ++y)
                for (int x = 0; x < k.rw; ++x) out.exc[out.index(0, c, d, y, x)] = k.exc[k.index(0, c, d, y, k.rw - 1 - x)];
    return out;
}

// new(y, x) = old(r - 1 - x, y)
Kernel rotate(const Kernel& k) {
    Kernel out = k;
    const int r = k.rw;
    for (int c = 0; c < k.c; ++c)
        for (int d = 0; d < k.m; ++d)
            for (int y = 0; y < r; ++y)
                for (int x = 0; x < r; ++x) out.exc[out.index(0, c, d, y, x)] = k.exc[k.index(0, c, d, r - 1 - x, y)];
    return out;
}

}  // namespace

TEST(SelectSlots, Examples) {
    EXPECT_EQ(select_slots(std::vector<double>(10, 2.0), 1.0).d_min, 0);
    EXPECT_EQ(select_slots(std::vector<double>(10, 2.0), 1.0).d_max, 9);
    EXPECT_EQ(select_slots(std::vector<double>(10, 2.0), 0.0).d_max, 9);

    std::vector<double> t(10, 0.1);
    t[2] = 3.0;
    t[7] = 2.0;
    SlotPair p = select_slots(t, 0.5);
    EXPECT_EQ(p.d_min, 2);
    EXPECT_EQ(p.d_max, 7);

    std::vector<double> one(6, 0.0);
    one[4] = 1.0;
    EXPECT_THROW(select_slots(one, 0.5), FlowError);
    EXPECT_THROW(select_slots(std::vector<double>{1.0}, 0.5), FlowError);
    EXPECT_THROW(select_slots(t, 1.5), std::invalid_argument);
    EXPECT_THROW(select_slots(t, -0.1), std::invalid_argument);
}

TEST(KernelFlow, IdenticalSlotsGiveZeroFlow) {
    std::mt19937_64 rng(3);
    Kernel k = random_kernel(rng, 5, 4, 1);
    for (int d = 1; d < k.m; ++d)
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 5; ++x) k.exc[k.index(0, 0, d, y, x)] = k.exc[k.index(0, 0, 0, y, x)];
    KernelFlow f = kernel_flow(k, 0, linear_taus(4, 1, 10), 0.5);
    EXPECT_EQ(f.u, 0.0);
    EXPECT_EQ(f.v, 0.0);
    EXPECT_EQ(f.theta_u, 0.0);
}

// Unit column at x = 1 in the 1 ms slot and at x = 3 in the 5 ms slot: the
// histogram difference is (0, -5, 0, 5, 0), whose least-squares slope is 1.
TEST(KernelFlow, HandComputedColumnShift) {
    Kernel k = blank(5, 2);
    for (int y = 0; y < 5; ++y) {
        k.exc[k.index(0, 0, 0, y, 1)] = 1.0;
        k.exc[k.index(0, 0, 1, y, 3)] = 1.0;
    }
    const double slope = ls_oracle({0, -5, 0, 5, 0});
    EXPECT_DOUBLE_EQ(slope, 1.0);
    KernelFlow f = kernel_flow(k, 0, {1.0, 5.0}, 0.5);
    EXPECT_EQ(f.tau_min, 1.0);
    EXPECT_EQ(f.tau_max, 5.0);
    EXPECT_DOUBLE_EQ(f.theta_u, slope);
    EXPECT_DOUBLE_EQ(f.u, slope / 4.0);
    EXPECT_GT(f.u, 0.0);
    EXPECT_EQ(f.v, 0.0);
    // centroid moves 2 px in 4 ms
    EXPECT_DOUBLE_EQ(f.rate_u, 0.5);
}

TEST(KernelFlow, SlopesMatchIndependentHistogramOracle) {
    std::mt19937_64 rng(5);
    for (int n = 0; n < 30; ++n) {
        const int r = 3 + static_cast<int>(rng() % 6), m = 2 + static_cast<int>(rng() % 6),
                  c = 1 + static_cast<int>(rng() % 2);
        Kernel k = random_kernel(rng, r, m, c);
        const auto taus = linear_taus(m, 1, 1 + 3 * (m - 1));
        KernelFlow f = kernel_flow(k, 0, taus, 0.0);
        std::vector<double> dx(r, 0.0), dy(r, 0.0);
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < r; ++y)
                for (int x = 0; x < r; ++x) {
                    const double diff = k.exc[k.index(0, ch, m - 1, y, x)] - k.exc[k.index(0, ch, 0, y, x)];
                    dx[x] += diff;
                    dy[y] += diff;
                }
        EXPECT_NEAR(f.theta_u, ls_oracle(dx), 1e-12);
        EXPECT_NEAR(f.theta_v, ls_oracle(dy), 1e-12);
        EXPECT_NEAR(f.u, ls_oracle(dx) / (taus.back() - taus.front()), 1e-12);
    }
}

TEST(KernelFlow, MirrorNegatesUExactly) {
    std::mt19937_64 rng(7);
    for (int n = 0; n < 50; ++n) {
        Kernel k = random_kernel(rng, 3 + static_cast<int>(rng() % 6), 2 + static_cast<int>(rng() % 5), 1 + static_cast<int>(rng() % 2));
        const auto taus = linear_taus(k.m, 1, 20);
        KernelFlow a = kernel_flow(k, 0, taus, 0.3), b = kernel_flow(mirror_x(k), 0, taus, 0.3);
        EXPECT_EQ(b.u, -a.u);
        EXPECT_EQ(b.v, a.v);
        EXPECT_EQ(b.rate_u, -a.rate_u);
    }
}

TEST(KernelFlow, RotationMapsFlowAccordingly) {
    std::mt19937_64 rng(9);
    for (int n = 0; n < 50; ++n) {
        Kernel k = random_kernel(rng, 3 + static_cast<int>(rng() % 6), 2 + static_cast<int>(rng() % 5), 1);
        const auto taus = linear_taus(k.m, 1, 20);
        KernelFlow a = kernel_flow(k, 0, taus, 0.3), b = kernel_flow(rotate(k), 0, taus, 0.3);
        EXPECT_NEAR(b.u, -a.v, 1e-12);
        EXPECT_NEAR(b.v, a.u, 1e-12);
    }
}

TEST(KernelFlow, UniformScalingKeepsDirection) {
    std::mt19937_64 rng(11);
    for (double c : {0.01, 0.7, 3.0, 250.0}) {
        Kernel k = random_kernel(rng, 5, 4, 1);
        Kernel s = k;
        for (double& w : s.exc) w *= c;
        const auto taus = linear_taus(4, 1, 10);
        KernelFlow a = kernel_flow(k, 0, taus, 0.5), b = kernel_flow(s, 0, taus, 0.5);
        EXPECT_NEAR(std::atan2(b.v, b.u), std::atan2(a.v, a.u), 1e-12);
        EXPECT_NEAR(b.u, c * a.u, 1e-12 * c);
        EXPECT_NEAR(b.rate_u, a.rate_u, 1e-12);
    }
}

TEST(KernelFlow, RejectsMismatchedDelayList) {
    Kernel k = blank(3, 3);
    EXPECT_THROW(kernel_flow(k, 0, {1.0, 2.0}, 0.5), std::invalid_argument);
}

TEST(Colorize, Examples) {
    auto zero = colorize({{0, 0}, {0, 0}});
    for (const auto& c : zero) {
        EXPECT_EQ(c.rgb, kNeutral);
        EXPECT_EQ(c.brightness, 0.0);
    }
    auto pair = colorize({{0.3, 0.1}, {-0.3, -0.1}});
    EXPECT_NEAR(std::fabs(pair[0].hue - pair[1].hue), 180.0, 1e-9);
    EXPECT_EQ(pair[0].brightness, 1.0);
    EXPECT_EQ(pair[1].brightness, 1.0);
    auto single = colorize({{0.0, -2.0}});
    EXPECT_EQ(single[0].brightness, 1.0);
    EXPECT_NEAR(single[0].hue, 270.0, 1e-12);
    EXPECT_EQ(colorize({{1, 0}})[0].rgb, (Rgb{255, 0, 0}));
    EXPECT_EQ(colorize({{0, 1}, {0, 0.5}})[1].rgb.b, 0);
}

TEST(Colorize, BrightnessBoundedWithSingleMaximum) {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g(0, 1);
    for (int n = 0; n < 100; ++n) {
        std::vector<std::pair<double, double>> flows(1 + rng() % 20);
        for (auto& [u, v] : flows) u = g(rng), v = g(rng);
        auto colors = colorize(flows);
        int at_one = 0;
        for (const auto& c : colors) {
            EXPECT_GE(c.brightness, 0.0);
            EXPECT_LE(c.brightness, 1.0);
            at_one += c.brightness == 1.0;
        }
        EXPECT_EQ(at_one, 1);
    }
}

TEST(FlowOutput, PpmAndCsvLayout) {
    auto colors = colorize({{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {0.5, 0.5}});
    std::ostringstream ppm;
    write_flow_ppm(ppm, colors);
    const std::string bytes = ppm.str();
    ASSERT_EQ(bytes.rfind("P6\n3 2\n255\n", 0), 0u);
    EXPECT_EQ(bytes.size(), std::string("P6\n3 2\n255\n").size() + 3 * 6);
    EXPECT_EQ(static_cast<unsigned char>(bytes[11]), 255);  // first pixel red
    EXPECT_EQ(bytes.substr(bytes.size() - 3), std::string(3, '\0'));  // padding is neutral

    std::ostringstream csv;
    write_flow_csv(csv, {KernelFlow{0.25, 0, 1, 0, 1, 5, 0.5, 0}}, 2.0);
    std::istringstream lines(csv.str());
    std::string comment, header, row;
    std::getline(lines, comment);
    std::getline(lines, header);
    std::getline(lines, row);
    EXPECT_EQ(comment[0], '#');
    EXPECT_NE(comment.find("multiply by 2"), std::string::npos);
    EXPECT_EQ(header, "kernel,u,v,theta_u,theta_v,tau_min_ms,tau_max_ms");
    EXPECT_EQ(row, "0,0.25,0,1,0,1,5");
}

TEST(KernelExport, WritesOneGridPerMapAndSlot) {
    const fs::path dir = fs::temp_directory_path() / "spikeflow_export_test";
    fs::remove_all(dir);
    Kernel k(2, 2, 3, 3, 4, 0.25, true);
    for (std::size_t i = 0; i < k.exc.size(); ++i) k.exc[i] = static_cast<double>(i) / k.exc.size();
    for (double& w : k.inh) w = -0.5;
    auto paths = export_kernels(k, 0.5, "ms", dir, KernelFormat::Csv);
    ASSERT_EQ(paths.size(), 6u);
    EXPECT_EQ(paths[4].filename(), "ms_k1_d1.csv");
    std::ifstream in(paths[4]);
    std::vector<double> vals;
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    }
    EXPECT_EQ(rows, 2 * 3);
    ASSERT_EQ(vals.size(), 24u);
    EXPECT_DOUBLE_EQ(vals[5], k.exc[k.index(1, 0, 1, 1, 1)] - 0.25);

    auto pgm = export_kernels(k, 0.0, "ms", dir, KernelFormat::Pgm);
    std::ifstream p(pgm[0], std::ios::binary);
    std::string magic;
    int w = 0, h = 0, maxv = 0;
    p >> magic >> w >> h >> maxv;
    EXPECT_EQ(magic, "P5");
    EXPECT_EQ(w, 4);
    EXPECT_EQ(h, 6);
    EXPECT_EQ(maxv, 255);
    EXPECT_EQ(fs::file_size(pgm[0]), std::string("P5\n4 6\n255\n").size() + 24);

    Kernel single(1, 1, 1, 2, 2, 0.5, false);
    EXPECT_EQ(export_kernels(single, 0, "ss", dir, KernelFormat::Csv)[0].filename(), "ss_k0.csv");
    fs::remove_all(dir);
}

TEST(Response, GridLayout) {
    auto g = flow_grid(-1, 1, 3, false);
    ASSERT_EQ(g.size(), 9u);
    EXPECT_EQ(g.front(), std::make_pair(-1.0, -1.0));
    EXPECT_EQ(g[1], std::make_pair(0.0, -1.0));
    auto axes = flow_grid(-2, 2, 5, true);
    EXPECT_EQ(axes.size(), 9u);
    for (auto [wx, wy] : axes) EXPECT_TRUE(wx == 0 || wy == 0);
    EXPECT_THROW(flow_grid(0, 1, 0, false), std::invalid_argument);
}

TEST(Response, ZeroMotionGivesZeroRates) {
    NetworkConfig cfg = checkerboard_config(16, 16);
    cfg.layers[0].r = 3;
    cfg.layers[2].r = 3;
    cfg.layers[2].m = 3;
    cfg.layers[2].tau_max = 5;
    cfg.layers[3].r = cfg.layers[3].s = 6;
    cfg.layers[0].neuron.v_th = cfg.layers[2].neuron.v_th = 0.05;
    Network net(cfg);
    ResponseStimulus stim;
    stim.pattern.size = 4;
    stim.duration_us = 50000;
    ResponseTable t = response_curve(net, 2, {{0.0, 0.0}, {3.0, 0.0}}, stim);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.layer, "msconv");
    ASSERT_EQ(t.rows[0].map_rates.size(), 16u);
    ASSERT_EQ(t.rows[0].dense_rates.size(), 16u);
    for (double r : t.rows[0].map_rates) EXPECT_EQ(r, 0.0);
    for (double r : t.rows[0].dense_rates) EXPECT_EQ(r, 0.0);
    double moving = 0;
    for (double r : t.rows[1].map_rates) moving += r;
    EXPECT_GT(moving, 0.0);

    std::ostringstream csv;
    write_response_csv(csv, t);
    std::string header;
    std::getline(std::istringstream(csv.str()) >> std::ws, header);
    EXPECT_EQ(header.rfind("wx,wy,msconv_k0,", 0), 0u);
    EXPECT_NE(header.find("dense_n15"), std::string::npos);
}
