#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "spikeflow/events.hpp"

using namespace spikeflow;

namespace {

EventStream random_stream(std::uint64_t seed, int w, int h, std::size_t n) {
    std::mt19937_64 rng(seed);
    EventStream s{w, h, 100000, {}};
    std::uniform_int_distribution<int> xs(0, w - 1), ys(0, h - 1);
    std::uniform_int_distribution<std::int64_t> ts(0, 99999);
    for (std::size_t i = 0; i < n; ++i)
        s.events.push_back({ts(rng), xs(rng), ys(rng), static_cast<std::int8_t>(rng() % 2 ? 1 : -1)});
    s.sort();
    return s;
}

// Seed whose flips match the requested pattern.
std::uint64_t seed_for(bool h, bool v, bool p) {
    for (std::uint64_t s = 0;; ++s) {
        Flips f = draw_flips(s);
        if (f.horizontal == h && f.vertical == v && f.polarity == p) return s;
    }
}

// Brute-force pixel intensity: the checkerboard sampled on a dense subpixel
// grid instead of the closed-form box integral.
double supersampled_checker(double x0, double y0, double size, double dark, int n) {
    double acc = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double x = x0 + (i + 0.5) / n, y = y0 + (j + 0.5) / n;
            const bool bx = std::fmod(std::floor(x / size), 2.0) == 0;
            const bool by = std::fmod(std::floor(y / size), 2.0) == 0;
            acc += bx == by ? dark : 1.0;
        }
    return acc / (n * n);
}

std::vector<std::int64_t> pixel_times(const EventStream& s, int x, int y) {
    std::vector<std::int64_t> t;
    for (const Event& e : s.events)
        if (e.x == x && e.y == y) t.push_back(e.t);
    return t;
}

// Start times of event groups separated by more than `gap` microseconds.
std::vector<std::int64_t> burst_onsets(const std::vector<std::int64_t>& t, std::int64_t gap) {
    std::vector<std::int64_t> on;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (i == 0 || t[i] - t[i - 1] > gap) on.push_back(t[i]);
    return on;
}

}  // namespace

TEST(EventStream, ValidateRejectsBadEvents) {
    EventStream s{4, 4, 100, {{0, 0, 0, 1}, {5, 3, 3, -1}}};
    EXPECT_NO_THROW(validate(s));
    auto bad = s;
    bad.events[1].p = 0;
    EXPECT_THROW(validate(bad), EventError);
    bad = s;
    bad.events[1].x = 4;
    EXPECT_THROW(validate(bad), EventError);
    bad = s;
    bad.events[0].t = 10;
    EXPECT_THROW(validate(bad), EventError);
    bad = s;
    bad.width = 0;
    EXPECT_THROW(validate(bad), EventError);
}

TEST(EventStream, SortOrdersByTimeThenRowColumnPolarity) {
    EventStream s{4, 4, 10, {{1, 2, 0, 1}, {1, 1, 0, 1}, {0, 3, 3, 1}, {1, 1, 0, -1}, {1, 0, 1, 1}}};
    s.sort();
    const std::vector<Event> want = {{0, 3, 3, 1}, {1, 1, 0, -1}, {1, 1, 0, 1}, {1, 2, 0, 1}, {1, 0, 1, 1}};
    EXPECT_EQ(s.events, want);
}

TEST(FlowObservables, MatchesVentralFlowDefinition) {
    auto f = flow_observables({0, 0, 0, 1});
    EXPECT_EQ(f.wx, 0);
    EXPECT_EQ(f.wy, 0);
    EXPECT_EQ(f.D, 0);
    f = flow_observables({0.4, 0, 0, 1});
    EXPECT_DOUBLE_EQ(f.wx, -0.4);
    EXPECT_DOUBLE_EQ(f.wy, 0);
    EXPECT_DOUBLE_EQ(f.D, 0);
    f = flow_observables({1, 2, 3, 2});
    EXPECT_DOUBLE_EQ(f.wx, -0.5);
    EXPECT_DOUBLE_EQ(f.wy, -1.0);
    EXPECT_DOUBLE_EQ(f.D, 3.0);
    EXPECT_THROW(flow_observables({0, 0, 0, 0}), std::invalid_argument);
    auto m = flow_observables(motion_from_flow(1.5, -0.25, 0.5));
    EXPECT_DOUBLE_EQ(m.wx, 1.5);
    EXPECT_DOUBLE_EQ(m.wy, -0.25);
    EXPECT_DOUBLE_EQ(m.D, 0.5);
}

TEST(Generator, StaticSceneEmitsNothing) {
    for (double c : {0.01, 0.15, 0.5}) {
        CameraModel cam;
        cam.contrast = c;
        EXPECT_TRUE(generate_events(Pattern{}, motion_from_flow(0, 0), cam, 50000, 16, 16).events.empty());
    }
}

TEST(Generator, BrightnessDoublingAtLnTwoGivesOneEventPerPixel) {
    CameraModel cam;
    cam.contrast = std::log(2.0);
    auto scene = [](int, int, double t) { return t >= 0.001 ? 0.6 : 0.3; };
    EventStream s = render_events(scene, cam, 3000, 5, 4);
    ASSERT_EQ(s.events.size(), 20u);
    for (const Event& e : s.events) {
        EXPECT_EQ(e.p, 1);
        EXPECT_EQ(e.t, 1000);
    }
}

TEST(Generator, RejectsInvalidArguments) {
    CameraModel cam;
    EXPECT_THROW(generate_events(Pattern{}, {}, cam, 0, 8, 8), std::invalid_argument);
    EXPECT_THROW(generate_events(Pattern{}, {}, cam, 10, 0, 8), std::invalid_argument);
    cam.contrast = 0;
    EXPECT_THROW(generate_events(Pattern{}, {}, cam, 10, 8, 8), std::invalid_argument);
}

TEST(Generator, OutputSatisfiesStreamInvariants) {
    Pattern pat;
    pat.size = 5;
    for (auto [wx, wy] : {std::pair{1.0, 0.0}, {0.0, -2.0}, {1.5, 0.7}}) {
        EventStream s = generate_events(pat, motion_from_flow(wx, wy), CameraModel{}, 100000, 20, 12);
        EXPECT_NO_THROW(validate(s));
        EXPECT_FALSE(s.events.empty());
        EXPECT_TRUE(std::is_sorted(s.events.begin(), s.events.end(), event_order));
        for (const Event& e : s.events) EXPECT_LT(e.t, s.duration);
    }
}

// A step edge moving at 1 px per 10 ms: consecutive pixels along the motion
// start their bursts 10 ms apart, and every burst onset lies within one frame
// of the first threshold crossing found by a supersampled brute-force oracle.
TEST(Generator, StepEdgeBurstPeriodMatchesSupersampledOracle) {
    Pattern pat;
    pat.size = 16;
    CameraModel cam;
    cam.contrast = 0.05;
    const double wx = 1.0;  // image content moves by focal * wx * t: +0.1 px/ms
    const int W = 32, H = 4;
    EventStream s = generate_events(pat, motion_from_flow(wx, 0), cam, 120000, W, H);

    const double cx = W / 2.0, cy = H / 2.0;
    auto oracle_onset = [&](int x, int y) {
        // First time on a 0.05 ms grid where |log I - log I0| reaches C.
        const double i0 = std::log(supersampled_checker(x - cx, y - cy, pat.size, pat.dark, 64));
        for (int k = 1; k <= 120 * 20; ++k) {
            const double t = k * 0.05e-3;
            const double shift = cam.focal_px * wx * t;
            const double li = std::log(supersampled_checker(x - cx - shift, y - cy, pat.size, pat.dark, 64));
            if (std::fabs(li - i0) >= cam.contrast) return t * 1e6;
        }
        return -1.0;
    };

    // The edge at texture x = 0 starts at pixel 16 and moves right.
    std::vector<std::int64_t> onsets;
    for (int x = 17; x < 27; ++x) {
        auto b = burst_onsets(pixel_times(s, x, 1), 5000);
        ASSERT_FALSE(b.empty()) << "pixel " << x;
        onsets.push_back(b.front());
        const double want = oracle_onset(x, 1);
        ASSERT_GT(want, 0);
        EXPECT_NEAR(static_cast<double>(b.front()), want, 1000.0) << "pixel " << x;
        int pol = 0;
        for (const Event& e : s.events)
            if (e.x == x && e.y == 1 && e.t < b.front() + 10000) {
                if (!pol) pol = e.p;
                EXPECT_EQ(e.p, pol) << "burst of pixel " << x << " mixes polarities";
            }
    }
    for (std::size_t i = 1; i < onsets.size(); ++i) EXPECT_NEAR(onsets[i] - onsets[i - 1], 10000, 1000);
}

TEST(Generator, FixedPixelPeriodIsConstantUnderTranslation) {
    Pattern pat;
    pat.size = 4;
    CameraModel cam;
    cam.contrast = 0.1;
    // 0.2 px/ms: an edge passes every 4 px = 20 ms
    EventStream s = generate_events(pat, motion_from_flow(2.0, 0), cam, 200000, 16, 4);
    auto on = burst_onsets(pixel_times(s, 5, 1), 3000);
    ASSERT_GE(on.size(), 6u);
    for (std::size_t i = 2; i < on.size(); ++i) EXPECT_NEAR(on[i] - on[i - 1], 20000, 1000);
}

// Point-symmetric checkerboard: moving the other way mirrors the movie through
// the image center, so counts per polarity agree exactly.
TEST(Generator, ReversedMotionPreservesEventCounts) {
    Pattern pat;
    pat.size = 6;
    for (auto [wx, wy] : {std::pair{1.3, 0.0}, {0.4, -0.9}}) {
        EventStream a = generate_events(pat, motion_from_flow(wx, wy), CameraModel{}, 80000, 24, 24);
        EventStream b = generate_events(pat, motion_from_flow(-wx, -wy), CameraModel{}, 80000, 24, 24);
        ASSERT_EQ(a.events.size(), b.events.size());
        std::map<std::pair<int, int>, int> pa, pb;
        for (const Event& e : a.events) ++pa[{e.p, 0}];
        for (const Event& e : b.events) ++pb[{e.p, 0}];
        EXPECT_EQ(pa, pb);
    }
}

// Playing a closed trajectory backwards swaps every crossing's direction: the
// event count is unchanged and polarity counts swap.
TEST(Generator, TimeReversalWithPolarityFlipPreservesCount) {
    Pattern pat;
    pat.size = 4;
    CameraModel cam;
    const double wx = 1.0;                        // 0.1 px/ms
    const std::int64_t T = 80000;                 // one full period of 8 px
    PlanarScene fwd(pat, motion_from_flow(wx, 0), cam, 16, 8);
    auto bwd = [&](int x, int y, double t) { return fwd(x, y, T * 1e-6 - t); };
    EventStream a = render_events(fwd, cam, T, 16, 8);
    EventStream b = render_events(bwd, cam, T, 16, 8);
    ASSERT_FALSE(a.events.empty());
    EXPECT_EQ(a.events.size(), b.events.size());
    auto positives = [](const EventStream& s) {
        return std::count_if(s.events.begin(), s.events.end(), [](const Event& e) { return e.p > 0; });
    };
    EXPECT_EQ(positives(a), static_cast<long>(b.events.size()) - positives(b));
}

TEST(Augment, AllFlipsExample) {
    EventStream s{4, 4, 10, {{5, 0, 0, 1}}};
    EventStream out = augment(s, seed_for(true, true, true));
    ASSERT_EQ(out.events.size(), 1u);
    EXPECT_EQ(out.events[0], (Event{5, 3, 3, -1}));
}

TEST(Augment, NoFlipsIsIdentity) {
    EventStream s = random_stream(3, 9, 7, 300);
    EXPECT_EQ(augment(s, seed_for(false, false, false)), s);
}

TEST(Augment, FlipsAreInvolutions) {
    EventStream s = random_stream(4, 9, 7, 300);
    for (std::uint64_t seed = 0; seed < 16; ++seed) EXPECT_EQ(augment(augment(s, seed), seed), s);
}

TEST(Augment, PreservesCountAndTimestampMultiset) {
    for (std::uint64_t seed = 0; seed < 32; ++seed) {
        EventStream s = random_stream(seed + 100, 11, 5, 500);
        EventStream out = augment(s, seed);
        ASSERT_EQ(out.events.size(), s.events.size());
        std::vector<std::int64_t> a, b;
        for (const Event& e : s.events) a.push_back(e.t);
        for (const Event& e : out.events) b.push_back(e.t);
        EXPECT_EQ(a, b);  // both sorted by time
        EXPECT_NO_THROW(validate(out));
    }
}

TEST(Augment, FlipDrawsCoverAllCombinations) {
    std::map<int, int> seen;
    for (std::uint64_t s = 0; s < 256; ++s) {
        Flips f = draw_flips(s);
        ++seen[f.horizontal * 4 + f.vertical * 2 + f.polarity];
    }
    EXPECT_EQ(seen.size(), 8u);
}

TEST(Downsample, Examples) {
    EventStream one{1, 1, 10, {{2, 0, 0, 1}}};
    EXPECT_EQ(downsample_half(one), one);
    EventStream s{8, 8, 10, {{1, 7, 5, -1}}};
    EventStream d = downsample_half(s);
    EXPECT_EQ(d.width, 4);
    EXPECT_EQ(d.height, 4);
    EXPECT_EQ(d.events[0], (Event{1, 3, 2, -1}));
}

// Oracle: halve coordinates, then sort by (t, y, x, p) with a stable sort.
TEST(Downsample, TieOrderMatchesOracle) {
    EventStream s{4, 4, 10, {{3, 1, 1, 1}, {3, 0, 0, -1}, {3, 0, 0, 1}}};
    EventStream d = downsample_half(s);
    const std::vector<Event> want = {{3, 0, 0, -1}, {3, 0, 0, 1}, {3, 0, 0, 1}};
    EXPECT_EQ(d.events, want);
    EventStream two{2, 2, 10, {{0, 0, 0, 1}, {0, 1, 1, 1}}};
    EventStream d2 = downsample_half(two);
    ASSERT_EQ(d2.events.size(), 2u);
    EXPECT_EQ(d2.events[0], (Event{0, 0, 0, 1}));
    EXPECT_EQ(d2.events[1], (Event{0, 0, 0, 1}));
}

TEST(Downsample, StaysInsideHalvedGrid) {
    for (int w : {1, 2, 5, 8, 13})
        for (int h : {1, 3, 8}) {
            EventStream d = downsample_half(random_stream(w * 31 + h, w, h, 200));
            EXPECT_EQ(d.width, (w + 1) / 2);
            EXPECT_EQ(d.height, (h + 1) / 2);
            EXPECT_NO_THROW(validate(d));
        }
}

TEST(Pattern, NoiseTextureIsDeterministicAndBounded) {
    Pattern pat;
    pat.kind = PatternKind::Noise;
    pat.size = 6;
    pat.seed = 9;
    for (double x = -20; x < 20; x += 1.7) {
        const double v = box_intensity(pat, x, x + 1, 0.3, 1.3);
        EXPECT_GE(v, pat.dark);
        EXPECT_LE(v, pat.bright);
        EXPECT_EQ(v, box_intensity(pat, x, x + 1, 0.3, 1.3));
    }
    Pattern other = pat;
    other.seed = 10;
    EXPECT_NE(box_intensity(pat, 0, 1, 0, 1), box_intensity(other, 0, 1, 0, 1));
}

TEST(Pattern, BarDarkensOnlyItsStripe) {
    Pattern bar;
    bar.kind = PatternKind::Bar;
    bar.size = 2;
    EXPECT_DOUBLE_EQ(box_intensity(bar, -0.5, 0.5, 0, 1), bar.dark);
    EXPECT_DOUBLE_EQ(box_intensity(bar, 3, 4, 0, 1), bar.bright);
    EXPECT_DOUBLE_EQ(box_intensity(bar, 0.5, 1.5, 0, 1), 0.5 * (bar.dark + bar.bright));
}
