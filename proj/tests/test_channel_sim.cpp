#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "revelio/channel_sim.hpp"
#include "revelio/fixtures.hpp"

using namespace revelio;

namespace {

/// Overlap weights by dense sampling of the exposure window.
std::map<std::size_t, double> sampled_weights(std::size_t k, double phase, double exposure, std::size_t count) {
    const int samples = 200000;
    std::map<std::size_t, double> w;
    const double start = k / 2.0 + phase, len = exposure / 2.0;
    for (int i = 0; i < samples; ++i) {
        const double t = start + (i + 0.5) * len / samples;
        w[std::min(static_cast<std::size_t>(std::floor(t)), count - 1)] += 1.0 / samples;
    }
    return w;
}

FrameBuffer random_frame(int w, int h, std::uint32_t seed) {
    FrameBuffer f(w, h);
    std::mt19937 rng(seed);
    for (auto& b : f.bytes()) b = static_cast<std::uint8_t>(rng() & 0xFF);
    return f;
}

ChannelProfile small_profile(int w, int h) {
    ChannelProfile p;
    p.camera_width = w;
    p.camera_height = h;
    p.screen_quad = Quad::rectangle(w, h);
    return p;
}

} // namespace

TEST(TemporalResample, InstantShutterSamplesEachFrameTwice) {
    for (std::size_t k = 0; k < 20; ++k) {
        const auto w = blend_weights(k, 0.0, kInstantExposure, 10);
        ASSERT_EQ(w.size(), 1u);
        EXPECT_EQ(w[0].first, k / 2);
        EXPECT_DOUBLE_EQ(w[0].second, 1.0);
    }
}

TEST(TemporalResample, WeightsMatchSampledOverlap) {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> phase(0.0, 0.999), exposure(0.01, 1.0);
    for (int t = 0; t < 200; ++t) {
        const double ph = phase(rng), ex = exposure(rng);
        const std::size_t k = static_cast<std::size_t>(t % 37);
        const auto w = blend_weights(k, ph, ex, 20);
        const auto ref = sampled_weights(k, ph, ex, 20);
        double sum = 0.0;
        for (const auto& [idx, weight] : w) {
            sum += weight;
            ASSERT_NEAR(weight, ref.count(idx) ? ref.at(idx) : 0.0, 1e-3);
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
        EXPECT_LE(w.size(), 2u);
    }
}

TEST(TemporalResample, HalfFramePhaseAndFullExposure) {
    // Window [k/2 + 0.5, k/2 + 1]: one display frame per camera frame.
    for (std::size_t k = 0; k < 8; ++k) {
        const auto w = blend_weights(k, 0.5, 1.0, 100);
        ASSERT_EQ(w.size(), 1u);
        EXPECT_EQ(w[0].first, (k + 1) / 2);
    }
    // Quarter-frame phase: odd camera frames straddle two display frames evenly.
    for (std::size_t k = 1; k < 8; k += 2) {
        const auto w = blend_weights(k, 0.25, 1.0, 100);
        ASSERT_EQ(w.size(), 2u);
        EXPECT_NEAR(w[0].second, 0.5, 1e-12);
        EXPECT_NEAR(w[1].second, 0.5, 1e-12);
    }
}

TEST(TemporalResample, BlendStaysWithinContributors) {
    std::vector<FrameBuffer> d;
    for (std::uint32_t i = 0; i < 6; ++i) d.push_back(random_frame(16, 9, i));
    const auto cam = temporal_resample(d, 0.3, 0.8);
    ASSERT_EQ(cam.size(), 12u);
    for (std::size_t k = 0; k < cam.size(); ++k) {
        const auto w = blend_weights(k, 0.3, 0.8, d.size());
        for (std::size_t i = 0; i < cam[k].bytes().size(); ++i) {
            int lo = 255, hi = 0;
            for (const auto& [idx, weight] : w) {
                lo = std::min<int>(lo, d[idx].bytes()[i]);
                hi = std::max<int>(hi, d[idx].bytes()[i]);
            }
            ASSERT_GE(cam[k].bytes()[i], lo);
            ASSERT_LE(cam[k].bytes()[i], hi);
        }
    }
}

TEST(Warp, FullFrameQuadIsTransparent) {
    const FrameBuffer f = random_frame(kFrameWidth, kFrameHeight, 3);
    EXPECT_EQ(warp_to_camera(f, ChannelProfile{}), f);
    // General path with a quad a hair off the identity.
    ChannelProfile p;
    p.screen_quad.corners[2] = {kFrameWidth + 1e-7, kFrameHeight + 1e-7};
    const FrameBuffer g = warp_to_camera(f, p);
    int worst = 0;
    for (std::size_t i = 0; i < f.bytes().size(); ++i) worst = std::max(worst, std::abs(f.bytes()[i] - g.bytes()[i]));
    EXPECT_LE(worst, 1);
}

TEST(Warp, QuarterOccupancyStaysCentral) {
    ChannelProfile p;
    p.screen_quad = view_quad(0.25, 0.0);
    const FrameBuffer white(kFrameWidth, kFrameHeight, {255, 255, 255});
    const FrameBuffer cam = warp_to_camera(white, p);
    for (int y = 0; y < kFrameHeight; ++y)
        for (int x = 0; x < kFrameWidth; ++x) {
            const bool central = x >= kFrameWidth / 4 && x < 3 * kFrameWidth / 4 && y >= kFrameHeight / 4 &&
                                 y < 3 * kFrameHeight / 4;
            if (central)
                ASSERT_EQ(cam.pixel(x, y), (SrgbPixel{255, 255, 255})) << x << "," << y;
            else
                ASSERT_EQ(cam.pixel(x, y), p.background) << x << "," << y;
        }
}

TEST(Warp, DegenerateQuadIsRejected) {
    ChannelProfile p;
    p.screen_quad = {{Point2{0, 0}, Point2{10, 10}, Point2{20, 20}, Point2{0, 30}}};
    EXPECT_THROW(validate(p), Error);
}

TEST(Degrade, IdentityProfileIsTransparent) {
    const FrameBuffer f = random_frame(64, 36, 4);
    EXPECT_EQ(degrade(f, small_profile(64, 36), 0), f);
}

TEST(Degrade, NoiseHasHalfNormalMeanDeviation) {
    const FrameBuffer gray(kFrameWidth, kFrameHeight, {128, 128, 128});
    ChannelProfile p;
    p.noise_sigma = 2.0;
    p.seed = 17;
    const FrameBuffer noisy = degrade(gray, p, 5);
    double mad = 0.0;
    for (auto b : noisy.bytes()) mad += std::abs(b - 128);
    mad /= static_cast<double>(noisy.bytes().size());
    // sigma * sqrt(2/pi), plus the small bias from rounding to integers.
    EXPECT_NEAR(mad, 2.0 * std::sqrt(2.0 / std::numbers::pi), 0.05);

    EXPECT_EQ(degrade(gray, p, 5), noisy);
    EXPECT_NE(degrade(gray, p, 6), noisy);
    p.seed = 18;
    EXPECT_NE(degrade(gray, p, 5), noisy);
}

TEST(Degrade, ToneCurveOrder) {
    const FrameBuffer f(4, 4, {100, 150, 200});
    ChannelProfile p = small_profile(4, 4);
    p.contrast = 1.2;
    p.brightness = -10;
    p.gamma = 1.1;
    const FrameBuffer g = degrade(f, p, 0);
    auto expect = [&](double v) {
        const double a = 1.2 * (v - 127.5) + 127.5 - 10;
        return quantize_channel(255.0 * std::pow(std::clamp(a / 255.0, 0.0, 1.0), 1.1));
    };
    EXPECT_EQ(g.pixel(0, 0), (SrgbPixel{expect(100), expect(150), expect(200)}));

    ChannelProfile blur = small_profile(4, 4);
    blur.blur_radius = 1.5;
    EXPECT_EQ(degrade(f, blur, 0), f);  // blurring a flat frame changes nothing
}

TEST(Simulate, IdentityDuplicatesEachFrame) {
    std::vector<FrameBuffer> d;
    for (std::uint32_t i = 0; i < 5; ++i) d.push_back(random_frame(32, 18, 10 + i));
    const auto rec = simulate(d, small_profile(32, 18));
    ASSERT_EQ(rec.size(), 10u);
    for (std::size_t k = 0; k < rec.size(); ++k) EXPECT_EQ(rec[k], d[k / 2]);
}

TEST(Simulate, RateDoublesAndRunsAreDeterministic) {
    std::vector<FrameBuffer> d;
    for (std::uint32_t i = 0; i < 60; ++i) d.push_back(random_frame(24, 14, 100 + i));
    ChannelProfile p = small_profile(24, 14);
    p.phase = 0.3;
    p.exposure = 0.8;
    p.noise_sigma = 2.0;
    p.seed = 42;
    p.screen_quad = {{Point2{2, 1}, Point2{22, 0.5}, Point2{23, 13}, Point2{1, 12}}};
    const auto a = simulate(d, p);
    const auto b = simulate(d, p);
    ASSERT_EQ(a.size(), 120u);
    EXPECT_EQ(a, b);

    // Random access through the lazy recording reproduces the same frames.
    SimulatedRecording lazy(d, p);
    for (std::size_t k : {77u, 3u, 119u, 4u, 0u, 78u}) EXPECT_EQ(lazy.frame(k), a[k]);
    EXPECT_THROW(lazy.frame(120), Error);
}

TEST(ViewQuad, OccupancyAndSymmetry) {
    const Quad full = view_quad(1.0, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(full.corners[i].x, Quad::rectangle(kFrameWidth, kFrameHeight).corners[i].x, 1e-6);
        EXPECT_NEAR(full.corners[i].y, Quad::rectangle(kFrameWidth, kFrameHeight).corners[i].y, 1e-6);
    }
    const double area = kFrameWidth * kFrameHeight;
    EXPECT_NEAR(view_quad(0.5, 30.0).signed_area(), 0.5 * area, 1e-6 * area);
    EXPECT_NEAR(view_quad(0.25, -40.0).signed_area(), 0.25 * area, 1e-6 * area);
    // Yawed full occupancy cannot fit, so it shrinks to the frame.
    EXPECT_LT(view_quad(1.0, 30.0).signed_area(), area);

    const Quad left = view_quad(0.5, -30.0), right = view_quad(0.5, 30.0);
    for (std::size_t i = 0; i < 4; ++i) {
        const Point2 mirrored = right.corners[i == 0 ? 1 : i == 1 ? 0 : i == 2 ? 3 : 2];
        EXPECT_NEAR(left.corners[i].x, kFrameWidth - mirrored.x, 1e-6);
        EXPECT_NEAR(left.corners[i].y, mirrored.y, 1e-6);
    }
    for (double yaw : {-40.0, 0.0, 40.0})
        for (double pitch : {-20.0, 0.0, 20.0}) {
            const Quad q = view_quad(0.75, yaw, pitch);
            EXPECT_TRUE(q.is_convex());
            for (const Point2& c : q.corners) {
                EXPECT_GE(c.x, -1e-6);
                EXPECT_LE(c.x, kFrameWidth + 1e-6);
                EXPECT_GE(c.y, -1e-6);
                EXPECT_LE(c.y, kFrameHeight + 1e-6);
            }
        }
    EXPECT_THROW(view_quad(0.0, 0.0), Error);
    EXPECT_THROW(view_quad(1.5, 0.0), Error);
}

TEST(Presets, NamesResolve) {
    EXPECT_EQ(preset_profile("identity"), ChannelProfile{});
    const ChannelProfile p = preset_profile("occ75_yaw30");
    EXPECT_EQ(p.screen_quad, view_quad(0.75, 30.0));
    EXPECT_DOUBLE_EQ(p.phase, 0.3);
    EXPECT_DOUBLE_EQ(p.exposure, 0.8);
    EXPECT_DOUBLE_EQ(p.noise_sigma, 2.0);
    EXPECT_EQ(preset_profile("occ50_yaw-20_pitch10").screen_quad, view_quad(0.5, -20.0, 10.0));
    for (const auto& name : preset_names()) EXPECT_NO_THROW(validate(preset_profile(name))) << name;
    EXPECT_EQ(preset_names().size(), 29u);
    for (const char* bad : {"", "occ", "occ75", "occ75_yaw", "occ0_yaw0", "occ101_yaw0", "occ75_yaw30x", "tv"}) {
        try {
            preset_profile(bad);
            FAIL() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidConfig) << bad;
        }
    }
}

TEST(Presets, ProfileValidation) {
    ChannelProfile p;
    p.exposure = 0.0;
    EXPECT_THROW(validate(p), Error);
    p = {};
    p.phase = 1.0;
    EXPECT_THROW(validate(p), Error);
    p = {};
    p.noise_sigma = -1.0;
    EXPECT_THROW(validate(p), Error);
    EXPECT_NO_THROW(validate(ChannelProfile{}));
}

TEST(Fixtures, DriftingTextureMatchesPerFrameRender) {
    const auto clip = make_fixture(FixtureKind::Natural, 3, 7, 64, 32);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(clip[i], fixture_frame(FixtureKind::Natural, i, 7, 64, 32));
    const auto checker = make_fixture(FixtureKind::Checker, 2, 1, 200, 100);
    EXPECT_NE(checker[0], checker[1]);
    const FrameBuffer card = full_gamut_card();
    EXPECT_EQ(card.pixel(0), (SrgbPixel{16, 16, 16}));
    EXPECT_EQ(card.pixel(kCardLevels * kCardLevels * kCardLevels - 1), (SrgbPixel{239, 239, 239}));
    EXPECT_EQ(card_level(63), 16 + (63 * 223 + 63) / 126);
}
