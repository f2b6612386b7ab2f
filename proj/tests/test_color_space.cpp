#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "revelio/color_space.hpp"

using namespace revelio;

namespace {

// Reference OKLAB forward transform written directly from the published
// formulas, sharing no code with the library.
struct RefLab {
    double L, A, B;
};

RefLab reference_oklab(int r8, int g8, int b8) {
    auto lin = [](int v) {
        double c = v / 255.0;
        return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    };
    double r = lin(r8), g = lin(g8), b = lin(b8);
    double l = 0.4122214708 * r + 0.5363325363 * g + 0.0514459929 * b;
    double m = 0.2119034982 * r + 0.6806995451 * g + 0.1073969566 * b;
    double s = 0.0883024619 * r + 0.2817188376 * g + 0.6299787005 * b;
    l = std::cbrt(l);
    m = std::cbrt(m);
    s = std::cbrt(s);
    return {0.2104542553 * l + 0.7936177850 * m - 0.0040720468 * s,
            1.9779984951 * l - 2.4285922050 * m + 0.4505937099 * s,
            0.0259040371 * l + 0.7827717662 * m - 0.8086757660 * s};
}

} // namespace

TEST(ColorSpace, BlackIsOrigin) {
    const OklabPixel q = srgb_to_oklab({0, 0, 0});
    EXPECT_EQ(q.L, 0.0);
    EXPECT_EQ(q.A, 0.0);
    EXPECT_EQ(q.B, 0.0);
    const auto back = oklab_to_srgb({0, 0, 0});
    EXPECT_EQ(back.pixel, (SrgbPixel{0, 0, 0}));
    EXPECT_FALSE(back.clamped);
}

TEST(ColorSpace, WhiteAndRedMatchReference) {
    const OklabPixel w = srgb_to_oklab({255, 255, 255});
    EXPECT_NEAR(w.L, 1.0, 1e-4);
    EXPECT_NEAR(w.A, 0.0, 1e-4);
    EXPECT_NEAR(w.B, 0.0, 1e-4);

    const OklabPixel red = srgb_to_oklab({255, 0, 0});
    const RefLab ref = reference_oklab(255, 0, 0);
    EXPECT_NEAR(red.L, ref.L, 1e-12);
    EXPECT_NEAR(red.L, 0.6280, 1e-3);
    EXPECT_NEAR(red.A, 0.2249, 1e-3);
    EXPECT_NEAR(red.B, 0.1258, 1e-3);
}

TEST(ColorSpace, AboveWhiteClampsWithFlag) {
    const auto out = oklab_to_srgb({1.5, 0.0, 0.0});
    EXPECT_EQ(out.pixel, (SrgbPixel{255, 255, 255}));
    EXPECT_TRUE(out.clamped);

    const auto neg = oklab_to_srgb({0.1, 0.3, 0.0});
    EXPECT_TRUE(neg.clamped);
}

TEST(ColorSpace, ExhaustiveRoundTrip) {
    long mismatches = 0;
    for (int r = 0; r < 256; ++r)
        for (int g = 0; g < 256; ++g)
            for (int b = 0; b < 256; ++b) {
                const SrgbPixel p{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
                if (oklab_to_srgb(srgb_to_oklab(p)).pixel != p) ++mismatches;
            }
    EXPECT_EQ(mismatches, 0);
}

TEST(ColorSpace, GrayAxisMonotoneAndAchromatic) {
    double prev = -1.0;
    for (int v = 0; v < 256; ++v) {
        const auto u = static_cast<std::uint8_t>(v);
        const OklabPixel q = srgb_to_oklab({u, u, u});
        EXPECT_GT(q.L, prev) << v;
        EXPECT_LT(std::abs(q.A), 1e-4) << v;
        EXPECT_LT(std::abs(q.B), 1e-4) << v;
        prev = q.L;
    }
}

TEST(ColorSpace, ForwardAgreesWithReferenceOnRandomColours) {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int i = 0; i < 20000; ++i) {
        const int r = byte(rng), g = byte(rng), b = byte(rng);
        const OklabPixel q = srgb_to_oklab({static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)});
        const RefLab ref = reference_oklab(r, g, b);
        ASSERT_NEAR(q.L, ref.L, 1e-12);
        ASSERT_NEAR(q.A, ref.A, 1e-12);
        ASSERT_NEAR(q.B, ref.B, 1e-12);
        ASSERT_LE(q.L, 1.0001);
    }
}

TEST(ColorSpace, FramePathTracksScalarPath) {
    FrameBuffer frame(64, 48);
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> byte(0, 255);
    for (std::size_t i = 0; i < frame.pixel_count(); ++i)
        frame.set_pixel(i, {static_cast<std::uint8_t>(byte(rng)), static_cast<std::uint8_t>(byte(rng)),
                            static_cast<std::uint8_t>(byte(rng))});
    const OklabFrame lab = to_oklab(frame);
    for (std::size_t i = 0; i < frame.pixel_count(); ++i) {
        const OklabPixel q = srgb_to_oklab(frame.pixel(i));
        ASSERT_NEAR(lab.L.data()[i], q.L, 1e-5);
        ASSERT_NEAR(lab.A.data()[i], q.A, 1e-5);
        ASSERT_NEAR(lab.B.data()[i], q.B, 1e-5);
    }
}
