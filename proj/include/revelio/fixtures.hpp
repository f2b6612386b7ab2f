#pragma once

// Procedural test clips (no external content): gray card, gradient,
// natural-looking fBm texture, animated checker, and a full-gamut card.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "revelio/color_space.hpp"
#include "revelio/error.hpp"
#include "revelio/image.hpp"
#include "revelio/parallel.hpp"
#include "revelio/random.hpp"

namespace revelio {

enum class FixtureKind { GrayCard, Gradient, Natural, Checker };

inline constexpr std::array<FixtureKind, 4> kAllFixtures{FixtureKind::GrayCard, FixtureKind::Gradient,
                                                         FixtureKind::Natural, FixtureKind::Checker};

inline const char* to_string(FixtureKind k) {
    switch (k) {
        case FixtureKind::GrayCard: return "gray";
        case FixtureKind::Gradient: return "gradient";
        case FixtureKind::Natural: return "natural";
        case FixtureKind::Checker: return "checker";
    }
    return "?";
}

inline std::optional<FixtureKind> fixture_from_string(std::string_view name) {
    for (FixtureKind k : kAllFixtures)
        if (name == to_string(k)) return k;
    return std::nullopt;
}

namespace detail {

inline double lattice_value(std::uint64_t seed, int x, int y) {
    std::uint64_t s = mix_seed(mix_seed(seed, static_cast<std::uint32_t>(x)), static_cast<std::uint32_t>(y));
    return static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
}

/// Smoothstep-interpolated value noise summed over octaves, in [0, 1].
inline double fbm(std::uint64_t seed, double x, double y, double period, int octaves) {
    double sum = 0.0, amp = 1.0, norm = 0.0;
    for (int o = 0; o < octaves; ++o) {
        const double u = x / period, v = y / period;
        const int x0 = static_cast<int>(std::floor(u)), y0 = static_cast<int>(std::floor(v));
        double fx = u - x0, fy = v - y0;
        fx = fx * fx * (3 - 2 * fx);
        fy = fy * fy * (3 - 2 * fy);
        const std::uint64_t os = mix_seed(seed, static_cast<std::uint64_t>(o));
        const double a = lattice_value(os, x0, y0), b = lattice_value(os, x0 + 1, y0);
        const double c = lattice_value(os, x0, y0 + 1), d = lattice_value(os, x0 + 1, y0 + 1);
        sum += amp * ((1 - fy) * ((1 - fx) * a + fx * b) + fy * ((1 - fx) * c + fx * d));
        norm += amp;
        amp *= 0.5;
        period *= 0.5;
    }
    return sum / norm;
}

inline std::uint8_t to_byte(double v) { return quantize_channel(std::clamp(v, 0.0, 255.0)); }

inline SrgbPixel natural_pixel(std::uint64_t seed, double x, double y) {
    const double lum = fbm(seed, x, y, 256.0, 6);
    const double warm = fbm(seed + 101, x, y, 384.0, 4);
    const double green = fbm(seed + 202, x, y, 512.0, 3);
    const double base = 35 + 185 * lum;
    return {to_byte(base + 40 * (warm - 0.5)), to_byte(base + 30 * (green - 0.5)), to_byte(base - 40 * (warm - 0.5) - 15)};
}

} // namespace detail

/// Frame `index` of a fixture clip. Natural drifts 1 px per frame to the
/// right; checker drifts 2 px per frame diagonally.
inline FrameBuffer fixture_frame(FixtureKind kind, std::size_t index, std::uint64_t seed = 1,
                                 int width = kFrameWidth, int height = kFrameHeight) {
    FrameBuffer f(width, height);
    f.display_index = static_cast<std::int64_t>(index);
    const double t = static_cast<double>(index);
    parallel_for(0, static_cast<std::size_t>(height), [&](std::size_t yy) {
        const int y = static_cast<int>(yy);
        for (int x = 0; x < width; ++x) {
            SrgbPixel p;
            switch (kind) {
                case FixtureKind::GrayCard: p = {118, 118, 118}; break;
                case FixtureKind::Gradient: {
                    const double u = static_cast<double>(x) / (width - 1), v = static_cast<double>(y) / (height - 1);
                    p = {detail::to_byte(30 + 190 * u), detail::to_byte(40 + 150 * (1 - v) + 20 * u),
                         detail::to_byte(60 + 130 * v)};
                    break;
                }
                case FixtureKind::Natural: p = detail::natural_pixel(seed, x - t, y); break;
                case FixtureKind::Checker: {
                    const int cx = static_cast<int>(std::floor((x + 2 * t) / 96.0));
                    const int cy = static_cast<int>(std::floor((y + 2 * t) / 96.0));
                    p = ((cx + cy) & 1) ? SrgbPixel{172, 168, 160} : SrgbPixel{84, 88, 96};
                    break;
                }
            }
            f.set_pixel(x, y, p);
        }
    });
    return f;
}

inline std::vector<FrameBuffer> make_fixture(FixtureKind kind, std::size_t frames, std::uint64_t seed = 1,
                                             int width = kFrameWidth, int height = kFrameHeight) {
    std::vector<FrameBuffer> out;
    out.reserve(frames);
    if (kind == FixtureKind::Natural && frames > 0) {
        // One wide texture, cropped at the drift offset of each frame.
        const int span = width + static_cast<int>(frames) - 1;
        FrameBuffer tex(span, height);
        parallel_for(0, static_cast<std::size_t>(height), [&](std::size_t y) {
            for (int x = 0; x < span; ++x)
                tex.set_pixel(x, static_cast<int>(y), detail::natural_pixel(seed, x - static_cast<double>(frames - 1), static_cast<double>(y)));
        });
        for (std::size_t i = 0; i < frames; ++i) {
            FrameBuffer f(width, height);
            f.display_index = static_cast<std::int64_t>(i);
            const int offset = static_cast<int>(frames - 1 - i);
            for (int y = 0; y < height; ++y)
                std::copy_n(tex.bytes().begin() + 3 * static_cast<std::ptrdiff_t>(tex.linear(offset, y)), 3 * width,
                            f.bytes().begin() + 3 * static_cast<std::ptrdiff_t>(f.linear(0, y)));
            out.push_back(std::move(f));
        }
        return out;
    }
    const bool is_static = kind == FixtureKind::GrayCard || kind == FixtureKind::Gradient;
    for (std::size_t i = 0; i < frames; ++i) {
        if (is_static && i > 0) {
            out.push_back(out.front());
            out.back().display_index = static_cast<std::int64_t>(i);
        } else {
            out.push_back(fixture_frame(kind, i, seed, width, height));
        }
    }
    return out;
}

inline constexpr int kCardLevels = 127;
inline constexpr int kCardLow = 16;
inline constexpr int kCardHigh = 239;

inline std::uint8_t card_level(int i) {
    return static_cast<std::uint8_t>(kCardLow + (i * (kCardHigh - kCardLow) + (kCardLevels - 1) / 2) / (kCardLevels - 1));
}

/// Every (r, g, b) with each channel on the 127-level ladder from 16 to 239,
/// one per pixel in row-major order, the remainder mid gray.
inline FrameBuffer full_gamut_card() {
    FrameBuffer f(kFrameWidth, kFrameHeight, {128, 128, 128});
    std::size_t n = 0;
    for (int r = 0; r < kCardLevels; ++r)
        for (int g = 0; g < kCardLevels; ++g)
            for (int b = 0; b < kCardLevels; ++b) f.set_pixel(n++, {card_level(r), card_level(g), card_level(b)});
    return f;
}

} // namespace revelio
