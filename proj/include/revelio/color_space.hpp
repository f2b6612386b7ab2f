#pragma once

// sRGB <-> linear RGB <-> OKLAB.
//
// Matrices are the published OKLAB reference values. All per-pixel math is
// double precision; the whole-frame path used by the decoder works in float
// with a 256-entry gamma table, since camera input is 8-bit anyway.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>

#include "revelio/image.hpp"
#include "revelio/parallel.hpp"

namespace revelio {

struct OklabPixel {
    double L = 0.0;
    double A = 0.0;
    double B = 0.0;

    bool operator==(const OklabPixel&) const = default;
};

struct LinearRgb {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;
};

/// Continuous sRGB on the 0..255 scale after clamping, before rounding.
struct ClampedRgb {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;
    bool clamped = false;
};

struct SrgbConversion {
    SrgbPixel pixel;
    bool clamped = false;
};

namespace detail {

inline constexpr double kLinearToLms[3][3] = {
    {0.4122214708, 0.5363325363, 0.0514459929},
    {0.2119034982, 0.6806995451, 0.1073969566},
    {0.0883024619, 0.2817188376, 0.6299787005},
};

inline constexpr double kLmsToLab[3][3] = {
    {0.2104542553, 0.7936177850, -0.0040720468},
    {1.9779984951, -2.4285922050, 0.4505937099},
    {0.0259040371, 0.7827717662, -0.8086757660},
};

inline constexpr double kLabToLms[3][3] = {
    {1.0, 0.3963377774, 0.2158037573},
    {1.0, -0.1055613458, -0.0638541728},
    {1.0, -0.0894841775, -1.2914855480},
};

inline constexpr double kLmsToLinear[3][3] = {
    {4.0767416621, -3.3077115913, 0.2309699292},
    {-1.2684380046, 2.6097574011, -0.3413193965},
    {-0.0041960863, -0.7034186147, 1.7076147010},
};

// Out-of-range slack below which a value is treated as numerically in gamut.
inline constexpr double kGamutSlack = 1e-9;

/// Float cube root: bit-level seed plus two Halley steps (relative error
/// below 1e-6 for positive normal inputs).
inline float fast_cbrt(float x) {
    if (x <= 0.0f) return x == 0.0f ? 0.0f : -fast_cbrt(-x);
    float y = std::bit_cast<float>(std::bit_cast<std::uint32_t>(x) / 3u + 709921077u);
    for (int i = 0; i < 2; ++i) {
        const float y3 = y * y * y;
        y = y * (y3 + 2.0f * x) / (2.0f * y3 + x);
    }
    return y;
}

inline double round_half_away(double v) { return v < 0.0 ? -std::floor(-v + 0.5) : std::floor(v + 0.5); }

inline const std::array<double, 256>& decode_table() {
    static const std::array<double, 256> table = [] {
        std::array<double, 256> t{};
        for (int i = 0; i < 256; ++i) {
            const double c = i / 255.0;
            t[static_cast<std::size_t>(i)] = c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
        }
        return t;
    }();
    return table;
}

} // namespace detail

/// sRGB electro-optical transfer: encoded [0,1] -> linear [0,1].
inline double srgb_decode(double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); }

/// Inverse transfer; expects linear input already clamped to [0,1].
inline double srgb_encode(double l) { return l <= 0.0031308 ? 12.92 * l : 1.055 * std::pow(l, 1.0 / 2.4) - 0.055; }

inline OklabPixel linear_to_oklab(const LinearRgb& c) {
    using detail::kLinearToLms;
    using detail::kLmsToLab;
    const double l = std::cbrt(kLinearToLms[0][0] * c.r + kLinearToLms[0][1] * c.g + kLinearToLms[0][2] * c.b);
    const double m = std::cbrt(kLinearToLms[1][0] * c.r + kLinearToLms[1][1] * c.g + kLinearToLms[1][2] * c.b);
    const double s = std::cbrt(kLinearToLms[2][0] * c.r + kLinearToLms[2][1] * c.g + kLinearToLms[2][2] * c.b);
    return {kLmsToLab[0][0] * l + kLmsToLab[0][1] * m + kLmsToLab[0][2] * s,
            kLmsToLab[1][0] * l + kLmsToLab[1][1] * m + kLmsToLab[1][2] * s,
            kLmsToLab[2][0] * l + kLmsToLab[2][1] * m + kLmsToLab[2][2] * s};
}

/// Unclamped inverse; out-of-gamut colours produce values outside [0,1].
inline LinearRgb oklab_to_linear(const OklabPixel& q) {
    using detail::kLabToLms;
    using detail::kLmsToLinear;
    const double l_ = kLabToLms[0][0] * q.L + kLabToLms[0][1] * q.A + kLabToLms[0][2] * q.B;
    const double m_ = kLabToLms[1][0] * q.L + kLabToLms[1][1] * q.A + kLabToLms[1][2] * q.B;
    const double s_ = kLabToLms[2][0] * q.L + kLabToLms[2][1] * q.A + kLabToLms[2][2] * q.B;
    const double l = l_ * l_ * l_;
    const double m = m_ * m_ * m_;
    const double s = s_ * s_ * s_;
    return {kLmsToLinear[0][0] * l + kLmsToLinear[0][1] * m + kLmsToLinear[0][2] * s,
            kLmsToLinear[1][0] * l + kLmsToLinear[1][1] * m + kLmsToLinear[1][2] * s,
            kLmsToLinear[2][0] * l + kLmsToLinear[2][1] * m + kLmsToLinear[2][2] * s};
}

inline OklabPixel srgb_to_oklab(SrgbPixel p) {
    const auto& t = detail::decode_table();
    return linear_to_oklab({t[p.r], t[p.g], t[p.b]});
}

/// OKLAB -> sRGB on the 0..255 scale, clamped but not rounded.
inline ClampedRgb oklab_to_srgb_continuous(const OklabPixel& q) {
    const LinearRgb lin = oklab_to_linear(q);
    bool clamped = false;
    auto channel = [&clamped](double v) {
        if (v < -detail::kGamutSlack || v > 1.0 + detail::kGamutSlack) clamped = true;
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        return 255.0 * srgb_encode(v);
    };
    ClampedRgb out;
    out.r = channel(lin.r);
    out.g = channel(lin.g);
    out.b = channel(lin.b);
    out.clamped = clamped;
    return out;
}

inline std::uint8_t quantize_channel(double v255) {
    const double r = detail::round_half_away(v255);
    return static_cast<std::uint8_t>(r < 0.0 ? 0.0 : (r > 255.0 ? 255.0 : r));
}

inline SrgbConversion oklab_to_srgb(const OklabPixel& q) {
    const ClampedRgb c = oklab_to_srgb_continuous(q);
    return {{quantize_channel(c.r), quantize_channel(c.g), quantize_channel(c.b)}, c.clamped};
}

/// Whole-frame conversion to float OKLAB planes.
inline OklabFrame to_oklab(const FrameBuffer& frame) {
    OklabFrame out{Plane<float>(frame.width(), frame.height()), Plane<float>(frame.width(), frame.height()),
                   Plane<float>(frame.width(), frame.height())};
    const auto& t = detail::decode_table();
    const auto& bytes = frame.bytes();
    using detail::kLinearToLms;
    using detail::kLmsToLab;
    parallel_for(0, static_cast<std::size_t>(frame.height()), [&](std::size_t y) {
        const std::size_t base = y * static_cast<std::size_t>(frame.width());
        for (std::size_t x = 0; x < static_cast<std::size_t>(frame.width()); ++x) {
            const std::size_t i = base + x;
            const double r = t[bytes[3 * i]], g = t[bytes[3 * i + 1]], b = t[bytes[3 * i + 2]];
            const float l = detail::fast_cbrt(static_cast<float>(kLinearToLms[0][0] * r + kLinearToLms[0][1] * g + kLinearToLms[0][2] * b));
            const float m = detail::fast_cbrt(static_cast<float>(kLinearToLms[1][0] * r + kLinearToLms[1][1] * g + kLinearToLms[1][2] * b));
            const float s = detail::fast_cbrt(static_cast<float>(kLinearToLms[2][0] * r + kLinearToLms[2][1] * g + kLinearToLms[2][2] * b));
            out.L.data()[i] = static_cast<float>(kLmsToLab[0][0] * l + kLmsToLab[0][1] * m + kLmsToLab[0][2] * s);
            out.A.data()[i] = static_cast<float>(kLmsToLab[1][0] * l + kLmsToLab[1][1] * m + kLmsToLab[1][2] * s);
            out.B.data()[i] = static_cast<float>(kLmsToLab[2][0] * l + kLmsToLab[2][1] * m + kLmsToLab[2][2] * s);
        }
    });
    return out;
}

/// ITU-R BT.601 luma of an 8-bit sRGB pixel, on the 0..255 scale.
inline double luma601(SrgbPixel p) { return 0.299 * p.r + 0.587 * p.g + 0.114 * p.b; }

} // namespace revelio
