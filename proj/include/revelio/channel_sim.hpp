#pragma once

// Screen-to-camera channel: perspective placement, 60 -> 120 FPS exposure
// blending, tone distortion and sensor noise.
//
// Time is measured in display frames: display frame j is lit over [j, j+1)
// and camera frame k exposes [k/2 + phase, k/2 + phase + exposure/2].

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "revelio/color_space.hpp"
#include "revelio/error.hpp"
#include "revelio/frame_source.hpp"
#include "revelio/geometry.hpp"
#include "revelio/image.hpp"
#include "revelio/parallel.hpp"
#include "revelio/random.hpp"

namespace revelio {

/// Exposure used for an "instantaneous" shutter.
inline constexpr double kInstantExposure = 1e-6;

struct ChannelProfile {
    /// Screen corners in camera pixels, TL, TR, BR, BL.
    Quad screen_quad = Quad::rectangle(kFrameWidth, kFrameHeight);
    int camera_width = kFrameWidth;
    int camera_height = kFrameHeight;
    double phase = 0.0;
    double exposure = kInstantExposure;
    /// Standard deviation of additive noise, 8-bit units.
    double noise_sigma = 0.0;
    double gamma = 1.0;
    double contrast = 1.0;
    /// Additive offset after contrast, 8-bit units.
    double brightness = 0.0;
    /// Gaussian blur standard deviation in camera pixels; 0 disables.
    double blur_radius = 0.0;
    SrgbPixel background{32, 32, 32};
    std::uint64_t seed = 0;

    bool operator==(const ChannelProfile&) const = default;
};

inline void validate(const ChannelProfile& p) {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, "channel profile: " + m); };
    if (p.camera_width <= 0 || p.camera_height <= 0) fail("camera resolution must be positive");
    if (!(p.phase >= 0.0 && p.phase < 1.0)) fail("phase must lie in [0, 1)");
    if (!(p.exposure > 0.0 && p.exposure <= 1.0)) fail("exposure must lie in (0, 1]");
    if (!(p.noise_sigma >= 0.0) || !std::isfinite(p.noise_sigma)) fail("noise sigma must be >= 0");
    if (!(p.gamma > 0.0) || !std::isfinite(p.gamma)) fail("gamma must be positive");
    if (!(p.contrast >= 0.0) || !std::isfinite(p.contrast)) fail("contrast must be >= 0");
    if (!std::isfinite(p.brightness)) fail("brightness must be finite");
    if (!(p.blur_radius >= 0.0) || !std::isfinite(p.blur_radius)) fail("blur radius must be >= 0");
    for (const Point2& c : p.screen_quad.corners)
        if (!std::isfinite(c.x) || !std::isfinite(c.y)) fail("quad corners must be finite");
    if (!p.screen_quad.is_convex() || p.screen_quad.signed_area() <= 0.0)
        fail("screen quad must be convex and ordered TL, TR, BR, BL");
}

/// Display frames overlapping camera frame k and their normalised overlap
/// weights. Frames past the end of the sequence hold the last frame.
inline std::vector<std::pair<std::size_t, double>> blend_weights(std::size_t k, double phase, double exposure,
                                                                 std::size_t display_count) {
    if (display_count == 0) throw Error(ErrorCode::InvalidArgument, "display sequence is empty");
    const double start = 0.5 * static_cast<double>(k) + phase;
    const double end = start + 0.5 * exposure;
    std::vector<std::pair<std::size_t, double>> out;
    for (double j = std::floor(start); j < end; j += 1.0) {
        const double overlap = std::min(end, j + 1.0) - std::max(start, j);
        if (overlap <= 0.0) continue;
        const std::size_t idx = std::min(static_cast<std::size_t>(j), display_count - 1);
        if (!out.empty() && out.back().first == idx) out.back().second += overlap;
        else out.emplace_back(idx, overlap);
    }
    double total = 0.0;
    for (const auto& w : out) total += w.second;
    for (auto& w : out) w.second /= total;
    return out;
}

/// Convex per-sample blend, rounded half away from zero.
inline FrameBuffer blend_frames(std::span<const FrameBuffer* const> frames, std::span<const double> weights) {
    if (frames.empty() || frames.size() != weights.size())
        throw Error(ErrorCode::InvalidArgument, "blend needs one weight per frame");
    if (frames.size() == 1) return *frames[0];
    for (const FrameBuffer* f : frames) require_same_shape(*frames[0], *f, "blend");
    FrameBuffer out(frames[0]->width(), frames[0]->height());
    auto& dst = out.bytes();
    const std::size_t rows = static_cast<std::size_t>(out.height());
    const std::size_t stride = static_cast<std::size_t>(out.width()) * 3;
    parallel_for(0, rows, [&](std::size_t y) {
        for (std::size_t i = y * stride; i < (y + 1) * stride; ++i) {
            double v = 0.0;
            for (std::size_t f = 0; f < frames.size(); ++f) v += weights[f] * frames[f]->bytes()[i];
            dst[i] = quantize_channel(v);
        }
    });
    return out;
}

/// Camera-rate resampling of a 60 FPS sequence: two camera frames per display frame.
inline std::vector<FrameBuffer> temporal_resample(std::span<const FrameBuffer> display, double phase, double exposure) {
    if (display.empty()) throw Error(ErrorCode::InvalidArgument, "display sequence is empty");
    std::vector<FrameBuffer> out;
    out.reserve(display.size() * 2);
    for (std::size_t k = 0; k < display.size() * 2; ++k) {
        const auto weights = blend_weights(k, phase, exposure, display.size());
        std::vector<const FrameBuffer*> frames;
        std::vector<double> w;
        for (const auto& [idx, weight] : weights) {
            frames.push_back(&display[idx]);
            w.push_back(weight);
        }
        out.push_back(blend_frames(frames, w));
        out.back().display_index = static_cast<std::int64_t>(k);
    }
    return out;
}

inline bool is_full_frame_placement(const ChannelProfile& p, int width, int height) {
    return p.camera_width == width && p.camera_height == height &&
           p.screen_quad == Quad::rectangle(width, height);
}

/// Renders the screen frame into the camera frame at the profile quad.
inline FrameBuffer warp_to_camera(const FrameBuffer& frame, const ChannelProfile& profile) {
    if (is_full_frame_placement(profile, frame.width(), frame.height())) return frame;
    const Homography camera_to_screen =
        Homography::rect_to_quad(frame.width(), frame.height(), profile.screen_quad).inverse();
    FrameBuffer out(profile.camera_width, profile.camera_height, profile.background);
    const int w = frame.width();
    const int h = frame.height();
    const auto& src = frame.bytes();
    auto& dst = out.bytes();
    parallel_for(0, static_cast<std::size_t>(profile.camera_height), [&](std::size_t yy) {
        const int y = static_cast<int>(yy);
        for (int x = 0; x < profile.camera_width; ++x) {
            const Point2 s = camera_to_screen.apply({x + 0.5, y + 0.5});
            if (!(s.x >= 0.0 && s.x < w && s.y >= 0.0 && s.y < h)) continue;
            const double fx = s.x - 0.5, fy = s.y - 0.5;
            const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
            const double ax = fx - x0, ay = fy - y0;
            const int xa = std::clamp(x0, 0, w - 1), xb = std::clamp(x0 + 1, 0, w - 1);
            const int ya = std::clamp(y0, 0, h - 1), yb = std::clamp(y0 + 1, 0, h - 1);
            const std::size_t i00 = 3 * (static_cast<std::size_t>(ya) * w + xa);
            const std::size_t i10 = 3 * (static_cast<std::size_t>(ya) * w + xb);
            const std::size_t i01 = 3 * (static_cast<std::size_t>(yb) * w + xa);
            const std::size_t i11 = 3 * (static_cast<std::size_t>(yb) * w + xb);
            const std::size_t o = 3 * out.linear(x, y);
            for (int c = 0; c < 3; ++c) {
                const double v = (1 - ay) * ((1 - ax) * src[i00 + c] + ax * src[i10 + c]) +
                                 ay * ((1 - ax) * src[i01 + c] + ax * src[i11 + c]);
                dst[o + c] = quantize_channel(v);
            }
        }
    });
    return out;
}

namespace detail {

inline std::vector<double> gaussian_kernel(double sigma) {
    const int half = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * half + 1));
    double sum = 0.0;
    for (int i = -half; i <= half; ++i) sum += k[static_cast<std::size_t>(i + half)] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (double& v : k) v /= sum;
    return k;
}

/// Separable blur of interleaved RGB samples with edge clamping.
inline void blur_rgb(std::vector<double>& rgb, int width, int height, double sigma) {
    const std::vector<double> k = gaussian_kernel(sigma);
    const int half = static_cast<int>(k.size() / 2);
    std::vector<double> tmp(rgb.size());
    parallel_for(0, static_cast<std::size_t>(height), [&](std::size_t yy) {
        const std::size_t base = yy * static_cast<std::size_t>(width);
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < 3; ++c) {
                double v = 0.0;
                for (int t = -half; t <= half; ++t) {
                    const int xs = std::clamp(x + t, 0, width - 1);
                    v += k[static_cast<std::size_t>(t + half)] * rgb[3 * (base + xs) + c];
                }
                tmp[3 * (base + x) + c] = v;
            }
    });
    parallel_for(0, static_cast<std::size_t>(height), [&](std::size_t yy) {
        const int y = static_cast<int>(yy);
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < 3; ++c) {
                double v = 0.0;
                for (int t = -half; t <= half; ++t) {
                    const int ys = std::clamp(y + t, 0, height - 1);
                    v += k[static_cast<std::size_t>(t + half)] * tmp[3 * (static_cast<std::size_t>(ys) * width + x) + c];
                }
                rgb[3 * (static_cast<std::size_t>(y) * width + x) + c] = v;
            }
    });
}

} // namespace detail

inline bool is_identity_tone(const ChannelProfile& p) {
    return p.noise_sigma == 0.0 && p.gamma == 1.0 && p.contrast == 1.0 && p.brightness == 0.0 && p.blur_radius == 0.0;
}

/// Blur, contrast/brightness, gamma, seeded noise, clamp; in that order.
/// The noise stream depends on (profile.seed, frame_index, row) only.
inline FrameBuffer degrade(const FrameBuffer& frame, const ChannelProfile& profile, std::uint64_t frame_index) {
    if (is_identity_tone(profile)) return frame;
    const int w = frame.width();
    const int h = frame.height();
    std::vector<double> blurred;
    if (profile.blur_radius > 0.0) {
        blurred.assign(frame.bytes().begin(), frame.bytes().end());
        detail::blur_rgb(blurred, w, h, profile.blur_radius);
    }
    const auto& src = frame.bytes();

    FrameBuffer out(w, h);
    out.display_index = frame.display_index;
    const std::uint64_t frame_seed = detail::mix_seed(profile.seed, frame_index);
    parallel_for(0, static_cast<std::size_t>(h), [&](std::size_t y) {
        detail::GaussianStream noise(detail::mix_seed(frame_seed, y));
        const std::size_t begin = y * static_cast<std::size_t>(w) * 3;
        const std::size_t end = begin + static_cast<std::size_t>(w) * 3;
        for (std::size_t i = begin; i < end; ++i) {
            const double v = blurred.empty() ? static_cast<double>(src[i]) : blurred[i];
            double s = profile.contrast * (v - 127.5) + 127.5 + profile.brightness;
            if (profile.gamma != 1.0) s = 255.0 * std::pow(std::clamp(s / 255.0, 0.0, 1.0), profile.gamma);
            if (profile.noise_sigma > 0.0) s += profile.noise_sigma * noise.next();
            out.bytes()[i] = quantize_channel(s);
        }
    });
    return out;
}

/// Camera recording produced on demand. Warped display frames are cached
/// for the most recent few indices.
class SimulatedRecording : public FrameSource {
public:
    SimulatedRecording(std::span<const FrameBuffer> display, ChannelProfile profile, std::size_t cache_size = 4)
        : display_(display), profile_(std::move(profile)), cache_size_(std::max<std::size_t>(cache_size, 2)) {
        if (display_.empty()) throw Error(ErrorCode::InvalidArgument, "display sequence is empty");
        validate(profile_);
    }

    std::size_t size() const override { return display_.size() * 2; }
    const ChannelProfile& profile() const noexcept { return profile_; }

    FrameBuffer frame(std::size_t k) override {
        if (k >= size()) throw Error(ErrorCode::InvalidArgument, "camera frame index out of range");
        const auto weights = blend_weights(k, profile_.phase, profile_.exposure, display_.size());
        std::vector<const FrameBuffer*> frames;
        std::vector<double> w;
        for (const auto& [idx, weight] : weights) {
            frames.push_back(&warped(idx));
            w.push_back(weight);
        }
        FrameBuffer out = degrade(blend_frames(frames, w), profile_, k);
        out.display_index = static_cast<std::int64_t>(k);
        return out;
    }

private:
    const FrameBuffer& warped(std::size_t idx) {
        for (const auto& entry : cache_)
            if (entry.first == idx) return entry.second;
        if (cache_.size() >= cache_size_) cache_.pop_front();
        cache_.emplace_back(idx, warp_to_camera(display_[idx], profile_));
        return cache_.back().second;
    }

    std::span<const FrameBuffer> display_;
    ChannelProfile profile_;
    std::size_t cache_size_;
    std::deque<std::pair<std::size_t, FrameBuffer>> cache_;
};

/// Full recording: warp, temporal resample, degrade.
inline std::vector<FrameBuffer> simulate(std::span<const FrameBuffer> encoded, const ChannelProfile& profile) {
    SimulatedRecording rec(encoded, profile);
    std::vector<FrameBuffer> out;
    out.reserve(rec.size());
    for (std::size_t k = 0; k < rec.size(); ++k) out.push_back(rec.frame(k));
    return out;
}

/// Screen quad for a pinhole view of a 16:9 screen rotated by yaw then
/// pitch, at 1.5 screen widths. Scaled so the quad covers `occupancy` of
/// the camera area, shrunk further if it would leave the frame, and centred.
inline Quad view_quad(double occupancy, double yaw_deg, double pitch_deg = 0.0, int camera_width = kFrameWidth,
                      int camera_height = kFrameHeight) {
    if (!(occupancy > 0.0 && occupancy <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "occupancy must lie in (0, 1]");
    if (!(std::abs(yaw_deg) < 80.0 && std::abs(pitch_deg) < 80.0))
        throw Error(ErrorCode::InvalidArgument, "view angles must lie within +-80 degrees");
    const double aspect = static_cast<double>(kFrameWidth) / kFrameHeight;
    const double distance = 1.5 * aspect;
    const double yaw = yaw_deg * std::numbers::pi / 180.0;
    const double pitch = pitch_deg * std::numbers::pi / 180.0;
    const std::array<Point2, 4> local{Point2{-aspect / 2, -0.5}, Point2{aspect / 2, -0.5}, Point2{aspect / 2, 0.5},
                                      Point2{-aspect / 2, 0.5}};
    Quad q;
    for (std::size_t i = 0; i < 4; ++i) {
        const double x1 = local[i].x * std::cos(yaw);
        const double z1 = -local[i].x * std::sin(yaw);
        const double y2 = local[i].y * std::cos(pitch) - z1 * std::sin(pitch);
        const double z2 = local[i].y * std::sin(pitch) + z1 * std::cos(pitch);
        q.corners[i] = {x1 / (distance + z2), y2 / (distance + z2)};
    }
    double scale = std::sqrt(occupancy * camera_width * camera_height / q.signed_area());
    auto bbox = [&q] {
        double x0 = q.corners[0].x, x1 = x0, y0 = q.corners[0].y, y1 = y0;
        for (const Point2& c : q.corners) {
            x0 = std::min(x0, c.x), x1 = std::max(x1, c.x), y0 = std::min(y0, c.y), y1 = std::max(y1, c.y);
        }
        return std::array<double, 4>{x0, y0, x1, y1};
    };
    const auto b = bbox();
    scale = std::min({scale, camera_width / (b[2] - b[0]), camera_height / (b[3] - b[1])});
    for (Point2& c : q.corners) c = c * scale;
    const auto s = bbox();
    const Point2 shift{0.5 * camera_width - 0.5 * (s[0] + s[2]), 0.5 * camera_height - 0.5 * (s[1] + s[3])};
    for (Point2& c : q.corners) c = c + shift;
    return q;
}

/// "identity": transparent channel. "occNN_yawA[_pitchB]": view_quad(NN/100,
/// A, B) with phase 0.3, exposure 0.8 and noise sigma 2.
inline ChannelProfile preset_profile(std::string_view name) {
    if (name == "identity") return ChannelProfile{};
    auto bad = [&] { return Error(ErrorCode::InvalidConfig, "unknown channel preset '" + std::string(name) + "'"); };
    auto take_int = [&](std::string_view& s, std::string_view prefix) {
        if (!s.starts_with(prefix)) throw bad();
        s.remove_prefix(prefix.size());
        int v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr == s.data()) throw bad();
        s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
        return v;
    };
    std::string_view rest = name;
    const int occ = take_int(rest, "occ");
    const int yaw = take_int(rest, "_yaw");
    int pitch = 0;
    if (!rest.empty()) pitch = take_int(rest, "_pitch");
    if (!rest.empty() || occ <= 0 || occ > 100 || std::abs(yaw) >= 80 || std::abs(pitch) >= 80) throw bad();
    ChannelProfile p;
    p.screen_quad = view_quad(occ / 100.0, yaw, pitch);
    p.phase = 0.3;
    p.exposure = 0.8;
    p.noise_sigma = 2.0;
    return p;
}

/// Occupancy x yaw preset matrix.
inline std::vector<std::string> preset_names() {
    std::vector<std::string> names{"identity"};
    for (int occ : {100, 75, 50, 25})
        for (int yaw : {0, 20, -20, 30, -30, 40, -40}) names.push_back("occ" + std::to_string(occ) + "_yaw" + std::to_string(yaw));
    return names;
}

} // namespace revelio
