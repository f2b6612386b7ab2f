#pragma once

// Video encoder: code -> RS codeword -> shape grid -> data frame, then
// symmetric OKLAB flicker on every masked pixel with parity by display index.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "revelio/color_space.hpp"
#include "revelio/data_frame.hpp"
#include "revelio/error.hpp"
#include "revelio/flicker.hpp"
#include "revelio/interleave.hpp"
#include "revelio/parallel.hpp"
#include "revelio/reed_solomon.hpp"

namespace revelio {

inline constexpr double kDefaultStrength = 0.0425;

/// Even display frames add the split, odd frames subtract it.
enum class Parity { Even, Odd };

inline Parity parity_of(std::int64_t display_index) { return (display_index % 2 == 0) ? Parity::Even : Parity::Odd; }

/// The OKLAB offset applied to a pixel with split `s` on a frame of `parity`.
inline OklabPixel signed_delta(const FlickerSplit& s, double d, Parity parity) {
    const OklabPixel delta = flicker_delta(s, d);
    return parity == Parity::Even ? delta : OklabPixel{-delta.L, -delta.A, -delta.B};
}

struct FlickerStats {
    std::uint64_t pixels_flickered = 0;
    std::uint64_t pixels_clamped = 0;
    std::uint64_t pixels_guarded = 0;
    /// Pixel counts keyed by |lambda| in tenths.
    std::map<int, std::uint64_t> lambda_tenths;

    void merge(const FlickerStats& o) {
        pixels_flickered += o.pixels_flickered;
        pixels_clamped += o.pixels_clamped;
        pixels_guarded += o.pixels_guarded;
        for (auto [k, v] : o.lambda_tenths) lambda_tenths[k] += v;
    }
};

/// Signed OKLAB deltas for every active pixel of `df`, in `df.active` order.
inline std::vector<OklabPixel> flicker_deltas(const FrameBuffer& frame, const DataFrame& df, SplitSelector& selector,
                                              Parity parity) {
    std::vector<SrgbPixel> colours;
    colours.reserve(df.active.size());
    for (std::uint32_t i : df.active) colours.push_back(frame.pixel(i));
    selector.prepare(colours);
    std::vector<OklabPixel> out(df.active.size());
    for (std::size_t k = 0; k < colours.size(); ++k)
        out[k] = signed_delta(selector.split(selector.cached(colours[k])), selector.strength(), parity);
    return out;
}

/// Flickers the masked pixels of one frame. Unmasked pixels are copied.
inline FrameBuffer apply_flicker(const FrameBuffer& frame, const DataFrame& df, SplitSelector& selector, Parity parity,
                                 FlickerStats* stats = nullptr) {
    if (frame.width() != df.width() || frame.height() != df.height())
        throw Error(ErrorCode::DimensionMismatch, "frame does not match the data frame");

    std::vector<SrgbPixel> colours;
    colours.reserve(df.active.size());
    for (std::uint32_t i : df.active) colours.push_back(frame.pixel(i));
    selector.prepare(colours);

    FrameBuffer out = frame;
    std::vector<std::uint8_t> clamped(df.active.size(), 0);
    const double d = selector.strength();
    const std::size_t chunk = 4096;
    const std::size_t chunks = (df.active.size() + chunk - 1) / chunk;
    parallel_for(0, chunks, [&](std::size_t c) {
        const std::size_t end = std::min(df.active.size(), (c + 1) * chunk);
        for (std::size_t k = c * chunk; k < end; ++k) {
            const SrgbPixel p = colours[k];
            const OklabPixel q = srgb_to_oklab(p);
            const OklabPixel delta = signed_delta(selector.split(selector.cached(p)), d, parity);
            const SrgbConversion conv = oklab_to_srgb({q.L + delta.L, q.A + delta.A, q.B + delta.B});
            out.set_pixel(df.active[k], conv.pixel);
            clamped[k] = conv.clamped ? 1 : 0;
        }
    });

    if (stats) {
        for (std::size_t k = 0; k < colours.size(); ++k) {
            const std::uint16_t idx = selector.cached(colours[k]);
            ++stats->pixels_flickered;
            stats->pixels_clamped += clamped[k];
            if (selector.is_fallback(idx)) ++stats->pixels_guarded;
            ++stats->lambda_tenths[static_cast<int>(std::lround(std::abs(selector.split(idx).lambda) * 10.0))];
        }
    }
    return out;
}

inline FrameBuffer apply_flicker(const FrameBuffer& frame, const DataFrame& df, double d, Parity parity) {
    SplitSelector selector(d);
    return apply_flicker(frame, df, selector, parity);
}

/// Number of 60 FPS slots each source frame occupies: ceil((i+1)*60/fps) -
/// ceil(i*60/fps), i.e. 2,2,... for 30 FPS and 3,2,3,2,... for 24 FPS.
inline std::vector<int> hold_counts(std::size_t frames, int src_fps) {
    if (src_fps != 24 && src_fps != 30 && src_fps != 60)
        throw Error(ErrorCode::UnsupportedRate, "source rate must be 24, 30 or 60 FPS, got " + std::to_string(src_fps));
    std::vector<int> counts(frames);
    auto slot = [src_fps](std::size_t i) { return static_cast<long long>((i * 60 + src_fps - 1) / src_fps); };
    for (std::size_t i = 0; i < frames; ++i) counts[i] = static_cast<int>(slot(i + 1) - slot(i));
    return counts;
}

template <typename Frame>
std::vector<Frame> upsample_sample_and_hold(std::span<const Frame> frames, int src_fps) {
    const std::vector<int> counts = hold_counts(frames.size(), src_fps);
    std::vector<Frame> out;
    for (std::size_t i = 0; i < frames.size(); ++i)
        for (int k = 0; k < counts[i]; ++k) out.push_back(frames[i]);
    return out;
}

struct EncoderOptions {
    double strength = kDefaultStrength;
    std::vector<FlickerSplit> candidates = default_split_candidates();
    std::vector<FlickerSplit> fallback = fallback_split_candidates();
    WeightSchedule schedule{};
    ResidualGuard guard{};
    SelectionMode mode = SelectionMode::Exact;
};

/// Streaming encoder for one code; frames may be fed one at a time.
class Encoder {
public:
    explicit Encoder(RevelioCode code, const EncoderOptions& options = {})
        : code_(code),
          codeword_(rs_encode(code)),
          selector_(options.strength, SplitCandidates(options.candidates), options.schedule, options.guard, options.mode,
                    options.fallback) {
        auto [df, grid] = build_data_frame(codeword_);
        data_frame_ = std::move(df);
        grid_ = grid;
    }

    FrameBuffer encode_frame(const FrameBuffer& frame, std::int64_t display_index) {
        if (frame.width() != kFrameWidth || frame.height() != kFrameHeight)
            throw Error(ErrorCode::DimensionMismatch, "encoder expects 1920x1080 frames, got " +
                                                          std::to_string(frame.width()) + "x" + std::to_string(frame.height()));
        FrameBuffer out = apply_flicker(frame, data_frame_, selector_, parity_of(display_index), &stats_);
        out.display_index = display_index;
        return out;
    }

    RevelioCode code() const noexcept { return code_; }
    const Codeword& codeword() const noexcept { return codeword_; }
    const DataFrame& data_frame() const noexcept { return data_frame_; }
    const ShapeGrid& grid() const noexcept { return grid_; }
    const FlickerStats& stats() const noexcept { return stats_; }
    SplitSelector& selector() noexcept { return selector_; }

private:
    RevelioCode code_;
    Codeword codeword_;
    SplitSelector selector_;
    DataFrame data_frame_;
    ShapeGrid grid_;
    FlickerStats stats_;
};

/// Encodes a 60 FPS sequence; frame i gets parity i mod 2.
inline std::vector<FrameBuffer> encode_video(std::span<const FrameBuffer> frames, RevelioCode code,
                                             const EncoderOptions& options) {
    std::vector<FrameBuffer> out;
    if (frames.empty()) return out;
    Encoder encoder(code, options);
    out.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) out.push_back(encoder.encode_frame(frames[i], static_cast<std::int64_t>(i)));
    return out;
}

inline std::vector<FrameBuffer> encode_video(std::span<const FrameBuffer> frames, RevelioCode code,
                                             double strength = kDefaultStrength) {
    EncoderOptions options;
    options.strength = strength;
    return encode_video(frames, code, options);
}

} // namespace revelio
