#pragma once

// Weighted differential accumulator over an epoch of OKLAB frames:
// F = F_1 + sum_i w_i |F_i - F_{i+1}| per channel, L pre-blurred, each
// channel min-max normalised to [0, 255], combined = A + B + c L.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "revelio/color_space.hpp"
#include "revelio/error.hpp"
#include "revelio/image.hpp"
#include "revelio/parallel.hpp"

namespace revelio {

struct AccumulatorParams {
    /// w_i = decay^(i-1).
    double decay = 0.9;
    /// Weight c of the lightness channel in the combined plane.
    double lightness_weight = 0.25;
    double blur_sigma = 2.0;
    /// Odd kernel side; 0 disables the lightness blur.
    int blur_size = 9;
};

inline void validate(const AccumulatorParams& p) {
    if (!(p.decay > 0.0 && p.decay <= 1.0)) throw Error(ErrorCode::InvalidArgument, "decay must lie in (0, 1]");
    if (!(p.lightness_weight >= 0.0 && p.lightness_weight < 1.0))
        throw Error(ErrorCode::InvalidArgument, "lightness weight c must lie in [0, 1)");
    if (p.blur_size < 0 || (p.blur_size > 0 && p.blur_size % 2 == 0))
        throw Error(ErrorCode::InvalidArgument, "blur kernel size must be odd or 0");
    if (p.blur_size > 0 && !(p.blur_sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "blur sigma must be positive");
}

struct AccumulatorImage {
    Plane<float> L;
    Plane<float> A;
    Plane<float> B;
    Plane<float> combined;

    int width() const noexcept { return combined.width(); }
    int height() const noexcept { return combined.height(); }
};

inline std::vector<double> decay_weights(std::size_t frames, double decay) {
    std::vector<double> w;
    for (std::size_t i = 1; i < frames; ++i) w.push_back(std::pow(decay, static_cast<double>(i - 1)));
    return w;
}

/// Separable Gaussian blur with a size x size kernel and edge clamping.
inline Plane<float> gaussian_blur(const Plane<float>& src, double sigma, int size) {
    if (size <= 1) return src;
    const int half = size / 2;
    std::vector<float> k(static_cast<std::size_t>(size));
    double sum = 0.0;
    for (int i = -half; i <= half; ++i) sum += std::exp(-0.5 * i * i / (sigma * sigma));
    for (int i = -half; i <= half; ++i)
        k[static_cast<std::size_t>(i + half)] = static_cast<float>(std::exp(-0.5 * i * i / (sigma * sigma)) / sum);

    const int w = src.width(), h = src.height();
    Plane<float> tmp(w, h), out(w, h);
    parallel_for(0, static_cast<std::size_t>(h), [&](std::size_t yy) {
        const int y = static_cast<int>(yy);
        for (int x = 0; x < w; ++x) {
            float v = 0.0f;
            for (int t = -half; t <= half; ++t) v += k[static_cast<std::size_t>(t + half)] * src.clamped(x + t, y);
            tmp.at(x, y) = v;
        }
    });
    parallel_for(0, static_cast<std::size_t>(h), [&](std::size_t yy) {
        const int y = static_cast<int>(yy);
        for (int x = 0; x < w; ++x) {
            float v = 0.0f;
            for (int t = -half; t <= half; ++t) v += k[static_cast<std::size_t>(t + half)] * tmp.clamped(x, y + t);
            out.at(x, y) = v;
        }
    });
    return out;
}

/// Affine map of the plane onto [0, 255]; a constant plane maps to 0.
inline Plane<float> normalize_minmax(const Plane<float>& p) {
    const auto [lo, hi] = std::minmax_element(p.data().begin(), p.data().end());
    Plane<float> out(p.width(), p.height(), 0.0f);
    const double min = *lo, range = static_cast<double>(*hi) - *lo;
    if (!(range > 0.0)) return out;
    const double scale = 255.0 / range;
    for (std::size_t i = 0; i < p.size(); ++i)
        out.data()[i] = static_cast<float>(std::clamp((p.data()[i] - min) * scale, 0.0, 255.0));
    return out;
}

/// Streaming form: frames are added one at a time so an epoch never has to
/// be held in memory.
class EpochAccumulator {
public:
    EpochAccumulator(std::vector<double> weights, AccumulatorParams params = {})
        : weights_(std::move(weights)), params_(params) {
        validate(params_);
        for (std::size_t i = 0; i < weights_.size(); ++i) {
            if (!(weights_[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "decay weights must be positive");
            if (i > 0 && weights_[i] > weights_[i - 1])
                throw Error(ErrorCode::InvalidArgument, "decay weights must be non-increasing");
        }
    }

    /// Weights for an epoch of `frames` frames from params.decay.
    EpochAccumulator(std::size_t frames, AccumulatorParams params = {})
        : EpochAccumulator(decay_weights(frames, params.decay), params) {}

    std::size_t frames_added() const noexcept { return count_; }
    std::size_t capacity() const noexcept { return weights_.size() + 1; }

    void add(const OklabFrame& frame) {
        if (count_ >= capacity()) throw Error(ErrorCode::InvalidArgument, "epoch already holds all its frames");
        std::array<Plane<float>, 3> cur{
            params_.blur_size > 1 ? gaussian_blur(frame.L, params_.blur_sigma, params_.blur_size) : frame.L, frame.A,
            frame.B};
        if (count_ == 0) {
            first_ = cur;
            for (int c = 0; c < 3; ++c) diff_[c] = Plane<float>(frame.width(), frame.height(), 0.0f);
        } else {
            if (cur[0].width() != prev_[0].width() || cur[0].height() != prev_[0].height())
                throw Error(ErrorCode::DimensionMismatch, "epoch frames differ in size");
            const float w = static_cast<float>(weights_[count_ - 1]);
            for (int c = 0; c < 3; ++c) {
                float* d = diff_[c].data().data();
                const float* a = prev_[c].data().data();
                const float* b = cur[c].data().data();
                const std::size_t n = diff_[c].size();
                for (std::size_t i = 0; i < n; ++i) d[i] += w * std::abs(a[i] - b[i]);
            }
        }
        prev_ = std::move(cur);
        ++count_;
    }

    /// Weighted difference sum per channel, before F_1 is added.
    const Plane<float>& differences(int channel) const { return diff_[channel]; }

    /// F_1 + differences, before normalisation.
    Plane<float> raw(int channel) const {
        Plane<float> out = first_[channel];
        for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += diff_[channel].data()[i];
        return out;
    }

    AccumulatorImage finish() const {
        if (count_ < 2) throw Error(ErrorCode::EpochTooShort, "an epoch needs at least 2 frames");
        if (count_ != capacity()) throw Error(ErrorCode::EpochTooShort, "epoch is missing frames");
        AccumulatorImage img{normalize_minmax(raw(0)), normalize_minmax(raw(1)), normalize_minmax(raw(2)), {}};
        img.combined = Plane<float>(img.L.width(), img.L.height());
        const float c = static_cast<float>(params_.lightness_weight);
        for (std::size_t i = 0; i < img.combined.size(); ++i)
            img.combined.data()[i] = img.A.data()[i] + img.B.data()[i] + c * img.L.data()[i];
        return img;
    }

private:
    std::vector<double> weights_;
    AccumulatorParams params_;
    std::size_t count_ = 0;
    std::array<Plane<float>, 3> first_;
    std::array<Plane<float>, 3> prev_;
    std::array<Plane<float>, 3> diff_;
};

inline AccumulatorImage accumulate_epoch(std::span<const OklabFrame> frames, std::span<const double> weights,
                                         const AccumulatorParams& params = {}) {
    if (frames.size() < 2) throw Error(ErrorCode::EpochTooShort, "an epoch needs at least 2 frames");
    if (weights.size() != frames.size() - 1)
        throw Error(ErrorCode::InvalidArgument, "an epoch of N frames needs N-1 weights");
    EpochAccumulator acc(std::vector<double>(weights.begin(), weights.end()), params);
    for (const OklabFrame& f : frames) acc.add(f);
    return acc.finish();
}

inline AccumulatorImage accumulate_epoch(std::span<const OklabFrame> frames, const AccumulatorParams& params = {}) {
    if (frames.size() < 2) throw Error(ErrorCode::EpochTooShort, "an epoch needs at least 2 frames");
    const std::vector<double> w = decay_weights(frames.size(), params.decay);
    return accumulate_epoch(frames, w, params);
}

} // namespace revelio
