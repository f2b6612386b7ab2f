#pragma once

// Video quality metrics (PSNR, single-scale SSIM on luma) and the
// error-rate benchmark over simulated channel trials.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "revelio/channel_sim.hpp"
#include "revelio/decoder.hpp"
#include "revelio/error.hpp"
#include "revelio/image.hpp"
#include "revelio/parallel.hpp"
#include "revelio/random.hpp"

namespace revelio {

inline constexpr double kPsnrCap = 99.0;

/// 10·log10(255² / MSE) over every RGB sample, capped at 99 dB.
inline double psnr(const FrameBuffer& ref, const FrameBuffer& test) {
    require_same_shape(ref, test, "psnr");
    const auto a = ref.bytes(), b = test.bytes();
    std::uint64_t sse = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const int d = static_cast<int>(a[i]) - static_cast<int>(b[i]);
        sse += static_cast<std::uint64_t>(d * d);
    }
    if (sse == 0 || a.empty()) return kPsnrCap;
    const double mse = static_cast<double>(sse) / static_cast<double>(a.size());
    return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

/// BT.601 luma, unrounded.
inline Plane<double> luma_plane(const FrameBuffer& f) {
    Plane<double> y(f.width(), f.height());
    for (std::size_t i = 0; i < f.pixel_count(); ++i) {
        const SrgbPixel p = f.pixel(i);
        y.data()[i] = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
    }
    return y;
}

struct SsimParams {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double range = 255.0;
};

namespace detail {

inline std::vector<double> normalized_gaussian(int size, double sigma) {
    std::vector<double> k(static_cast<std::size_t>(size));
    const double c = (size - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) sum += k[static_cast<std::size_t>(i)] = std::exp(-(i - c) * (i - c) / (2 * sigma * sigma));
    for (double& v : k) v /= sum;
    return k;
}

/// Separable filter over valid window positions only: output is
/// (w - n + 1) × (h - n + 1).
inline Plane<double> filter_valid(const Plane<double>& src, std::span<const double> k) {
    const int n = static_cast<int>(k.size());
    const int ow = src.width() - n + 1, oh = src.height() - n + 1;
    Plane<double> horiz(ow, src.height());
    parallel_for(0, static_cast<std::size_t>(src.height()), [&](std::size_t yy) {
        const int y = static_cast<int>(yy);
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += k[static_cast<std::size_t>(i)] * src.at(x + i, y);
            horiz.at(x, y) = s;
        }
    });
    Plane<double> out(ow, oh);
    parallel_for(0, static_cast<std::size_t>(oh), [&](std::size_t yy) {
        const int y = static_cast<int>(yy);
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += k[static_cast<std::size_t>(i)] * horiz.at(x, y + i);
            out.at(x, y) = s;
        }
    });
    return out;
}

} // namespace detail

/// Mean SSIM over every window position fully inside the frame.
inline double ssim(const FrameBuffer& ref, const FrameBuffer& test, const SsimParams& params = {}) {
    require_same_shape(ref, test, "ssim");
    if (ref.width() < params.window || ref.height() < params.window)
        throw Error(ErrorCode::DimensionMismatch, "frame smaller than the SSIM window");
    const Plane<double> x = luma_plane(ref), y = luma_plane(test);
    Plane<double> xx(x.width(), x.height()), yy(x.width(), x.height()), xy(x.width(), x.height());
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx.data()[i] = x.data()[i] * x.data()[i];
        yy.data()[i] = y.data()[i] * y.data()[i];
        xy.data()[i] = x.data()[i] * y.data()[i];
    }
    const std::vector<double> k = detail::normalized_gaussian(params.window, params.sigma);
    const Plane<double> mx = detail::filter_valid(x, k), my = detail::filter_valid(y, k);
    const Plane<double> sxx = detail::filter_valid(xx, k), syy = detail::filter_valid(yy, k);
    const Plane<double> sxy = detail::filter_valid(xy, k);
    const double c1 = (params.k1 * params.range) * (params.k1 * params.range);
    const double c2 = (params.k2 * params.range) * (params.k2 * params.range);
    double total = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double ux = mx.data()[i], uy = my.data()[i];
        const double vx = sxx.data()[i] - ux * ux, vy = syy.data()[i] - uy * uy;
        const double cov = sxy.data()[i] - ux * uy;
        total += ((2 * ux * uy + c1) * (2 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
    }
    return std::clamp(total / static_cast<double>(mx.size()), -1.0, 1.0);
}

struct SeriesStats {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Population statistics; an empty series is all zero.
inline SeriesStats series_stats(std::span<const double> v) {
    SeriesStats s;
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(var / static_cast<double>(v.size()));
    return s;
}

struct QualityReport {
    std::vector<double> psnr;
    std::vector<double> ssim;
    SeriesStats psnr_stats;
    SeriesStats ssim_stats;
};

inline QualityReport measure_quality(std::span<const FrameBuffer> ref, std::span<const FrameBuffer> test) {
    if (ref.size() != test.size())
        throw Error(ErrorCode::LengthMismatch, "reference has " + std::to_string(ref.size()) + " frames, test has " +
                                                   std::to_string(test.size()));
    QualityReport r;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        r.psnr.push_back(psnr(ref[i], test[i]));
        r.ssim.push_back(ssim(ref[i], test[i]));
    }
    r.psnr_stats = series_stats(r.psnr);
    r.ssim_stats = series_stats(r.ssim);
    return r;
}

struct BenchProfile {
    std::string name;
    ChannelProfile profile;
};

struct TrialResult {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    bool success = false;
    std::optional<RevelioCode> decoded;
    std::string resolved_by = "none";
    std::size_t epochs_decoded = 0;
    bool quad_found = false;
    int erased_bits = kStreamBits;
};

struct ProfileResult {
    std::string name;
    ChannelProfile profile;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double error_rate = 0.0;
    std::vector<TrialResult> diagnostics;
};

struct BenchReport {
    RevelioCode code;
    std::uint64_t seed = 0;
    std::size_t trials_per_profile = 0;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double error_rate = 0.0;
    std::vector<ProfileResult> profiles;
};

inline double error_rate(std::size_t successes, std::size_t trials) {
    return trials == 0 ? 0.0 : 1.0 - static_cast<double>(successes) / static_cast<double>(trials);
}

inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t profile_index, std::size_t trial) {
    return detail::mix_seed(detail::mix_seed(seed, profile_index), trial);
}

/// Simulates and decodes every profile × trial. Trial t of profile p uses
/// trial_seed(seed, p, t) for both the channel noise and the epoch draw.
inline BenchReport run_bench(std::span<const FrameBuffer> encoded, RevelioCode code,
                             std::span<const BenchProfile> profiles, std::size_t trials, std::uint64_t seed,
                             const DecoderParams& params = {}) {
    if (trials < 1) throw Error(ErrorCode::InvalidArgument, "bench needs at least one trial per profile");
    if (profiles.empty()) throw Error(ErrorCode::InvalidArgument, "bench needs at least one profile");
    validate(params);
    for (const BenchProfile& p : profiles) validate(p.profile);

    BenchReport report;
    report.code = code;
    report.seed = seed;
    report.trials_per_profile = trials;
    for (std::size_t pi = 0; pi < profiles.size(); ++pi) {
        ProfileResult pr;
        pr.name = profiles[pi].name;
        pr.profile = profiles[pi].profile;
        pr.trials = trials;
        for (std::size_t t = 0; t < trials; ++t) {
            TrialResult tr;
            tr.trial = t;
            tr.seed = trial_seed(seed, pi, t);
            ChannelProfile channel = profiles[pi].profile;
            channel.seed = tr.seed;
            SimulatedRecording recording(encoded, channel);
            const DecodeReport dr = decode_recording(recording, tr.seed, params);
            tr.decoded = dr.code;
            tr.success = dr.code.has_value() && *dr.code == code;
            tr.resolved_by = dr.resolved_by;
            tr.epochs_decoded = dr.epochs.size();
            tr.quad_found = !dr.epochs.empty() && dr.epochs.front().quad.has_value();
            tr.erased_bits = dr.epochs.empty() ? kStreamBits : dr.epochs.front().erased_bits;
            pr.successes += tr.success ? 1 : 0;
            pr.diagnostics.push_back(std::move(tr));
        }
        pr.error_rate = error_rate(pr.successes, pr.trials);
        report.trials += pr.trials;
        report.successes += pr.successes;
        report.profiles.push_back(std::move(pr));
    }
    report.error_rate = error_rate(report.successes, report.trials);
    return report;
}

} // namespace revelio
