#pragma once

// Per-pixel flicker split selection.
//
// A split (lambda, alpha, beta) distributes strength d over the OKLAB axes.
// The pixel is shown at q + delta and q - delta on alternate frames; the
// split is the candidate whose fused pair stays closest to the original in
// the weighted sRGB objective.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "revelio/color_space.hpp"
#include "revelio/error.hpp"
#include "revelio/parallel.hpp"

namespace revelio {

struct FlickerSplit {
    double lambda = 0.0;
    double alpha = 0.0;
    double beta = 0.0;

    double mass() const noexcept { return std::abs(lambda) + std::abs(alpha) + std::abs(beta); }
    FlickerSplit operator-() const noexcept { return {-lambda, -alpha, -beta}; }
    bool operator==(const FlickerSplit&) const = default;
};

inline constexpr double kSplitTolerance = 1e-9;

struct ObjectiveWeights {
    double omega = 0.27;
    double chi = 0.7;
    double gamma = 0.03;

    double sum() const noexcept { return omega + chi + gamma; }
};

/// Weights by original lightness: `dark` up to and including the threshold,
/// `bright` above it.
struct WeightSchedule {
    ObjectiveWeights dark{0.27, 0.7, 0.03};
    ObjectiveWeights bright{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    double threshold = 0.95;

    const ObjectiveWeights& for_lightness(double L) const noexcept { return L > threshold ? bright : dark; }
};

inline void validate(const ObjectiveWeights& w) {
    if (w.omega < 0 || w.chi < 0 || w.gamma < 0 || std::abs(w.sum() - 1.0) > kSplitTolerance)
        throw Error(ErrorCode::InvalidArgument, "objective weights must be nonnegative and sum to 1");
}

inline void validate(const FlickerSplit& s) {
    if (!std::isfinite(s.lambda) || !std::isfinite(s.alpha) || !std::isfinite(s.beta) ||
        std::abs(s.mass() - 1.0) > kSplitTolerance)
        throw Error(ErrorCode::InvalidArgument, "flicker split must satisfy |l|+|a|+|b| = 1");
}

/// Normalised splits with |lambda| from `lambdas`, the rest shared between A
/// and B as t(1-|lambda|) / (1-t)(1-|lambda|), every sign pattern, first
/// occurrence kept.
inline std::vector<FlickerSplit> generate_splits(std::span<const double> lambdas, std::span<const double> shares) {
    std::vector<FlickerSplit> out;
    auto clean = [](double v) { return v == 0.0 ? 0.0 : v; };  // folds -0.0
    for (double lam : lambdas)
        for (double t : shares) {
            const double a = t * (1.0 - lam);
            const double b = (1.0 - t) * (1.0 - lam);
            for (int signs = 0; signs < 8; ++signs) {
                const FlickerSplit s{clean((signs & 4) ? -lam : lam), clean((signs & 2) ? -a : a),
                                     clean((signs & 1) ? -b : b)};
                bool seen = false;
                for (const auto& o : out) seen = seen || o == s;
                if (!seen) out.push_back(s);
            }
        }
    return out;
}

inline std::vector<FlickerSplit> default_split_candidates() {
    static constexpr std::array<double, 4> lambdas{0.0, 0.1, 0.2, 0.3};
    static constexpr std::array<double, 5> shares{0.0, 0.25, 0.5, 0.75, 1.0};
    return generate_splits(lambdas, shares);
}

/// Lightness-heavier splits, only consulted by the residual guard.
inline std::vector<FlickerSplit> fallback_split_candidates() {
    static constexpr std::array<double, 7> lambdas{0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    static constexpr std::array<double, 5> shares{0.0, 0.25, 0.5, 0.75, 1.0};
    return generate_splits(lambdas, shares);
}

/// Validated candidate list. `redundant[i]` marks candidates whose negation
/// appears earlier: both produce the same frame pair, so the earlier one
/// always wins the tie.
class SplitCandidates {
public:
    SplitCandidates() : SplitCandidates(default_split_candidates()) {}
    explicit SplitCandidates(std::vector<FlickerSplit> splits) : splits_(std::move(splits)) {
        if (splits_.empty()) throw Error(ErrorCode::InvalidArgument, "candidate split list is empty");
        if (splits_.size() >= std::numeric_limits<std::uint16_t>::max())
            throw Error(ErrorCode::InvalidArgument, "too many candidate splits");
        redundant_.assign(splits_.size(), false);
        for (std::size_t i = 0; i < splits_.size(); ++i) {
            validate(splits_[i]);
            for (std::size_t j = 0; j < i; ++j)
                if (splits_[j] == -splits_[i] || splits_[j] == splits_[i]) redundant_[i] = true;
        }
    }

    std::size_t size() const noexcept { return splits_.size(); }
    const FlickerSplit& operator[](std::size_t i) const { return splits_[i]; }
    bool redundant(std::size_t i) const { return redundant_[i]; }
    const std::vector<FlickerSplit>& splits() const noexcept { return splits_; }

private:
    std::vector<FlickerSplit> splits_;
    std::vector<bool> redundant_;
};

inline OklabPixel flicker_delta(const FlickerSplit& s, double d) { return {s.lambda * d, s.alpha * d, s.beta * d}; }

inline OklabPixel shifted(const OklabPixel& q, const OklabPixel& delta, int sign) {
    return sign > 0 ? OklabPixel{q.L + delta.L, q.A + delta.A, q.B + delta.B}
                    : OklabPixel{q.L - delta.L, q.A - delta.A, q.B - delta.B};
}

/// omega|r - (r1+r2)/2| + chi|g - (g1+g2)/2| + gamma|b - (b1+b2)/2| over the
/// clamped continuous sRGB values of the flicker pair.
inline double fused_objective(SrgbPixel p, const OklabPixel& q, const FlickerSplit& s, double d,
                              const ObjectiveWeights& w) {
    const OklabPixel delta = flicker_delta(s, d);
    const ClampedRgb up = oklab_to_srgb_continuous(shifted(q, delta, +1));
    const ClampedRgb down = oklab_to_srgb_continuous(shifted(q, delta, -1));
    return w.omega * std::abs(p.r - 0.5 * (up.r + down.r)) + w.chi * std::abs(p.g - 0.5 * (up.g + down.g)) +
           w.gamma * std::abs(p.b - 0.5 * (up.b + down.b));
}

/// Largest per-channel |original - mean| of the rounded 8-bit flicker pair.
inline double fused_residual(SrgbPixel p, const OklabPixel& q, const FlickerSplit& s, double d) {
    const OklabPixel delta = flicker_delta(s, d);
    const SrgbPixel up = oklab_to_srgb(shifted(q, delta, +1)).pixel;
    const SrgbPixel down = oklab_to_srgb(shifted(q, delta, -1)).pixel;
    const double dr = std::abs(p.r - 0.5 * (up.r + down.r));
    const double dg = std::abs(p.g - 0.5 * (up.g + down.g));
    const double db = std::abs(p.b - 0.5 * (up.b + down.b));
    return std::max(dr, std::max(dg, db));
}

/// Index of the candidate minimising the fused objective; ties go to the
/// lowest index.
inline std::size_t select_flicker_split(SrgbPixel p, double d, const SplitCandidates& candidates,
                                        const WeightSchedule& schedule) {
    if (!(d > 0.0)) throw Error(ErrorCode::InvalidArgument, "flicker strength must be positive");
    const OklabPixel q = srgb_to_oklab(p);
    const ObjectiveWeights& w = schedule.for_lightness(q.L);
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates.redundant(i)) continue;
        const double v = fused_objective(p, q, candidates[i], d, w);
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }
    return best;
}

struct ResidualGuard {
    bool enabled = true;
    /// Bound on the per-channel fused residual, in 8-bit levels.
    double max_residual = 3.0;
};

enum class SelectionMode { Exact, Lut };

/// Per-pixel split selection for one strength, with memoisation.
///
/// Index space: primary candidates first, then fallback candidates. The
/// fallback set is only searched when the guard rejects the primary argmin.
class SplitSelector {
public:
    static constexpr std::uint16_t kUnset = std::numeric_limits<std::uint16_t>::max();
    static constexpr int kLutBins = 33;

    SplitSelector(double strength, SplitCandidates primary = {}, WeightSchedule schedule = {},
                  ResidualGuard guard = {}, SelectionMode mode = SelectionMode::Exact,
                  std::vector<FlickerSplit> fallback = fallback_split_candidates())
        : strength_(strength), primary_(std::move(primary)), schedule_(schedule), guard_(guard), mode_(mode) {
        if (!(strength > 0.0)) throw Error(ErrorCode::InvalidArgument, "flicker strength must be positive");
        validate(schedule_.dark);
        validate(schedule_.bright);
        all_ = primary_.splits();
        if (guard_.enabled)
            for (const auto& s : fallback) {
                validate(s);
                all_.push_back(s);
            }
        if (all_.size() >= kUnset) throw Error(ErrorCode::InvalidArgument, "too many candidate splits");
        if (mode_ == SelectionMode::Lut) build_lut();
    }

    double strength() const noexcept { return strength_; }
    const SplitCandidates& primary() const noexcept { return primary_; }
    const WeightSchedule& schedule() const noexcept { return schedule_; }
    const ResidualGuard& guard() const noexcept { return guard_; }
    SelectionMode mode() const noexcept { return mode_; }
    /// Split for an index returned by select().
    const FlickerSplit& split(std::size_t index) const { return all_[index]; }
    std::size_t split_count() const noexcept { return all_.size(); }
    bool is_fallback(std::size_t index) const noexcept { return index >= primary_.size(); }

    /// Uncached selection: exact argmin, then the guard.
    std::uint16_t compute(SrgbPixel p) const {
        const std::size_t best = select_flicker_split(p, strength_, primary_, schedule_);
        if (!guard_.enabled) return static_cast<std::uint16_t>(best);
        const OklabPixel q = srgb_to_oklab(p);
        if (fused_residual(p, q, all_[best], strength_) <= guard_.max_residual) return static_cast<std::uint16_t>(best);

        const ObjectiveWeights& w = schedule_.for_lightness(q.L);
        std::size_t guarded = best;
        double guarded_value = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < all_.size(); ++i) {
            if (i < primary_.size() && primary_.redundant(i)) continue;
            if (fused_residual(p, q, all_[i], strength_) > guard_.max_residual) continue;
            const double v = fused_objective(p, q, all_[i], strength_, w);
            if (v < guarded_value) {
                guarded_value = v;
                guarded = i;
            }
        }
        return static_cast<std::uint16_t>(guarded);
    }

    /// Memoised selection. Call prepare() first when selecting from several
    /// threads; select() itself only fills the cache from one thread.
    std::uint16_t select(SrgbPixel p) {
        if (mode_ == SelectionMode::Lut) return lut_[lut_index(p)];
        ensure_cache();
        std::uint16_t& slot = cache_[key(p)];
        if (slot == kUnset) slot = compute(p);
        return slot;
    }

    /// Fills the cache for every colour in `pixels`, computing new colours in parallel.
    void prepare(std::span<const SrgbPixel> pixels) {
        if (mode_ == SelectionMode::Lut) return;
        ensure_cache();
        std::vector<std::uint32_t> pending;
        for (SrgbPixel p : pixels) {
            std::uint16_t& slot = cache_[key(p)];
            if (slot == kUnset) {
                slot = kPending;
                pending.push_back(key(p));
            }
        }
        std::vector<std::uint16_t> results(pending.size());
        parallel_for(0, pending.size(), [&](std::size_t i) { results[i] = compute(unkey(pending[i])); });
        for (std::size_t i = 0; i < pending.size(); ++i) cache_[pending[i]] = results[i];
    }

    /// Cached lookup that never computes; prepare() must have seen the colour.
    std::uint16_t cached(SrgbPixel p) const {
        if (mode_ == SelectionMode::Lut) return lut_[lut_index(p)];
        return cache_[key(p)];
    }

private:
    static constexpr std::uint16_t kPending = kUnset - 1;

    static std::uint32_t key(SrgbPixel p) noexcept { return (std::uint32_t{p.r} << 16) | (std::uint32_t{p.g} << 8) | p.b; }
    static SrgbPixel unkey(std::uint32_t k) noexcept {
        return {static_cast<std::uint8_t>(k >> 16), static_cast<std::uint8_t>(k >> 8), static_cast<std::uint8_t>(k)};
    }
    static int bin(std::uint8_t v) noexcept { return static_cast<int>(std::lround(v * (kLutBins - 1) / 255.0)); }
    static std::size_t lut_index(SrgbPixel p) noexcept {
        return static_cast<std::size_t>((bin(p.r) * kLutBins + bin(p.g)) * kLutBins + bin(p.b));
    }

    void ensure_cache() {
        if (cache_.empty()) cache_.assign(std::size_t{1} << 24, kUnset);
    }

    void build_lut() {
        lut_.assign(static_cast<std::size_t>(kLutBins * kLutBins * kLutBins), 0);
        parallel_for(0, lut_.size(), [&](std::size_t i) {
            const int b = static_cast<int>(i % kLutBins);
            const int g = static_cast<int>((i / kLutBins) % kLutBins);
            const int r = static_cast<int>(i / (kLutBins * kLutBins));
            auto level = [](int k) { return static_cast<std::uint8_t>(std::lround(k * 255.0 / (kLutBins - 1))); };
            lut_[i] = compute({level(r), level(g), level(b)});
        });
    }

    double strength_;
    SplitCandidates primary_;
    WeightSchedule schedule_;
    ResidualGuard guard_;
    SelectionMode mode_;
    std::vector<FlickerSplit> all_;
    std::vector<std::uint16_t> cache_;
    std::vector<std::uint16_t> lut_;
};

/// Selected primary-split index for every (R, G) at a fixed blue level,
/// row-major with R along x. Guard disabled: this is the pure objective map.
inline Plane<std::uint16_t> split_heatmap(double strength, std::uint8_t blue, const SplitCandidates& candidates = {},
                                          const WeightSchedule& schedule = {}) {
    Plane<std::uint16_t> map(256, 256);
    parallel_for(0, 256, [&](std::size_t g) {
        for (int r = 0; r < 256; ++r)
            map.at(r, static_cast<int>(g)) = static_cast<std::uint16_t>(select_flicker_split(
                {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), blue}, strength, candidates, schedule));
    });
    return map;
}

} // namespace revelio
