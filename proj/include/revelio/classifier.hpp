#pragma once

// Symbol classification on perspective-corrected accumulator planes:
// jittered 86x86 patches, normalised cross-correlation against rendered
// ellipse templates, softmax margin rule, plurality vote.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>

#include "revelio/data_frame.hpp"
#include "revelio/error.hpp"
#include "revelio/image.hpp"
#include "revelio/interleave.hpp"

namespace revelio {

/// ceil(1.15 * 74): 15% over the 74-px symbol bounding box.
inline constexpr int kPatchSize = 86;
/// Patch pixel holding the cell centre.
inline constexpr int kPatchCentre = kPatchSize / 2;
inline constexpr int kPatchesPerCell = 9;

/// Centre, then N, S, E, W, NE, NW, SE, SW (y grows downward).
inline constexpr std::array<PixelPoint, kPatchesPerCell> kJitterDirections{
    {{0, 0}, {0, -1}, {0, 1}, {1, 0}, {-1, 0}, {1, -1}, {-1, -1}, {1, 1}, {-1, 1}}};

inline PixelPoint patch_centre(int row, int col, int patch, int jitter) {
    const PixelPoint c = cell_center(row, col);
    const PixelPoint d = kJitterDirections.at(static_cast<std::size_t>(patch));
    return {c.x + jitter * d.x, c.y + jitter * d.y};
}

/// Square patch with `centre` at pixel (43, 43); reads clamp to the edge.
inline Plane<float> extract_patch(const Plane<float>& src, PixelPoint centre) {
    Plane<float> out(kPatchSize, kPatchSize);
    for (int y = 0; y < kPatchSize; ++y)
        for (int x = 0; x < kPatchSize; ++x)
            out.at(x, y) = src.clamped(centre.x - kPatchCentre + x, centre.y - kPatchCentre + y);
    return out;
}

inline std::array<Plane<float>, kPatchesPerCell> extract_patches(const Plane<float>& corrected, int row, int col,
                                                                 int jitter = 6) {
    if (row < 0 || row >= kGridRows || col < 0 || col >= kGridCols)
        throw Error(ErrorCode::InvalidArgument, "cell outside the 9x16 grid");
    std::array<Plane<float>, kPatchesPerCell> out;
    for (int p = 0; p < kPatchesPerCell; ++p) out[static_cast<std::size_t>(p)] = extract_patch(corrected, patch_centre(row, col, p, jitter));
    return out;
}

struct ClassifierParams {
    double margin_threshold = 0.35;
    /// Softmax temperature applied to correlation scores in [-1, 1].
    double temperature = 0.1;
};

struct PatchVerdict {
    std::optional<SymbolShape> shape;
    /// top1 - top2 softmax probability; 0 for degenerate patches.
    double margin = 0.0;
    bool degenerate = false;
    std::array<double, 4> scores{};
};

/// Binary ellipse template, 1 inside the symbol, centred on the patch.
inline Plane<float> render_template(SymbolShape shape) {
    Plane<float> t(kPatchSize, kPatchSize, 0.0f);
    const SymbolGeometry g{static_cast<double>(kPatchCentre), static_cast<double>(kPatchCentre), shape,
                           semi_major_for(shape), kSemiMinor};
    for (const PixelPoint& p : rasterize_symbol(g))
        if (p.x >= 0 && p.y >= 0 && p.x < kPatchSize && p.y < kPatchSize) t.at(p.x, p.y) = 1.0f;
    return t;
}

class PatchClassifier {
public:
    explicit PatchClassifier(ClassifierParams params = {}) : params_(params) {
        if (!(params_.temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "softmax temperature must be positive");
        if (!(params_.margin_threshold >= 0.0 && params_.margin_threshold < 1.0))
            throw Error(ErrorCode::InvalidArgument, "margin threshold must lie in [0, 1)");
        for (SymbolShape s : kAllShapes) {
            const Plane<float> t = render_template(s);
            auto& n = templates_[static_cast<std::size_t>(s)];
            n = normalised(t).value();
        }
    }

    const ClassifierParams& params() const noexcept { return params_; }

    PatchVerdict classify(const Plane<float>& patch) const {
        if (patch.width() != kPatchSize || patch.height() != kPatchSize)
            throw Error(ErrorCode::DimensionMismatch, "patches must be 86x86");
        PatchVerdict v;
        const auto p = normalised(patch);
        if (!p) {
            v.degenerate = true;
            return v;
        }
        for (std::size_t s = 0; s < 4; ++s) {
            double dot = 0.0;
            for (std::size_t i = 0; i < p->size(); ++i) dot += (*p)[i] * templates_[s][i];
            v.scores[s] = dot;
        }
        const double top = *std::max_element(v.scores.begin(), v.scores.end());
        std::array<double, 4> prob{};
        double z = 0.0;
        for (std::size_t s = 0; s < 4; ++s) z += prob[s] = std::exp((v.scores[s] - top) / params_.temperature);
        for (double& q : prob) q /= z;
        std::size_t first = 0;
        for (std::size_t s = 1; s < 4; ++s)
            if (prob[s] > prob[first]) first = s;
        double second = 0.0;
        for (std::size_t s = 0; s < 4; ++s)
            if (s != first) second = std::max(second, prob[s]);
        v.margin = prob[first] - second;
        if (v.margin > params_.margin_threshold) v.shape = static_cast<SymbolShape>(first);
        return v;
    }

private:
    /// Zero mean, unit L2 norm; nullopt for (numerically) constant input.
    static std::optional<std::array<double, kPatchSize * kPatchSize>> normalised(const Plane<float>& p) {
        std::array<double, kPatchSize * kPatchSize> out{};
        double mean = 0.0;
        for (float v : p.data()) mean += v;
        mean /= static_cast<double>(p.size());
        double norm = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            out[i] = p.data()[i] - mean;
            norm += out[i] * out[i];
        }
        if (!(norm > 1e-9 * static_cast<double>(p.size()))) return std::nullopt;
        norm = std::sqrt(norm);
        for (double& v : out) v /= norm;
        return out;
    }

    ClassifierParams params_;
    std::array<std::array<double, kPatchSize * kPatchSize>, 4> templates_{};
};

/// Plurality among non-erased verdicts; the winner needs at least
/// `min_votes` and strictly more than the runner-up.
inline ShapeCell vote_symbol(std::span<const PatchVerdict> verdicts, int min_votes = 3) {
    if (verdicts.size() != kPatchesPerCell) throw Error(ErrorCode::InvalidArgument, "a vote takes exactly 9 verdicts");
    std::array<int, 4> counts{};
    for (const PatchVerdict& v : verdicts)
        if (v.shape) ++counts[static_cast<std::size_t>(*v.shape)];
    std::size_t best = 0;
    for (std::size_t s = 1; s < 4; ++s)
        if (counts[s] > counts[best]) best = s;
    int runner_up = 0;
    for (std::size_t s = 0; s < 4; ++s)
        if (s != best) runner_up = std::max(runner_up, counts[s]);
    if (counts[best] < min_votes || counts[best] <= runner_up) return std::nullopt;
    return static_cast<SymbolShape>(best);
}

} // namespace revelio
