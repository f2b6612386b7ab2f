#pragma once

// Recording decoder: epoch accumulation, quad detection, perspective
// correction, patch classification and voting, RS decoding, and time
// diversity across up to three disjoint epochs.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "revelio/accumulator.hpp"
#include "revelio/classifier.hpp"
#include "revelio/color_space.hpp"
#include "revelio/error.hpp"
#include "revelio/frame_source.hpp"
#include "revelio/interleave.hpp"
#include "revelio/parallel.hpp"
#include "revelio/quad_detection.hpp"
#include "revelio/random.hpp"
#include "revelio/reed_solomon.hpp"

namespace revelio {

inline constexpr std::size_t kMinEpochLength = 8;
inline constexpr std::size_t kMaxEpochLength = 15;
inline constexpr std::size_t kMaxEpochs = 3;
inline constexpr int kDefaultMinAgreement = 8;

struct DecoderParams {
    std::size_t epoch_length = 12;
    AccumulatorParams accumulator{};
    QuadDetectionParams quad{};
    int jitter = 6;
    ClassifierParams classifier{};
    int min_votes = 3;
    /// Non-erased received bytes that must match the decoded codeword.
    int min_agreement = kDefaultMinAgreement;
};

inline void validate(const DecoderParams& p) {
    if (p.epoch_length < kMinEpochLength || p.epoch_length > kMaxEpochLength)
        throw Error(ErrorCode::InvalidArgument, "epoch length must lie in [8, 15]");
    validate(p.accumulator);
    if (p.jitter < 0 || p.jitter > kPatchCentre) throw Error(ErrorCode::InvalidArgument, "jitter must lie in [0, 43]");
    if (p.min_votes < 1 || p.min_votes > kPatchesPerCell)
        throw Error(ErrorCode::InvalidArgument, "minimum vote count must lie in [1, 9]");
    if (p.min_agreement < kDataBytes || p.min_agreement > kCodewordLength)
        throw Error(ErrorCode::InvalidArgument, "minimum agreement must lie in [2, 36]");
    PatchClassifier{p.classifier};
}

/// Non-erased bytes of `word` equal to the codeword of `code`.
inline int agreeing_bytes(const ReceivedWord& word, RevelioCode code) {
    const Codeword c = rs_encode(code);
    int n = 0;
    for (int i = 0; i < kCodewordLength; ++i) n += (word[i] && *word[i] == c[i]) ? 1 : 0;
    return n;
}

/// RS decoding that rejects results too weakly supported by the received
/// bytes. With 34 erasures any two bytes decode, so rs_decode alone cannot
/// tell an encoded epoch from noise.
inline std::optional<RevelioCode> verified_decode(const ReceivedWord& word, int min_agreement, int* agreement = nullptr) {
    const std::optional<RevelioCode> code = rs_decode(word);
    const int n = code ? agreeing_bytes(word, *code) : 0;
    if (agreement) *agreement = n;
    if (!code || n < min_agreement) return std::nullopt;
    return code;
}

inline constexpr std::size_t kMarginBins = 10;

struct EpochResult {
    std::size_t start = 0;
    std::size_t length = 0;
    std::optional<Quad> quad;
    ShapeGrid grid{};
    SoftBitStream bits = erased_stream();
    std::optional<RevelioCode> code;
    int erased_symbols = kGridCells;
    int erased_bits = kStreamBits;
    int erased_bytes = kCodewordLength;
    int degenerate_patches = 0;
    /// Received bytes matching the RS decode, 0 when RS decoding failed.
    int agreeing_bytes = 0;
    /// Patch margins in tenths, last bin closed at 1.
    std::array<int, kMarginBins> margin_histogram{};

    bool success() const noexcept { return code.has_value(); }

    static SoftBitStream erased_stream() {
        SoftBitStream s;
        s.fill(SoftBit::Erased);
        return s;
    }
};

/// Classifies every cell of a perspective-corrected combined plane.
inline EpochResult classify_grid(const Plane<float>& corrected, const PatchClassifier& classifier,
                                 const DecoderParams& params) {
    EpochResult r;
    std::array<std::array<PatchVerdict, kPatchesPerCell>, kGridCells> verdicts;
    parallel_for(0, kGridCells, [&](std::size_t cell) {
        const int row = static_cast<int>(cell) / kGridCols, col = static_cast<int>(cell) % kGridCols;
        const auto patches = extract_patches(corrected, row, col, params.jitter);
        for (std::size_t p = 0; p < kPatchesPerCell; ++p) verdicts[cell][p] = classifier.classify(patches[p]);
    });
    for (std::size_t cell = 0; cell < kGridCells; ++cell) {
        r.grid.cells()[cell] = vote_symbol(verdicts[cell], params.min_votes);
        for (const PatchVerdict& v : verdicts[cell]) {
            r.degenerate_patches += v.degenerate ? 1 : 0;
            ++r.margin_histogram[std::min(kMarginBins - 1, static_cast<std::size_t>(v.margin * kMarginBins))];
        }
    }
    r.bits = shapes_to_bits(r.grid);
    const ReceivedWord word = deinterleave(r.grid);
    r.erased_symbols = 0;
    for (const ShapeCell& c : r.grid.cells()) r.erased_symbols += c ? 0 : 1;
    r.erased_bits = count_erased(r.bits);
    r.erased_bytes = count_erased(word);
    r.code = verified_decode(word, params.min_agreement, &r.agreeing_bytes);
    return r;
}

/// Quad detection, perspective correction, classification and RS decoding
/// of one accumulated epoch. A missing quad yields an all-erased result.
inline EpochResult decode_accumulator(const AccumulatorImage& acc, const DecoderParams& params = {}) {
    const PatchClassifier classifier(params.classifier);
    const std::optional<Quad> quad = detect_frame_quad(acc.combined, params.quad);
    if (!quad) {
        EpochResult r;
        r.margin_histogram[0] = kGridCells * kPatchesPerCell;
        return r;
    }
    const Plane<float> corrected = correct_perspective(acc.combined, *quad);
    EpochResult r = classify_grid(corrected, classifier, params);
    r.quad = quad;
    return r;
}

inline EpochResult decode_epoch(std::span<const OklabFrame> frames, const DecoderParams& params = {}) {
    validate(params);
    if (frames.size() < 2) throw Error(ErrorCode::EpochTooShort, "an epoch needs at least 2 frames");
    EpochResult r = decode_accumulator(accumulate_epoch(frames, params.accumulator), params);
    r.length = frames.size();
    return r;
}

/// Decodes frames [start, start + epoch_length) of the source, converting
/// and accumulating one frame at a time.
inline EpochResult decode_epoch(FrameSource& source, std::size_t start, const DecoderParams& params = {}) {
    validate(params);
    if (start + params.epoch_length > source.size())
        throw Error(ErrorCode::EpochTooShort, "epoch runs past the end of the recording");
    EpochAccumulator acc(params.epoch_length, params.accumulator);
    for (std::size_t k = start; k < start + params.epoch_length; ++k) acc.add(to_oklab(source.frame(k)));
    EpochResult r = decode_accumulator(acc.finish(), params);
    r.start = start;
    r.length = params.epoch_length;
    return r;
}

/// Per-position merge: agreeing non-erased bits survive, any conflict or
/// total absence is an erasure.
inline std::vector<SoftBit> combine_soft_bits(std::span<const std::span<const SoftBit>> streams) {
    if (streams.size() < 2 || streams.size() > kMaxEpochs)
        throw Error(ErrorCode::InvalidArgument, "combine takes 2 or 3 streams");
    for (const auto& s : streams)
        if (s.size() != streams[0].size()) throw Error(ErrorCode::LengthMismatch, "bit streams differ in length");
    std::vector<SoftBit> out(streams[0].size(), SoftBit::Erased);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::optional<SoftBit> value;
        bool conflict = false;
        for (const auto& s : streams) {
            if (s[i] == SoftBit::Erased) continue;
            if (value && *value != s[i]) conflict = true;
            value = s[i];
        }
        if (value && !conflict) out[i] = *value;
    }
    return out;
}

inline SoftBitStream combine_epochs(std::span<const SoftBitStream> streams) {
    std::vector<std::span<const SoftBit>> views(streams.begin(), streams.end());
    const std::vector<SoftBit> merged = combine_soft_bits(views);
    SoftBitStream out;
    std::copy(merged.begin(), merged.end(), out.begin());
    return out;
}

/// Up to three disjoint epoch starts, drawn uniformly with rejection. The
/// draw depends only on (length, epoch_length, seed).
inline std::vector<std::size_t> draw_epoch_starts(std::size_t length, std::size_t epoch_length, std::uint64_t seed,
                                                  std::size_t max_epochs = kMaxEpochs) {
    if (epoch_length == 0 || length < epoch_length)
        throw Error(ErrorCode::EpochTooShort, "recording of " + std::to_string(length) +
                                                  " frames is shorter than one epoch of " +
                                                  std::to_string(epoch_length));
    const std::size_t count = std::min(max_epochs, length / epoch_length);
    std::vector<std::size_t> starts;
    std::uint64_t state = seed;
    auto disjoint = [&](std::size_t s) {
        for (std::size_t o : starts)
            if (s < o + epoch_length && o < s + epoch_length) return false;
        return true;
    };
    // Rejection per epoch; a set that fragments the recording is redrawn whole.
    for (int round = 0; round < 1000 && starts.size() < count; ++round) {
        starts.clear();
        for (int attempt = 0; attempt < 64 && starts.size() < count; ++attempt) {
            const std::size_t s = static_cast<std::size_t>(detail::uniform_index(state, length - epoch_length));
            if (disjoint(s)) starts.push_back(s);
        }
    }
    if (starts.size() < count) {
        starts.clear();
        for (std::size_t i = 0; i < count; ++i) starts.push_back(i * epoch_length);
    }
    return starts;
}

struct CombineAttempt {
    std::vector<std::size_t> epochs;
    int erased_bits = 0;
    int erased_bytes = 0;
    int agreeing_bytes = 0;
    std::optional<RevelioCode> code;
};

struct DecodeReport {
    std::optional<RevelioCode> code;
    /// "epoch1", "epoch2", "epoch3", "combined12", "combined123" or "none".
    std::string resolved_by = "none";
    std::uint64_t seed = 0;
    std::size_t recording_length = 0;
    std::size_t epoch_length = 0;
    std::vector<std::size_t> planned_starts;
    std::vector<EpochResult> epochs;
    std::vector<CombineAttempt> combined;

    bool success() const noexcept { return code.has_value(); }
};

/// Time-diversity driver over an arbitrary epoch decoder. Epochs are decoded
/// lazily: later ones only when every earlier path has failed.
template <typename DecodeAt>
DecodeReport decode_with_diversity(std::size_t length, std::size_t epoch_length, std::uint64_t seed,
                                   DecodeAt&& decode_at, int min_agreement = kDefaultMinAgreement) {
    DecodeReport report;
    report.seed = seed;
    report.recording_length = length;
    report.epoch_length = epoch_length;
    report.planned_starts = draw_epoch_starts(length, epoch_length, seed);

    auto try_combine = [&](std::string label) {
        std::vector<SoftBitStream> streams;
        CombineAttempt attempt;
        for (std::size_t i = 0; i < report.epochs.size(); ++i) {
            streams.push_back(report.epochs[i].bits);
            attempt.epochs.push_back(i + 1);
        }
        const SoftBitStream merged = combine_epochs(streams);
        const ReceivedWord word = deinterleave(merged);
        attempt.erased_bits = count_erased(merged);
        attempt.erased_bytes = count_erased(word);
        attempt.code = verified_decode(word, min_agreement, &attempt.agreeing_bytes);
        report.combined.push_back(attempt);
        if (attempt.code) {
            report.code = attempt.code;
            report.resolved_by = std::move(label);
        }
        return attempt.code.has_value();
    };

    for (std::size_t e = 0; e < report.planned_starts.size(); ++e) {
        report.epochs.push_back(decode_at(report.planned_starts[e]));
        if (report.epochs.back().code) {
            report.code = report.epochs.back().code;
            report.resolved_by = "epoch" + std::to_string(e + 1);
            return report;
        }
        if (e == 1 && try_combine("combined12")) return report;
        if (e == 2 && try_combine("combined123")) return report;
    }
    return report;
}

inline DecodeReport decode_recording(FrameSource& recording, std::uint64_t seed, const DecoderParams& params = {}) {
    validate(params);
    return decode_with_diversity(recording.size(), params.epoch_length, seed,
                                 [&](std::size_t start) { return decode_epoch(recording, start, params); },
                                 params.min_agreement);
}

} // namespace revelio
