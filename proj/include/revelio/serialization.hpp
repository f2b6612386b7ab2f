#pragma once

// JSON for configs, channel profiles and reports. Readers are strict:
// unknown keys, wrong types and out-of-range values are InvalidConfig.
// Keys absent from an input keep their defaults.

#include <cctype>
#include <cstdint>
#include <limits>
#include <type_traits>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "revelio/channel_sim.hpp"
#include "revelio/decoder.hpp"
#include "revelio/encoder.hpp"
#include "revelio/error.hpp"
#include "revelio/metrics.hpp"

namespace revelio {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr double kMaxStrength = 0.25;

/// Everything a run depends on besides its input frames.
struct RunConfig {
    EncoderOptions encoder{};
    DecoderParams decoder{};
    ChannelProfile channel{};
    std::uint64_t seed = 0;
};

// ---- codes -----------------------------------------------------------------

/// Accepts 1 to 4 hex digits with an optional 0x prefix.
inline RevelioCode parse_code(std::string_view text) {
    std::string_view digits = text;
    if (digits.size() >= 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X')) digits.remove_prefix(2);
    if (digits.empty() || digits.size() > 4)
        throw Error(ErrorCode::InvalidConfig, "code '" + std::string(text) + "' is not a 16-bit hex value");
    std::uint32_t v = 0;
    for (char c : digits) {
        if (!std::isxdigit(static_cast<unsigned char>(c)))
            throw Error(ErrorCode::InvalidConfig, "code '" + std::string(text) + "' is not a 16-bit hex value");
        v = v * 16 + static_cast<std::uint32_t>(std::isdigit(static_cast<unsigned char>(c)) ? c - '0'
                                                                                             : std::tolower(c) - 'a' + 10);
    }
    return RevelioCode{static_cast<std::uint16_t>(v)};
}

inline std::string format_code(RevelioCode code) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string s = "0x";
    for (int shift = 12; shift >= 0; shift -= 4) s += kHex[(code.payload >> shift) & 0xF];
    return s;
}

// ---- strict reading ---------------------------------------------------------

namespace detail {

[[noreturn]] inline void config_error(const std::string& path, const std::string& message) {
    throw Error(ErrorCode::InvalidConfig, (path.empty() ? std::string("<root>") : path) + ": " + message);
}

inline void read_value(const Json& j, double& out, const std::string& path) {
    if (!j.is_number()) config_error(path, "expected a number");
    out = j.get<double>();
}

inline void read_value(const Json& j, int& out, const std::string& path) {
    if (!j.is_number_integer()) config_error(path, "expected an integer");
    const auto v = j.get<std::int64_t>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) config_error(path, "out of range");
    out = static_cast<int>(v);
}

template <typename T>
    requires(std::is_unsigned_v<T> && !std::is_same_v<T, bool>)
void read_value(const Json& j, T& out, const std::string& path) {
    if (!j.is_number_unsigned()) config_error(path, "expected a nonnegative integer");
    const auto v = j.get<std::uint64_t>();
    if (v > std::numeric_limits<T>::max()) config_error(path, "out of range");
    out = static_cast<T>(v);
}

inline void read_value(const Json& j, bool& out, const std::string& path) {
    if (!j.is_boolean()) config_error(path, "expected true or false");
    out = j.get<bool>();
}

inline void read_value(const Json& j, std::string& out, const std::string& path) {
    if (!j.is_string()) config_error(path, "expected a string");
    out = j.get<std::string>();
}

inline std::vector<double> read_numbers(const Json& j, std::size_t n, const std::string& path) {
    if (!j.is_array() || j.size() != n) config_error(path, "expected an array of " + std::to_string(n) + " numbers");
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) read_value(j[i], v[i], path + "[" + std::to_string(i) + "]");
    return v;
}

inline void read_value(const Json& j, Point2& out, const std::string& path) {
    const auto v = read_numbers(j, 2, path);
    out = {v[0], v[1]};
}

inline void read_value(const Json& j, Quad& out, const std::string& path) {
    if (!j.is_array() || j.size() != 4) config_error(path, "expected four [x, y] corners");
    for (std::size_t i = 0; i < 4; ++i) read_value(j[i], out.corners[i], path + "[" + std::to_string(i) + "]");
}

inline void read_value(const Json& j, SrgbPixel& out, const std::string& path) {
    if (!j.is_array() || j.size() != 3) config_error(path, "expected [r, g, b]");
    std::uint8_t c[3];
    for (std::size_t i = 0; i < 3; ++i) {
        int v = 0;
        read_value(j[i], v, path + "[" + std::to_string(i) + "]");
        if (v < 0 || v > 255) config_error(path, "channel outside [0, 255]");
        c[i] = static_cast<std::uint8_t>(v);
    }
    out = {c[0], c[1], c[2]};
}

inline void read_value(const Json& j, FlickerSplit& out, const std::string& path) {
    const auto v = read_numbers(j, 3, path);
    out = {v[0], v[1], v[2]};
}

inline void read_value(const Json& j, std::vector<FlickerSplit>& out, const std::string& path) {
    if (!j.is_array() || j.empty()) config_error(path, "expected a nonempty array of [lambda, alpha, beta]");
    out.assign(j.size(), {});
    for (std::size_t i = 0; i < j.size(); ++i) read_value(j[i], out[i], path + "[" + std::to_string(i) + "]");
}

inline void read_value(const Json& j, SelectionMode& out, const std::string& path) {
    std::string s;
    read_value(j, s, path);
    if (s == "exact") out = SelectionMode::Exact;
    else if (s == "lut") out = SelectionMode::Lut;
    else config_error(path, "expected \"exact\" or \"lut\"");
}

void read_value(const Json& j, ObjectiveWeights& out, const std::string& path);
void read_value(const Json& j, WeightSchedule& out, const std::string& path);
void read_value(const Json& j, ResidualGuard& out, const std::string& path);
void read_value(const Json& j, EncoderOptions& out, const std::string& path);
void read_value(const Json& j, AccumulatorParams& out, const std::string& path);
void read_value(const Json& j, QuadDetectionParams& out, const std::string& path);
void read_value(const Json& j, ClassifierParams& out, const std::string& path);
void read_value(const Json& j, DecoderParams& out, const std::string& path);
void read_value(const Json& j, ChannelProfile& out, const std::string& path);

/// Consumes keys of one object; finish() rejects whatever was not consumed.
class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path, bool top_level = false) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) config_error(path_, "expected an object");
        if (top_level) {
            seen_.insert("schema_version");
            if (auto it = j.find("schema_version"); it != j.end()) {
                int v = 0;
                read_value(*it, v, child("schema_version"));
                if (v != kSchemaVersion)
                    config_error(child("schema_version"), "unsupported version " + std::to_string(v));
            }
        }
    }

    template <typename T>
    ObjectReader& read(const char* key, T& out) {
        seen_.insert(key);
        if (auto it = j_.find(key); it != j_.end()) read_value(*it, out, child(key));
        return *this;
    }

    const Json* find(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) config_error(child(it.key()), "unknown key");
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string, std::less<>> seen_;
};

/// Runs a library validator, reporting its complaint as a config error.
template <typename Fn>
void check(const std::string& path, Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        config_error(path, e.what());
    }
}

inline void read_value(const Json& j, ObjectiveWeights& out, const std::string& path) {
    ObjectReader r(j, path);
    r.read("omega", out.omega).read("chi", out.chi).read("gamma", out.gamma).finish();
    check(path, [&] { validate(out); });
}

inline void read_value(const Json& j, WeightSchedule& out, const std::string& path) {
    ObjectReader r(j, path);
    r.read("dark", out.dark).read("bright", out.bright).read("threshold", out.threshold).finish();
}

inline void read_value(const Json& j, ResidualGuard& out, const std::string& path) {
    ObjectReader r(j, path);
    r.read("enabled", out.enabled).read("max_residual", out.max_residual).finish();
    if (!(out.max_residual >= 0)) config_error(path, "max_residual must be nonnegative");
}

inline void read_value(const Json& j, EncoderOptions& out, const std::string& path) {
    ObjectReader r(j, path);
    r.read("strength", out.strength)
        .read("candidates", out.candidates)
        .read("fallback", out.fallback)
        .read("schedule", out.schedule)
        .read("guard", out.guard)
        .read("mode", out.mode)
        .finish();
    if (!(out.strength > 0 && out.strength <= kMaxStrength))
        config_error(r.child("strength"), "must lie in (0, " + std::to_string(kMaxStrength) + "]");
    check(path, [&] {
        for (const FlickerSplit& s : out.candidates) validate(s);
        for (const FlickerSplit& s : out.fallback) validate(s);
    });
}

inline void read_value(const Json& j, AccumulatorParams& out, const std::string& path) {
    ObjectReader r(j, path);
    r.read("decay", out.decay)
        .read("lightness_weight", out.lightness_weight)
        .read("blur_sigma", out.blur_sigma)
        .read("blur_size", out.blur_size)
        .finish();
}

inline void read_value(const Json& j, QuadDetectionParams& out, const std::string& path) {
    ObjectReader r(j, path);
    r.read("close_size", out.close_size)
        .read("theta_step_deg", out.theta_step_deg)
        .read("rho_step", out.rho_step)
        .read("duplicate_angle_deg", out.duplicate_angle_deg)
        .read("duplicate_distance", out.duplicate_distance)
        .read("min_votes", out.min_votes)
        .read("fit_band", out.fit_band)
        .read("min_area_fraction", out.min_area_fraction)
        .finish();
    if (out.close_size < 1 || out.close_size % 2 == 0) config_error(r.child("close_size"), "must be a positive odd size");
    if (!(out.theta_step_deg > 0 && out.theta_step_deg <= 10)) config_error(r.child("theta_step_deg"), "must lie in (0, 10]");
    if (!(out.rho_step > 0)) config_error(r.child("rho_step"), "must be positive");
    if (out.min_votes < 2) config_error(r.child("min_votes"), "must be at least 2");
    if (!(out.fit_band > 0)) config_error(r.child("fit_band"), "must be positive");
    if (!(out.min_area_fraction >= 0 && out.min_area_fraction < 1))
        config_error(r.child("min_area_fraction"), "must lie in [0, 1)");
}

inline void read_value(const Json& j, ClassifierParams& out, const std::string& path) {
    ObjectReader r(j, path);
    r.read("margin_threshold", out.margin_threshold).read("temperature", out.temperature).finish();
}

inline void read_value(const Json& j, DecoderParams& out, const std::string& path) {
    ObjectReader r(j, path);
    r.read("epoch_length", out.epoch_length)
        .read("accumulator", out.accumulator)
        .read("quad", out.quad)
        .read("jitter", out.jitter)
        .read("classifier", out.classifier)
        .read("min_votes", out.min_votes)
        .read("min_agreement", out.min_agreement)
        .finish();
    check(path, [&] { validate(out); });
}

inline void read_value(const Json& j, ChannelProfile& out, const std::string& path, bool top_level) {
    ObjectReader r(j, path, top_level);
    if (const Json* preset = r.find("preset")) {
        std::string name;
        read_value(*preset, name, r.child("preset"));
        out = preset_profile(name);
    }
    r.read("screen_quad", out.screen_quad)
        .read("camera_width", out.camera_width)
        .read("camera_height", out.camera_height)
        .read("phase", out.phase)
        .read("exposure", out.exposure)
        .read("noise_sigma", out.noise_sigma)
        .read("gamma", out.gamma)
        .read("contrast", out.contrast)
        .read("brightness", out.brightness)
        .read("blur_radius", out.blur_radius)
        .read("background", out.background)
        .read("seed", out.seed)
        .finish();
    check(path, [&] { validate(out); });
}

inline void read_value(const Json& j, ChannelProfile& out, const std::string& path) { read_value(j, out, path, false); }

} // namespace detail

/// Parses a RunConfig document on top of `base`.
inline RunConfig parse_run_config(const Json& j, RunConfig base = {}) {
    detail::ObjectReader r(j, "", true);
    r.read("encoder", base.encoder).read("decoder", base.decoder).read("channel", base.channel).read("seed", base.seed);
    r.finish();
    return base;
}

/// A channel profile document: fields, optionally on top of a named "preset".
inline ChannelProfile parse_channel_profile(const Json& j) {
    ChannelProfile p;
    detail::read_value(j, p, "", true);
    return p;
}

/// Bench profile list: {"profiles": [ "preset", {"name": ..., "profile": {...}}, ... ]}.
inline std::vector<BenchProfile> parse_bench_profiles(const Json& j) {
    detail::ObjectReader r(j, "", true);
    const Json* list = r.find("profiles");
    r.finish();
    if (!list || !list->is_array() || list->empty()) detail::config_error("profiles", "expected a nonempty array");
    std::vector<BenchProfile> out;
    for (std::size_t i = 0; i < list->size(); ++i) {
        const Json& item = (*list)[i];
        const std::string path = "profiles[" + std::to_string(i) + "]";
        if (item.is_string()) {
            const std::string name = item.get<std::string>();
            detail::check(path, [&] { out.push_back({name, preset_profile(name)}); });
            continue;
        }
        BenchProfile bp;
        detail::ObjectReader ir(item, path);
        ir.read("name", bp.name).read("profile", bp.profile).finish();
        if (bp.name.empty()) detail::config_error(ir.child("name"), "profile needs a name");
        out.push_back(std::move(bp));
    }
    return out;
}

inline Json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::InvalidConfig, origin + ": " + e.what());
    }
}

// ---- writing ----------------------------------------------------------------

inline Json to_json(const Point2& p) { return Json::array({p.x, p.y}); }

inline Json to_json(const Quad& q) {
    Json j = Json::array();
    for (const Point2& c : q.corners) j.push_back(to_json(c));
    return j;
}

inline Json to_json(SrgbPixel p) { return Json::array({p.r, p.g, p.b}); }

inline Json to_json(const FlickerSplit& s) { return Json::array({s.lambda, s.alpha, s.beta}); }

inline Json to_json(std::span<const FlickerSplit> splits) {
    Json j = Json::array();
    for (const FlickerSplit& s : splits) j.push_back(to_json(s));
    return j;
}

inline Json to_json(const ObjectiveWeights& w) { return {{"omega", w.omega}, {"chi", w.chi}, {"gamma", w.gamma}}; }

inline Json to_json(const EncoderOptions& o) {
    return {{"strength", o.strength},
            {"candidates", to_json(o.candidates)},
            {"fallback", to_json(o.fallback)},
            {"schedule",
             {{"dark", to_json(o.schedule.dark)}, {"bright", to_json(o.schedule.bright)}, {"threshold", o.schedule.threshold}}},
            {"guard", {{"enabled", o.guard.enabled}, {"max_residual", o.guard.max_residual}}},
            {"mode", o.mode == SelectionMode::Exact ? "exact" : "lut"}};
}

inline Json to_json(const DecoderParams& p) {
    return {{"epoch_length", p.epoch_length},
            {"accumulator",
             {{"decay", p.accumulator.decay},
              {"lightness_weight", p.accumulator.lightness_weight},
              {"blur_sigma", p.accumulator.blur_sigma},
              {"blur_size", p.accumulator.blur_size}}},
            {"quad",
             {{"close_size", p.quad.close_size},
              {"theta_step_deg", p.quad.theta_step_deg},
              {"rho_step", p.quad.rho_step},
              {"duplicate_angle_deg", p.quad.duplicate_angle_deg},
              {"duplicate_distance", p.quad.duplicate_distance},
              {"min_votes", p.quad.min_votes},
              {"fit_band", p.quad.fit_band},
              {"min_area_fraction", p.quad.min_area_fraction}}},
            {"jitter", p.jitter},
            {"classifier", {{"margin_threshold", p.classifier.margin_threshold}, {"temperature", p.classifier.temperature}}},
            {"min_votes", p.min_votes},
            {"min_agreement", p.min_agreement}};
}

inline Json to_json(const ChannelProfile& p) {
    return {{"screen_quad", to_json(p.screen_quad)},
            {"camera_width", p.camera_width},
            {"camera_height", p.camera_height},
            {"phase", p.phase},
            {"exposure", p.exposure},
            {"noise_sigma", p.noise_sigma},
            {"gamma", p.gamma},
            {"contrast", p.contrast},
            {"brightness", p.brightness},
            {"blur_radius", p.blur_radius},
            {"background", to_json(p.background)},
            {"seed", p.seed}};
}

inline Json to_json(const RunConfig& c) {
    return {{"schema_version", kSchemaVersion},
            {"encoder", to_json(c.encoder)},
            {"decoder", to_json(c.decoder)},
            {"channel", to_json(c.channel)},
            {"seed", c.seed}};
}

inline Json to_json(const FlickerStats& s) {
    Json tenths = Json::object();
    for (auto [k, v] : s.lambda_tenths) tenths[std::to_string(k)] = v;
    return {{"pixels_flickered", s.pixels_flickered},
            {"pixels_clamped", s.pixels_clamped},
            {"pixels_guarded", s.pixels_guarded},
            {"abs_lambda_tenths", tenths}};
}

inline Json code_json(const std::optional<RevelioCode>& code) {
    return code ? Json(format_code(*code)) : Json(nullptr);
}

inline Json to_json(const EpochResult& r) {
    return {{"start", r.start},
            {"length", r.length},
            {"quad", r.quad ? to_json(*r.quad) : Json(nullptr)},
            {"code", code_json(r.code)},
            {"erased_symbols", r.erased_symbols},
            {"erased_bits", r.erased_bits},
            {"erased_bytes", r.erased_bytes},
            {"degenerate_patches", r.degenerate_patches},
            {"agreeing_bytes", r.agreeing_bytes},
            {"margin_histogram", r.margin_histogram}};
}

inline Json to_json(const DecodeReport& r) {
    Json epochs = Json::array(), combined = Json::array();
    for (const EpochResult& e : r.epochs) epochs.push_back(to_json(e));
    for (const CombineAttempt& c : r.combined)
        combined.push_back({{"epochs", c.epochs},
                            {"erased_bits", c.erased_bits},
                            {"erased_bytes", c.erased_bytes},
                            {"agreeing_bytes", c.agreeing_bytes},
                            {"code", code_json(c.code)}});
    return {{"success", r.success()},
            {"code", code_json(r.code)},
            {"resolved_by", r.resolved_by},
            {"seed", r.seed},
            {"recording_length", r.recording_length},
            {"epoch_length", r.epoch_length},
            {"planned_starts", r.planned_starts},
            {"epochs", epochs},
            {"combined", combined}};
}

inline Json to_json(const SeriesStats& s) { return {{"mean", s.mean}, {"std", s.stddev}}; }

inline Json to_json(const QualityReport& q) {
    return {{"frames", q.psnr.size()},
            {"psnr_db", {{"mean", q.psnr_stats.mean}, {"std", q.psnr_stats.stddev}, {"per_frame", q.psnr}}},
            {"ssim", {{"mean", q.ssim_stats.mean}, {"std", q.ssim_stats.stddev}, {"per_frame", q.ssim}}}};
}

inline Json to_json(const TrialResult& t) {
    return {{"trial", t.trial},
            {"seed", t.seed},
            {"success", t.success},
            {"decoded", code_json(t.decoded)},
            {"resolved_by", t.resolved_by},
            {"epochs_decoded", t.epochs_decoded},
            {"quad_found", t.quad_found},
            {"erased_bits", t.erased_bits}};
}

inline Json to_json(const BenchReport& r) {
    Json profiles = Json::array();
    for (const ProfileResult& p : r.profiles) {
        Json trials = Json::array();
        for (const TrialResult& t : p.diagnostics) trials.push_back(to_json(t));
        profiles.push_back({{"name", p.name},
                            {"profile", to_json(p.profile)},
                            {"trials", p.trials},
                            {"successes", p.successes},
                            {"error_rate", p.error_rate},
                            {"diagnostics", trials}});
    }
    return {{"code", format_code(r.code)},
            {"seed", r.seed},
            {"trials_per_profile", r.trials_per_profile},
            {"trials", r.trials},
            {"successes", r.successes},
            {"error_rate", r.error_rate},
            {"profiles", profiles}};
}

/// Profiles × trials success matrix, 1 for a decoded payload.
inline std::string bench_csv(const BenchReport& r) {
    std::ostringstream out;
    out << "profile";
    for (std::size_t t = 0; t < r.trials_per_profile; ++t) out << ",trial_" << t;
    out << ",error_rate\n";
    for (const ProfileResult& p : r.profiles) {
        out << p.name;
        for (const TrialResult& t : p.diagnostics) out << ',' << (t.success ? 1 : 0);
        out << ',' << p.error_rate << '\n';
    }
    return out.str();
}

/// A top-level document: schema_version first, then the fields of `body`.
inline Json versioned(const Json& body) {
    Json j = {{"schema_version", kSchemaVersion}};
    for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
    return j;
}

/// Stable text form: two-space indent and a trailing newline.
inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

} // namespace revelio
