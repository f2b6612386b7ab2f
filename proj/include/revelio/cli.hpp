#pragma once

// Subcommands of the `revelio` tool over PNG-sequence stores.
// Exit codes: 0 ok, 1 decode failure, 2 invalid store, 3 bad config.

#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "revelio/channel_sim.hpp"
#include "revelio/decoder.hpp"
#include "revelio/encoder.hpp"
#include "revelio/error.hpp"
#include "revelio/fixtures.hpp"
#include "revelio/frame_store.hpp"
#include "revelio/metrics.hpp"
#include "revelio/serialization.hpp"

namespace revelio::cli {

enum ExitCode : int { kOk = 0, kDecodeFailure = 1, kInvalidStore = 2, kBadConfig = 3 };

inline constexpr int kDisplayFps = 60;
inline constexpr int kCameraFps = 120;

inline int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidConfig:
        case ErrorCode::InvalidArgument:
        case ErrorCode::SingularHomography: return kBadConfig;
        default: return kInvalidStore;
    }
}

/// RunConfig from an optional JSON file; absent keys keep defaults.
inline RunConfig load_run_config(const std::string& path) {
    if (path.empty()) return {};
    const std::string text = read_file(path, ErrorCode::InvalidConfig);
    return parse_run_config(parse_json_text(text, path));
}

/// A profile file path, or else a preset name.
inline ChannelProfile load_profile(const std::string& spec) {
    std::error_code ec;
    if (fs::is_regular_file(spec, ec)) return parse_channel_profile(parse_json_text(read_file(spec, ErrorCode::InvalidConfig), spec));
    return preset_profile(spec);
}

/// A profile-list file path, or else a comma-separated list of preset names.
inline std::vector<BenchProfile> load_bench_profiles(const std::string& spec) {
    std::error_code ec;
    if (fs::is_regular_file(spec, ec))
        return parse_bench_profiles(parse_json_text(read_file(spec, ErrorCode::InvalidConfig), spec));
    std::vector<BenchProfile> out;
    std::stringstream names(spec);
    for (std::string name; std::getline(names, name, ',');)
        if (!name.empty()) out.push_back({name, preset_profile(name)});
    if (out.empty()) throw Error(ErrorCode::InvalidConfig, "no bench profiles given");
    return out;
}

inline void require_fps(const FrameStore& store, int fps, const char* what) {
    if (store.manifest().fps != fps)
        throw Error(ErrorCode::InvalidStore, std::string(what) + " expects a " + std::to_string(fps) + " FPS store, " +
                                                 store.dir().string() + " is " +
                                                 std::to_string(store.manifest().fps) + " FPS");
}

inline void write_json(const std::string& path, const Json& j, std::ostream& out) {
    if (path.empty() || path == "-") out << dump(j);
    else write_file_atomic(path, dump(j));
}

struct EncodeArgs {
    std::string input;
    std::string output;
    std::string code;
    std::optional<double> strength;
    std::string config;
};

/// Sample-and-hold to 60 FPS, then flicker encoding, streamed frame by frame.
inline int cmd_encode(const EncodeArgs& a, std::ostream& out) {
    const RevelioCode code = parse_code(a.code);
    RunConfig config = load_run_config(a.config);
    if (a.strength) {
        if (!(*a.strength > 0 && *a.strength <= kMaxStrength))
            throw Error(ErrorCode::InvalidConfig, "--strength must lie in (0, " + std::to_string(kMaxStrength) + "]");
        config.encoder.strength = *a.strength;
    }
    FrameStore input(a.input);
    const int fps = input.manifest().fps;
    if (fps != 24 && fps != 30 && fps != 60)
        throw Error(ErrorCode::InvalidStore, "source must be 24, 30 or 60 FPS, got " + std::to_string(fps));
    if (input.manifest().width != kFrameWidth || input.manifest().height != kFrameHeight)
        throw Error(ErrorCode::InvalidStore, "source frames must be 1920x1080");

    Encoder encoder(code, config.encoder);
    StoreWriter writer(a.output, kDisplayFps);
    const std::vector<int> holds = hold_counts(input.size(), fps);
    std::int64_t display = 0;
    for (std::size_t i = 0; i < input.size(); ++i) {
        const FrameBuffer src = input.frame(i);
        for (int h = 0; h < holds[i]; ++h) writer.add(encoder.encode_frame(src, display++));
    }
    const StoreManifest m = writer.finish();

    const Json report = {{"schema_version", kSchemaVersion},
                         {"code", format_code(code)},
                         {"strength", config.encoder.strength},
                         {"source_fps", fps},
                         {"source_frames", input.size()},
                         {"output_fps", kDisplayFps},
                         {"output_frames", m.frame_count},
                         {"split_stats", to_json(encoder.stats())},
                         {"config", to_json(config)}};
    write_file_atomic(fs::path(a.output) / "encode_report.json", dump(report));
    out << "encoded " << format_code(code) << " into " << m.frame_count << " frames\n";
    return kOk;
}

struct DecodeArgs {
    std::string input;
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string report;
};

inline int cmd_decode(const DecodeArgs& a, std::ostream& out) {
    RunConfig config = load_run_config(a.config);
    if (a.seed) config.seed = *a.seed;
    FrameStore recording(a.input);
    require_fps(recording, kCameraFps, "decode");
    const DecodeReport r = decode_recording(recording, config.seed, config.decoder);

    Json report = versioned(to_json(r));
    report["config"] = to_json(config);
    write_file_atomic(a.report.empty() ? fs::path(a.input) / "decode_report.json" : fs::path(a.report), dump(report));
    if (!r.code) {
        out << "FAIL\n";
        return kDecodeFailure;
    }
    out << format_code(*r.code) << "\n";
    return kOk;
}

struct SimulateArgs {
    std::string input;
    std::string profile;
    std::string output;
    std::optional<std::uint64_t> seed;
};

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    ChannelProfile profile = load_profile(a.profile);
    if (a.seed) profile.seed = *a.seed;
    FrameStore input(a.input);
    require_fps(input, kDisplayFps, "simulate");
    const std::vector<FrameBuffer> display = input.load_all();
    SimulatedRecording recording(display, profile);
    StoreWriter writer(a.output, kCameraFps);
    for (std::size_t k = 0; k < recording.size(); ++k) writer.add(recording.frame(k));
    const StoreManifest m = writer.finish();
    const Json report = {{"schema_version", kSchemaVersion},
                         {"profile_source", a.profile},
                         {"channel", to_json(profile)},
                         {"display_frames", display.size()},
                         {"camera_frames", m.frame_count}};
    write_file_atomic(fs::path(a.output) / "simulate_report.json", dump(report));
    out << "simulated " << m.frame_count << " camera frames\n";
    return kOk;
}

struct BenchArgs {
    std::string input;
    std::string code;
    std::string profiles;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::string config;
    std::string output;
    std::string csv;
};

inline int cmd_bench(const BenchArgs& a, std::ostream& out) {
    const RevelioCode code = parse_code(a.code);
    RunConfig config = load_run_config(a.config);
    config.seed = a.seed;
    if (a.trials < 1) throw Error(ErrorCode::InvalidConfig, "--trials must be at least 1");
    const std::vector<BenchProfile> profiles = load_bench_profiles(a.profiles);
    FrameStore input(a.input);
    require_fps(input, kDisplayFps, "bench");
    const std::vector<FrameBuffer> encoded = input.load_all();
    const BenchReport r = run_bench(encoded, code, profiles, a.trials, a.seed, config.decoder);

    Json report = versioned(to_json(r));
    report["config"] = to_json(config);
    write_json(a.output, report, out);
    if (!a.csv.empty()) write_file_atomic(a.csv, bench_csv(r));
    return kOk;
}

struct QualityArgs {
    std::string ref;
    std::string enc;
    std::string output;
};

/// Frame i of the encoded store is compared with the reference frame it
/// was held from; a 60 FPS reference maps one to one.
inline int cmd_quality(const QualityArgs& a, std::ostream& out) {
    FrameStore ref(a.ref), enc(a.enc);
    std::vector<std::size_t> source;
    if (ref.manifest().fps == enc.manifest().fps) {
        if (ref.size() != enc.size())
            throw Error(ErrorCode::InvalidStore, "stores hold " + std::to_string(ref.size()) + " and " +
                                                     std::to_string(enc.size()) + " frames");
        for (std::size_t i = 0; i < ref.size(); ++i) source.push_back(i);
    } else if (enc.manifest().fps == kDisplayFps) {
        const std::vector<int> holds = hold_counts(ref.size(), ref.manifest().fps);
        for (std::size_t i = 0; i < holds.size(); ++i) source.insert(source.end(), static_cast<std::size_t>(holds[i]), i);
        if (source.size() != enc.size())
            throw Error(ErrorCode::InvalidStore, "encoded store does not match the upsampled reference length");
    } else {
        throw Error(ErrorCode::InvalidStore, "cannot align a " + std::to_string(ref.manifest().fps) + " FPS reference with a " +
                                                 std::to_string(enc.manifest().fps) + " FPS store");
    }
    QualityReport q;
    std::optional<std::pair<std::size_t, FrameBuffer>> cached;
    for (std::size_t i = 0; i < enc.size(); ++i) {
        if (!cached || cached->first != source[i]) cached.emplace(source[i], ref.frame(source[i]));
        const FrameBuffer e = enc.frame(i);
        q.psnr.push_back(psnr(cached->second, e));
        q.ssim.push_back(ssim(cached->second, e));
    }
    q.psnr_stats = series_stats(q.psnr);
    q.ssim_stats = series_stats(q.ssim);
    Json report = versioned(to_json(q));
    write_json(a.output, report, out);
    return kOk;
}

struct FixturesArgs {
    std::string kind;
    std::size_t frames = 60;
    int fps = kDisplayFps;
    std::uint64_t seed = 1;
    int width = kFrameWidth;
    int height = kFrameHeight;
    std::string output;
};

inline int cmd_fixtures(const FixturesArgs& a, std::ostream& out) {
    const std::optional<FixtureKind> kind = fixture_from_string(a.kind);
    if (!kind) throw Error(ErrorCode::InvalidConfig, "unknown fixture '" + a.kind + "' (gray, gradient, natural, checker)");
    if (a.frames < 1) throw Error(ErrorCode::InvalidConfig, "--frames must be at least 1");
    if (a.fps <= 0) throw Error(ErrorCode::InvalidConfig, "--fps must be positive");
    if (a.width < 16 || a.height < 16) throw Error(ErrorCode::InvalidConfig, "fixture frames must be at least 16x16");
    const std::vector<FrameBuffer> clip = make_fixture(*kind, a.frames, a.seed, a.width, a.height);
    const StoreManifest m = write_store(a.output, clip, a.fps);
    out << "wrote " << m.frame_count << " " << a.kind << " frames\n";
    return kOk;
}

/// Parses argv and runs one subcommand; every error becomes an exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Revelio screen-camera codec over PNG-sequence stores"};
    app.require_subcommand(1);

    EncodeArgs enc;
    auto* encode = app.add_subcommand("encode", "Embed a 16-bit code into a 24/30/60 FPS store");
    encode->add_option("--input", enc.input, "Source store")->required();
    encode->add_option("--code", enc.code, "16-bit hex payload, e.g. 0xABCD")->required();
    encode->add_option("--strength", enc.strength, "Flicker strength d");
    encode->add_option("--output", enc.output, "Output 60 FPS store")->required();
    encode->add_option("--config", enc.config, "RunConfig JSON");

    DecodeArgs dec;
    auto* decode = app.add_subcommand("decode", "Recover the code from a 120 FPS recording");
    decode->add_option("--input", dec.input, "Recording store")->required();
    decode->add_option("--seed", dec.seed, "Epoch draw seed");
    decode->add_option("--config", dec.config, "RunConfig JSON");
    decode->add_option("--report", dec.report, "Report path (default INPUT/decode_report.json)");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Film a 60 FPS store with a simulated camera");
    simulate->add_option("--input", sim.input, "Display store")->required();
    simulate->add_option("--profile", sim.profile, "Channel profile JSON or preset name")->required();
    simulate->add_option("--output", sim.output, "Output 120 FPS store")->required();
    simulate->add_option("--seed", sim.seed, "Channel noise seed");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Error rate over simulated channel trials");
    bench->add_option("--input", bench_args.input, "Encoded 60 FPS store")->required();
    bench->add_option("--code", bench_args.code, "Expected 16-bit hex payload")->required();
    bench->add_option("--profiles", bench_args.profiles, "Profile list JSON or comma-separated presets")->required();
    bench->add_option("--trials", bench_args.trials, "Trials per profile")->required();
    bench->add_option("--seed", bench_args.seed, "Top-level seed")->required();
    bench->add_option("--config", bench_args.config, "RunConfig JSON");
    bench->add_option("--output", bench_args.output, "Report path (default standard output)");
    bench->add_option("--csv", bench_args.csv, "Success matrix CSV path");

    QualityArgs qual;
    auto* quality = app.add_subcommand("quality", "PSNR and SSIM of an encoded store against its source");
    quality->add_option("--ref", qual.ref, "Reference store")->required();
    quality->add_option("--enc", qual.enc, "Encoded store")->required();
    quality->add_option("--output", qual.output, "Report path (default standard output)");

    FixturesArgs fix;
    auto* fixtures = app.add_subcommand("fixtures", "Write a procedural test clip");
    fixtures->add_option("--kind", fix.kind, "gray, gradient, natural or checker")->required();
    fixtures->add_option("--frames", fix.frames, "Frame count");
    fixtures->add_option("--fps", fix.fps, "Store frame rate");
    fixtures->add_option("--seed", fix.seed, "Texture seed");
    fixtures->add_option("--width", fix.width, "Frame width");
    fixtures->add_option("--height", fix.height, "Frame height");
    fixtures->add_option("--output", fix.output, "Output store")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kBadConfig;
    }

    try {
        if (*encode) return cmd_encode(enc, out);
        if (*decode) return cmd_decode(dec, out);
        if (*simulate) return cmd_simulate(sim, out);
        if (*bench) return cmd_bench(bench_args, out);
        if (*quality) return cmd_quality(qual, out);
        if (*fixtures) return cmd_fixtures(fix, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kInvalidStore;
    }
    return kBadConfig;
}

} // namespace revelio::cli
