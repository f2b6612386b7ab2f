// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Arguments select a subset by number, e.g. `acceptance 1 6`.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "revelio/channel_sim.hpp"
#include "revelio/cli.hpp"
#include "revelio/decoder.hpp"
#include "revelio/encoder.hpp"
#include "revelio/fixtures.hpp"
#include "revelio/frame_store.hpp"
#include "revelio/metrics.hpp"

using namespace revelio;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ----------------------------------------------------------------- RS oracle

namespace oracle {

// Bitwise GF(256) arithmetic modulo 0x11D; shares no tables with the library.
std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
    unsigned acc = 0, x = a;
    for (int i = 0; i < 8; ++i) {
        if (b & (1u << i)) acc ^= x;
        x <<= 1;
        if (x & 0x100) x ^= 0x11D;
    }
    return static_cast<std::uint8_t>(acc);
}

const std::vector<std::uint8_t>& generator() {
    static const std::vector<std::uint8_t> g = [] {
        std::vector<std::uint8_t> poly{1};
        std::uint8_t root = 1;
        for (int j = 1; j <= kParityBytes; ++j) {
            root = mul(root, 2);
            std::vector<std::uint8_t> next(poly.size() + 1, 0);
            for (std::size_t i = 0; i < poly.size(); ++i) {
                next[i] ^= poly[i];
                next[i + 1] ^= mul(poly[i], root);
            }
            poly = next;
        }
        return poly;
    }();
    return g;
}

Codeword encode(std::uint16_t payload) {
    const auto& g = generator();
    std::array<std::uint8_t, kCodewordLength> rem{};
    rem[0] = static_cast<std::uint8_t>(payload >> 8);
    rem[1] = static_cast<std::uint8_t>(payload);
    for (std::size_t i = 0; i < kDataBytes; ++i) {
        const std::uint8_t c = rem[i];
        for (std::size_t j = 0; j < g.size(); ++j) rem[i + j] ^= mul(g[j], c);
    }
    Codeword cw = rem;
    cw[0] = static_cast<std::uint8_t>(payload >> 8);
    cw[1] = static_cast<std::uint8_t>(payload);
    return cw;
}

} // namespace oracle

ReceivedWord received(const Codeword& cw) {
    ReceivedWord w;
    for (std::size_t i = 0; i < kCodewordLength; ++i) w[i] = cw[i];
    return w;
}

Outcome rs_oracle_equivalence() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> payload(0, 0xFFFF), nonzero(1, 255);
    std::vector<std::size_t> pos(kCodewordLength);
    std::iota(pos.begin(), pos.end(), 0);

    int within_ok = 0, encode_mismatch = 0;
    const int within_trials = 10000;
    for (int trial = 0; trial < within_trials; ++trial) {
        const RevelioCode code{static_cast<std::uint16_t>(payload(rng))};
        const Codeword cw = rs_encode(code);
        if (cw != oracle::encode(code.payload)) ++encode_mismatch;
        const int e = std::uniform_int_distribution<int>(0, 34)(rng);
        const int t = std::uniform_int_distribution<int>(0, (34 - e) / 2)(rng);
        std::shuffle(pos.begin(), pos.end(), rng);
        ReceivedWord w = received(cw);
        for (int k = 0; k < t; ++k) w[pos[k]] = static_cast<std::uint8_t>(cw[pos[k]] ^ nonzero(rng));
        for (int k = t; k < t + e; ++k) w[pos[k]].reset();
        const auto out = rs_decode(w);
        if (out && *out == code) ++within_ok;
    }

    // Beyond capacity: c and c + w with weight(w) = 35 are at the minimum
    // distance; erase e of the differing bytes and split the rest evenly so
    // the word sits t away from both.
    int adversarial = 0, refused = 0, misdecoded = 0, returned_original = 0;
    while (adversarial < 2000) {
        const Codeword w = oracle::encode(static_cast<std::uint16_t>(payload(rng)));
        if (std::count(w.begin(), w.end(), 0) != 1) continue;
        const RevelioCode code{static_cast<std::uint16_t>(payload(rng))};
        const Codeword c = rs_encode(code);
        Codeword other{};
        std::vector<std::size_t> differ;
        for (std::size_t i = 0; i < kCodewordLength; ++i) {
            other[i] = c[i] ^ w[i];
            if (w[i] != 0) differ.push_back(i);
        }
        std::shuffle(differ.begin(), differ.end(), rng);
        const int e = 2 * std::uniform_int_distribution<int>(0, 17)(rng) + 1;
        const int t = (35 - e) / 2;
        ReceivedWord r = received(c);
        for (int k = 0; k < e; ++k) r[differ[k]].reset();
        for (int k = e; k < e + t; ++k) r[differ[k]] = other[differ[k]];
        const auto out = rs_decode(r);
        ++adversarial;
        if (!out) ++refused;
        else if (*out != code) ++misdecoded;
        else ++returned_original;
    }

    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << within_ok << "/" << within_trials << " within capacity exact, " << encode_mismatch
      << " encoder/oracle mismatches; 2t+e=35: " << refused << " refused, " << misdecoded << " mis-decoded, "
      << returned_original << " silently correct of " << adversarial << "; " << fmt("%.2f s", secs);
    return {within_ok == within_trials && encode_mismatch == 0 && returned_original == 0 && secs < 10.0, d.str()};
}

// ------------------------------------------------------------- system loops

constexpr RevelioCode kPayload{0x5EED};
constexpr std::size_t kDisplayFrames = 30;

std::string rate_summary(const BenchReport& r) {
    std::ostringstream d;
    for (const ProfileResult& p : r.profiles)
        d << p.name << " " << p.successes << "/" << p.trials << (p.successes == p.trials ? "" : " (!)") << "; ";
    return d.str();
}

Outcome loopback() {
    const auto t0 = Clock::now();
    const std::vector<BenchProfile> identity{{"identity", preset_profile("identity")}};
    std::size_t successes = 0, trials = 0;
    std::ostringstream d;
    for (FixtureKind kind : kAllFixtures) {
        const auto source = make_fixture(kind, kDisplayFrames, 3);
        const auto encoded = encode_video(source, kPayload, kDefaultStrength);
        const BenchReport r = run_bench(encoded, kPayload, identity, 20, 1000 + static_cast<int>(kind));
        successes += r.successes;
        trials += r.trials;
        d << to_string(kind) << " " << r.successes << "/" << r.trials << "; ";
    }
    const double secs = seconds_since(t0);
    d << fmt("%.1f s total", secs);
    return {successes == trials && secs < 300.0, d.str()};
}

Outcome viewpoint_sweep() {
    const auto source = make_fixture(FixtureKind::Natural, kDisplayFrames, 5);
    const auto encoded = encode_video(source, kPayload, kDefaultStrength);
    std::vector<BenchProfile> required;
    for (int occ : {100, 75, 60})
        for (int yaw : {0, 20, 30}) {
            const std::string name = "occ" + std::to_string(occ) + "_yaw" + std::to_string(yaw);
            required.push_back({name, preset_profile(name)});
        }
    const BenchReport r = run_bench(encoded, kPayload, required, 10, 77);
    const std::vector<BenchProfile> hard{{"occ25_yaw40", preset_profile("occ25_yaw40")}};
    const BenchReport extra = run_bench(encoded, kPayload, hard, 10, 78);
    std::ostringstream d;
    d << rate_summary(r) << "informational " << rate_summary(extra);
    return {r.successes == r.trials, d.str()};
}

Outcome quality() {
    std::vector<double> psnr, ssim;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto source = make_fixture(FixtureKind::Natural, 20, seed);
        const auto encoded = encode_video(source, kPayload, kDefaultStrength);
        const QualityReport q = measure_quality(source, encoded);
        psnr.insert(psnr.end(), q.psnr.begin(), q.psnr.end());
        ssim.insert(ssim.end(), q.ssim.begin(), q.ssim.end());
    }
    const SeriesStats p = series_stats(psnr), s = series_stats(ssim);
    std::ostringstream d;
    d << "PSNR " << fmt("%.2f", p.mean) << " dB (min " << fmt("%.2f", *std::min_element(psnr.begin(), psnr.end()))
      << "), SSIM " << fmt("%.4f", s.mean) << " (min " << fmt("%.4f", *std::min_element(ssim.begin(), ssim.end()))
      << ") over " << psnr.size() << " frames";
    return {p.mean >= 38.0 && s.mean >= 0.97, d.str()};
}

// ------------------------------------------------------------- flicker pair

DataFrame full_mask() {
    DataFrame df{Plane<std::uint8_t>(kFrameWidth, kFrameHeight, 1), {}};
    df.active.resize(static_cast<std::size_t>(kFrameWidth) * kFrameHeight);
    std::iota(df.active.begin(), df.active.end(), 0u);
    return df;
}

Outcome fusion_residual() {
    const auto t0 = Clock::now();
    const FrameBuffer card = full_gamut_card();
    const DataFrame df = full_mask();
    SplitSelector selector(kDefaultStrength);
    const FrameBuffer even = apply_flicker(card, df, selector, Parity::Even);
    const FrameBuffer odd = apply_flicker(card, df, selector, Parity::Odd);
    double worst = 0.0;
    std::size_t checked = 0, violations = 0;
    for (std::size_t i = 0; i < df.active.size(); ++i) {
        const SrgbPixel o = card.pixel(i), a = even.pixel(i), b = odd.pixel(i);
        const std::array<int, 3> oc{o.r, o.g, o.b}, ac{a.r, a.g, a.b}, bc{b.r, b.g, b.b};
        if (*std::min_element(oc.begin(), oc.end()) < kCardLow || *std::max_element(oc.begin(), oc.end()) > kCardHigh)
            continue;
        ++checked;
        double pixel_worst = 0.0;
        for (int c = 0; c < 3; ++c) pixel_worst = std::max(pixel_worst, std::abs(oc[c] - 0.5 * (ac[c] + bc[c])));
        worst = std::max(worst, pixel_worst);
        if (pixel_worst > 3.0) ++violations;
    }
    std::ostringstream d;
    d << checked << " pixels, worst " << fmt("%.1f", worst) << " levels, " << violations << " over 3; "
      << fmt("%.1f s", seconds_since(t0));
    return {violations == 0 && checked >= static_cast<std::size_t>(kCardLevels) * kCardLevels * kCardLevels, d.str()};
}

Outcome antisymmetry() {
    std::size_t checked = 0, mismatches = 0;
    auto compare = [&](const FrameBuffer& frame, const DataFrame& df) {
        SplitSelector selector(kDefaultStrength);
        const auto de = flicker_deltas(frame, df, selector, Parity::Even);
        const auto dodd = flicker_deltas(frame, df, selector, Parity::Odd);
        for (std::size_t k = 0; k < de.size(); ++k) {
            ++checked;
            if (de[k].L != -dodd[k].L || de[k].A != -dodd[k].A || de[k].B != -dodd[k].B) ++mismatches;
        }
    };
    Encoder encoder(kPayload);
    for (FixtureKind kind : kAllFixtures) compare(fixture_frame(kind, 7, 9), encoder.data_frame());
    compare(full_gamut_card(), full_mask());
    std::ostringstream d;
    d << checked << " mask pixels, " << mismatches << " not exact negatives";
    return {mismatches == 0 && checked > 0, d.str()};
}

// --------------------------------------------------------------- geometry

/// Border of a screen placed by `h`, rendered with 4x4 supersampling.
Plane<float> render_border(const Homography& h) {
    const Homography inv = h.inverse();
    Plane<float> out(kFrameWidth, kFrameHeight, 0.0f);
    parallel_for(0, kFrameHeight, [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < kFrameWidth; ++x) {
            int hits = 0;
            for (int sy = 0; sy < 4; ++sy)
                for (int sx = 0; sx < 4; ++sx) {
                    const Point2 s = inv.apply({x + (sx + 0.5) / 4.0, y + (sy + 0.5) / 4.0});
                    if (s.x < 0 || s.y < 0 || s.x >= kFrameWidth || s.y >= kFrameHeight) continue;
                    if (s.x < kBorderWidth || s.y < kBorderWidth || s.x >= kFrameWidth - kBorderWidth ||
                        s.y >= kFrameHeight - kBorderWidth)
                        ++hits;
                }
            out.at(x, y) = 255.0f * static_cast<float>(hits) / 16.0f;
        }
    });
    return out;
}

Outcome quad_recovery() {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> yaw(-40.0, 40.0), pitch(-20.0, 20.0), occ(0.3, 1.0);
    int recovered = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Quad placed = view_quad(occ(rng), yaw(rng), pitch(rng));
        const auto q = detect_frame_quad(render_border(Homography::rect_to_quad(kFrameWidth, kFrameHeight, placed)));
        if (!q) {
            worst = std::max(worst, 1e9);
            continue;
        }
        double err = 0.0;
        for (std::size_t i = 0; i < 4; ++i) err = std::max(err, distance(q->corners[i], placed.corners[i]));
        worst = std::max(worst, err);
        if (err <= 2.0) ++recovered;
    }
    std::ostringstream d;
    d << recovered << "/50 within 2 px, worst corner error " << (worst >= 1e9 ? std::string("none found") : fmt("%.3f px", worst));
    return {recovered == 50, d.str()};
}

// ------------------------------------------------------------ time diversity

Outcome time_diversity() {
    const Codeword cw = rs_encode(kPayload);
    std::vector<std::vector<int>> byte_bits(kCodewordLength);
    for (int byte = 0; byte < kCodewordLength; ++byte)
        for (const auto& [row, col] : byte_cells(byte)) {
            const int cell = row * kGridCols + col;
            byte_bits[static_cast<std::size_t>(byte)].push_back(2 * cell);
            byte_bits[static_cast<std::size_t>(byte)].push_back(2 * cell + 1);
        }
    // 40 erased bits per epoch, each set touching 35 bytes, the sets disjoint.
    std::vector<int> ea, eb;
    for (int byte = 0; byte < 35; ++byte) {
        ea.push_back(byte_bits[static_cast<std::size_t>(byte)][0]);
        eb.push_back(byte_bits[static_cast<std::size_t>(byte + 1)][1]);
    }
    for (std::size_t k = 2; k < 7; ++k) {
        ea.push_back(byte_bits[0][k]);
        eb.push_back(byte_bits[1][k + 1]);
    }
    std::set<int> overlap(ea.begin(), ea.end());
    std::size_t shared = 0;
    for (int b : eb) shared += overlap.count(b);

    auto stream = [&](const std::vector<int>& bits) {
        SoftBitStream s = shapes_to_bits(interleave(cw));
        for (int b : bits) s[static_cast<std::size_t>(b)] = SoftBit::Erased;
        return s;
    };
    const std::array<SoftBitStream, 2> epochs{stream(ea), stream(eb)};
    const bool alone_fail = !rs_decode(deinterleave(epochs[0])) && !rs_decode(deinterleave(epochs[1]));
    const SoftBitStream merged = combine_epochs(epochs);
    const auto direct = rs_decode(deinterleave(merged));

    std::size_t calls = 0;
    const DecodeReport r = decode_with_diversity(120, 12, 3, [&](std::size_t start) {
        EpochResult e;
        e.start = start;
        e.bits = epochs[std::min<std::size_t>(calls++, 1)];
        e.code = verified_decode(deinterleave(e.bits), kDefaultMinAgreement);
        return e;
    });

    std::ostringstream d;
    d << ea.size() << "+" << eb.size() << " erased bits, " << shared << " shared; erased bytes "
      << count_erased(deinterleave(epochs[0])) << "/" << count_erased(deinterleave(epochs[1])) << " alone, "
      << count_erased(deinterleave(merged)) << " combined; resolved by " << r.resolved_by;
    const bool ok = shared == 0 && alone_fail && direct && *direct == kPayload && r.code && *r.code == kPayload &&
                    r.resolved_by == "combined12";
    return {ok, d.str()};
}

// ------------------------------------------------------------ determinism

Outcome bench_determinism() {
    const fs::path root = fs::temp_directory_path() / ("revelio_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const auto source = make_fixture(FixtureKind::Natural, 16, 11);
    write_store(root / "encoded", encode_video(source, kPayload, kDefaultStrength), cli::kDisplayFps);

    std::vector<std::string> reports;
    for (int run = 0; run < 2; ++run) {
        cli::BenchArgs a;
        a.input = (root / "encoded").string();
        a.code = format_code(kPayload);
        a.profiles = "identity,occ75_yaw20";
        a.trials = 2;
        a.seed = 99;
        a.output = (root / ("bench_" + std::to_string(run) + ".json")).string();
        std::ostringstream sink;
        cli::cmd_bench(a, sink);
        reports.push_back(read_file(a.output));
    }
    fs::remove_all(root);
    std::ostringstream d;
    d << reports[0].size() << " and " << reports[1].size() << " bytes, "
      << (reports[0] == reports[1] ? "identical" : "different");
    return {!reports[0].empty() && reports[0] == reports[1], d.str()};
}

// ----------------------------------------------------------------- runtime

Outcome runtime() {
    const auto source = make_fixture(FixtureKind::Natural, 60, 13);
    auto t0 = Clock::now();
    const auto encoded = encode_video(source, kPayload, kDefaultStrength);
    const double encode_secs = seconds_since(t0);

    const auto camera = simulate(encoded, preset_profile("occ75_yaw20"));
    SpanFrameSource recording(camera);
    const DecoderParams params;
    t0 = Clock::now();
    const EpochResult epoch = decode_epoch(recording, 0, params);
    const double decode_secs = seconds_since(t0);

    std::ostringstream d;
    d << "encode 60 frames " << fmt("%.1f s", encode_secs) << ", decode one " << params.epoch_length << "-frame epoch "
      << fmt("%.2f s", decode_secs) << " (" << (epoch.code ? format_code(*epoch.code) : std::string("no code"))
      << "), " << std::max(1u, std::thread::hardware_concurrency()) << " hardware threads";
    return {encode_secs < 60.0 && decode_secs < 10.0, d.str()};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "rs-oracle-equivalence", rs_oracle_equivalence},
        {2, "loopback-error-rate", loopback},
        {3, "viewpoint-sweep", viewpoint_sweep},
        {4, "quality", quality},
        {5, "fusion-residual", fusion_residual},
        {6, "antisymmetry", antisymmetry},
        {7, "quad-recovery", quad_recovery},
        {8, "time-diversity", time_diversity},
        {9, "bench-determinism", bench_determinism},
        {10, "runtime", runtime},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
