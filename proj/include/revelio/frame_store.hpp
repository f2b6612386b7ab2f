#pragma once

// PNG-sequence frame stores: frame_000000.png ... plus manifest.json.
// Files are written to a temporary name and renamed into place.

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "revelio/error.hpp"
#include "revelio/frame_source.hpp"
#include "revelio/image.hpp"
#include "revelio/serialization.hpp"

namespace revelio {

namespace fs = std::filesystem;

inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kColorSpace = "srgb8";

struct StoreManifest {
    int width = 0;
    int height = 0;
    int fps = 0;
    std::size_t frame_count = 0;
};

inline std::string frame_filename(std::size_t index) {
    std::ostringstream s;
    s << "frame_" << std::setw(6) << std::setfill('0') << index << ".png";
    return s.str();
}

inline fs::path temp_sibling(const fs::path& target) { return target.parent_path() / ("." + target.filename().string() + ".tmp"); }

/// Writes bytes to `path` via a temporary sibling and rename.
inline void write_file_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = temp_sibling(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.flush()) throw Error(ErrorCode::Io, "write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

inline std::string read_file(const fs::path& path, ErrorCode missing = ErrorCode::Io) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(missing, "cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_png(const fs::path& path, const FrameBuffer& frame) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(frame.width());
    image.height = static_cast<png_uint_32>(frame.height());
    image.format = PNG_FORMAT_RGB;
    image.flags = PNG_IMAGE_FLAG_FAST;
    const fs::path tmp = temp_sibling(path);
    if (!png_image_write_to_file(&image, tmp.c_str(), 0, frame.bytes().data(), 0, nullptr))
        throw Error(ErrorCode::Io, "cannot write " + tmp.string() + ": " + image.message);
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

/// Reads any PNG as 8-bit sRGB; other formats are converted by libpng.
inline FrameBuffer read_png(const fs::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw Error(ErrorCode::InvalidStore, "cannot read " + path.string() + ": " + image.message);
    image.format = PNG_FORMAT_RGB;
    if (image.width == 0 || image.height == 0 || image.width > 16384 || image.height > 16384) {
        png_image_free(&image);
        throw Error(ErrorCode::InvalidStore, path.string() + " has unsupported dimensions");
    }
    FrameBuffer frame(static_cast<int>(image.width), static_cast<int>(image.height));
    if (!png_image_finish_read(&image, nullptr, frame.bytes().data(), 0, nullptr))
        throw Error(ErrorCode::InvalidStore, "cannot decode " + path.string() + ": " + image.message);
    return frame;
}

inline Json to_json(const StoreManifest& m) {
    return {{"schema_version", kSchemaVersion}, {"width", m.width},       {"height", m.height},
            {"fps", m.fps},                     {"frame_count", m.frame_count}, {"color_space", kColorSpace}};
}

inline StoreManifest parse_manifest(const Json& j) {
    StoreManifest m;
    std::string color_space;
    try {
        detail::ObjectReader r(j, "", true);
        r.read("width", m.width).read("height", m.height).read("fps", m.fps).read("frame_count", m.frame_count);
        r.read("color_space", color_space).finish();
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidStore, std::string("manifest: ") + e.what());
    }
    if (m.width <= 0 || m.height <= 0) throw Error(ErrorCode::InvalidStore, "manifest: dimensions must be positive");
    if (m.fps <= 0) throw Error(ErrorCode::InvalidStore, "manifest: fps must be positive");
    if (color_space != kColorSpace)
        throw Error(ErrorCode::InvalidStore, "manifest: color_space must be \"srgb8\", got \"" + color_space + "\"");
    return m;
}

/// Read-only view of a store; frames are loaded on demand.
class FrameStore : public FrameSource {
public:
    explicit FrameStore(fs::path dir) : dir_(std::move(dir)) {
        if (!fs::is_directory(dir_)) throw Error(ErrorCode::InvalidStore, dir_.string() + " is not a directory");
        const fs::path manifest = dir_ / kManifestName;
        if (!fs::is_regular_file(manifest)) throw Error(ErrorCode::InvalidStore, "missing " + manifest.string());
        Json j;
        try {
            j = Json::parse(read_file(manifest, ErrorCode::InvalidStore));
        } catch (const Json::parse_error& e) {
            throw Error(ErrorCode::InvalidStore, manifest.string() + ": " + e.what());
        }
        manifest_ = parse_manifest(j);

        static const std::regex pattern(R"(frame_(\d{6})\.png)");
        std::size_t count = 0;
        for (const auto& entry : fs::directory_iterator(dir_)) {
            std::smatch m;
            const std::string name = entry.path().filename().string();
            if (!std::regex_match(name, m, pattern)) continue;
            if (std::stoul(m[1].str()) >= manifest_.frame_count)
                throw Error(ErrorCode::InvalidStore, "unexpected frame file " + name);
            ++count;
        }
        if (count != manifest_.frame_count)
            throw Error(ErrorCode::InvalidStore, "manifest lists " + std::to_string(manifest_.frame_count) +
                                                     " frames, directory holds " + std::to_string(count));
    }

    const StoreManifest& manifest() const noexcept { return manifest_; }
    const fs::path& dir() const noexcept { return dir_; }
    std::size_t size() const override { return manifest_.frame_count; }

    FrameBuffer frame(std::size_t k) override {
        if (k >= size()) throw Error(ErrorCode::InvalidArgument, "frame index out of range");
        FrameBuffer f = read_png(dir_ / frame_filename(k));
        if (f.width() != manifest_.width || f.height() != manifest_.height)
            throw Error(ErrorCode::InvalidStore, frame_filename(k) + " is " + std::to_string(f.width()) + "x" +
                                                     std::to_string(f.height()) + ", manifest says " +
                                                     std::to_string(manifest_.width) + "x" +
                                                     std::to_string(manifest_.height));
        f.display_index = static_cast<std::int64_t>(k);
        return f;
    }

    std::vector<FrameBuffer> load_all() {
        std::vector<FrameBuffer> out;
        out.reserve(size());
        for (std::size_t k = 0; k < size(); ++k) out.push_back(frame(k));
        return out;
    }

private:
    fs::path dir_;
    StoreManifest manifest_;
};

/// Streams frames into a store. The manifest is written by finish(), after
/// every frame, and stale frame files beyond the new count are removed.
class StoreWriter {
public:
    StoreWriter(fs::path dir, int fps) : dir_(std::move(dir)) {
        if (fps <= 0) throw Error(ErrorCode::InvalidArgument, "fps must be positive");
        manifest_.fps = fps;
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) throw Error(ErrorCode::Io, "cannot create " + dir_.string());
        fs::remove(dir_ / kManifestName, ec);
    }

    void add(const FrameBuffer& frame) {
        if (manifest_.frame_count == 0) {
            manifest_.width = frame.width();
            manifest_.height = frame.height();
        } else if (frame.width() != manifest_.width || frame.height() != manifest_.height) {
            throw Error(ErrorCode::DimensionMismatch, "store frames must share dimensions");
        }
        write_png(dir_ / frame_filename(manifest_.frame_count), frame);
        ++manifest_.frame_count;
    }

    StoreManifest finish() {
        if (manifest_.frame_count == 0) throw Error(ErrorCode::InvalidArgument, "a store needs at least one frame");
        static const std::regex pattern(R"(frame_(\d{6})\.png)");
        for (const auto& entry : fs::directory_iterator(dir_)) {
            std::smatch m;
            const std::string name = entry.path().filename().string();
            if (std::regex_match(name, m, pattern) && std::stoul(m[1].str()) >= manifest_.frame_count)
                fs::remove(entry.path());
        }
        write_file_atomic(dir_ / kManifestName, dump(to_json(manifest_)));
        return manifest_;
    }

private:
    fs::path dir_;
    StoreManifest manifest_;
};

inline StoreManifest write_store(const fs::path& dir, std::span<const FrameBuffer> frames, int fps) {
    StoreWriter w(dir, fps);
    for (const FrameBuffer& f : frames) w.add(f);
    return w.finish();
}

} // namespace revelio
