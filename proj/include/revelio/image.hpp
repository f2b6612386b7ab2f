#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "revelio/error.hpp"

namespace revelio {

inline constexpr int kFrameWidth = 1920;
inline constexpr int kFrameHeight = 1080;

/// Single-channel raster, row-major.
template <typename T>
class Plane {
public:
    Plane() = default;
    Plane(int width, int height, T fill = T{}) : width_(width), height_(height) {
        if (width <= 0 || height <= 0)
            throw Error(ErrorCode::InvalidArgument, "plane dimensions must be positive");
        data_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& at(int x, int y) { return data_[index(x, y)]; }
    const T& at(int x, int y) const { return data_[index(x, y)]; }

    /// Reads with coordinates clamped to the nearest edge pixel.
    const T& clamped(int x, int y) const {
        x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
        y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
        return data_[index(x, y)];
    }

    std::span<T> row(int y) { return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)}; }
    std::span<const T> row(int y) const {
        return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
    }

    std::vector<T>& data() noexcept { return data_; }
    const std::vector<T>& data() const noexcept { return data_; }

    bool operator==(const Plane&) const = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

struct SrgbPixel {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const SrgbPixel&) const = default;
};

/// One video frame stored as interleaved 8-bit sRGB.
class FrameBuffer {
public:
    FrameBuffer() = default;
    FrameBuffer(int width, int height, SrgbPixel fill = {}) : width_(width), height_(height) {
        if (width <= 0 || height <= 0)
            throw Error(ErrorCode::InvalidArgument, "frame dimensions must be positive");
        rgb_.resize(static_cast<std::size_t>(width) * height * 3);
        for (std::size_t i = 0; i < rgb_.size(); i += 3) {
            rgb_[i] = fill.r;
            rgb_[i + 1] = fill.g;
            rgb_[i + 2] = fill.b;
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
    bool empty() const noexcept { return rgb_.empty(); }

    std::int64_t display_index = 0;

    SrgbPixel pixel(std::size_t i) const noexcept { return {rgb_[3 * i], rgb_[3 * i + 1], rgb_[3 * i + 2]}; }
    SrgbPixel pixel(int x, int y) const noexcept { return pixel(linear(x, y)); }
    void set_pixel(std::size_t i, SrgbPixel p) noexcept {
        rgb_[3 * i] = p.r;
        rgb_[3 * i + 1] = p.g;
        rgb_[3 * i + 2] = p.b;
    }
    void set_pixel(int x, int y, SrgbPixel p) noexcept { set_pixel(linear(x, y), p); }

    std::size_t linear(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    std::vector<std::uint8_t>& bytes() noexcept { return rgb_; }
    const std::vector<std::uint8_t>& bytes() const noexcept { return rgb_; }

    bool same_shape(const FrameBuffer& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    /// Pixel equality; display_index is bookkeeping and not compared.
    bool operator==(const FrameBuffer& other) const {
        return width_ == other.width_ && height_ == other.height_ && rgb_ == other.rgb_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> rgb_;
};

/// Floating OKLAB planes of one frame.
struct OklabFrame {
    Plane<float> L;
    Plane<float> A;
    Plane<float> B;

    int width() const noexcept { return L.width(); }
    int height() const noexcept { return L.height(); }
};

inline void require_same_shape(const FrameBuffer& a, const FrameBuffer& b, const char* what) {
    if (!a.same_shape(b))
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(what) + ": " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                        " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
}

} // namespace revelio
