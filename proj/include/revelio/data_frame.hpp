#pragma once

// Data-frame geometry: the 16x9 lattice of ellipse symbols plus the
// flickered border. Shared by the encoder (mask) and the decoder (patch
// positions and classifier templates).

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "revelio/image.hpp"
#include "revelio/interleave.hpp"

namespace revelio {

inline constexpr int kLatticePitch = 120;
inline constexpr int kLatticeMargin = 60;
inline constexpr int kBorderWidth = 13;
inline constexpr double kDiagonalSemiMajor = 50.0;
inline constexpr double kAxisSemiMajor = 37.0;
inline constexpr double kSemiMinor = 10.0;

struct PixelPoint {
    int x = 0;
    int y = 0;

    bool operator==(const PixelPoint&) const = default;
};

struct SymbolGeometry {
    double cx = 0.0;
    double cy = 0.0;
    SymbolShape shape = SymbolShape::E0;
    double semi_major = kAxisSemiMajor;
    double semi_minor = kSemiMinor;
};

/// Exact (cos, sin) of the ellipse angle. E45 and E135 share magnitudes so
/// their rasters are mirror images bit for bit.
inline std::pair<double, double> shape_direction(SymbolShape shape) {
    static const double h = std::sqrt(0.5);
    switch (shape) {
        case SymbolShape::E0: return {1.0, 0.0};
        case SymbolShape::E45: return {h, h};
        case SymbolShape::E90: return {0.0, 1.0};
        case SymbolShape::E135: return {-h, h};
    }
    return {1.0, 0.0};
}

inline double semi_major_for(SymbolShape shape) {
    return (shape == SymbolShape::E45 || shape == SymbolShape::E135) ? kDiagonalSemiMajor : kAxisSemiMajor;
}

inline PixelPoint cell_center(int row, int col) {
    return {kLatticeMargin + kLatticePitch * col, kLatticeMargin + kLatticePitch * row};
}

inline SymbolGeometry symbol_geometry(int row, int col, SymbolShape shape) {
    const PixelPoint c = cell_center(row, col);
    return {static_cast<double>(c.x), static_cast<double>(c.y), shape, semi_major_for(shape), kSemiMinor};
}

inline bool ellipse_contains(const SymbolGeometry& g, double dx, double dy) {
    const auto [c, s] = shape_direction(g.shape);
    const double u = (dx * c + dy * s) / g.semi_major;
    const double v = (-dx * s + dy * c) / g.semi_minor;
    return u * u + v * v <= 1.0;
}

/// Integer pixels (x, y) inside the ellipse, with pixel coordinates taken as
/// the lattice coordinates themselves.
inline std::vector<PixelPoint> rasterize_symbol(const SymbolGeometry& g) {
    std::vector<PixelPoint> out;
    const int reach = static_cast<int>(std::ceil(g.semi_major)) + 1;
    const int cx = static_cast<int>(std::lround(g.cx));
    const int cy = static_cast<int>(std::lround(g.cy));
    for (int y = cy - reach; y <= cy + reach; ++y)
        for (int x = cx - reach; x <= cx + reach; ++x)
            if (ellipse_contains(g, x - g.cx, y - g.cy)) out.push_back({x, y});
    return out;
}

inline bool in_border(int x, int y, int width, int height) {
    return x < kBorderWidth || y < kBorderWidth || x >= width - kBorderWidth || y >= height - kBorderWidth;
}

/// Binary flicker mask for one 1920x1080 frame.
struct DataFrame {
    Plane<std::uint8_t> mask;
    /// Linear indices of mask-1 pixels in increasing order.
    std::vector<std::uint32_t> active;

    int width() const noexcept { return mask.width(); }
    int height() const noexcept { return mask.height(); }
    bool flickered(int x, int y) const { return mask.at(x, y) != 0; }
};

inline DataFrame build_data_frame(const ShapeGrid& grid) {
    DataFrame df{Plane<std::uint8_t>(kFrameWidth, kFrameHeight, 0), {}};
    for (int y = 0; y < kFrameHeight; ++y)
        for (int x = 0; x < kFrameWidth; ++x)
            if (in_border(x, y, kFrameWidth, kFrameHeight)) df.mask.at(x, y) = 1;
    for (int row = 0; row < kGridRows; ++row)
        for (int col = 0; col < kGridCols; ++col) {
            const ShapeCell& cell = grid.at(row, col);
            if (!cell) continue;
            for (const PixelPoint& p : rasterize_symbol(symbol_geometry(row, col, *cell)))
                if (p.x >= 0 && p.y >= 0 && p.x < kFrameWidth && p.y < kFrameHeight) df.mask.at(p.x, p.y) = 1;
        }
    const auto& m = df.mask.data();
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i]) df.active.push_back(static_cast<std::uint32_t>(i));
    return df;
}

inline std::pair<DataFrame, ShapeGrid> build_data_frame(const Codeword& cw) {
    ShapeGrid grid = interleave(cw);
    DataFrame df = build_data_frame(grid);
    return {std::move(df), std::move(grid)};
}

} // namespace revelio
