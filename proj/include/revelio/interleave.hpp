#pragma once

// Symbol alphabet and the codeword <-> 16x9 shape grid layout.
//
// Bytes 0..31 fill 2x2 blocks over rows 0..7 (block (bi, bj) holds byte
// 8*bi + bj); bytes 32..35 run as 1x4 groups along row 8. Within a group
// the byte is read MSB first, two bits per symbol, in row-major cell order.

#include <array>
#include <cstdint>
#include <optional>
#include <utility>

#include "revelio/error.hpp"
#include "revelio/reed_solomon.hpp"

namespace revelio {

enum class SymbolShape : std::uint8_t { E0 = 0, E45 = 1, E90 = 2, E135 = 3 };

inline constexpr std::array<SymbolShape, 4> kAllShapes = {SymbolShape::E0, SymbolShape::E45, SymbolShape::E90,
                                                          SymbolShape::E135};

inline const char* to_string(SymbolShape s) {
    switch (s) {
        case SymbolShape::E0: return "E0";
        case SymbolShape::E45: return "E45";
        case SymbolShape::E90: return "E90";
        case SymbolShape::E135: return "E135";
    }
    return "?";
}

/// A grid cell: a shape, or nullopt for an erasure.
using ShapeCell = std::optional<SymbolShape>;

enum class SoftBit : std::uint8_t { Zero = 0, One = 1, Erased = 2 };

inline constexpr int kGridRows = 9;
inline constexpr int kGridCols = 16;
inline constexpr int kGridCells = kGridRows * kGridCols;
inline constexpr int kStreamBits = 2 * kGridCells;

class ShapeGrid {
public:
    ShapeCell& at(int row, int col) { return cells_[index(row, col)]; }
    const ShapeCell& at(int row, int col) const { return cells_[index(row, col)]; }

    std::array<ShapeCell, kGridCells>& cells() noexcept { return cells_; }
    const std::array<ShapeCell, kGridCells>& cells() const noexcept { return cells_; }

    bool operator==(const ShapeGrid&) const = default;

private:
    static std::size_t index(int row, int col) {
        if (row < 0 || row >= kGridRows || col < 0 || col >= kGridCols)
            throw Error(ErrorCode::InvalidArgument, "grid cell out of range");
        return static_cast<std::size_t>(row * kGridCols + col);
    }

    std::array<ShapeCell, kGridCells> cells_{};
};

/// Row-major over the grid: bits 2k, 2k+1 belong to cell k (row k/16, col k%16).
using SoftBitStream = std::array<SoftBit, kStreamBits>;

inline std::pair<SoftBit, SoftBit> shape_to_bits(ShapeCell shape) {
    if (!shape) return {SoftBit::Erased, SoftBit::Erased};
    const auto v = static_cast<std::uint8_t>(*shape);
    return {(v & 2) ? SoftBit::One : SoftBit::Zero, (v & 1) ? SoftBit::One : SoftBit::Zero};
}

inline ShapeCell bits_to_shape(SoftBit hi, SoftBit lo) {
    if (hi == SoftBit::Erased || lo == SoftBit::Erased) return std::nullopt;
    return static_cast<SymbolShape>(((hi == SoftBit::One) ? 2 : 0) | ((lo == SoftBit::One) ? 1 : 0));
}

inline SoftBitStream shapes_to_bits(const ShapeGrid& grid) {
    SoftBitStream bits{};
    for (int k = 0; k < kGridCells; ++k) {
        const auto [hi, lo] = shape_to_bits(grid.cells()[static_cast<std::size_t>(k)]);
        bits[static_cast<std::size_t>(2 * k)] = hi;
        bits[static_cast<std::size_t>(2 * k + 1)] = lo;
    }
    return bits;
}

inline ShapeGrid bits_to_shapes(const SoftBitStream& bits) {
    ShapeGrid grid;
    for (int k = 0; k < kGridCells; ++k)
        grid.cells()[static_cast<std::size_t>(k)] =
            bits_to_shape(bits[static_cast<std::size_t>(2 * k)], bits[static_cast<std::size_t>(2 * k + 1)]);
    return grid;
}

/// The four grid cells carrying byte `index`, most significant bit pair first.
inline std::array<std::pair<int, int>, 4> byte_cells(int index) {
    if (index < 0 || index >= kCodewordLength) throw Error(ErrorCode::InvalidArgument, "byte index out of range");
    if (index < 32) {
        const int bi = index / 8;
        const int bj = index % 8;
        return {{{2 * bi, 2 * bj}, {2 * bi, 2 * bj + 1}, {2 * bi + 1, 2 * bj}, {2 * bi + 1, 2 * bj + 1}}};
    }
    const int c = 4 * (index - 32);
    return {{{8, c}, {8, c + 1}, {8, c + 2}, {8, c + 3}}};
}

inline ShapeGrid interleave(const Codeword& cw) {
    ShapeGrid grid;
    for (int b = 0; b < kCodewordLength; ++b) {
        const auto cells = byte_cells(b);
        for (int k = 0; k < 4; ++k) {
            const int shift = 6 - 2 * k;
            const auto value = static_cast<std::uint8_t>((cw[static_cast<std::size_t>(b)] >> shift) & 3);
            grid.at(cells[static_cast<std::size_t>(k)].first, cells[static_cast<std::size_t>(k)].second) =
                static_cast<SymbolShape>(value);
        }
    }
    return grid;
}

/// Inverse of interleave; a byte with any erased symbol is erased.
inline ReceivedWord deinterleave(const ShapeGrid& grid) {
    ReceivedWord word{};
    for (int b = 0; b < kCodewordLength; ++b) {
        const auto cells = byte_cells(b);
        std::uint8_t value = 0;
        bool erased = false;
        for (int k = 0; k < 4; ++k) {
            const ShapeCell& cell = grid.at(cells[static_cast<std::size_t>(k)].first, cells[static_cast<std::size_t>(k)].second);
            if (!cell) {
                erased = true;
                break;
            }
            value = static_cast<std::uint8_t>(value | (static_cast<std::uint8_t>(*cell) << (6 - 2 * k)));
        }
        if (!erased) word[static_cast<std::size_t>(b)] = value;
    }
    return word;
}

inline ReceivedWord deinterleave(const SoftBitStream& bits) { return deinterleave(bits_to_shapes(bits)); }

inline int count_erased(const SoftBitStream& bits) {
    int n = 0;
    for (SoftBit b : bits) n += b == SoftBit::Erased ? 1 : 0;
    return n;
}

inline int count_erased(const ReceivedWord& word) {
    int n = 0;
    for (const auto& b : word) n += b ? 0 : 1;
    return n;
}

} // namespace revelio
