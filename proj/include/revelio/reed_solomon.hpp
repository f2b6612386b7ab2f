#pragma once

// Shortened Reed-Solomon RS(36, 2) over GF(256).
//
// Field: x^8 + x^4 + x^3 + x^2 + 1 (0x11D), primitive element 2.
// Generator: narrow sense, roots alpha^1 .. alpha^34.
// Codeword byte 0 is the highest-degree coefficient; bytes 0..1 carry the
// payload big-endian, bytes 2..35 the parity.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace revelio {

struct RevelioCode {
    std::uint16_t payload = 0;

    bool operator==(const RevelioCode&) const = default;
};

inline constexpr int kCodewordLength = 36;
inline constexpr int kDataBytes = 2;
inline constexpr int kParityBytes = kCodewordLength - kDataBytes;

using Codeword = std::array<std::uint8_t, kCodewordLength>;
/// A received byte; nullopt marks an erasure.
using ReceivedByte = std::optional<std::uint8_t>;
using ReceivedWord = std::array<ReceivedByte, kCodewordLength>;

namespace gf256 {

struct Tables {
    std::array<std::uint8_t, 512> exp{};
    std::array<int, 256> log{};
};

inline const Tables& tables() {
    static const Tables t = [] {
        Tables tb;
        int x = 1;
        for (int i = 0; i < 255; ++i) {
            tb.exp[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(x);
            tb.log[static_cast<std::size_t>(x)] = i;
            x <<= 1;
            if (x & 0x100) x ^= 0x11D;
        }
        for (int i = 255; i < 512; ++i) tb.exp[static_cast<std::size_t>(i)] = tb.exp[static_cast<std::size_t>(i - 255)];
        tb.log[0] = -1;
        return tb;
    }();
    return t;
}

inline std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
    if (a == 0 || b == 0) return 0;
    const auto& t = tables();
    return t.exp[static_cast<std::size_t>(t.log[a] + t.log[b])];
}

inline std::uint8_t div(std::uint8_t a, std::uint8_t b) {
    // b != 0 is a caller invariant.
    if (a == 0) return 0;
    const auto& t = tables();
    return t.exp[static_cast<std::size_t>((t.log[a] - t.log[b] + 255) % 255)];
}

/// alpha^e for any integer exponent.
inline std::uint8_t pow_alpha(int e) {
    e %= 255;
    if (e < 0) e += 255;
    return tables().exp[static_cast<std::size_t>(e)];
}

/// Evaluates a low-degree-first polynomial at x.
inline std::uint8_t eval(const std::vector<std::uint8_t>& poly, std::uint8_t x) {
    std::uint8_t acc = 0;
    for (auto it = poly.rbegin(); it != poly.rend(); ++it) acc = static_cast<std::uint8_t>(mul(acc, x) ^ *it);
    return acc;
}

} // namespace gf256

namespace detail {

/// Generator polynomial, highest degree first, monic.
inline const std::vector<std::uint8_t>& rs_generator() {
    static const std::vector<std::uint8_t> g = [] {
        std::vector<std::uint8_t> poly{1};
        for (int j = 1; j <= kParityBytes; ++j) {
            std::vector<std::uint8_t> next(poly.size() + 1, 0);
            const std::uint8_t root = gf256::pow_alpha(j);
            for (std::size_t i = 0; i < poly.size(); ++i) {
                next[i] ^= poly[i];
                next[i + 1] ^= gf256::mul(poly[i], root);
            }
            poly = std::move(next);
        }
        return poly;
    }();
    return g;
}

/// S_j = r(alpha^j), j = 1..34, returned in s[j-1].
inline std::array<std::uint8_t, kParityBytes> rs_syndromes(const Codeword& r) {
    std::array<std::uint8_t, kParityBytes> s{};
    for (int j = 1; j <= kParityBytes; ++j) {
        const std::uint8_t x = gf256::pow_alpha(j);
        std::uint8_t acc = 0;
        for (std::uint8_t byte : r) acc = static_cast<std::uint8_t>(gf256::mul(acc, x) ^ byte);
        s[static_cast<std::size_t>(j - 1)] = acc;
    }
    return s;
}

/// Locator power of byte position i: X_i = alpha^(n-1-i).
inline int position_power(int i) { return kCodewordLength - 1 - i; }

} // namespace detail

inline Codeword rs_encode(RevelioCode code) {
    const auto& g = detail::rs_generator();
    Codeword cw{};
    cw[0] = static_cast<std::uint8_t>(code.payload >> 8);
    cw[1] = static_cast<std::uint8_t>(code.payload & 0xFF);

    // Remainder of m(x) * x^34 divided by g(x), synthetic division.
    std::array<std::uint8_t, kCodewordLength> work{};
    work[0] = cw[0];
    work[1] = cw[1];
    for (int i = 0; i < kDataBytes; ++i) {
        const std::uint8_t coef = work[static_cast<std::size_t>(i)];
        if (coef == 0) continue;
        for (std::size_t j = 1; j < g.size(); ++j)
            work[static_cast<std::size_t>(i) + j] ^= gf256::mul(g[j], coef);
    }
    for (int i = kDataBytes; i < kCodewordLength; ++i) cw[static_cast<std::size_t>(i)] = work[static_cast<std::size_t>(i)];
    return cw;
}

/// True when every syndrome of the word vanishes.
inline bool rs_is_codeword(const Codeword& cw) {
    for (std::uint8_t s : detail::rs_syndromes(cw))
        if (s != 0) return false;
    return true;
}

/// Errors-and-erasures decoding. Succeeds whenever
/// 2 * errors + erasures <= 34; returns nullopt when the word cannot be
/// corrected to a valid codeword within that bound.
inline std::optional<RevelioCode> rs_decode(const ReceivedWord& received) {
    using namespace gf256;

    Codeword r{};
    std::vector<int> erasures;
    for (int i = 0; i < kCodewordLength; ++i) {
        if (received[static_cast<std::size_t>(i)]) {
            r[static_cast<std::size_t>(i)] = *received[static_cast<std::size_t>(i)];
        } else {
            erasures.push_back(i);
        }
    }
    const int e = static_cast<int>(erasures.size());
    if (e > kParityBytes) return std::nullopt;

    const auto syn = detail::rs_syndromes(r);
    bool clean = true;
    for (std::uint8_t s : syn) clean = clean && s == 0;
    if (clean) return RevelioCode{static_cast<std::uint16_t>((r[0] << 8) | r[1])};

    // Erasure locator Gamma(x) = prod (1 - X_i x), low degree first.
    std::vector<std::uint8_t> gamma{1};
    for (int pos : erasures) {
        const std::uint8_t xi = pow_alpha(detail::position_power(pos));
        std::vector<std::uint8_t> next(gamma.size() + 1, 0);
        for (std::size_t k = 0; k < gamma.size(); ++k) {
            next[k] ^= gamma[k];
            next[k + 1] ^= mul(gamma[k], xi);
        }
        gamma = std::move(next);
    }

    // Berlekamp-Massey seeded with the erasure locator.
    std::vector<std::uint8_t> lambda = gamma;
    std::vector<std::uint8_t> prev = gamma;
    int degree = e;
    for (int step = e + 1; step <= kParityBytes; ++step) {
        std::uint8_t delta = 0;
        for (std::size_t j = 0; j < lambda.size(); ++j) {
            const int idx = step - static_cast<int>(j);
            if (idx < 1) break;
            delta ^= mul(lambda[j], syn[static_cast<std::size_t>(idx - 1)]);
        }
        std::vector<std::uint8_t> shifted(prev.size() + 1, 0);
        for (std::size_t k = 0; k < prev.size(); ++k) shifted[k + 1] = prev[k];
        if (delta == 0) {
            prev = std::move(shifted);
            continue;
        }
        std::vector<std::uint8_t> updated(std::max(lambda.size(), shifted.size()), 0);
        for (std::size_t k = 0; k < lambda.size(); ++k) updated[k] ^= lambda[k];
        for (std::size_t k = 0; k < shifted.size(); ++k) updated[k] ^= mul(delta, shifted[k]);
        if (2 * degree <= step + e - 1) {
            const std::uint8_t inv = div(1, delta);
            prev.assign(lambda.size(), 0);
            for (std::size_t k = 0; k < lambda.size(); ++k) prev[k] = mul(lambda[k], inv);
            degree = step + e - degree;
        } else {
            prev = std::move(shifted);
        }
        lambda = std::move(updated);
    }
    while (lambda.size() > 1 && lambda.back() == 0) lambda.pop_back();
    const int lambda_degree = static_cast<int>(lambda.size()) - 1;
    if (lambda_degree != degree) return std::nullopt;
    if (2 * (degree - e) + e > kParityBytes) return std::nullopt;

    // Chien search restricted to the 36 live positions of the shortened code.
    std::vector<int> locations;
    for (int i = 0; i < kCodewordLength; ++i) {
        if (eval(lambda, pow_alpha(-detail::position_power(i))) == 0) locations.push_back(i);
    }
    if (static_cast<int>(locations.size()) != degree) return std::nullopt;

    // Omega(x) = S(x) Lambda(x) mod x^34, with S(x) = sum S_{j+1} x^j.
    std::vector<std::uint8_t> omega(kParityBytes, 0);
    for (std::size_t i = 0; i < lambda.size(); ++i)
        for (std::size_t j = 0; i + j < static_cast<std::size_t>(kParityBytes); ++j)
            omega[i + j] ^= mul(lambda[i], syn[j]);

    // Formal derivative keeps the odd-power terms.
    std::vector<std::uint8_t> derivative(lambda.size() > 1 ? lambda.size() - 1 : 1, 0);
    for (std::size_t i = 1; i < lambda.size(); i += 2) derivative[i - 1] = lambda[i];

    for (int pos : locations) {
        const std::uint8_t x_inv = pow_alpha(-detail::position_power(pos));
        const std::uint8_t denom = eval(derivative, x_inv);
        if (denom == 0) return std::nullopt;
        r[static_cast<std::size_t>(pos)] ^= div(eval(omega, x_inv), denom);
    }
    if (!rs_is_codeword(r)) return std::nullopt;
    return RevelioCode{static_cast<std::uint16_t>((r[0] << 8) | r[1])};
}

} // namespace revelio
