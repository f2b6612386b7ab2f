#pragma once

// Planar projective geometry and resampling helpers.
//
// Continuous coordinates put the centre of pixel (i, j) at (i + 0.5, j + 0.5);
// a W x H image spans [0, W] x [0, H].

#include <array>
#include <cmath>
#include <utility>

#include "revelio/error.hpp"
#include "revelio/image.hpp"

namespace revelio {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    Point2 operator+(const Point2& o) const noexcept { return {x + o.x, y + o.y}; }
    Point2 operator-(const Point2& o) const noexcept { return {x - o.x, y - o.y}; }
    Point2 operator*(double s) const noexcept { return {x * s, y * s}; }
    bool operator==(const Point2&) const = default;
};

inline double cross(const Point2& a, const Point2& b) noexcept { return a.x * b.y - a.y * b.x; }
inline double distance(const Point2& a, const Point2& b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

/// Four corners ordered top-left, top-right, bottom-right, bottom-left.
struct Quad {
    std::array<Point2, 4> corners{};

    static Quad rectangle(double width, double height) {
        return {{Point2{0.0, 0.0}, Point2{width, 0.0}, Point2{width, height}, Point2{0.0, height}}};
    }

    /// Shoelace area; positive for the TL, TR, BR, BL order in y-down images.
    double signed_area() const noexcept {
        double a = 0.0;
        for (std::size_t i = 0; i < 4; ++i) a += cross(corners[i], corners[(i + 1) % 4]);
        return 0.5 * a;
    }

    bool is_convex() const noexcept {
        int sign = 0;
        for (std::size_t i = 0; i < 4; ++i) {
            const Point2 e1 = corners[(i + 1) % 4] - corners[i];
            const Point2 e2 = corners[(i + 2) % 4] - corners[(i + 1) % 4];
            const double z = cross(e1, e2);
            if (std::abs(z) < 1e-9) return false;
            const int s = z > 0 ? 1 : -1;
            if (sign == 0) sign = s;
            else if (s != sign) return false;
        }
        return true;
    }

    bool operator==(const Quad&) const = default;

    Point2 centroid() const noexcept {
        return (corners[0] + corners[1] + corners[2] + corners[3]) * 0.25;
    }
};

/// 3x3 projective map, row-major.
class Homography {
public:
    Homography() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}
    explicit Homography(const std::array<double, 9>& m) : m_(m) {}

    const std::array<double, 9>& matrix() const noexcept { return m_; }

    Point2 apply(const Point2& p) const noexcept {
        const double w = m_[6] * p.x + m_[7] * p.y + m_[8];
        return {(m_[0] * p.x + m_[1] * p.y + m_[2]) / w, (m_[3] * p.x + m_[4] * p.y + m_[5]) / w};
    }

    double determinant() const noexcept {
        return m_[0] * (m_[4] * m_[8] - m_[5] * m_[7]) - m_[1] * (m_[3] * m_[8] - m_[5] * m_[6]) +
               m_[2] * (m_[3] * m_[7] - m_[4] * m_[6]);
    }

    Homography inverse() const {
        const double det = determinant();
        if (!std::isfinite(det) || std::abs(det) < 1e-14)
            throw Error(ErrorCode::SingularHomography, "homography is not invertible");
        const auto& m = m_;
        std::array<double, 9> inv{(m[4] * m[8] - m[5] * m[7]), -(m[1] * m[8] - m[2] * m[7]), (m[1] * m[5] - m[2] * m[4]),
                                  -(m[3] * m[8] - m[5] * m[6]), (m[0] * m[8] - m[2] * m[6]), -(m[0] * m[5] - m[2] * m[3]),
                                  (m[3] * m[7] - m[4] * m[6]), -(m[0] * m[7] - m[1] * m[6]), (m[0] * m[4] - m[1] * m[3])};
        for (double& v : inv) v /= det;
        return Homography(inv);
    }

    /// Direct linear transform on four correspondences (h33 = 1).
    static Homography from_points(const std::array<Point2, 4>& src, const std::array<Point2, 4>& dst) {
        for (const auto* pts : {&src, &dst}) {
            for (std::size_t i = 0; i < 4; ++i)
                for (std::size_t j = i + 1; j < 4; ++j)
                    for (std::size_t k = j + 1; k < 4; ++k) {
                        const double area = cross((*pts)[j] - (*pts)[i], (*pts)[k] - (*pts)[i]);
                        const double scale = 1.0 + distance((*pts)[i], (*pts)[j]) * distance((*pts)[i], (*pts)[k]);
                        if (std::abs(area) < 1e-9 * scale)
                            throw Error(ErrorCode::SingularHomography, "three corners are collinear");
                    }
        }

        double a[8][9] = {};
        for (std::size_t i = 0; i < 4; ++i) {
            const double x = src[i].x, y = src[i].y, u = dst[i].x, v = dst[i].y;
            double* r0 = a[2 * i];
            double* r1 = a[2 * i + 1];
            r0[0] = x; r0[1] = y; r0[2] = 1; r0[6] = -u * x; r0[7] = -u * y; r0[8] = u;
            r1[3] = x; r1[4] = y; r1[5] = 1; r1[6] = -v * x; r1[7] = -v * y; r1[8] = v;
        }
        for (int col = 0; col < 8; ++col) {
            int pivot = col;
            for (int r = col + 1; r < 8; ++r)
                if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
            if (std::abs(a[pivot][col]) < 1e-12)
                throw Error(ErrorCode::SingularHomography, "correspondence system is rank deficient");
            if (pivot != col)
                for (int c = 0; c < 9; ++c) std::swap(a[col][c], a[pivot][c]);
            for (int r = 0; r < 8; ++r) {
                if (r == col) continue;
                const double f = a[r][col] / a[col][col];
                if (f == 0.0) continue;
                for (int c = col; c < 9; ++c) a[r][c] -= f * a[col][c];
            }
        }
        std::array<double, 9> h{};
        for (int i = 0; i < 8; ++i) h[static_cast<std::size_t>(i)] = a[i][8] / a[i][i];
        h[8] = 1.0;
        Homography result(h);
        if (std::abs(result.determinant()) < 1e-14)
            throw Error(ErrorCode::SingularHomography, "degenerate homography");
        return result;
    }

    /// Maps the quad's corners onto a width x height rectangle.
    static Homography quad_to_rect(const Quad& q, double width, double height) {
        return from_points(q.corners, Quad::rectangle(width, height).corners);
    }

    static Homography rect_to_quad(double width, double height, const Quad& q) {
        return from_points(Quad::rectangle(width, height).corners, q.corners);
    }

    bool is_identity(double tol = 1e-12) const noexcept {
        const Homography id;
        for (std::size_t i = 0; i < 9; ++i)
            if (std::abs(m_[i] / m_[8] - id.m_[i]) > tol) return false;
        return true;
    }

private:
    std::array<double, 9> m_;
};

inline Quad apply(const Homography& h, const Quad& q) {
    Quad out;
    for (std::size_t i = 0; i < 4; ++i) out.corners[i] = h.apply(q.corners[i]);
    return out;
}

/// Bilinear read at continuous position (u, v); edge pixels are repeated.
template <typename T>
double sample_bilinear(const Plane<T>& plane, double u, double v) {
    const double x = u - 0.5;
    const double y = v - 0.5;
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const int x0 = static_cast<int>(fx);
    const int y0 = static_cast<int>(fy);
    const double ax = x - fx;
    const double ay = y - fy;
    const double p00 = plane.clamped(x0, y0), p10 = plane.clamped(x0 + 1, y0);
    const double p01 = plane.clamped(x0, y0 + 1), p11 = plane.clamped(x0 + 1, y0 + 1);
    return (1 - ay) * ((1 - ax) * p00 + ax * p10) + ay * ((1 - ax) * p01 + ax * p11);
}

} // namespace revelio
