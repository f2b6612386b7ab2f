#pragma once

// Screen quad detection on the combined accumulator plane: Otsu threshold,
// morphological close, largest 8-connected component, outer contour, Hough
// lines refined by total least squares, then side intersections.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "revelio/data_frame.hpp"
#include "revelio/geometry.hpp"
#include "revelio/image.hpp"
#include "revelio/parallel.hpp"

namespace revelio {

struct QuadDetectionParams {
    int close_size = 5;
    double theta_step_deg = 0.5;
    double rho_step = 1.0;
    /// Two lines closer than both of these are the same side.
    double duplicate_angle_deg = 10.0;
    double duplicate_distance = 50.0;
    /// Minimum contour pixels voting for a side.
    int min_votes = 40;
    /// Contour pixels within this distance of a side are used for the fit.
    double fit_band = 2.0;
    /// Minimum quad area as a fraction of the image area.
    double min_area_fraction = 0.02;
};

/// Line x cos(theta) + y sin(theta) = rho in continuous pixel coordinates.
struct Line {
    double theta = 0.0;
    double rho = 0.0;
    int votes = 0;

    Point2 normal() const noexcept { return {std::cos(theta), std::sin(theta)}; }
    double signed_distance(const Point2& p) const noexcept { return p.x * std::cos(theta) + p.y * std::sin(theta) - rho; }
};

/// Threshold maximising between-class variance over a 256-bin histogram.
/// Pixels at or above the returned value are foreground.
inline double otsu_threshold(const Plane<float>& p) {
    const auto [lo_it, hi_it] = std::minmax_element(p.data().begin(), p.data().end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) return hi;
    std::array<double, 256> hist{};
    const double scale = 255.0 / (hi - lo);
    for (float v : p.data()) ++hist[static_cast<std::size_t>(std::min(255.0, (v - lo) * scale))];
    const double total = static_cast<double>(p.size());
    double sum_all = 0.0;
    for (std::size_t i = 0; i < 256; ++i) sum_all += static_cast<double>(i) * hist[i];
    double w0 = 0.0, sum0 = 0.0, best = -1.0;
    std::size_t best_bin = 0;
    for (std::size_t t = 0; t < 255; ++t) {
        w0 += hist[t];
        sum0 += static_cast<double>(t) * hist[t];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if (between > best) {
            best = between;
            best_bin = t;
        }
    }
    return lo + (static_cast<double>(best_bin) + 1.0) / scale;
}

inline Plane<std::uint8_t> binarize(const Plane<float>& p, double threshold) {
    Plane<std::uint8_t> out(p.width(), p.height(), 0);
    for (std::size_t i = 0; i < p.size(); ++i) out.data()[i] = p.data()[i] >= threshold ? 1 : 0;
    return out;
}

namespace detail {

/// Square min/max filter of side `size`; pixels off the image are ignored.
inline Plane<std::uint8_t> square_filter(const Plane<std::uint8_t>& src, int size, bool dilate) {
    const int half = size / 2;
    const int w = src.width(), h = src.height();
    Plane<std::uint8_t> tmp(w, h), out(w, h);
    const std::uint8_t hit = dilate ? 1 : 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::uint8_t v = dilate ? 0 : 1;
            for (int t = std::max(0, x - half); t <= std::min(w - 1, x + half) && v != hit; ++t)
                if (src.at(t, y) == hit) v = hit;
            tmp.at(x, y) = v;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::uint8_t v = dilate ? 0 : 1;
            for (int t = std::max(0, y - half); t <= std::min(h - 1, y + half) && v != hit; ++t)
                if (tmp.at(x, t) == hit) v = hit;
            out.at(x, y) = v;
        }
    return out;
}

} // namespace detail

/// Closing with background beyond the image: a side that runs close to the
/// image edge is not merged with it.
inline Plane<std::uint8_t> morph_close(const Plane<std::uint8_t>& mask, int size) {
    if (size <= 1) return mask;
    const int pad = size / 2;
    Plane<std::uint8_t> padded(mask.width() + 2 * pad, mask.height() + 2 * pad, 0);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) padded.at(x + pad, y + pad) = mask.at(x, y);
    const Plane<std::uint8_t> closed = detail::square_filter(detail::square_filter(padded, size, true), size, false);
    Plane<std::uint8_t> out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) out.at(x, y) = closed.at(x + pad, y + pad);
    return out;
}

/// Mask of the largest 8-connected foreground component (empty mask if none).
inline Plane<std::uint8_t> largest_component(const Plane<std::uint8_t>& mask) {
    const int w = mask.width(), h = mask.height();
    std::vector<std::int32_t> label(mask.size(), -1);
    std::vector<std::uint32_t> stack;
    std::int32_t best_label = -1, next = 0;
    std::size_t best_size = 0;
    for (std::size_t start = 0; start < mask.size(); ++start) {
        if (!mask.data()[start] || label[start] >= 0) continue;
        const std::int32_t id = next++;
        std::size_t size = 0;
        label[start] = id;
        stack.push_back(static_cast<std::uint32_t>(start));
        while (!stack.empty()) {
            const std::uint32_t i = stack.back();
            stack.pop_back();
            ++size;
            const int x = static_cast<int>(i % static_cast<std::uint32_t>(w));
            const int y = static_cast<int>(i / static_cast<std::uint32_t>(w));
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
                    if (mask.data()[j] && label[j] < 0) {
                        label[j] = id;
                        stack.push_back(static_cast<std::uint32_t>(j));
                    }
                }
        }
        if (size > best_size) {
            best_size = size;
            best_label = id;
        }
    }
    Plane<std::uint8_t> out(w, h, 0);
    for (std::size_t i = 0; i < mask.size(); ++i) out.data()[i] = (best_label >= 0 && label[i] == best_label) ? 1 : 0;
    return out;
}

/// Foreground pixels 4-adjacent to the exterior: background reachable from
/// the image edge, or the outside of the image itself. Holes do not count.
inline std::vector<PixelPoint> outer_contour(const Plane<std::uint8_t>& mask) {
    const int w = mask.width(), h = mask.height();
    std::vector<std::uint8_t> outside(mask.size(), 0);
    std::vector<std::uint32_t> stack;
    auto seed = [&](int x, int y) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        if (!mask.data()[i] && !outside[i]) {
            outside[i] = 1;
            stack.push_back(static_cast<std::uint32_t>(i));
        }
    };
    for (int x = 0; x < w; ++x) seed(x, 0), seed(x, h - 1);
    for (int y = 0; y < h; ++y) seed(0, y), seed(w - 1, y);
    while (!stack.empty()) {
        const std::uint32_t i = stack.back();
        stack.pop_back();
        const int x = static_cast<int>(i % static_cast<std::uint32_t>(w));
        const int y = static_cast<int>(i / static_cast<std::uint32_t>(w));
        if (x > 0) seed(x - 1, y);
        if (x + 1 < w) seed(x + 1, y);
        if (y > 0) seed(x, y - 1);
        if (y + 1 < h) seed(x, y + 1);
    }
    std::vector<PixelPoint> contour;
    auto exterior = [&](int x, int y) {
        return x < 0 || y < 0 || x >= w || y >= h || outside[static_cast<std::size_t>(y) * w + x];
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (mask.at(x, y) && (exterior(x - 1, y) || exterior(x + 1, y) || exterior(x, y - 1) || exterior(x, y + 1)))
                contour.push_back({x, y});
    return contour;
}

namespace detail {

inline double angle_gap(double a, double b) {
    double d = std::fmod(std::abs(a - b), std::numbers::pi);
    return std::min(d, std::numbers::pi - d);
}

/// Whether two lines describe the same side: nearly parallel and close near
/// the image centre.
inline bool same_side(const Line& a, const Line& b, const Point2& centre, double max_angle, double max_distance) {
    if (angle_gap(a.theta, b.theta) >= max_angle) return false;
    // Distance between the lines measured at the projection of the centre onto a.
    const Point2 foot = centre - a.normal() * a.signed_distance(centre);
    return std::abs(b.signed_distance(foot)) < max_distance;
}

/// Total least-squares line through the points.
inline std::optional<Line> fit_line(const std::vector<Point2>& pts) {
    if (pts.size() < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (const Point2& p : pts) mx += p.x, my += p.y;
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const Point2& p : pts) {
        sxx += (p.x - mx) * (p.x - mx);
        syy += (p.y - my) * (p.y - my);
        sxy += (p.x - mx) * (p.y - my);
    }
    // Normal is the eigenvector of the smaller eigenvalue of the scatter matrix.
    const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy) + 0.5 * std::numbers::pi;
    Line l{theta, mx * std::cos(theta) + my * std::sin(theta), static_cast<int>(pts.size())};
    return l;
}

inline std::optional<Point2> intersect(const Line& a, const Line& b) {
    const double ca = std::cos(a.theta), sa = std::sin(a.theta), cb = std::cos(b.theta), sb = std::sin(b.theta);
    const double det = ca * sb - sa * cb;
    if (std::abs(det) < 1e-9) return std::nullopt;
    return Point2{(a.rho * sb - b.rho * sa) / det, (ca * b.rho - cb * a.rho) / det};
}

} // namespace detail

/// Strongest Hough lines over the points, duplicates suppressed, strongest first.
inline std::vector<Line> hough_lines(const std::vector<PixelPoint>& points, int width, int height,
                                     const QuadDetectionParams& params, std::size_t max_lines) {
    const int n_theta = static_cast<int>(std::lround(180.0 / params.theta_step_deg));
    const double diag = std::hypot(width, height);
    const int n_rho = static_cast<int>(std::ceil(2.0 * diag / params.rho_step)) + 1;
    std::vector<double> cs(static_cast<std::size_t>(n_theta)), sn(static_cast<std::size_t>(n_theta));
    for (int t = 0; t < n_theta; ++t) {
        const double th = t * params.theta_step_deg * std::numbers::pi / 180.0;
        cs[static_cast<std::size_t>(t)] = std::cos(th);
        sn[static_cast<std::size_t>(t)] = std::sin(th);
    }
    std::vector<std::int32_t> acc(static_cast<std::size_t>(n_theta) * n_rho, 0);
    for (const PixelPoint& p : points) {
        const double x = p.x + 0.5, y = p.y + 0.5;
        for (int t = 0; t < n_theta; ++t) {
            const double rho = x * cs[static_cast<std::size_t>(t)] + y * sn[static_cast<std::size_t>(t)];
            const int r = static_cast<int>(std::lround((rho + diag) / params.rho_step));
            ++acc[static_cast<std::size_t>(t) * n_rho + r];
        }
    }

    struct Peak {
        int votes, t, r;
    };
    std::vector<Peak> peaks;
    for (int t = 0; t < n_theta; ++t)
        for (int r = 0; r < n_rho; ++r) {
            const int v = acc[static_cast<std::size_t>(t) * n_rho + r];
            if (v < params.min_votes) continue;
            bool is_max = true;
            for (int dt = -1; dt <= 1 && is_max; ++dt)
                for (int dr = -1; dr <= 1 && is_max; ++dr) {
                    if (dt == 0 && dr == 0) continue;
                    int tt = t + dt, rr = r + dr;
                    if (tt < 0 || tt >= n_theta) {  // theta wraps with rho negated
                        tt = (tt + n_theta) % n_theta;
                        rr = n_rho - 1 - rr;
                    }
                    if (rr < 0 || rr >= n_rho) continue;
                    const int o = acc[static_cast<std::size_t>(tt) * n_rho + rr];
                    // Plateaus keep their first cell in scan order.
                    if (o > v || (o == v && (tt < t || (tt == t && rr < r)))) is_max = false;
                }
            if (is_max) peaks.push_back({v, t, r});
        }
    std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.votes > b.votes; });

    const Point2 centre{0.5 * width, 0.5 * height};
    const double max_angle = params.duplicate_angle_deg * std::numbers::pi / 180.0;
    std::vector<Line> lines;
    for (const Peak& pk : peaks) {
        const Line l{pk.t * params.theta_step_deg * std::numbers::pi / 180.0, pk.r * params.rho_step - diag, pk.votes};
        bool dup = false;
        for (const Line& o : lines) dup = dup || detail::same_side(o, l, centre, max_angle, params.duplicate_distance);
        if (dup) continue;
        lines.push_back(l);
        if (lines.size() == max_lines) break;
    }
    return lines;
}

/// Orders four points TL, TR, BR, BL (clockwise on screen, starting at the
/// corner with the smallest x + y).
inline Quad order_corners(std::array<Point2, 4> pts) {
    const Point2 c = (pts[0] + pts[1] + pts[2] + pts[3]) * 0.25;
    std::sort(pts.begin(), pts.end(), [&](const Point2& a, const Point2& b) {
        return std::atan2(a.y - c.y, a.x - c.x) < std::atan2(b.y - c.y, b.x - c.x);
    });
    std::size_t first = 0;
    for (std::size_t i = 1; i < 4; ++i)
        if (pts[i].x + pts[i].y < pts[first].x + pts[first].y) first = i;
    Quad q;
    for (std::size_t i = 0; i < 4; ++i) q.corners[i] = pts[(first + i) % 4];
    return q;
}

/// Quad from the outer contour of a binary screen mask.
inline std::optional<Quad> quad_from_contour(const std::vector<PixelPoint>& contour, int width, int height,
                                             const QuadDetectionParams& params = {}) {
    if (contour.size() < 4) return std::nullopt;
    const std::vector<Line> lines = hough_lines(contour, width, height, params, 4);
    if (lines.size() < 4) return std::nullopt;

    Point2 centroid{};
    for (const PixelPoint& p : contour) centroid = centroid + Point2{p.x + 0.5, p.y + 0.5};
    centroid = centroid * (1.0 / static_cast<double>(contour.size()));

    // Refine each side by a TLS fit to the nearby contour, then push it half a
    // pixel outward: contour pixel centres sit half a pixel inside the edge.
    std::array<Line, 4> sides{};
    for (std::size_t s = 0; s < 4; ++s) {
        Line l = lines[s];
        for (int iter = 0; iter < 3; ++iter) {
            std::vector<Point2> near;
            for (const PixelPoint& p : contour) {
                const Point2 q{p.x + 0.5, p.y + 0.5};
                if (std::abs(l.signed_distance(q)) <= params.fit_band) near.push_back(q);
            }
            const auto fit = detail::fit_line(near);
            if (!fit) break;
            l = *fit;
        }
        if (l.signed_distance(centroid) > 0) {
            l.theta += std::numbers::pi;
            l.rho = -l.rho;
        }
        l.rho += 0.5;
        sides[s] = l;
    }

    // Pair opposite sides: the partition whose pairs are most nearly parallel.
    static constexpr std::array<std::array<int, 4>, 3> partitions{{{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}}};
    std::size_t best = 0;
    double best_gap = 1e9;
    for (std::size_t p = 0; p < 3; ++p) {
        const auto& k = partitions[p];
        const double gap = detail::angle_gap(sides[k[0]].theta, sides[k[1]].theta) +
                           detail::angle_gap(sides[k[2]].theta, sides[k[3]].theta);
        if (gap < best_gap) {
            best_gap = gap;
            best = p;
        }
    }
    const auto& k = partitions[best];
    std::array<Point2, 4> corners{};
    std::size_t n = 0;
    for (int a : {k[0], k[1]})
        for (int b : {k[2], k[3]}) {
            const auto pt = detail::intersect(sides[static_cast<std::size_t>(a)], sides[static_cast<std::size_t>(b)]);
            if (!pt) return std::nullopt;
            corners[n++] = *pt;
        }
    const Quad q = order_corners(corners);
    if (!q.is_convex() || q.signed_area() < params.min_area_fraction * width * height) return std::nullopt;
    for (const Point2& c : q.corners)
        if (c.x < -0.5 * width || c.x > 1.5 * width || c.y < -0.5 * height || c.y > 1.5 * height) return std::nullopt;
    return q;
}

/// Screen quad in the combined accumulator plane, or nullopt when no
/// plausible quad exists.
inline std::optional<Quad> detect_frame_quad(const Plane<float>& combined, const QuadDetectionParams& params = {}) {
    const auto [lo, hi] = std::minmax_element(combined.data().begin(), combined.data().end());
    if (!(*hi > *lo)) return std::nullopt;
    const Plane<std::uint8_t> mask =
        largest_component(morph_close(binarize(combined, otsu_threshold(combined)), params.close_size));
    return quad_from_contour(outer_contour(mask), combined.width(), combined.height(), params);
}

/// Resamples `src` so the quad maps onto a width x height rectangle.
inline Plane<float> correct_perspective(const Plane<float>& src, const Quad& q, int width = kFrameWidth,
                                        int height = kFrameHeight) {
    const Homography rect_to_src = Homography::rect_to_quad(width, height, q);
    Plane<float> out(width, height);
    parallel_for(0, static_cast<std::size_t>(height), [&](std::size_t yy) {
        const int y = static_cast<int>(yy);
        for (int x = 0; x < width; ++x) {
            const Point2 s = rect_to_src.apply({x + 0.5, y + 0.5});
            out.at(x, y) = static_cast<float>(sample_bilinear(src, s.x, s.y));
        }
    });
    return out;
}

} // namespace revelio
