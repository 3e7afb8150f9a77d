#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mmfield/target_space.hpp"

namespace mmfield {

struct EnclosingBall {
    Coords center;
    double radius = 0.0;
};

namespace detail {

inline double sq_dist(const Coords& a, const Coords& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

/// Smallest ball with every point of R on its boundary (circumcentre in the
/// affine hull). Falls back to the diameter ball of R when the points are
/// affinely dependent.
inline EnclosingBall boundary_ball(const std::vector<const Coords*>& r, std::size_t dim) {
    if (r.empty()) return {Coords(dim, 0.0), -1.0};
    if (r.size() == 1) return {*r[0], 0.0};
    const Coords& o = *r[0];
    const std::size_t k = r.size() - 1;
    // Solve G λ = h with G_ij = 2 (p_i - o)·(p_j - o), h_i = |p_i - o|^2.
    std::vector<std::vector<double>> g(k, std::vector<double>(k + 1, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            double dot = 0.0;
            for (std::size_t c = 0; c < dim; ++c) dot += ((*r[i + 1])[c] - o[c]) * ((*r[j + 1])[c] - o[c]);
            g[i][j] = 2.0 * dot;
        }
        g[i][k] = sq_dist(*r[i + 1], o);
    }
    bool singular = false;
    for (std::size_t col = 0; col < k && !singular; ++col) {
        std::size_t piv = col;
        for (std::size_t row = col + 1; row < k; ++row)
            if (std::abs(g[row][col]) > std::abs(g[piv][col])) piv = row;
        if (std::abs(g[piv][col]) < 1e-14 * (1.0 + std::abs(g[col][k]))) {
            singular = true;
            break;
        }
        std::swap(g[piv], g[col]);
        for (std::size_t row = 0; row < k; ++row) {
            if (row == col) continue;
            const double f = g[row][col] / g[col][col];
            for (std::size_t c = col; c <= k; ++c) g[row][c] -= f * g[col][c];
        }
    }
    if (singular) {
        // Diameter ball of the boundary set.
        std::size_t bi = 0, bj = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < r.size(); ++i)
            for (std::size_t j = i + 1; j < r.size(); ++j)
                if (sq_dist(*r[i], *r[j]) > best) {
                    best = sq_dist(*r[i], *r[j]);
                    bi = i;
                    bj = j;
                }
        Coords c(dim);
        for (std::size_t d = 0; d < dim; ++d) c[d] = 0.5 * ((*r[bi])[d] + (*r[bj])[d]);
        double rad = 0.0;
        for (const auto* p : r) rad = std::max(rad, std::sqrt(sq_dist(*p, c)));
        return {std::move(c), rad};
    }
    Coords c = o;
    for (std::size_t i = 0; i < k; ++i) {
        const double lambda = g[i][k] / g[i][i];
        for (std::size_t d = 0; d < dim; ++d) c[d] += lambda * ((*r[i + 1])[d] - o[d]);
    }
    double rad = 0.0;
    for (const auto* p : r) rad = std::max(rad, std::sqrt(sq_dist(*p, c)));
    return {std::move(c), rad};
}

inline bool inside(const EnclosingBall& b, const Coords& p) {
    if (b.radius < 0.0) return false;
    return std::sqrt(sq_dist(b.center, p)) <= b.radius * (1.0 + 1e-12) + 1e-12;
}

inline EnclosingBall welzl(std::vector<const Coords*>& pts, std::size_t n, std::vector<const Coords*>& boundary, std::size_t dim) {
    if (n == 0 || boundary.size() == dim + 1) return boundary_ball(boundary, dim);
    const Coords* p = pts[n - 1];
    EnclosingBall b = welzl(pts, n - 1, boundary, dim);
    if (inside(b, *p)) return b;
    boundary.push_back(p);
    b = welzl(pts, n - 1, boundary, dim);
    boundary.pop_back();
    return b;
}

}  // namespace detail

/// Exact minimum enclosing ball of a Euclidean point set (Welzl, fixed
/// processing order so results are reproducible).
inline EnclosingBall min_enclosing_ball(const std::vector<Coords>& pts) {
    if (pts.empty()) throw std::invalid_argument("min_enclosing_ball: empty set");
    const std::size_t dim = pts.front().size();
    std::vector<const Coords*> uniq;
    for (const auto& p : pts) {
        if (p.size() != dim) throw std::invalid_argument("min_enclosing_ball: mixed dimensions");
        if (std::none_of(uniq.begin(), uniq.end(), [&](const Coords* q) { return *q == p; })) uniq.push_back(&p);
    }
    if (dim == 1) {
        double lo = (*uniq[0])[0], hi = lo;
        for (const auto* p : uniq) {
            lo = std::min(lo, (*p)[0]);
            hi = std::max(hi, (*p)[0]);
        }
        return {Coords{0.5 * (lo + hi)}, 0.5 * (hi - lo)};
    }
    std::vector<const Coords*> boundary;
    return detail::welzl(uniq, uniq.size(), boundary, dim);
}

/// rad(C) = inf over b in B of max over c in C of d_B(b, c). Euclidean B:
/// minimum enclosing ball; explicit B: minimum over its points.
inline double radius_in_B(const TargetSpace& space, const std::vector<BPoint>& pts) {
    if (pts.empty()) throw std::invalid_argument("radius_in_B: empty set");
    if (space.is_euclidean()) {
        std::vector<Coords> c;
        c.reserve(pts.size());
        for (const auto& p : pts) {
            if (!space.admits(p)) throw std::invalid_argument("radius_in_B: point not in target space");
            c.push_back(p.coords());
        }
        return min_enclosing_ball(c).radius;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < space.size(); ++b) {
        double worst = 0.0;
        for (const auto& p : pts) worst = std::max(worst, space.distance(BPoint::index(b), p));
        best = std::min(best, worst);
    }
    return best;
}

}  // namespace mmfield
