#pragma once

// Random instance generators and brute-force oracles shared by the tests.
// The oracles deliberately avoid the library's solvers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "mmfield/mmfield.hpp"

namespace testsupport {

using namespace mmfield;

constexpr double inf = std::numeric_limits<double>::infinity();

/// Random field on n points. Domain distance = Euclidean distance of random
/// planar points plus the pulled-back value distance, so the value map is
/// 1-Lipschitz by construction. Values live in ℝ^dim.
inline MetricField random_field(Rng& rng, std::size_t n, std::size_t dim = 1, double spread = 1.0) {
    auto space = TargetSpace::euclidean(dim);
    std::vector<std::array<double, 2>> pos(n);
    std::vector<BPoint> vals;
    for (auto& p : pos) p = {rng.uniform(0.0, spread), rng.uniform(0.0, spread)};
    for (std::size_t i = 0; i < n; ++i) {
        Coords c(dim);
        for (auto& v : c) v = rng.uniform(-0.5 * spread, 0.5 * spread);
        vals.emplace_back(std::move(c));
    }
    DenseMatrix d(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) d(i, j) = std::hypot(pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]) + space->distance(vals[i], vals[j]);
    return MetricField(space, std::move(d), std::move(vals));
}

/// Same construction over a shared explicit finite target space.
inline MetricField random_field_explicit(Rng& rng, std::size_t n, const TargetSpacePtr& space) {
    std::vector<BPoint> vals;
    for (std::size_t i = 0; i < n; ++i) vals.push_back(BPoint::index(rng.below(space->size())));
    DenseMatrix d(n, n);
    std::vector<std::array<double, 2>> pos(n);
    for (auto& p : pos) p = {rng.uniform(), rng.uniform()};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) d(i, j) = std::hypot(pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]) + space->distance(vals[i], vals[j]);
    return MetricField(space, std::move(d), std::move(vals));
}

/// Explicit finite metric from random planar points.
inline TargetSpacePtr random_explicit_space(Rng& rng, std::size_t nb) {
    std::vector<std::array<double, 2>> pos(nb);
    for (auto& p : pos) p = {rng.uniform(), rng.uniform()};
    DenseMatrix m(nb, nb);
    for (std::size_t i = 0; i < nb; ++i)
        for (std::size_t j = 0; j < nb; ++j) m(i, j) = std::hypot(pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]);
    return TargetSpace::explicit_metric(std::move(m));
}

inline std::vector<double> random_weights(Rng& rng, std::size_t n) {
    std::vector<double> w(n);
    double s = 0.0;
    for (auto& v : w) s += (v = 0.1 + rng.uniform());
    for (auto& v : w) v /= s;
    return w;
}

inline MMField random_mm(Rng& rng, std::size_t n, bool uniform = false, std::size_t dim = 1) {
    auto f = random_field(rng, n, dim);
    if (uniform) return MMField::uniform(std::move(f));
    return MMField(std::move(f), random_weights(rng, n));
}

inline MetricField singleton(double value) {
    return MetricField(TargetSpace::euclidean(1), DenseMatrix(1, 1), {BPoint{value}});
}

inline MMField two_point(double gap, double v0 = 0.0, double v1 = 0.0) {
    return MMField::uniform(
        MetricField(TargetSpace::euclidean(1), DenseMatrix::from_rows({{0.0, gap}, {gap, 0.0}}), {BPoint{v0}, BPoint{v1}}));
}

// ---------------------------------------------------------------------------
// Oracles.

inline double value_gap(const MetricField& x, std::size_t i, const MetricField& y, std::size_t j) {
    return x.space()->distance(x.value(i), y.value(j));
}

/// max(sup |Δd|, 2 sup d_B) over a pair list, written out directly.
inline double brute_distortion(const MetricField& x, const MetricField& y, const std::vector<IndexPair>& r) {
    double best = 0.0;
    for (const auto& [a, b] : r) {
        best = std::max(best, 2.0 * value_gap(x, a, y, b));
        for (const auto& [c, e] : r) best = std::max(best, std::abs(x.d(a, c) - y.d(b, e)));
    }
    return best;
}

/// Calls f on every nonempty subset of the n*m pairs (bit k = pair (k/m, k%m)).
inline void for_each_pair_subset(std::size_t n, std::size_t m, const std::function<void(std::uint32_t, const std::vector<IndexPair>&)>& f) {
    const std::size_t k = n * m;
    std::vector<IndexPair> pairs;
    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
        pairs.clear();
        for (std::size_t b = 0; b < k; ++b)
            if (mask >> b & 1u) pairs.emplace_back(b / m, b % m);
        f(mask, pairs);
    }
}

/// d_GH by enumerating every correspondence (n*m <= 16).
inline double brute_gh(const MetricField& x, const MetricField& y) {
    double best = inf;
    for_each_pair_subset(x.size(), y.size(), [&](std::uint32_t, const std::vector<IndexPair>& r) {
        std::vector<char> hx(x.size(), 0), hy(y.size(), 0);
        for (const auto& [a, b] : r) hx[a] = hy[b] = 1;
        if (std::count(hx.begin(), hx.end(), 0) || std::count(hy.begin(), hy.end(), 0)) return;
        best = std::min(best, 0.5 * brute_distortion(x, y, r));
    });
    return best;
}

/// Largest mass a coupling of (a, b) can put on the pair set r, by the
/// deficiency form of Hall's theorem: 1 - max_A (a(A) - b(r(A))).
inline double hall_max_mass(const std::vector<double>& a, const std::vector<double>& b, const std::vector<IndexPair>& r) {
    const std::size_t n = a.size();
    double worst = 0.0;
    for (std::uint32_t sub = 0; sub < (1u << n); ++sub) {
        double ma = 0.0;
        std::vector<char> hit(b.size(), 0);
        for (std::size_t i = 0; i < n; ++i)
            if (sub >> i & 1u) ma += a[i];
        for (const auto& [i, j] : r)
            if (sub >> i & 1u) hit[j] = 1;
        double mb = 0.0;
        for (std::size_t j = 0; j < b.size(); ++j)
            if (hit[j]) mb += b[j];
        worst = std::max(worst, ma - mb);
    }
    return 1.0 - worst;
}

/// d_GP = min(1, min_R max(dis(R)/2, 1 - M(R))) over all pair sets R.
inline double brute_gp(const MMField& x, const MMField& y) {
    double best = 1.0;
    for_each_pair_subset(x.size(), y.size(), [&](std::uint32_t, const std::vector<IndexPair>& r) {
        const double m = hall_max_mass(x.weights(), y.weights(), r);
        best = std::min(best, std::max(0.5 * brute_distortion(x.field(), y.field(), r), 1.0 - m));
    });
    return best;
}

/// d_GW,inf by enumerating support patterns: the cheapest pattern that can
/// carry a full coupling (Hall's condition with no deficiency).
inline double brute_gw_inf(const MMField& x, const MMField& y) {
    double best = inf;
    for_each_pair_subset(x.size(), y.size(), [&](std::uint32_t, const std::vector<IndexPair>& r) {
        if (hall_max_mass(x.weights(), y.weights(), r) < 1.0 - 1e-12) return;
        best = std::min(best, 0.5 * brute_distortion(x.field(), y.field(), r));
    });
    return best;
}

/// gw objective max(½ (ΣΣ |Δ|^p μμ)^{1/p}, (Σ d_B^p μ)^{1/p}) written out.
inline double brute_gw_objective(const MMField& x, const MMField& y, const std::vector<double>& mu, double p) {
    const std::size_t n = x.size(), m = y.size();
    double a = 0.0, l = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const double w = mu[i * m + j];
            if (w <= 0.0) continue;
            l += std::pow(value_gap(x.field(), i, y.field(), j), p) * w;
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t q = 0; q < m; ++q) {
                    const double w2 = mu[k * m + q];
                    if (w2 > 0.0) a += std::pow(std::abs(x.field().d(i, k) - y.field().d(j, q)), p) * w * w2;
                }
        }
    return std::max(0.5 * std::pow(a, 1.0 / p), std::pow(l, 1.0 / p));
}

/// Completes free entries (all but the last row and column) into a coupling;
/// empty when some completed entry is negative.
inline bool complete_free(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& free,
                          std::vector<double>& mu) {
    const std::size_t n = a.size(), m = b.size();
    mu.assign(n * m, 0.0);
    std::size_t k = 0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = 0; j + 1 < m; ++j) mu[i * m + j] = free[k++];
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j + 1 < m; ++j) s += mu[i * m + j];
        mu[i * m + m - 1] = a[i] - s;
    }
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) s += mu[i * m + j];
        mu[(n - 1) * m + j] = b[j] - s;
    }
    for (double v : mu)
        if (v < -1e-13) return false;
    for (double& v : mu) v = std::max(v, 0.0);
    return true;
}

/// Dense grid search over the coupling polytope with step 1/steps on each
/// free entry (scaled by its marginal cap), then pattern-search polish of
/// the best grid points (coordinate, pair and random directions).
inline double brute_gw(const MMField& x, const MMField& y, double p, std::size_t steps) {
    const auto& a = x.weights();
    const auto& b = y.weights();
    const std::size_t n = a.size(), m = b.size();
    const std::size_t dims = (n - 1) * (m - 1);
    std::vector<double> cap;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = 0; j + 1 < m; ++j) cap.push_back(std::min(a[i], b[j]));
    std::vector<double> mu;
    auto eval = [&](const std::vector<double>& fr) {
        if (!complete_free(a, b, fr, mu)) return inf;
        return brute_gw_objective(x, y, mu, p);
    };
    std::vector<std::pair<double, std::vector<double>>> best;  // a few best grid points
    std::vector<std::size_t> idx(dims, 0);
    std::vector<double> fr(dims);
    while (true) {
        for (std::size_t d = 0; d < dims; ++d) fr[d] = cap[d] * static_cast<double>(idx[d]) / static_cast<double>(steps);
        const double v = eval(fr);
        if (v < inf) {
            best.emplace_back(v, fr);
            if (best.size() > 64) {
                std::nth_element(best.begin(), best.begin() + 8, best.end(),
                                 [](const auto& l, const auto& r) { return l.first < r.first; });
                best.resize(8);
            }
        }
        std::size_t d = 0;
        while (d < dims && ++idx[d] > steps) idx[d++] = 0;
        if (d == dims) break;
    }
    std::sort(best.begin(), best.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    if (best.size() > 8) best.resize(8);
    double result = inf;
    Rng dir_rng(0x9e11);
    for (auto [v, pt] : best) {
        double h = 1.0 / static_cast<double>(steps);
        while (h > 1e-9) {
            bool improved = false;
            for (std::size_t d = 0; d < dims; ++d)
                for (double sgn : {1.0, -1.0}) {
                    auto q = pt;
                    q[d] += sgn * h * cap[d];
                    const double w = eval(q);
                    if (w < v - 1e-15) {
                        v = w;
                        pt = q;
                        improved = true;
                    }
                }
            // Pairwise moves let the search slide along polytope faces.
            for (std::size_t d = 0; d < dims && !improved; ++d)
                for (std::size_t e = d + 1; e < dims && !improved; ++e)
                    for (double s1 : {1.0, -1.0})
                        for (double s2 : {1.0, -1.0}) {
                            auto q = pt;
                            q[d] += s1 * h * cap[d];
                            q[e] += s2 * h * cap[e];
                            const double w = eval(q);
                            if (w < v - 1e-15) {
                                v = w;
                                pt = q;
                                improved = true;
                            }
                        }
            // Random directions follow the kink where the two terms balance.
            for (int k = 0; k < 24 && !improved; ++k) {
                auto q = pt;
                double norm = 0.0;
                std::vector<double> dir(dims);
                for (auto& c : dir) {
                    c = dir_rng.uniform(-1.0, 1.0);
                    norm += c * c;
                }
                norm = std::sqrt(norm);
                for (std::size_t d = 0; d < dims; ++d) q[d] += h * cap[d] * dir[d] / norm;
                const double w = eval(q);
                if (w < v - 1e-15) {
                    v = w;
                    pt = q;
                    improved = true;
                }
            }
            if (!improved) h *= 0.5;
        }
        result = std::min(result, v);
    }
    if (dims == 0) result = eval({});
    return result;
}

/// Min over permutations of a cost (uniform n+n transport is attained at a
/// permutation by Birkhoff's theorem).
inline double brute_assignment(const DenseMatrix& c, double p) {
    std::vector<std::size_t> perm(c.rows());
    std::iota(perm.begin(), perm.end(), 0);
    double best = inf;
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i) s += std::pow(c(i, perm[i]), p);
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::pow(best / static_cast<double>(c.rows()), 1.0 / p);
}

inline double brute_bottleneck(const DenseMatrix& c) {
    std::vector<std::size_t> perm(c.rows());
    std::iota(perm.begin(), perm.end(), 0);
    double best = inf;
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i) s = std::max(s, c(i, perm[i]));
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

inline DenseMatrix random_cost(Rng& rng, std::size_t n, std::size_t m) {
    DenseMatrix c(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) c(i, j) = rng.uniform(0.0, 2.0);
    return c;
}

}  // namespace testsupport
