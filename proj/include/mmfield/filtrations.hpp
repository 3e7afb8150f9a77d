#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mmfield/field.hpp"
#include "mmfield/miniball.hpp"

namespace mmfield {

/// Parameter grid start, start + step, ... up to stop (inclusive within 1e-9 steps).
inline std::vector<double> make_grid(double start, double stop, double step) {
    if (!(step > 0.0) || stop < start) throw std::invalid_argument("grid needs step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> g(count);
    for (std::size_t k = 0; k < count; ++k) g[k] = start + static_cast<double>(k) * step;
    return g;
}

/// B_{r,s}(y): points within domain distance r and value distance s of y.
inline std::vector<std::size_t> ball_rs(const MetricField& amb, std::size_t y, double r, double s) {
    if (y >= amb.size()) throw std::out_of_range("ball_rs: index out of range");
    std::vector<std::size_t> out;
    for (std::size_t z = 0; z < amb.size(); ++z)
        if (amb.d(y, z) <= r && amb.value_distance(y, z) <= s) out.push_back(z);
    return out;
}

/// N^{r,s}(X): points y with some x in X, d(x,y) <= r and d_B(π x, π y) <= s.
inline std::vector<std::size_t> nbhd_set(const MetricField& amb, const std::vector<std::size_t>& x, double r, double s) {
    std::vector<std::size_t> out;
    for (std::size_t y = 0; y < amb.size(); ++y)
        for (std::size_t p : x)
            if (amb.d(p, y) <= r && amb.value_distance(p, y) <= s) {
                out.push_back(y);
                break;
            }
    return out;
}

/// μ(B_{r,s}(y)) for every y.
inline std::vector<double> ball_masses(const MMField& amb, double r, double s) {
    const MetricField& f = amb.field();
    const auto supp = amb.support();
    std::vector<double> mass(f.size(), 0.0);
    for (std::size_t y = 0; y < f.size(); ++y)
        for (std::size_t z : supp)
            if (f.d(y, z) <= r && f.value_distance(y, z) <= s) mass[y] += amb.weight(z);
    return mass;
}

/// N^{r,s,t}: points whose (r,s)-ball carries mass >= 1 - t.
inline std::vector<std::size_t> nbhd3_set(const MMField& amb, double r, double s, double t) {
    const auto mass = ball_masses(amb, r, s);
    std::vector<std::size_t> out;
    for (std::size_t y = 0; y < mass.size(); ++y)
        if (mass[y] >= 1.0 - t - 1e-12) out.push_back(y);
    return out;
}

/// Membership of ambient points over a product grid of parameters. Stored
/// as, for each point and each cell of the leading axes, the first index on
/// the last axis where the point is a member (the last axis size if never).
class GradedSubsetMask {
public:
    GradedSubsetMask() = default;
    GradedSubsetMask(std::vector<std::vector<double>> axes, std::size_t points)
        : axes_(std::move(axes)), points_(points) {
        if (axes_.size() < 2) throw std::invalid_argument("mask needs at least two axes");
        first_.assign(lead_cells() * points_, static_cast<std::uint32_t>(axes_.back().size()));
    }

    const std::vector<std::vector<double>>& axes() const noexcept { return axes_; }
    std::size_t points() const noexcept { return points_; }
    std::size_t lead_cells() const {
        std::size_t c = 1;
        for (std::size_t a = 0; a + 1 < axes_.size(); ++a) c *= axes_[a].size();
        return c;
    }
    std::size_t last_size() const { return axes_.back().size(); }

    std::size_t lead_index(const std::vector<std::size_t>& lead) const {
        std::size_t k = 0;
        for (std::size_t a = 0; a + 1 < axes_.size(); ++a) k = k * axes_[a].size() + lead[a];
        return k;
    }

    std::uint32_t first(std::size_t lead, std::size_t point) const { return first_[lead * points_ + point]; }
    void set_first(std::size_t lead, std::size_t point, std::uint32_t v) { first_[lead * points_ + point] = v; }

    /// Membership at a full cell (one index per axis).
    bool contains(std::size_t point, const std::vector<std::size_t>& cell) const {
        if (cell.size() != axes_.size()) throw std::invalid_argument("cell arity differs from mask axes");
        return cell.back() >= first(lead_index(cell), point);
    }

    std::vector<std::size_t> members(const std::vector<std::size_t>& cell) const {
        std::vector<std::size_t> out;
        for (std::size_t y = 0; y < points_; ++y)
            if (contains(y, cell)) out.push_back(y);
        return out;
    }

    /// Membership flattened cell-major (last axis fastest), point-minor.
    std::vector<bool> flatten() const {
        std::vector<bool> bits;
        bits.reserve(lead_cells() * last_size() * points_);
        for (std::size_t l = 0; l < lead_cells(); ++l)
            for (std::size_t q = 0; q < last_size(); ++q)
                for (std::size_t y = 0; y < points_; ++y) bits.push_back(q >= first(l, y));
        return bits;
    }

private:
    std::vector<std::vector<double>> axes_;
    std::size_t points_ = 0;
    std::vector<std::uint32_t> first_;
};

namespace detail {

inline std::size_t first_at_least(const std::vector<double>& grid, double v) {
    return static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), v) - grid.begin());
}

}  // namespace detail

/// Field neighbourhood bifiltration of X inside the ambient field, on the
/// (r, s) grid.
inline GradedSubsetMask nbhd_bifiltration(const std::vector<std::size_t>& x, const MetricField& amb,
                                          const std::vector<double>& r_grid, const std::vector<double>& s_grid) {
    if (x.empty()) throw std::invalid_argument("nbhd_bifiltration: empty reference set");
    for (std::size_t p : x)
        if (p >= amb.size()) throw std::out_of_range("nbhd_bifiltration: index out of range");
    GradedSubsetMask mask({r_grid, s_grid}, amb.size());
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> best(r_grid.size());
    for (std::size_t y = 0; y < amb.size(); ++y) {
        std::fill(best.begin(), best.end(), inf);
        for (std::size_t p : x) {
            const std::size_t k = detail::first_at_least(r_grid, amb.d(p, y));
            if (k < r_grid.size()) best[k] = std::min(best[k], amb.value_distance(p, y));
        }
        for (std::size_t k = 1; k < r_grid.size(); ++k) best[k] = std::min(best[k], best[k - 1]);
        for (std::size_t k = 0; k < r_grid.size(); ++k)
            mask.set_first(k, y, static_cast<std::uint32_t>(std::isinf(best[k]) ? s_grid.size() : detail::first_at_least(s_grid, best[k])));
    }
    return mask;
}

/// mm-field neighbourhood trifiltration on the (r, s, t) grid.
inline GradedSubsetMask nbhd_trifiltration(const MMField& amb, const std::vector<double>& r_grid,
                                           const std::vector<double>& s_grid, const std::vector<double>& t_grid) {
    const MetricField& f = amb.field();
    const auto supp = amb.support();
    if (supp.empty()) throw std::invalid_argument("nbhd_trifiltration: weights have empty support");
    GradedSubsetMask mask({r_grid, s_grid, t_grid}, f.size());
    const std::size_t R = r_grid.size(), S = s_grid.size();
    std::vector<double> h(R * S);
    for (std::size_t y = 0; y < f.size(); ++y) {
        std::fill(h.begin(), h.end(), 0.0);
        for (std::size_t z : supp) {
            const std::size_t k = detail::first_at_least(r_grid, f.d(y, z));
            const std::size_t l = detail::first_at_least(s_grid, f.value_distance(y, z));
            if (k < R && l < S) h[k * S + l] += amb.weight(z);
        }
        for (std::size_t k = 0; k < R; ++k)
            for (std::size_t l = 0; l < S; ++l) {
                double v = h[k * S + l];
                if (k > 0) v += h[(k - 1) * S + l];
                if (l > 0) v += h[k * S + l - 1];
                if (k > 0 && l > 0) v -= h[(k - 1) * S + l - 1];
                h[k * S + l] = v;
            }
        for (std::size_t k = 0; k < R; ++k)
            for (std::size_t l = 0; l < S; ++l) {
                const double need = 1.0 - h[k * S + l] - 1e-12;
                mask.set_first(k * S + l, y, static_cast<std::uint32_t>(detail::first_at_least(t_grid, need)));
            }
    }
    return mask;
}

struct InterleavingReport {
    double shift = 0.0;      ///< steps * step, or +inf
    std::size_t steps = 0;
    double step = 0.0;       ///< common grid step
    double half_step_error = 0.0;
};

namespace detail {

inline double uniform_step(const std::vector<double>& axis) {
    if (axis.size() < 2) throw std::invalid_argument("interleaving needs at least two grid values per axis");
    const double step = axis[1] - axis[0];
    for (std::size_t k = 2; k < axis.size(); ++k)
        if (std::abs((axis[k] - axis[k - 1]) - step) > 1e-9 * std::max(1.0, step))
            throw std::invalid_argument("interleaving needs uniformly spaced grids");
    return step;
}

/// a(cell) ⊆ b(cell + k on every axis) wherever the shifted cell is in range.
inline bool shifted_inclusion(const GradedSubsetMask& a, const GradedSubsetMask& b, std::size_t k) {
    const auto& axes = a.axes();
    const std::size_t lead_axes = axes.size() - 1;
    std::vector<std::size_t> lead(lead_axes, 0);
    const std::size_t last = a.last_size();
    while (true) {
        bool in_range = true;
        std::vector<std::size_t> shifted(lead_axes);
        for (std::size_t d = 0; d < lead_axes; ++d) {
            shifted[d] = lead[d] + k;
            if (shifted[d] >= axes[d].size()) in_range = false;
        }
        if (in_range) {
            const std::size_t la = a.lead_index(lead), lb = b.lead_index(shifted);
            for (std::size_t y = 0; y < a.points(); ++y) {
                const std::size_t fa = a.first(la, y);
                if (fa + k < last && b.first(lb, y) > fa + k) return false;
            }
        }
        std::size_t d = lead_axes;
        while (d > 0) {
            --d;
            if (++lead[d] < axes[d].size()) break;
            lead[d] = 0;
            if (d == 0) return true;
        }
        if (lead_axes == 0) return true;
    }
}

}  // namespace detail

/// Least grid shift k·step making each mask contained in the other shifted
/// by k on every axis; +inf when no shift inside the window works.
inline InterleavingReport inclusion_interleaving_shift(const GradedSubsetMask& m1, const GradedSubsetMask& m2) {
    if (m1.points() != m2.points()) throw std::invalid_argument("masks differ in ambient size");
    if (m1.axes().size() != m2.axes().size()) throw std::invalid_argument("masks differ in arity");
    double step = -1.0;
    std::size_t longest = 0;
    for (std::size_t a = 0; a < m1.axes().size(); ++a) {
        const auto& u = m1.axes()[a];
        const auto& v = m2.axes()[a];
        if (u.size() != v.size()) throw std::invalid_argument("grid mismatch");
        for (std::size_t k = 0; k < u.size(); ++k)
            if (std::abs(u[k] - v[k]) > 1e-12) throw std::invalid_argument("grid mismatch");
        const double s = detail::uniform_step(u);
        if (step < 0.0) step = s;
        else if (std::abs(s - step) > 1e-9 * std::max(1.0, step)) throw std::invalid_argument("grid steps differ across axes");
        longest = std::max(longest, u.size());
    }
    InterleavingReport rep;
    rep.step = step;
    rep.half_step_error = 0.5 * step;
    // A shift of `longest` or more pushes every cell out of the window and
    // holds vacuously.
    for (std::size_t k = 0; k < longest; ++k)
        if (detail::shifted_inclusion(m1, m2, k) && detail::shifted_inclusion(m2, m1, k)) {
            rep.steps = k;
            rep.shift = static_cast<double>(k) * step;
            return rep;
        }
    rep.steps = longest;
    rep.shift = std::numeric_limits<double>::infinity();
    return rep;
}

/// A simplex with its minimal appearance grade (diam, 2·rad).
struct GradedSimplex {
    std::vector<std::size_t> vertices;
    double diam = 0.0;
    double two_rad = 0.0;
};

struct GradedComplex {
    std::vector<GradedSimplex> simplices;
    bool truncated = false;

    /// Simplices present at (r, s).
    std::vector<std::vector<std::size_t>> at(double r, double s) const {
        std::vector<std::vector<std::size_t>> out;
        for (const auto& sx : simplices)
            if (sx.diam <= r && sx.two_rad <= s) out.push_back(sx.vertices);
        return out;
    }
};

inline double subset_diameter(const MetricField& x, const std::vector<std::size_t>& a) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) d = std::max(d, x.d(a[i], a[j]));
    return d;
}

inline double subset_value_radius(const MetricField& x, const std::vector<std::size_t>& a) {
    std::vector<BPoint> pts;
    pts.reserve(a.size());
    for (std::size_t i : a) pts.push_back(x.value(i));
    return radius_in_B(*x.space(), pts);
}

namespace detail {

/// Depth-first enumeration of subsets (increasing vertex order) with
/// diam <= r_max and 2·rad <= s_max, up to max_size vertices. Sets
/// `truncated` when a subset at the size cap still extends.
inline void enumerate_vr(const MetricField& x, std::size_t max_size, double r_max, double s_max, bool& truncated,
                         const std::function<void(const GradedSimplex&)>& emit) {
    std::vector<std::size_t> cur;
    std::function<void(double)> rec = [&](double diam) {
        const std::size_t start = cur.empty() ? 0 : cur.back() + 1;
        for (std::size_t v = start; v < x.size(); ++v) {
            double d = diam;
            for (std::size_t u : cur) d = std::max(d, x.d(u, v));
            if (d > r_max) continue;
            cur.push_back(v);
            const double two_rad = 2.0 * subset_value_radius(x, cur);
            if (two_rad <= s_max) {
                if (cur.size() > max_size) {
                    truncated = true;
                } else {
                    emit({cur, d, two_rad});
                    rec(d);
                }
            }
            cur.pop_back();
        }
    };
    rec(0.0);
}

}  // namespace detail

/// Metric field Vietoris-Rips bifiltration: simplices of dimension <=
/// dim_cap with their minimal grade (diam, 2·rad) inside [0,r_max]x[0,s_max].
inline GradedComplex vr_bifiltration(const MetricField& x, std::size_t dim_cap, double r_max, double s_max) {
    GradedComplex c;
    bool unused = false;
    detail::enumerate_vr(x, dim_cap + 1, r_max, s_max, unused, [&](const GradedSimplex& s) {
        if (s.vertices.size() <= dim_cap + 1) c.simplices.push_back(s);
    });
    return c;
}

/// A vertex of the trifiltration complex: a subset with its constraints.
struct AdmissibleSubset {
    std::vector<std::size_t> vertices;
    std::uint64_t bits = 0;
    double diam = 0.0;
    double two_rad = 0.0;
    double mass = 0.0;
};

/// A chain A_0 ⊊ ... ⊊ A_k of admissible subsets with grade
/// (max diam, max 2·rad, 1 - min mass).
struct GradedChain {
    std::vector<std::size_t> subsets;  ///< indices into the subset list, increasing inclusion
    double diam = 0.0;
    double two_rad = 0.0;
    double t = 0.0;
};

struct GradedChainComplex {
    std::vector<AdmissibleSubset> subsets;
    std::vector<GradedChain> chains;
    bool truncated = false;

    std::vector<std::size_t> at(double r, double s, double t) const {
        std::vector<std::size_t> out;
        for (std::size_t c = 0; c < chains.size(); ++c)
            if (chains[c].diam <= r && chains[c].two_rad <= s && chains[c].t <= t + 1e-12) out.push_back(c);
        return out;
    }
};

struct TrifiltrationCaps {
    std::size_t subset_size = 8;
    std::size_t max_chains = 2'000'000;
};

/// mm-field Vietoris-Rips trifiltration as a chain complex on admissible
/// subsets (diam <= r_max, 2·rad <= s_max, 1 - mass <= t_max).
inline GradedChainComplex vr_trifiltration(const MMField& x, std::size_t dim_cap, double r_max, double s_max, double t_max,
                                           const TrifiltrationCaps& caps = {}) {
    if (x.size() > 64) throw std::invalid_argument("vr_trifiltration supports at most 64 points");
    GradedChainComplex out;
    detail::enumerate_vr(x.field(), caps.subset_size, r_max, s_max, out.truncated, [&](const GradedSimplex& s) {
        AdmissibleSubset a;
        a.vertices = s.vertices;
        a.diam = s.diam;
        a.two_rad = s.two_rad;
        for (std::size_t v : s.vertices) {
            a.bits |= std::uint64_t{1} << v;
            a.mass += x.weight(v);
        }
        if (1.0 - a.mass <= t_max + 1e-12) out.subsets.push_back(std::move(a));
    });
    // Order by size so chains are enumerated by strictly growing subsets.
    std::stable_sort(out.subsets.begin(), out.subsets.end(),
                     [](const AdmissibleSubset& l, const AdmissibleSubset& r) { return l.vertices.size() < r.vertices.size(); });
    const std::size_t n = out.subsets.size();
    std::vector<std::vector<std::size_t>> supersets(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && (out.subsets[i].bits & out.subsets[j].bits) == out.subsets[i].bits &&
                out.subsets[i].bits != out.subsets[j].bits)
                supersets[i].push_back(j);
    std::vector<std::size_t> chain;
    std::function<void()> rec = [&]() {
        if (out.chains.size() >= caps.max_chains) {
            out.truncated = true;
            return;
        }
        const auto& top = out.subsets[chain.back()];
        const auto& bottom = out.subsets[chain.front()];
        out.chains.push_back({chain, top.diam, top.two_rad, 1.0 - bottom.mass});
        if (chain.size() == dim_cap + 1) return;
        for (std::size_t j : supersets[chain.back()]) {
            chain.push_back(j);
            rec();
            chain.pop_back();
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        chain = {i};
        rec();
    }
    return out;
}

}  // namespace mmfield
