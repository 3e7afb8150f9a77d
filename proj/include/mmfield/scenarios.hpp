#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmfield/constructions.hpp"
#include "mmfield/field.hpp"
#include "mmfield/filtrations.hpp"
#include "mmfield/random.hpp"
#include "mmfield/transport.hpp"

namespace mmfield {

using Point2 = std::array<double, 2>;

/// Field on planar points with Euclidean domain distances and values in ℝ.
inline MetricField planar_field(const std::vector<Point2>& pos, const std::vector<double>& values) {
    if (pos.size() != values.size()) throw std::invalid_argument("planar_field: size mismatch");
    const std::size_t n = pos.size();
    DenseMatrix d(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = std::hypot(pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]);
            d(i, j) = v;
            d(j, i) = v;
        }
    std::vector<BPoint> vals;
    vals.reserve(n);
    for (double v : values) vals.emplace_back(Coords{v});
    return MetricField(TargetSpace::euclidean(1), std::move(d), std::move(vals));
}

// ---------------------------------------------------------------------------
// Two-circle scenario: a noisy, unevenly sampled pair of unit circles inside
// a regular grid, with a smooth scalar function on the plane.

struct TwoCircleScenario {
    std::vector<Point2> pos;          ///< ambient points: grid first, then samples
    std::vector<double> values;       ///< function values at every ambient point
    std::size_t grid_points = 0;
    std::vector<std::size_t> sample;  ///< ambient indices of the samples
    MMField ambient;                  ///< uniform measure on the samples
    double r = 0.8, s = 0.1, t = 0.99;
};

inline double two_circle_function(double x, double y) { return 0.5 * std::sin(1.3 * x) + 0.3 * y; }

inline std::vector<Point2> plane_grid(double x0, double x1, double y0, double y1, double step) {
    std::vector<Point2> g;
    const auto nx = static_cast<std::size_t>(std::floor((x1 - x0) / step + 1e-9)) + 1;
    const auto ny = static_cast<std::size_t>(std::floor((y1 - y0) / step + 1e-9)) + 1;
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) g.push_back({x0 + static_cast<double>(i) * step, y0 + static_cast<double>(j) * step});
    return g;
}

/// 200 samples from circles of radius 1 at (±1.5, 0); angles are skewed so
/// density varies along each circle, with radial noise of up to 0.08.
inline std::vector<Point2> two_circle_samples(std::uint64_t seed, std::size_t count = 200) {
    Rng rng(derive_seed(seed, 0x7c1));
    std::vector<Point2> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const bool left = rng.uniform() < 0.6;
        const double u = rng.uniform();
        const double theta = 2.0 * std::numbers::pi * std::pow(u, left ? 1.8 : 0.7);
        const double rad = 1.0 + rng.uniform(-0.08, 0.08);
        const double cx = left ? -1.5 : 1.5;
        out.push_back({cx + rad * std::cos(theta), rad * std::sin(theta)});
    }
    return out;
}

inline MMField ambient_with_samples(const std::vector<Point2>& pos, const std::vector<double>& values,
                                    const std::vector<std::size_t>& support) {
    std::vector<double> w(pos.size(), 0.0);
    for (std::size_t i : support) w[i] += 1.0 / static_cast<double>(support.size());
    return MMField(planar_field(pos, values), std::move(w));
}

inline TwoCircleScenario make_two_circle(std::uint64_t seed) {
    TwoCircleScenario sc;
    sc.pos = plane_grid(-3.0, 3.0, -1.5, 1.5, 0.12);
    sc.grid_points = sc.pos.size();
    for (const auto& p : two_circle_samples(seed)) {
        sc.sample.push_back(sc.pos.size());
        sc.pos.push_back(p);
    }
    for (const auto& p : sc.pos) sc.values.push_back(two_circle_function(p[0], p[1]));
    sc.ambient = ambient_with_samples(sc.pos, sc.values, sc.sample);
    return sc;
}

/// The three nested sets N^{r,s,t} ⊆ N^{r,s}(X) ⊆ N^r(X) and ball masses.
struct TwoCircleSets {
    std::vector<std::size_t> n_r, n_rs, n_rst;
    std::vector<double> ball_mass;  ///< μ(B_{r,s}(y)) for every ambient y
    bool rst_in_rs = false, rs_in_r = false;
    bool rst_strict = false, rs_strict = false;
    double min_retained_mass = 1.0;
    bool retained_dense = false;  ///< every retained point has ball mass >= 1 - t
};

inline bool is_subset(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline TwoCircleSets two_circle_sets(const TwoCircleScenario& sc) {
    TwoCircleSets out;
    const MetricField& e = sc.ambient.field();
    out.n_r = nbhd_set(e, sc.sample, sc.r, std::numeric_limits<double>::infinity());
    out.n_rs = nbhd_set(e, sc.sample, sc.r, sc.s);
    out.ball_mass = ball_masses(sc.ambient, sc.r, sc.s);
    out.n_rst = nbhd3_set(sc.ambient, sc.r, sc.s, sc.t);
    out.rst_in_rs = is_subset(out.n_rst, out.n_rs);
    out.rs_in_r = is_subset(out.n_rs, out.n_r);
    out.rst_strict = out.n_rst.size() < out.n_rs.size();
    out.rs_strict = out.n_rs.size() < out.n_r.size();
    for (std::size_t y : out.n_rst) out.min_retained_mass = std::min(out.min_retained_mass, out.ball_mass[y]);
    out.retained_dense = out.min_retained_mass >= 1.0 - sc.t - 1e-12;
    return out;
}

// ---------------------------------------------------------------------------
// Weighted circle scenario: 20 jittered points on a circle of radius 2,
// three consecutive heavy points, linear function 0.9·x.

struct WeightedCircleScenario {
    std::vector<Point2> pos;
    std::vector<double> values;
    MMField field;
    std::vector<std::size_t> heavy;
    double r = 1.5, s = 1.0, t = 0.1;
    std::size_t dim_cap = 2;
};

inline WeightedCircleScenario make_weighted_circle(std::uint64_t seed, std::size_t count = 20) {
    if (count < 4) throw std::invalid_argument("weighted circle needs at least 4 points");
    Rng rng(derive_seed(seed, 0x7c2));
    WeightedCircleScenario sc;
    const double step = 2.0 * std::numbers::pi / static_cast<double>(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double theta = step * (static_cast<double>(k) + rng.uniform(-0.1, 0.1));
        const double rad = 2.0 + rng.uniform(-0.05, 0.05);
        sc.pos.push_back({rad * std::cos(theta), rad * std::sin(theta)});
        sc.values.push_back(0.9 * sc.pos.back()[0]);
    }
    // Heavy points straddle angle 0 where the function is nearly flat.
    sc.heavy = {count - 1, 0, 1};
    std::vector<double> w(count, 0.07 / static_cast<double>(count - 3));
    for (std::size_t h : sc.heavy) w[h] = 0.31;
    sc.field = MMField(planar_field(sc.pos, sc.values), std::move(w));
    return sc;
}

// ---------------------------------------------------------------------------
// Stability checks.

struct StabilityReport {
    std::string kind;
    double measured_shift = 0.0;
    double theorem_bound = 0.0;
    double grid_step = 0.0;
    double half_step_error = 0.0;
    double set_distance = 0.0;  ///< d_H(X,Y) or d_P(μ,ν)
    double sup_value_gap = 0.0;
    bool pass = false;
};

inline double sup_value_gap(const MetricField& f, const MetricField& g) {
    if (f.size() != g.size()) throw std::invalid_argument("fields differ in size");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s = std::max(s, f.space()->distance(f.value(i), g.value(i)));
    return s;
}

namespace detail {

inline void require_same_ambient(const MetricField& f, const MetricField& g) {
    if (f.size() != g.size()) throw std::invalid_argument("stability: ambient sets differ in size");
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = 0; j < f.size(); ++j)
            if (f.d(i, j) != g.d(i, j)) throw std::invalid_argument("stability: ambient metrics differ");
    require_same_space(f, g);
}

}  // namespace detail

/// Neighbourhood bifiltrations of X under f and Y under g on the same
/// ambient: measured grid shift against d_H(X,Y) + 2 sup d_B(f,g).
inline StabilityReport stability_nbhd2(const MetricField& ef, const std::vector<std::size_t>& x, const MetricField& eg,
                                       const std::vector<std::size_t>& y, const std::vector<double>& r_grid,
                                       const std::vector<double>& s_grid) {
    detail::require_same_ambient(ef, eg);
    StabilityReport rep;
    rep.kind = "nbhd2";
    const auto m1 = nbhd_bifiltration(x, ef, r_grid, s_grid);
    const auto m2 = nbhd_bifiltration(y, eg, r_grid, s_grid);
    const auto il = inclusion_interleaving_shift(m1, m2);
    rep.measured_shift = il.shift;
    rep.grid_step = il.step;
    rep.half_step_error = il.half_step_error;
    rep.set_distance = hausdorff(ef, x, y);
    rep.sup_value_gap = sup_value_gap(ef, eg);
    rep.theorem_bound = rep.set_distance + 2.0 * rep.sup_value_gap;
    rep.pass = rep.measured_shift <= rep.theorem_bound + rep.grid_step + 1e-9;
    return rep;
}

/// Prokhorov distance between the weights of two mm-fields on one ambient.
inline double ambient_prokhorov(const MMField& a, const MMField& b) {
    const auto sa = a.support(), sb = b.support();
    DiscreteMeasure mu, nu;
    for (std::size_t i : sa) mu.weights.push_back(a.weight(i));
    for (std::size_t j : sb) nu.weights.push_back(b.weight(j));
    DenseMatrix c(sa.size(), sb.size());
    for (std::size_t i = 0; i < sa.size(); ++i)
        for (std::size_t j = 0; j < sb.size(); ++j) c(i, j) = a.field().d(sa[i], sb[j]);
    return prokhorov(mu, nu, c).value;
}

/// Neighbourhood trifiltrations of (E, f, μ) and (E, g, ν): measured grid
/// shift against d_P(μ,ν) + 2 sup d_B(f,g).
inline StabilityReport stability_nbhd3(const MMField& ef, const MMField& eg, const std::vector<double>& r_grid,
                                       const std::vector<double>& s_grid, const std::vector<double>& t_grid) {
    detail::require_same_ambient(ef.field(), eg.field());
    StabilityReport rep;
    rep.kind = "nbhd3";
    const auto m1 = nbhd_trifiltration(ef, r_grid, s_grid, t_grid);
    const auto m2 = nbhd_trifiltration(eg, r_grid, s_grid, t_grid);
    const auto il = inclusion_interleaving_shift(m1, m2);
    rep.measured_shift = il.shift;
    rep.grid_step = il.step;
    rep.half_step_error = il.half_step_error;
    rep.set_distance = ambient_prokhorov(ef, eg);
    rep.sup_value_gap = sup_value_gap(ef.field(), eg.field());
    rep.theorem_bound = rep.set_distance + 2.0 * rep.sup_value_gap;
    rep.pass = rep.measured_shift <= rep.theorem_bound + rep.grid_step + 1e-9;
    return rep;
}

struct VRInclusionReport {
    double eps = 0.0;  ///< max(½ max|d_X - d_Y|, max d_B(π_X, π_Y))
    std::size_t simplices_checked = 0;
    std::size_t failures = 0;
    double worst_excess = -std::numeric_limits<double>::infinity();  ///< max over checks of grade_Y - grade_X - 2ε
    bool pass = false;
};

/// VR^{r,s}(X) ⊆ VR^{r+2ε,s+2ε}(Y) and the reverse, for two fields on the
/// same vertex set, checked simplex by simplex inside the window.
inline VRInclusionReport stability_vr_identity(const MetricField& x, const MetricField& y, std::size_t dim_cap, double r_max,
                                               double s_max) {
    if (x.size() != y.size()) throw std::invalid_argument("vr identity check needs a shared vertex set");
    require_same_space(x, y);
    VRInclusionReport rep;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) rep.eps = std::max(rep.eps, 0.5 * std::abs(x.d(i, j) - y.d(i, j)));
        rep.eps = std::max(rep.eps, x.space()->distance(x.value(i), y.value(i)));
    }
    auto check = [&](const MetricField& a, const MetricField& b) {
        for (const auto& sx : vr_bifiltration(a, dim_cap, r_max, s_max).simplices) {
            const double dd = subset_diameter(b, sx.vertices) - sx.diam - 2.0 * rep.eps;
            const double ds = 2.0 * subset_value_radius(b, sx.vertices) - sx.two_rad - 2.0 * rep.eps;
            rep.worst_excess = std::max({rep.worst_excess, dd, ds});
            ++rep.simplices_checked;
            if (dd > 1e-9 || ds > 1e-9) ++rep.failures;
        }
    };
    check(x, y);
    check(y, x);
    rep.pass = rep.failures == 0;
    return rep;
}

// ---------------------------------------------------------------------------
// Random perturbations of the two scenarios.

/// Two fields f, g and two sample sets X, Y on one ambient grid: Y jitters
/// X, g adds a small smooth term to f (Lipschitz constant stays below 1).
struct NbhdPerturbation {
    std::vector<Point2> pos;
    MMField ef, eg;
    std::vector<std::size_t> x, y;
};

inline NbhdPerturbation perturb_two_circle(std::uint64_t seed, std::uint64_t trial) {
    Rng rng(derive_seed(derive_seed(seed, 0x57ab), trial));
    NbhdPerturbation out;
    out.pos = plane_grid(-3.0, 3.0, -1.5, 1.5, 0.12);
    const auto xs = two_circle_samples(seed);
    const double jitter = rng.uniform(0.0, 0.15);
    for (const auto& p : xs) {
        out.x.push_back(out.pos.size());
        out.pos.push_back(p);
    }
    for (const auto& p : xs) {
        if (rng.uniform() < 0.1) continue;  // drop some samples
        const double a = rng.uniform(0.0, 2.0 * std::numbers::pi), m = rng.uniform(0.0, jitter);
        out.y.push_back(out.pos.size());
        out.pos.push_back({p[0] + m * std::cos(a), p[1] + m * std::sin(a)});
    }
    const double amp = rng.uniform(0.0, 0.08), kx = rng.uniform(0.5, 2.0), ky = rng.uniform(0.5, 2.0);
    const double px = rng.uniform(0.0, 6.3), py = rng.uniform(0.0, 6.3);
    std::vector<double> f, g;
    for (const auto& p : out.pos) {
        f.push_back(two_circle_function(p[0], p[1]));
        g.push_back(f.back() + amp * std::sin(kx * p[0] + px) * std::cos(ky * p[1] + py));
    }
    out.ef = ambient_with_samples(out.pos, f, out.x);
    out.eg = ambient_with_samples(out.pos, g, out.y);
    return out;
}

/// Same vertex set, jittered positions and a smoothly perturbed function.
inline std::pair<MetricField, MetricField> perturb_weighted_circle(std::uint64_t seed, std::uint64_t trial) {
    const auto base = make_weighted_circle(seed);
    Rng rng(derive_seed(derive_seed(seed, 0x57ac), trial));
    const double jitter = rng.uniform(0.0, 0.2), amp = rng.uniform(0.0, 0.05), phase = rng.uniform(0.0, 6.3);
    std::vector<Point2> pos;
    std::vector<double> vals;
    for (const auto& p : base.pos) {
        const double a = rng.uniform(0.0, 2.0 * std::numbers::pi), m = rng.uniform(0.0, jitter);
        pos.push_back({p[0] + m * std::cos(a), p[1] + m * std::sin(a)});
        vals.push_back(0.9 * pos.back()[0] + amp * std::sin(pos.back()[1] + phase));
    }
    return {base.field.field(), planar_field(pos, vals)};
}

}  // namespace mmfield
