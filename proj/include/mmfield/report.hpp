#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mmfield/curvature.hpp"
#include "mmfield/filtrations.hpp"
#include "mmfield/gh.hpp"
#include "mmfield/gp.hpp"
#include "mmfield/gw.hpp"
#include "mmfield/io.hpp"
#include "mmfield/scenarios.hpp"
#include "mmfield/svg.hpp"

namespace mmfield {

/// Nonzero entries as [i, j, mass] triples, row-major.
inline Json coupling_to_json(const Coupling& c) {
    Json out = Json::array();
    for (std::size_t i = 0; i < c.rows(); ++i)
        for (std::size_t j = 0; j < c.cols(); ++j)
            if (c(i, j) > 0.0) out.push_back(Json::array({i, j, number(c(i, j))}));
    return out;
}

inline Json to_json(const ValidationReport& r) {
    Json v = Json::array();
    for (const auto& e : r.violations)
        v.push_back(Json{{"kind", to_string(e.kind)}, {"i", e.i}, {"j", e.j}, {"k", e.k}, {"magnitude", number(e.magnitude)}});
    return Json{{"valid", r.valid()}, {"violations", std::move(v)}};
}

inline Json to_json(const GHResult& r) {
    return Json{{"kind", "gh"},
                {"value", number(r.value)},
                {"status", to_string(r.status)},
                {"lower", number(r.lower)},
                {"upper", number(r.upper)},
                {"nodes", r.nodes},
                {"correspondence", relation_to_json(r.witness)}};
}

inline Json to_json(const GPResult& r) {
    return Json{{"kind", "gp"},
                {"value", number(r.value)},
                {"status", to_string(r.status)},
                {"lower", number(r.lower)},
                {"upper", number(r.upper)},
                {"resolution", number(r.resolution)},
                {"nodes", r.nodes},
                {"relation", relation_to_json(r.relation)},
                {"coupling", coupling_to_json(r.coupling)}};
}

inline Json to_json(const GWResult& r) {
    return Json{{"kind", "gw"},
                {"p", number(r.p)},
                {"value", number(r.value)},
                {"status", to_string(r.status)},
                {"lower", number(r.lower)},
                {"upper", number(r.upper)},
                {"nodes", r.nodes},
                {"coupling", coupling_to_json(r.coupling)}};
}

inline Json to_json(const ADM& a) {
    Json b = Json::array();
    for (const auto& v : a.b) b.push_back(bpoint_to_json(v));
    return Json{{"r", detail::lower_triangle(a.r)}, {"b", std::move(b)}};
}

inline Json to_json(const ADMDistribution& d) {
    Json s = Json::array();
    for (std::size_t k = 0; k < d.samples.size(); ++k) {
        Json e = to_json(d.samples[k]);
        e["weight"] = number(d.weights[k]);
        if (k < d.tuples.size()) e["tuple"] = d.tuples[k];
        s.push_back(std::move(e));
    }
    return Json{{"n", d.n()},
                {"m", d.samples.size()},
                {"field_id", d.provenance.field_id},
                {"seed", d.provenance.seed},
                {"samples", std::move(s)}};
}

inline Json to_json(const ConvergenceReport& r) {
    Json curve = Json::array();
    for (const auto& c : r.curve)
        curve.push_back(Json{{"n", c.n},
                             {"m", c.m},
                             {"p", number(c.p)},
                             {"estimate", number(c.estimate)},
                             {"stderr", number(c.stderr_)},
                             {"replicates", c.replicates.size()},
                             {"seed", c.seed},
                             {"reference_lower", number(r.reference_lower)},
                             {"reference_upper", number(r.reference_upper)}});
    return Json{{"reference_status", to_string(r.reference_status)}, {"records", std::move(curve)}};
}

inline std::string convergence_csv(const ConvergenceReport& r) {
    std::string out = "n,m,p,estimate,stderr,seed,reference_lower,reference_upper\n";
    for (const auto& c : r.curve)
        out += number(static_cast<double>(c.n)).dump() + "," + std::to_string(c.m) + "," + number(c.p).dump() + "," +
               number(c.estimate).dump() + "," + number(c.stderr_).dump() + "," + std::to_string(c.seed) + "," +
               number(r.reference_lower).dump() + "," + number(r.reference_upper).dump() + "\n";
    return out;
}

inline Json to_json(const ReconstructionReport& r) {
    return Json{{"n", r.n},
                {"m", r.m},
                {"p", number(r.p)},
                {"statistic", number(r.statistic)},
                {"p_value", number(r.p_value)},
                {"permutations", r.permutations},
                {"alpha", number(r.alpha)},
                {"distinct", r.distinct}};
}

inline Json axes_to_json(const std::vector<std::vector<double>>& axes) {
    Json a = Json::array();
    for (const auto& ax : axes) {
        Json v = Json::array();
        for (double x : ax) v.push_back(number(x));
        a.push_back(std::move(v));
    }
    return a;
}

/// Membership is flattened cell-major (last axis fastest), point-minor,
/// and run-length encoded starting with a run of false.
inline Json to_json(const GradedSubsetMask& m) {
    return Json{{"axes", axes_to_json(m.axes())}, {"points", m.points()}, {"membership_rle", run_length(m.flatten())}};
}

inline Json to_json(const GradedComplex& c) {
    Json s = Json::array();
    for (const auto& sx : c.simplices)
        s.push_back(Json{{"vertices", sx.vertices}, {"grade", Json::array({number(sx.diam), number(sx.two_rad)})}});
    return Json{{"truncated", c.truncated}, {"simplices", std::move(s)}};
}

inline Json to_json(const GradedChainComplex& c) {
    Json subs = Json::array();
    for (const auto& a : c.subsets)
        subs.push_back(Json{{"vertices", a.vertices}, {"diam", number(a.diam)}, {"two_rad", number(a.two_rad)}, {"mass", number(a.mass)}});
    Json chains = Json::array();
    for (const auto& ch : c.chains)
        chains.push_back(Json{{"chain", ch.subsets}, {"grade", Json::array({number(ch.diam), number(ch.two_rad), number(ch.t)})}});
    return Json{{"truncated", c.truncated}, {"subsets", std::move(subs)}, {"chains", std::move(chains)}};
}

inline Json to_json(const StabilityReport& r) {
    return Json{{"kind", r.kind},
                {"measured_shift", number(r.measured_shift)},
                {"theorem_bound", number(r.theorem_bound)},
                {"grid_step", number(r.grid_step)},
                {"half_step_error", number(r.half_step_error)},
                {r.kind == "nbhd3" ? "prokhorov" : "hausdorff", number(r.set_distance)},
                {"sup_value_gap", number(r.sup_value_gap)},
                {"pass", r.pass}};
}

inline Json to_json(const VRInclusionReport& r) {
    return Json{{"kind", "vr-identity"},
                {"eps", number(r.eps)},
                {"measured_shift", number(2.0 * r.eps + std::max(0.0, r.worst_excess))},
                {"theorem_bound", number(2.0 * r.eps)},
                {"simplices_checked", r.simplices_checked},
                {"failures", r.failures},
                {"pass", r.pass}};
}

// ---------------------------------------------------------------------------
// Figure scenarios: metadata plus an SVG rendering.

struct DemoOutput {
    Json meta;
    std::string svg;
};

namespace detail {

inline std::vector<double> column(const std::vector<Point2>& pts, int c) {
    std::vector<double> v;
    for (const auto& p : pts) v.push_back(p[static_cast<std::size_t>(c)]);
    return v;
}

}  // namespace detail

inline DemoOutput demo_two_circle(std::uint64_t seed) {
    const auto sc = make_two_circle(seed);
    const auto sets = two_circle_sets(sc);
    DemoOutput out;
    out.meta = Json{{"figure", "fig1"},
                    {"seed", seed},
                    {"r", sc.r},
                    {"s", sc.s},
                    {"t", sc.t},
                    {"ambient_points", sc.pos.size()},
                    {"grid_points", sc.grid_points},
                    {"samples", sc.sample.size()},
                    {"n_r", sets.n_r.size()},
                    {"n_rs", sets.n_rs.size()},
                    {"n_rst", sets.n_rst.size()},
                    {"rst_subset_rs", sets.rst_in_rs},
                    {"rs_subset_r", sets.rs_in_r},
                    {"rst_strict", sets.rst_strict},
                    {"rs_strict", sets.rs_strict},
                    {"min_retained_ball_mass", number(sets.min_retained_mass)},
                    {"retained_dense", sets.retained_dense}};
    auto membership = [&](const std::vector<std::size_t>& s) {
        std::vector<bool> bits(sc.pos.size(), false);
        for (std::size_t i : s) bits[i] = true;
        return run_length(bits);
    };
    out.meta["membership_rle"] = Json{{"n_r", membership(sets.n_r)}, {"n_rs", membership(sets.n_rs)}, {"n_rst", membership(sets.n_rst)}};
    Json samples = Json::array();
    for (std::size_t i : sc.sample) samples.push_back(Json::array({number(sc.pos[i][0]), number(sc.pos[i][1])}));
    out.meta["sample_points"] = std::move(samples);

    svg::Canvas cv;
    double max_mass = 0.0;
    for (double m : sets.ball_mass) max_mass = std::max(max_mass, m);
    const std::vector<std::size_t>* panels[] = {&sets.n_r, &sets.n_rs, &sets.n_rst};
    const char* titles[] = {"N^r(X,E)", "N^{r,s}(X,E)", "N^{r,s,t}(E)"};
    for (int k = 0; k < 3; ++k) {
        const double top = 10.0 + 263.0 * k;
        svg::Frame fr{-3.1, -1.6, 3.1, 1.6, 10.0, top + 18.0, 780.0, 235.0};
        cv.rect(10.0, top, 780.0, 255.0, 180);
        cv.text(16.0, top + 15.0, titles[k]);
        std::vector<bool> in(sc.pos.size(), false);
        for (std::size_t i : *panels[k]) in[i] = true;
        for (std::size_t i = 0; i < sc.grid_points; ++i) {
            const auto [px, py] = fr(sc.pos[i][0], sc.pos[i][1]);
            if (in[i]) {
                const double shade = max_mass > 0.0 ? sets.ball_mass[i] / max_mass : 0.0;
                cv.circle(px, py, 3.2, static_cast<int>(225.0 - 200.0 * shade));
            } else {
                cv.circle(px, py, 1.0, 225);
            }
        }
        for (std::size_t i : sc.sample) {
            const auto [px, py] = fr(sc.pos[i][0], sc.pos[i][1]);
            cv.circle(px, py, 1.3, 0);
        }
    }
    out.svg = cv.str();
    return out;
}

inline DemoOutput demo_weighted_circle(std::uint64_t seed) {
    const auto sc = make_weighted_circle(seed);
    const MetricField& f = sc.field.field();
    constexpr double inf = std::numeric_limits<double>::infinity();
    const auto vr_r = vr_bifiltration(f, sc.dim_cap, sc.r, inf);
    const auto vr_rs = vr_bifiltration(f, sc.dim_cap, sc.r, sc.s);
    const auto tri = vr_trifiltration(sc.field, sc.dim_cap, sc.r, sc.s, sc.t);

    std::vector<std::vector<std::size_t>> a, b;
    for (const auto& s : vr_r.simplices) a.push_back(s.vertices);
    for (const auto& s : vr_rs.simplices) b.push_back(s.vertices);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const bool subset = std::includes(a.begin(), a.end(), b.begin(), b.end());
    // Every chain's largest set must be a simplex of VR^{r,s}.
    bool chains_in_subdivision = true;
    for (const auto& ch : tri.chains)
        if (!std::binary_search(b.begin(), b.end(), tri.subsets[ch.subsets.back()].vertices)) chains_in_subdivision = false;

    auto count_by_dim = [](const std::vector<std::vector<std::size_t>>& s) {
        std::vector<std::size_t> c;
        for (const auto& v : s) {
            if (c.size() < v.size()) c.resize(v.size(), 0);
            ++c[v.size() - 1];
        }
        return c;
    };
    DemoOutput out;
    out.meta = Json{{"figure", "fig2"},
                    {"seed", seed},
                    {"r", sc.r},
                    {"s", sc.s},
                    {"t", sc.t},
                    {"dim_cap", sc.dim_cap},
                    {"points", f.size()},
                    {"heavy", sc.heavy},
                    {"vr_r_simplices_by_dim", count_by_dim(a)},
                    {"vr_rs_simplices_by_dim", count_by_dim(b)},
                    {"vr_rs_subset_vr_r", subset},
                    {"vr_rs_strict", b.size() < a.size()},
                    {"vr_rst_subsets", tri.subsets.size()},
                    {"vr_rst_chains", tri.chains.size()},
                    {"vr_rst_in_subdivision", chains_in_subdivision},
                    {"vr_rst_truncated", tri.truncated}};
    Json pts = Json::array();
    for (std::size_t i = 0; i < f.size(); ++i)
        pts.push_back(Json{{"x", number(sc.pos[i][0])}, {"y", number(sc.pos[i][1])}, {"value", number(sc.values[i])}, {"weight", number(sc.field.weight(i))}});
    out.meta["points_data"] = std::move(pts);
    out.meta["vr_rs"] = to_json(vr_rs);
    out.meta["vr_rst"] = to_json(tri);

    svg::Canvas cv;
    const char* titles[] = {"VR^r(X)", "VR^{r,s}(X)", "VR^{r,s,t}(X)"};
    for (int k = 0; k < 3; ++k) {
        const double top = 10.0 + 263.0 * k;
        svg::Frame fr{-2.6, -2.6, 2.6, 2.6, 10.0, top + 18.0, 780.0, 235.0};
        cv.rect(10.0, top, 780.0, 255.0, 180);
        cv.text(16.0, top + 15.0, titles[k]);
        // Contour hint: vertical lines where 0.9·x crosses multiples of 0.5.
        for (double c = -2.0; c <= 2.0 + 1e-9; c += 0.5) {
            const double x = c / 0.9;
            if (std::abs(x) > 2.6) continue;
            const auto [x1, y1] = fr(x, -2.6);
            const auto [x2, y2] = fr(x, 2.6);
            cv.line(x1, y1, x2, y2, 220, 0.5);
        }
        auto draw_set = [&](const std::vector<std::size_t>& v, int gray) {
            if (v.size() == 3) {
                std::vector<std::pair<double, double>> poly;
                for (std::size_t i : v) poly.push_back(fr(sc.pos[i][0], sc.pos[i][1]));
                cv.polygon(poly, gray, 0.5);
            } else if (v.size() == 2) {
                const auto [x1, y1] = fr(sc.pos[v[0]][0], sc.pos[v[0]][1]);
                const auto [x2, y2] = fr(sc.pos[v[1]][0], sc.pos[v[1]][1]);
                cv.line(x1, y1, x2, y2, gray, 1.2);
            }
        };
        if (k < 2) {
            for (const auto& v : k == 0 ? a : b) draw_set(v, 90);
        } else {
            // Barycentric drawing: each admissible subset at its barycentre,
            // chains as edges between barycentres.
            auto bary = [&](std::size_t s) {
                double x = 0.0, y = 0.0;
                for (std::size_t i : tri.subsets[s].vertices) {
                    x += sc.pos[i][0];
                    y += sc.pos[i][1];
                }
                const double n = static_cast<double>(tri.subsets[s].vertices.size());
                return fr(x / n, y / n);
            };
            for (const auto& ch : tri.chains)
                for (std::size_t q = 0; q + 1 < ch.subsets.size(); ++q) {
                    const auto [x1, y1] = bary(ch.subsets[q]);
                    const auto [x2, y2] = bary(ch.subsets[q + 1]);
                    cv.line(x1, y1, x2, y2, 60, 1.2);
                }
            for (std::size_t s = 0; s < tri.subsets.size(); ++s) {
                const auto [x, y] = bary(s);
                cv.circle(x, y, 3.0, 40);
            }
        }
        for (std::size_t i = 0; i < f.size(); ++i) {
            const auto [px, py] = fr(sc.pos[i][0], sc.pos[i][1]);
            cv.circle(px, py, 2.0 + 14.0 * sc.field.weight(i), k == 2 ? 150 : 0);
        }
    }
    out.svg = cv.str();
    return out;
}

}  // namespace mmfield
