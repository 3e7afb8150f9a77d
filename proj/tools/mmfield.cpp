// Command-line front end: validation, distances, curvature experiments,
// filtrations, stability checks and the figure scenarios.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmfield/io.hpp"
#include "mmfield/mmfield.hpp"
#include "mmfield/report.hpp"

using namespace mmfield;

namespace {

enum Exit { ok = 0, usage = 1, invalid = 2, budget = 3 };

struct Common {
    std::uint64_t seed = 0;
    double tol_metric = Tolerances{}.metric;
    double tol_mass = Tolerances{}.mass;
    std::uint64_t budget = default_gh_budget;
    std::string out;
    bool emit_svg = false;
    std::string svg_out;
    std::vector<std::string> grids;

    Tolerances tol() const { return {tol_metric, tol_mass}; }
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double parse_real(const std::string& s) {
    if (s == "inf" || s == "Inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw UsageError("not a number: " + s);
    }
    if (pos != s.size()) throw UsageError("not a number: " + s);
    return v;
}

std::vector<double> parse_grid(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw UsageError("grid must be start:stop:step, got " + spec);
    try {
        return make_grid(parse_real(parts[0]), parse_real(parts[1]), parse_real(parts[2]));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

std::vector<std::size_t> parse_indices(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    for (std::string p; std::getline(ss, p, ',');) {
        if (p.empty()) continue;
        try {
            out.push_back(static_cast<std::size_t>(std::stoull(p)));
        } catch (const std::exception&) {
            throw UsageError("bad index list: " + s);
        }
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

void emit(const Common& c, const Json& j) {
    const std::string text = j.dump(2) + "\n";
    if (c.out.empty()) std::cout << text;
    else write_text(c.out, text);
}

std::string svg_path(const Common& c, const std::string& fallback) {
    if (!c.svg_out.empty()) return c.svg_out;
    if (!c.out.empty()) {
        const auto dot = c.out.rfind('.');
        return (dot == std::string::npos ? c.out : c.out.substr(0, dot)) + ".svg";
    }
    return fallback;
}

/// Loads a field and rejects it (exit 2) when it fails validation.
FieldDocument load_valid(const std::string& path, const Common& c, bool mm) {
    FieldDocument doc = load_field(path);
    const ValidationReport rep = mm ? validate_field(doc.mm(), c.tol()) : validate_field(doc.field, c.tol());
    if (!rep.valid()) {
        Json j = to_json(rep);
        j["file"] = path;
        throw std::invalid_argument(j.dump());
    }
    return doc;
}

std::vector<std::size_t> support_or_all(const FieldDocument& d) {
    if (!d.weights) return all_indices(d.field.size());
    return d.mm().support();
}

/// Draws a 2-D ambient mask at one grade: members shaded by ball mass.
std::string mask_svg(const FieldDocument& doc, const std::vector<bool>& member, const std::vector<double>& shade,
                     const std::string& title) {
    if (!doc.points || doc.points->front().size() != 2) throw UsageError("--emit-svg needs 2-D points in the field file");
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& p : *doc.points) {
        x0 = std::min(x0, p[0]);
        x1 = std::max(x1, p[0]);
        y0 = std::min(y0, p[1]);
        y1 = std::max(y1, p[1]);
    }
    const double pad = 0.05 * std::max({x1 - x0, y1 - y0, 1e-9});
    svg::Canvas cv;
    svg::Frame fr{x0 - pad, y0 - pad, x1 + pad, y1 + pad, 20.0, 40.0, 760.0, 740.0};
    cv.text(20.0, 25.0, title);
    for (std::size_t i = 0; i < member.size(); ++i) {
        const auto [px, py] = fr((*doc.points)[i][0], (*doc.points)[i][1]);
        if (member[i]) cv.circle(px, py, 3.5, static_cast<int>(225.0 - 200.0 * shade[i]));
        else cv.circle(px, py, 1.2, 210);
    }
    return cv.str();
}

std::string complex_svg(const FieldDocument& doc, const std::vector<std::vector<std::size_t>>& simplices, const std::string& title) {
    if (!doc.points || doc.points->front().size() != 2) throw UsageError("--emit-svg needs 2-D points in the field file");
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& p : *doc.points) {
        x0 = std::min(x0, p[0]);
        x1 = std::max(x1, p[0]);
        y0 = std::min(y0, p[1]);
        y1 = std::max(y1, p[1]);
    }
    const double pad = 0.05 * std::max({x1 - x0, y1 - y0, 1e-9});
    svg::Canvas cv;
    svg::Frame fr{x0 - pad, y0 - pad, x1 + pad, y1 + pad, 20.0, 40.0, 760.0, 740.0};
    cv.text(20.0, 25.0, title);
    auto at = [&](std::size_t i) { return fr((*doc.points)[i][0], (*doc.points)[i][1]); };
    for (const auto& s : simplices)
        if (s.size() == 3) cv.polygon({at(s[0]), at(s[1]), at(s[2])}, 150, 0.5);
    for (const auto& s : simplices)
        if (s.size() == 2) {
            const auto [ax, ay] = at(s[0]);
            const auto [bx, by] = at(s[1]);
            cv.line(ax, ay, bx, by, 60, 1.2);
        }
    for (std::size_t i = 0; i < doc.field.size(); ++i) {
        const auto [px, py] = at(i);
        cv.circle(px, py, 3.0, 0);
    }
    return cv.str();
}

std::size_t grid_index(const std::vector<double>& grid, double v) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), v - 1e-12);
    if (it == grid.end()) throw UsageError("--at value outside the grid");
    return static_cast<std::size_t>(it - grid.begin());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distances, curvature sets and filtrations of metric-measure fields"};
    app.require_subcommand(1);
    app.fallthrough();

    Common c;
    app.add_option("--seed", c.seed, "Random seed");
    app.add_option("--tol-metric", c.tol_metric, "Metric tolerance");
    app.add_option("--tol-mass", c.tol_mass, "Mass tolerance");
    app.add_option("--budget", c.budget, "Search node budget");
    app.add_option("--out", c.out, "Write the JSON document here instead of stdout");
    app.add_flag("--emit-svg", c.emit_svg, "Also write an SVG drawing");
    app.add_option("--svg-out", c.svg_out, "SVG path (default derived from --out)");
    app.add_option("--grid", c.grids, "Parameter grid start:stop:step, one per axis");

    // validate
    std::string v_file;
    auto* validate = app.add_subcommand("validate", "Check a field file");
    validate->add_option("file", v_file)->required();

    // dist
    std::string d_kind, d_x, d_y, d_p = "2";
    std::size_t d_restarts = GWOptions{}.restarts;
    auto* dist = app.add_subcommand("dist", "Distance between two field files");
    dist->add_option("kind", d_kind, "gh | gp | gw")->required()->check(CLI::IsMember({"gh", "gp", "gw"}));
    dist->add_option("x", d_x)->required();
    dist->add_option("y", d_y)->required();
    dist->add_option("--p", d_p, "GW order (number or inf)");
    dist->add_option("--restarts", d_restarts, "Random restarts for finite p");

    // curvature
    std::string k_sub, k_x, k_y, k_p = "1", k_csv, k_nlist = "2,4,8";
    std::size_t k_n = 3, k_m = 200, k_k = 8, k_perm = 99, k_trials = 200;
    double k_eps = 0.1;
    auto* curv = app.add_subcommand("curvature", "Augmented distance matrix experiments");
    curv->add_option("sub", k_sub, "sample | dist | converge | reconstruct | uniformity")
        ->required()
        ->check(CLI::IsMember({"sample", "dist", "converge", "reconstruct", "uniformity"}));
    curv->add_option("x", k_x)->required();
    curv->add_option("y", k_y);
    curv->add_option("--n", k_n, "Tuple size");
    curv->add_option("--m", k_m, "Samples per law");
    curv->add_option("--p", k_p, "Wasserstein order (number or inf)");
    curv->add_option("--k", k_k, "Replicates per n");
    curv->add_option("--n-list", k_nlist, "Comma separated tuple sizes for converge");
    curv->add_option("--permutations", k_perm, "Permutations for reconstruct");
    curv->add_option("--eps", k_eps, "Radius for uniformity");
    curv->add_option("--trials", k_trials, "Trials for uniformity");
    curv->add_option("--csv", k_csv, "Also write converge records as CSV");

    // filtration
    std::string f_kind, f_file, f_x, f_at;
    std::size_t f_dim = 2, f_subset_cap = TrifiltrationCaps{}.subset_size, f_chains = TrifiltrationCaps{}.max_chains;
    std::string f_rmax = "inf", f_smax = "inf", f_tmax = "1";
    auto* filt = app.add_subcommand("filtration", "Build a filtration");
    filt->add_option("kind", f_kind, "nbhd2 | nbhd3 | vr2 | vr3")->required()->check(CLI::IsMember({"nbhd2", "nbhd3", "vr2", "vr3"}));
    filt->add_option("file", f_file)->required();
    filt->add_option("--x", f_x, "Reference indices for nbhd2 (default: support of the weights)");
    filt->add_option("--dim-cap", f_dim, "Maximum simplex dimension");
    filt->add_option("--r-max", f_rmax);
    filt->add_option("--s-max", f_smax);
    filt->add_option("--t-max", f_tmax);
    filt->add_option("--subset-cap", f_subset_cap);
    filt->add_option("--max-chains", f_chains);
    filt->add_option("--at", f_at, "Grade drawn by --emit-svg, comma separated");

    // stability
    std::string s_kind, s_f, s_g;
    std::size_t s_dim = 2;
    std::string s_rmax = "2", s_smax = "2";
    auto* stab = app.add_subcommand("stability", "Measure an interleaving against its bound");
    stab->add_option("kind", s_kind, "nbhd2 | nbhd3 | vr-identity")->required()->check(CLI::IsMember({"nbhd2", "nbhd3", "vr-identity"}));
    stab->add_option("f", s_f)->required();
    stab->add_option("g", s_g)->required();
    stab->add_option("--dim-cap", s_dim);
    stab->add_option("--r-max", s_rmax);
    stab->add_option("--s-max", s_smax);

    // demo
    std::string demo_fig;
    auto* demo = app.add_subcommand("demo", "Regenerate a figure scenario");
    demo->add_option("figure", demo_fig, "fig1 | fig2")->required()->check(CLI::IsMember({"fig1", "fig2"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*validate) {
            const FieldDocument doc = load_field(v_file);
            const ValidationReport rep = doc.weights ? validate_field(doc.mm(), c.tol()) : validate_field(doc.field, c.tol());
            Json j = to_json(rep);
            j["n"] = doc.field.size();
            j["weighted"] = doc.weights.has_value();
            emit(c, j);
            return rep.valid() ? ok : invalid;
        }

        if (*dist) {
            if (d_kind == "gh") {
                const auto x = load_valid(d_x, c, false), y = load_valid(d_y, c, false);
                const auto r = gh_distance(x.field, y.field, c.budget);
                emit(c, to_json(r));
                return r.status == Status::bounds_only ? budget : ok;
            }
            const auto x = load_valid(d_x, c, true), y = load_valid(d_y, c, true);
            if (d_kind == "gp") {
                const auto r = gp_distance(x.mm(), y.mm(), c.budget);
                emit(c, to_json(r));
                return r.status == Status::bounds_only ? budget : ok;
            }
            GWOptions opt;
            opt.budget = c.budget;
            opt.seed = c.seed;
            opt.restarts = d_restarts;
            const double p = parse_real(d_p);
            if (!(p >= 1.0)) throw UsageError("--p must be >= 1");
            const auto r = gw_solve(x.mm(), y.mm(), p, opt);
            emit(c, to_json(r));
            return r.status == Status::bounds_only ? budget : ok;
        }

        if (*curv) {
            const auto x = load_valid(k_x, c, true);
            const double p = parse_real(k_p);
            if (!(p >= 1.0)) throw UsageError("--p must be >= 1");
            auto need_y = [&]() {
                if (k_y.empty()) throw UsageError("curvature " + k_sub + " needs a second field file");
                return load_valid(k_y, c, true);
            };
            if (k_sub == "sample") {
                emit(c, to_json(sample_adm(x.mm(), k_n, k_m, c.seed, k_x)));
            } else if (k_sub == "dist") {
                const auto y = need_y();
                const auto dx = sample_adm(x.mm(), k_n, k_m, derive_seed(c.seed, 1), k_x);
                const auto dy = sample_adm(y.mm(), k_n, k_m, derive_seed(c.seed, 2), k_y);
                emit(c, Json{{"n", k_n}, {"m", k_m}, {"p", number(p)}, {"seed", c.seed}, {"estimate", number(adm_wasserstein(dx, dy, p))}, {"status", "local"}});
            } else if (k_sub == "converge") {
                const auto y = need_y();
                GWOptions ref;
                ref.budget = c.budget;
                const auto rep = gw_convergence_experiment(x.mm(), y.mm(), p, parse_indices(k_nlist), k_m, c.seed, k_k, ref);
                if (!k_csv.empty()) write_text(k_csv, convergence_csv(rep));
                emit(c, to_json(rep));
            } else if (k_sub == "reconstruct") {
                const auto y = need_y();
                emit(c, to_json(reconstruction_test(x.mm(), y.mm(), k_n, k_m, c.seed, p, k_perm)));
            } else {
                const double mass = uniformity_mass(x.mm(), k_n, k_eps, p, k_trials, c.seed);
                emit(c, Json{{"n", k_n}, {"eps", number(k_eps)}, {"p", number(p)}, {"trials", k_trials}, {"seed", c.seed}, {"mass", number(mass)}});
            }
            return ok;
        }

        if (*filt) {
            if (f_kind == "nbhd2" || f_kind == "nbhd3") {
                const auto e = load_field(f_file);
                const std::size_t axes = f_kind == "nbhd2" ? 2 : 3;
                if (c.grids.size() != axes) throw UsageError(f_kind + " needs " + std::to_string(axes) + " --grid options");
                std::vector<std::vector<double>> g;
                for (const auto& s : c.grids) g.push_back(parse_grid(s));
                GradedSubsetMask mask;
                if (f_kind == "nbhd2") {
                    const auto x = f_x.empty() ? support_or_all(e) : parse_indices(f_x);
                    mask = nbhd_bifiltration(x, e.field, g[0], g[1]);
                } else {
                    if (!e.weights) throw UsageError("nbhd3 needs weights in the field file");
                    mask = nbhd_trifiltration(e.mm(), g[0], g[1], g[2]);
                }
                Json j = to_json(mask);
                j["kind"] = f_kind;
                j["status"] = "exact";
                if (c.emit_svg) {
                    std::vector<double> at;
                    if (f_at.empty()) {
                        for (const auto& ax : g) at.push_back(ax.back());
                    } else {
                        std::stringstream ss(f_at);
                        for (std::string p; std::getline(ss, p, ',');) at.push_back(parse_real(p));
                    }
                    if (at.size() != axes) throw UsageError("--at needs one value per axis");
                    std::vector<std::size_t> cell;
                    for (std::size_t a = 0; a < axes; ++a) cell.push_back(grid_index(g[a], at[a]));
                    std::vector<bool> member(e.field.size());
                    for (std::size_t y = 0; y < member.size(); ++y) member[y] = mask.contains(y, cell);
                    std::vector<double> shade(e.field.size(), 1.0);
                    if (e.weights) {
                        shade = ball_masses(e.mm(), g[0][cell[0]], g[1][cell[1]]);
                        double mx = 0.0;
                        for (double v : shade) mx = std::max(mx, v);
                        for (double& v : shade) v = mx > 0.0 ? v / mx : 0.0;
                    }
                    const auto path = svg_path(c, f_kind + ".svg");
                    write_text(path, mask_svg(e, member, shade, f_kind));
                    j["svg"] = path;
                }
                emit(c, j);
                return ok;
            }
            const double rmax = parse_real(f_rmax), smax = parse_real(f_smax);
            if (f_kind == "vr2") {
                const auto x = load_valid(f_file, c, false);
                const auto cx = vr_bifiltration(x.field, f_dim, rmax, smax);
                Json j = to_json(cx);
                j["kind"] = "vr2";
                j["status"] = "exact";
                if (c.emit_svg) {
                    std::vector<std::vector<std::size_t>> s;
                    for (const auto& sx : cx.simplices) s.push_back(sx.vertices);
                    const auto path = svg_path(c, "vr2.svg");
                    write_text(path, complex_svg(x, s, "vr2"));
                    j["svg"] = path;
                }
                emit(c, j);
                return ok;
            }
            const auto x = load_valid(f_file, c, true);
            TrifiltrationCaps caps;
            caps.subset_size = f_subset_cap;
            caps.max_chains = f_chains;
            const auto cx = vr_trifiltration(x.mm(), f_dim, rmax, smax, parse_real(f_tmax), caps);
            Json j = to_json(cx);
            j["kind"] = "vr3";
            j["status"] = "exact";
            if (c.emit_svg) {
                std::vector<std::vector<std::size_t>> s;
                for (const auto& a : cx.subsets) s.push_back(a.vertices);
                const auto path = svg_path(c, "vr3.svg");
                write_text(path, complex_svg(x, s, "vr3 admissible subsets"));
                j["svg"] = path;
            }
            emit(c, j);
            return ok;
        }

        if (*stab) {
            if (s_kind == "vr-identity") {
                const auto x = load_valid(s_f, c, false), y = load_valid(s_g, c, false);
                emit(c, to_json(stability_vr_identity(x.field, y.field, s_dim, parse_real(s_rmax), parse_real(s_smax))));
                return ok;
            }
            const auto f = load_field(s_f), g = load_field(s_g);
            const std::size_t axes = s_kind == "nbhd2" ? 2 : 3;
            if (c.grids.size() != axes) throw UsageError(s_kind + " needs " + std::to_string(axes) + " --grid options");
            std::vector<std::vector<double>> gr;
            for (const auto& s : c.grids) gr.push_back(parse_grid(s));
            StabilityReport rep;
            if (s_kind == "nbhd2") {
                rep = stability_nbhd2(f.field, support_or_all(f), g.field, support_or_all(g), gr[0], gr[1]);
            } else {
                if (!f.weights || !g.weights) throw UsageError("nbhd3 needs weights in both files");
                rep = stability_nbhd3(f.mm(), g.mm(), gr[0], gr[1], gr[2]);
            }
            emit(c, to_json(rep));
            return ok;
        }

        if (*demo) {
            const DemoOutput d = demo_fig == "fig1" ? demo_two_circle(c.seed) : demo_weighted_circle(c.seed);
            Json j = d.meta;
            if (c.emit_svg) {
                const auto path = svg_path(c, demo_fig + ".svg");
                write_text(path, d.svg);
                j["svg"] = path;
            }
            emit(c, j);
            return ok;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return usage;
    } catch (const FormatError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return invalid;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return invalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return invalid;
    }
    return usage;
}
