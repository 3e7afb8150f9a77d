#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mmfield/compat.hpp"
#include "mmfield/constructions.hpp"
#include "mmfield/field.hpp"
#include "mmfield/gh.hpp"
#include "mmfield/lp.hpp"
#include "mmfield/random.hpp"
#include "mmfield/relation.hpp"
#include "mmfield/transport.hpp"

namespace mmfield {

inline constexpr double inf_p = std::numeric_limits<double>::infinity();

/// Coupling mass at or below this is outside the support (p = inf sups).
inline constexpr double support_tol = 1e-12;

struct GWObjectiveTerms {
    double m_term = 0.0;
    double d_term = 0.0;
    double value = 0.0;
    double p = 1.0;
};

struct GWResult {
    double value = 0.0;
    Coupling coupling;
    Status status = Status::exact;
    double lower = 0.0;
    double upper = 0.0;
    double p = 1.0;
    std::uint64_t nodes = 0;
};

struct GWOptions {
    std::size_t restarts = 16;
    std::uint64_t budget = default_gh_budget;
    std::uint64_t seed = 0;
    std::size_t exact_gate = 4;  ///< max support size per side for the p < inf global search
};

inline void require_coupling_of(const MMField& x, const MMField& y, const Coupling& mu, double tol = Tolerances{}.mass) {
    if (!mu.has_marginals(x.weights(), y.weights(), tol))
        throw std::invalid_argument("coupling marginals do not match the field weights");
}

/// The two terms of the Gromov-Wasserstein objective for a given coupling.
inline GWObjectiveTerms gw_objective(const MMField& x, const MMField& y, const Coupling& mu, double p) {
    require_same_space(x.field(), y.field());
    require_coupling_of(x, y, mu);
    if (!(p >= 1.0)) throw std::invalid_argument("gw_objective needs p >= 1");
    const MetricField& fx = x.field();
    const MetricField& fy = y.field();
    std::vector<IndexPair> supp;
    std::vector<double> w;
    const double tau = std::isinf(p) ? support_tol : 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
            if (mu(i, j) > tau) {
                supp.emplace_back(i, j);
                w.push_back(mu(i, j));
            }
    GWObjectiveTerms t;
    t.p = p;
    if (std::isinf(p)) {
        for (std::size_t a = 0; a < supp.size(); ++a) {
            t.d_term = std::max(t.d_term, fx.space()->distance(fx.value(supp[a].first), fy.value(supp[a].second)));
            for (std::size_t b = a + 1; b < supp.size(); ++b)
                t.m_term = std::max(t.m_term, std::abs(fx.d(supp[a].first, supp[b].first) - fy.d(supp[a].second, supp[b].second)));
        }
    } else {
        double ms = 0.0, ds = 0.0;
        for (std::size_t a = 0; a < supp.size(); ++a) {
            ds += w[a] * std::pow(fx.space()->distance(fx.value(supp[a].first), fy.value(supp[a].second)), p);
            for (std::size_t b = 0; b < supp.size(); ++b)
                ms += w[a] * w[b] * std::pow(std::abs(fx.d(supp[a].first, supp[b].first) - fy.d(supp[a].second, supp[b].second)), p);
        }
        t.m_term = std::pow(ms, 1.0 / p);
        t.d_term = std::pow(ds, 1.0 / p);
    }
    t.value = std::max(0.5 * t.m_term, t.d_term);
    return t;
}

namespace detail {

/// Data of a GW problem restricted to the supports, with entries rescaled
/// so the largest is 1 (keeps high powers in range).
struct GWData {
    std::vector<std::size_t> sx, sy;
    std::vector<double> a, b;
    std::size_t n = 0, m = 0, N = 0;
    double p = 1.0;
    double scale = 1.0;       ///< objective = scale * F^(1/p)
    std::vector<double> Q;    ///< N x N, (½|Δ| / scale)^p
    std::vector<double> L;    ///< N, (d_B / scale)^p

    GWData(const MMField& x, const MMField& y, double p_) : p(p_) {
        sx = x.support();
        sy = y.support();
        n = sx.size();
        m = sy.size();
        N = n * m;
        for (std::size_t i : sx) a.push_back(x.weight(i));
        for (std::size_t j : sy) b.push_back(y.weight(j));
        const double sa = std::accumulate(a.begin(), a.end(), 0.0);
        const double sb = std::accumulate(b.begin(), b.end(), 0.0);
        for (double& v : a) v /= sa;
        for (double& v : b) v /= sb;
        const MetricField& fx = x.field();
        const MetricField& fy = y.field();
        std::vector<double> half(N * N), db(N);
        double mx = 0.0;
        for (std::size_t u = 0; u < N; ++u) {
            db[u] = fx.space()->distance(fx.value(sx[u / m]), fy.value(sy[u % m]));
            mx = std::max(mx, db[u]);
            for (std::size_t v = 0; v < N; ++v) {
                half[u * N + v] = 0.5 * std::abs(fx.d(sx[u / m], sx[v / m]) - fy.d(sy[u % m], sy[v % m]));
                mx = std::max(mx, half[u * N + v]);
            }
        }
        scale = mx > 0.0 ? mx : 1.0;
        Q.resize(N * N);
        L.resize(N);
        for (std::size_t k = 0; k < N * N; ++k) Q[k] = std::pow(half[k] / scale, p);
        for (std::size_t u = 0; u < N; ++u) L[u] = std::pow(db[u] / scale, p);
    }

    double quad(const std::vector<double>& mu) const {
        double s = 0.0;
        for (std::size_t u = 0; u < N; ++u) {
            if (mu[u] == 0.0) continue;
            double r = 0.0;
            for (std::size_t v = 0; v < N; ++v) r += Q[u * N + v] * mu[v];
            s += mu[u] * r;
        }
        return s;
    }
    double lin(const std::vector<double>& mu) const {
        double s = 0.0;
        for (std::size_t u = 0; u < N; ++u) s += L[u] * mu[u];
        return s;
    }
    /// max(A/2^p, L) in scaled units; the objective is scale * F^(1/p).
    double F(const std::vector<double>& mu) const { return std::max(std::max(quad(mu), 0.0), lin(mu)); }
    double value(const std::vector<double>& mu) const { return scale * std::pow(F(mu), 1.0 / p); }

    Coupling embed(const std::vector<double>& mu, std::size_t full_n, std::size_t full_m) const {
        DenseMatrix mat(full_n, full_m);
        for (std::size_t u = 0; u < N; ++u) mat(sx[u / m], sy[u % m]) = mu[u];
        return Coupling(std::move(mat));
    }
};

/// Sequential linear programming with a trust region on max(A/2^p, L).
inline std::vector<double> slp_polish(const GWData& g, std::vector<double> mu, std::size_t max_iter = 400) {
    const std::size_t N = g.N;
    double f0 = g.F(mu);
    double delta = 0.25;
    for (std::size_t it = 0; it < max_iter && delta > 1e-11; ++it) {
        std::vector<double> grad(N, 0.0);
        for (std::size_t u = 0; u < N; ++u) {
            double r = 0.0;
            for (std::size_t v = 0; v < N; ++v) r += g.Q[u * N + v] * mu[v];
            grad[u] = 2.0 * r;
        }
        const double a0 = g.quad(mu);
        std::vector<double> lb(N), ub(N);
        for (std::size_t u = 0; u < N; ++u) {
            lb[u] = std::max(0.0, mu[u] - delta);
            ub[u] = std::min(std::min(g.a[u / g.m], g.b[u % g.m]), mu[u] + delta);
            if (ub[u] < lb[u]) ub[u] = lb[u];
        }
        // Variables z = mu - lb (N of them) and t.
        LinearProgram lp;
        lp.vars = N + 1;
        lp.cost.assign(N + 1, 0.0);
        lp.cost[N] = 1.0;
        lp.upper.assign(N + 1, inf_p);
        for (std::size_t u = 0; u < N; ++u) lp.upper[u] = ub[u] - lb[u];
        for (std::size_t i = 0; i < g.n; ++i) {
            std::vector<double> row(N + 1, 0.0);
            double rhs = g.a[i];
            for (std::size_t j = 0; j < g.m; ++j) {
                row[i * g.m + j] = 1.0;
                rhs -= lb[i * g.m + j];
            }
            lp.rows.push_back({std::move(row), LinearProgram::Sense::eq, rhs});
        }
        for (std::size_t j = 0; j + 1 < g.m; ++j) {
            std::vector<double> row(N + 1, 0.0);
            double rhs = g.b[j];
            for (std::size_t i = 0; i < g.n; ++i) {
                row[i * g.m + j] = 1.0;
                rhs -= lb[i * g.m + j];
            }
            lp.rows.push_back({std::move(row), LinearProgram::Sense::eq, rhs});
        }
        {
            // a0 + grad·(lb + z - mu) <= t
            std::vector<double> row(N + 1, 0.0);
            double rhs = -a0;
            for (std::size_t u = 0; u < N; ++u) {
                row[u] = grad[u];
                rhs -= grad[u] * (lb[u] - mu[u]);
            }
            row[N] = -1.0;
            lp.rows.push_back({std::move(row), LinearProgram::Sense::le, rhs});
        }
        {
            std::vector<double> row(N + 1, 0.0);
            double rhs = 0.0;
            for (std::size_t u = 0; u < N; ++u) {
                row[u] = g.L[u];
                rhs -= g.L[u] * lb[u];
            }
            row[N] = -1.0;
            lp.rows.push_back({std::move(row), LinearProgram::Sense::le, rhs});
        }
        const LPResult r = solve_lp(lp);
        if (r.status != LPResult::Status::optimal) {
            delta *= 0.25;
            continue;
        }
        std::vector<double> cand(N);
        for (std::size_t u = 0; u < N; ++u) cand[u] = lb[u] + r.x[u];
        const double predicted = f0 - r.x[N];
        if (predicted <= 1e-16 * std::max(1.0, f0)) break;
        const double f1 = g.F(cand);
        const double actual = f0 - f1;
        const double ratio = actual / predicted;
        if (actual > 0.0) {
            mu = std::move(cand);
            f0 = f1;
        }
        if (ratio < 0.25) delta *= 0.25;
        else if (ratio > 0.75) delta = std::min(1.0, delta * 2.0);
    }
    return mu;
}

/// Extreme points of the transportation polytope: spanning trees of the
/// complete bipartite graph whose unique flow is nonnegative.
inline std::vector<std::vector<double>> transport_vertices(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size(), m = b.size(), N = n * m, k = n + m - 1;
    std::vector<std::vector<double>> out;
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    auto solve_tree = [&](const std::vector<std::size_t>& cells, std::vector<double>& mu) -> bool {
        // Union-find: must be acyclic on n + m nodes with n + m - 1 edges.
        std::vector<std::size_t> parent(n + m);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
            return parent[v] == v ? v : parent[v] = find(parent[v]);
        };
        for (std::size_t c : cells) {
            const std::size_t u = find(c / m), v = find(n + c % m);
            if (u == v) return false;
            parent[u] = v;
        }
        // Peel leaves.
        std::vector<double> ra = a, rb = b;
        std::vector<char> used(cells.size(), 0);
        mu.assign(N, 0.0);
        for (std::size_t round = 0; round < cells.size(); ++round) {
            bool progressed = false;
            for (std::size_t e = 0; e < cells.size() && !progressed; ++e) {
                if (used[e]) continue;
                const std::size_t i = cells[e] / m, j = cells[e] % m;
                std::size_t deg_i = 0, deg_j = 0;
                for (std::size_t f = 0; f < cells.size(); ++f) {
                    if (used[f]) continue;
                    deg_i += (cells[f] / m == i);
                    deg_j += (cells[f] % m == j);
                }
                if (deg_i == 1) {
                    mu[cells[e]] = ra[i];
                } else if (deg_j == 1) {
                    mu[cells[e]] = rb[j];
                } else {
                    continue;
                }
                ra[i] -= mu[cells[e]];
                rb[j] -= mu[cells[e]];
                used[e] = 1;
                progressed = true;
            }
            if (!progressed) return false;
        }
        for (double v : mu)
            if (v < -1e-12) return false;
        for (double& v : mu) v = std::max(0.0, v);
        return true;
    };
    while (true) {
        std::vector<double> mu;
        if (solve_tree(pick, mu)) {
            bool dup = false;
            for (const auto& o : out) {
                double diff = 0.0;
                for (std::size_t u = 0; u < N; ++u) diff = std::max(diff, std::abs(o[u] - mu[u]));
                if (diff < 1e-12) {
                    dup = true;
                    break;
                }
            }
            if (!dup) out.push_back(std::move(mu));
        }
        // Next combination.
        std::size_t i = k;
        while (i > 0 && pick[i - 1] == N - k + i - 1) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
    return out;
}

/// Grid over the free entries (all but the last row and column), step 1/steps
/// of each entry's feasible range; infeasible completions are skipped.
inline void for_each_grid_coupling(const std::vector<double>& a, const std::vector<double>& b, std::size_t steps,
                                   const std::function<void(const std::vector<double>&)>& f) {
    const std::size_t n = a.size(), m = b.size();
    const std::size_t dims = (n - 1) * (m - 1);
    std::vector<std::size_t> idx(dims, 0);
    std::vector<double> mu(n * m);
    while (true) {
        bool ok = true;
        std::vector<double> rows(n, 0.0), cols(m, 0.0);
        for (std::size_t i = 0; i + 1 < n && ok; ++i)
            for (std::size_t j = 0; j + 1 < m; ++j) {
                const double v = std::min(a[i], b[j]) * static_cast<double>(idx[i * (m - 1) + j]) / static_cast<double>(steps);
                mu[i * m + j] = v;
                rows[i] += v;
                cols[j] += v;
            }
        for (std::size_t i = 0; i + 1 < n && ok; ++i) {
            mu[i * m + m - 1] = a[i] - rows[i];
            if (mu[i * m + m - 1] < -1e-12) ok = false;
            cols[m - 1] += mu[i * m + m - 1];
        }
        for (std::size_t j = 0; j < m && ok; ++j) {
            mu[(n - 1) * m + j] = b[j] - cols[j];
            if (mu[(n - 1) * m + j] < -1e-12) ok = false;
        }
        if (ok) {
            for (double& v : mu) v = std::max(0.0, v);
            f(mu);
        }
        std::size_t d = 0;
        while (d < dims && idx[d] == steps) idx[d++] = 0;
        if (d == dims) break;
        ++idx[d];
    }
}

/// Rounds a nonnegative matrix onto the coupling set exactly: scale rows and
/// columns down to their targets, then add the product of the deficits.
inline std::vector<double> round_to_coupling(std::vector<double> mu, const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size(), m = b.size();
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += mu[i * m + j];
        if (s > a[i] && s > 0.0)
            for (std::size_t j = 0; j < m; ++j) mu[i * m + j] *= a[i] / s;
    }
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += mu[i * m + j];
        if (s > b[j] && s > 0.0)
            for (std::size_t i = 0; i < n; ++i) mu[i * m + j] *= b[j] / s;
    }
    std::vector<double> ra(n), rb(m);
    double left = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += mu[i * m + j];
        ra[i] = std::max(0.0, a[i] - s);
        left += ra[i];
    }
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += mu[i * m + j];
        rb[j] = std::max(0.0, b[j] - s);
    }
    if (left > 0.0)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) mu[i * m + j] += ra[i] * rb[j] / left;
    return mu;
}

/// Entropic mirror descent on the active term with Sinkhorn projection.
inline std::vector<double> mirror_descent(const GWData& g, std::vector<double> mu, std::size_t iters = 300) {
    const std::size_t N = g.N;
    std::vector<double> best = mu;
    double fbest = g.F(mu);
    for (std::size_t k = 0; k < iters; ++k) {
        std::vector<double> grad(N);
        if (g.quad(mu) >= g.lin(mu)) {
            for (std::size_t u = 0; u < N; ++u) {
                double r = 0.0;
                for (std::size_t v = 0; v < N; ++v) r += g.Q[u * N + v] * mu[v];
                grad[u] = 2.0 * r;
            }
        } else {
            grad = g.L;
        }
        double gmax = 0.0;
        for (double v : grad) gmax = std::max(gmax, std::abs(v));
        if (gmax == 0.0) break;
        const double eta = 2.0 / std::sqrt(static_cast<double>(k) + 1.0);
        for (std::size_t u = 0; u < N; ++u) mu[u] = std::max(mu[u], 1e-300) * std::exp(-eta * grad[u] / gmax);
        for (int s = 0; s < 30; ++s) {
            for (std::size_t i = 0; i < g.n; ++i) {
                double t = 0.0;
                for (std::size_t j = 0; j < g.m; ++j) t += mu[i * g.m + j];
                if (t > 0.0)
                    for (std::size_t j = 0; j < g.m; ++j) mu[i * g.m + j] *= g.a[i] / t;
            }
            for (std::size_t j = 0; j < g.m; ++j) {
                double t = 0.0;
                for (std::size_t i = 0; i < g.n; ++i) t += mu[i * g.m + j];
                if (t > 0.0)
                    for (std::size_t i = 0; i < g.n; ++i) mu[i * g.m + j] *= g.b[j] / t;
            }
        }
        std::vector<double> rounded = round_to_coupling(mu, g.a, g.b);
        const double f = g.F(rounded);
        if (f < fbest) {
            fbest = f;
            best = std::move(rounded);
        }
    }
    return best;
}

/// Greedy plan: repeatedly fill the cheapest cell by d_B.
inline std::vector<double> greedy_coupling(const GWData& g) {
    std::vector<std::size_t> order(g.N);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t u, std::size_t v) { return g.L[u] < g.L[v]; });
    std::vector<double> ra = g.a, rb = g.b, mu(g.N, 0.0);
    for (std::size_t u : order) {
        const double t = std::min(ra[u / g.m], rb[u % g.m]);
        mu[u] = t;
        ra[u / g.m] -= t;
        rb[u % g.m] -= t;
    }
    return round_to_coupling(mu, g.a, g.b);
}

inline std::vector<double> product_coupling(const GWData& g) {
    std::vector<double> mu(g.N);
    for (std::size_t u = 0; u < g.N; ++u) mu[u] = g.a[u / g.m] * g.b[u % g.m];
    return mu;
}

inline std::vector<double> random_coupling(const GWData& g, Rng& rng) {
    std::vector<double> mu(g.N);
    for (double& v : mu) v = -std::log(1.0 - rng.uniform());
    for (int s = 0; s < 200; ++s) {
        for (std::size_t i = 0; i < g.n; ++i) {
            double t = 0.0;
            for (std::size_t j = 0; j < g.m; ++j) t += mu[i * g.m + j];
            for (std::size_t j = 0; j < g.m; ++j) mu[i * g.m + j] *= g.a[i] / t;
        }
        for (std::size_t j = 0; j < g.m; ++j) {
            double t = 0.0;
            for (std::size_t i = 0; i < g.n; ++i) t += mu[i * g.m + j];
            for (std::size_t i = 0; i < g.n; ++i) mu[i * g.m + j] *= g.b[j] / t;
        }
    }
    return round_to_coupling(mu, g.a, g.b);
}

/// W_p^p between two discrete laws on the line via quantile functions.
inline double wasserstein_1d_pow(std::vector<std::pair<double, double>> u, std::vector<std::pair<double, double>> v, double p) {
    std::sort(u.begin(), u.end());
    std::sort(v.begin(), v.end());
    std::size_t i = 0, j = 0;
    double ru = u.empty() ? 0.0 : u[0].second, rv = v.empty() ? 0.0 : v[0].second;
    double total = 0.0;
    while (i < u.size() && j < v.size()) {
        const double step = std::min(ru, rv);
        const double gap = std::abs(u[i].first - v[j].first);
        total += step * (std::isinf(p) ? 0.0 : std::pow(gap, p));
        ru -= step;
        rv -= step;
        if (ru <= 1e-15 && ++i < u.size()) ru = u[i].second;
        if (rv <= 1e-15 && ++j < v.size()) rv = v[j].second;
    }
    return total;
}

}  // namespace detail

/// Lower bound for p < inf: the larger of the two terms each minimised on
/// its own (the value term exactly, the distance term through the
/// distance-distribution bound).
inline double gw_lower_bound(const MMField& x, const MMField& y, double p) {
    const auto sx = x.support(), sy = y.support();
    DiscreteMeasure a, b;
    for (std::size_t i : sx) a.weights.push_back(x.weight(i));
    for (std::size_t j : sy) b.weights.push_back(y.weight(j));
    const MetricField& fx = x.field();
    const MetricField& fy = y.field();
    CostMatrix db(sx.size(), sy.size()), tl(sx.size(), sy.size());
    for (std::size_t i = 0; i < sx.size(); ++i)
        for (std::size_t j = 0; j < sy.size(); ++j) {
            db(i, j) = fx.space()->distance(fx.value(sx[i]), fy.value(sy[j]));
            std::vector<std::pair<double, double>> du, dv;
            for (std::size_t k = 0; k < sx.size(); ++k) du.emplace_back(fx.d(sx[i], sx[k]), a.weights[k]);
            for (std::size_t k = 0; k < sy.size(); ++k) dv.emplace_back(fy.d(sy[j], sy[k]), b.weights[k]);
            tl(i, j) = std::pow(detail::wasserstein_1d_pow(du, dv, p), 1.0 / p);
        }
    const double value_term = wasserstein_p(a, b, db, p).value;
    const double dist_term = wasserstein_p(a, b, tl, p).value;
    return std::max(value_term, 0.5 * dist_term);
}

namespace detail {

inline GWResult gw_solve_finite(const MMField& x, const MMField& y, double p, const GWOptions& opt) {
    GWData g(x, y, p);
    std::vector<std::vector<double>> starts;
    const bool exact = g.n <= opt.exact_gate && g.m <= opt.exact_gate;
    if (g.n == 1 || g.m == 1) {
        std::vector<double> mu = product_coupling(g);
        GWResult r;
        r.p = p;
        r.value = r.lower = r.upper = g.value(mu);
        r.coupling = g.embed(mu, x.size(), y.size());
        return r;
    }
    std::vector<double> best;
    double fbest = inf_p;
    auto offer = [&](const std::vector<double>& mu) {
        const double f = g.F(mu);
        if (f < fbest) {
            fbest = f;
            best = mu;
        }
    };
    if (exact) {
        // Rank every vertex and grid point; polish the most promising.
        std::vector<std::pair<double, std::vector<double>>> pool;
        for (auto& v : transport_vertices(g.a, g.b)) pool.emplace_back(g.F(v), std::move(v));
        const std::size_t dims = (g.n - 1) * (g.m - 1);
        std::size_t steps = 1;
        while (std::pow(static_cast<double>(steps + 2), static_cast<double>(dims)) <= 60000.0) ++steps;
        std::vector<std::pair<double, std::vector<double>>> grid;
        for_each_grid_coupling(g.a, g.b, steps, [&](const std::vector<double>& mu) { grid.emplace_back(g.F(mu), mu); });
        auto by_value = [](const auto& l, const auto& r) { return l.first < r.first; };
        std::stable_sort(pool.begin(), pool.end(), by_value);
        std::stable_sort(grid.begin(), grid.end(), by_value);
        for (std::size_t k = 0; k < pool.size() && k < 12; ++k) starts.push_back(pool[k].second);
        for (std::size_t k = 0; k < grid.size() && k < 12; ++k) starts.push_back(grid[k].second);
        for (const auto& v : pool) offer(v.second);
    }
    starts.push_back(product_coupling(g));
    starts.push_back(greedy_coupling(g));
    Rng rng(opt.seed);
    for (std::size_t r = 0; r < opt.restarts; ++r) starts.push_back(random_coupling(g, rng));

    const bool polish = g.N <= 64;
    for (auto& s : starts) {
        std::vector<double> mu = exact ? s : mirror_descent(g, s);
        if (polish) mu = slp_polish(g, std::move(mu));
        offer(round_to_coupling(std::move(mu), g.a, g.b));
    }

    GWResult r;
    r.p = p;
    r.value = g.value(best);
    r.coupling = g.embed(best, x.size(), y.size());
    if (exact) {
        r.status = Status::exact;
        r.lower = r.upper = r.value;
    } else {
        r.status = Status::local;
        r.upper = r.value;
        r.lower = std::min(r.upper, gw_lower_bound(x, y, p));
    }
    return r;
}

/// Feasibility at a level for p = inf: some clique of the pair graph on the
/// supports carries a full-mass coupling. Returns the witness flow.
enum class CliqueOutcome { found, none, exhausted };

inline CliqueOutcome full_mass_clique(const MMField& x, const MMField& y, double level, Budget& budget, DenseMatrix& flow,
                                      double mass_tol) {
    const auto sx = x.support(), sy = y.support();
    PairGraph g = PairGraph::build(x.field(), y.field(), level, sx, sy);
    DiscreteMeasure a, b;
    for (std::size_t i : sx) a.weights.push_back(x.weight(i));
    for (std::size_t j : sy) b.weights.push_back(y.weight(j));
    bool found = false;
    const bool complete = for_each_maximal_clique(g, budget, [&](const std::vector<std::size_t>& clique) {
        PairMask mask(sx.size(), sy.size());
        for (std::size_t u : clique) mask.set(g.nodes[u].first, g.nodes[u].second);
        MassResult mr = max_mass_on(a, b, mask);
        if (mr.value >= 1.0 - mass_tol) {
            found = true;
            flow = complete_coupling(mr.flow, a, b).matrix();
            return false;
        }
        return true;
    });
    if (found) return CliqueOutcome::found;
    return complete ? CliqueOutcome::none : CliqueOutcome::exhausted;
}

inline GWResult gw_solve_inf(const MMField& x, const MMField& y, const GWOptions& opt) {
    const auto sx = x.support(), sy = y.support();
    const std::vector<double> levels = critical_levels(x.field(), y.field(), sx, sy);
    Budget budget(opt.budget);
    std::size_t lo = 0, hi = levels.size() - 1;
    DiscreteMeasure a, b;
    for (std::size_t i : sx) a.weights.push_back(x.weight(i));
    for (std::size_t j : sy) b.weights.push_back(y.weight(j));
    DenseMatrix witness = Coupling::product(a.weights, b.weights).matrix();  // feasible at the top level
    bool exhausted = false;
    std::size_t infeasible_below = 0;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        DenseMatrix flow;
        const CliqueOutcome o = full_mass_clique(x, y, levels[mid], budget, flow, 1e-9);
        if (o == CliqueOutcome::found) {
            hi = mid;
            witness = std::move(flow);
        } else if (o == CliqueOutcome::none) {
            lo = mid + 1;
            infeasible_below = mid + 1;
        } else {
            exhausted = true;
            break;
        }
    }
    GWResult r;
    r.p = inf_p;
    r.nodes = budget.used();
    r.coupling = embed_support_coupling(x, y, witness);
    if (!exhausted) {
        r.status = Status::exact;
        r.value = r.lower = r.upper = levels[lo];
        return r;
    }
    r.status = Status::bounds_only;
    r.upper = gw_objective(x, y, r.coupling, inf_p).value;
    CostMatrix db(sx.size(), sy.size());
    for (std::size_t i = 0; i < sx.size(); ++i)
        for (std::size_t j = 0; j < sy.size(); ++j)
            db(i, j) = x.field().space()->distance(x.field().value(sx[i]), y.field().value(sy[j]));
    double lower = wasserstein_inf(a, b, db).value;
    if (infeasible_below > 0 && infeasible_below < levels.size()) lower = std::max(lower, levels[infeasible_below]);
    r.lower = std::min(lower, r.upper);
    r.value = r.upper;
    return r;
}

}  // namespace detail

/// Gromov-Wasserstein distance between mm-fields. p = inf_p selects the
/// exact combinatorial search; finite p a global search (small supports)
/// or multi-start local descent.
inline GWResult gw_solve(const MMField& x, const MMField& y, double p, const GWOptions& opt = {}) {
    require_same_space(x.field(), y.field());
    if (!(p >= 1.0)) throw std::invalid_argument("gw_solve needs p >= 1");
    if (x.support().empty() || y.support().empty()) throw std::invalid_argument("gw_solve: empty support");
    return std::isinf(p) ? detail::gw_solve_inf(x, y, opt) : detail::gw_solve_finite(x, y, p, opt);
}

/// Draws index sequences x_i ~ μ_X and y_i from the coupling's conditional
/// law given x_i, and returns max(½ sup_{i,j} m, sup_i d) over the draws.
/// The draws are nested in n_seq for a fixed seed.
inline double gw_inf_from_sequences(const MMField& x, const MMField& y, const Coupling& mu, std::size_t n_seq,
                                    std::uint64_t seed) {
    require_same_space(x.field(), y.field());
    require_coupling_of(x, y, mu);
    Rng rng(seed);
    Categorical px(x.weights());
    std::vector<Categorical> rows;
    rows.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::vector<double> w(y.size());
        double s = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j) s += (w[j] = mu(i, j));
        if (!(s > 0.0)) w.assign(y.size(), 1.0);  // unreachable row
        rows.emplace_back(w);
    }
    const MetricField& fx = x.field();
    const MetricField& fy = y.field();
    std::vector<IndexPair> seen;
    double msup = 0.0, dsup = 0.0;
    for (std::size_t k = 0; k < n_seq; ++k) {
        const std::size_t i = px(rng);
        const std::size_t j = rows[i](rng);
        dsup = std::max(dsup, fx.space()->distance(fx.value(i), fy.value(j)));
        for (const auto& [a, b] : seen) msup = std::max(msup, std::abs(fx.d(i, a) - fy.d(j, b)));
        if (std::find(seen.begin(), seen.end(), IndexPair{i, j}) == seen.end()) seen.emplace_back(i, j);
    }
    return std::max(0.5 * msup, dsup);
}

/// Upper bound from isometric embeddings into a common field Z: the
/// Wasserstein distance of the pushforward weights over d_Z.
inline double gw_embedding_upper(const MMField& x, const MMField& y, const MetricField& z, const std::vector<std::size_t>& iota_x,
                                 const std::vector<std::size_t>& iota_y, double p, const Tolerances& tol = {}) {
    require_same_space(x.field(), z);
    require_same_space(y.field(), z);
    detail::check_isometric_embedding(x.field(), z, iota_x, tol.metric, "iota_X");
    detail::check_isometric_embedding(y.field(), z, iota_y, tol.metric, "iota_Y");
    DiscreteMeasure a{x.weights()}, b{y.weights()};
    CostMatrix c(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j) c(i, j) = z.d(iota_x[i], iota_y[j]);
    return std::isinf(p) ? wasserstein_inf(a, b, c).value : wasserstein_p(a, b, c, p).value;
}

}  // namespace mmfield
