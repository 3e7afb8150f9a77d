#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mmfield/matrix.hpp"
#include "mmfield/relation.hpp"
#include "mmfield/target_space.hpp"

namespace mmfield {

/// Probability vector over an index set.
struct DiscreteMeasure {
    std::vector<double> weights;

    std::size_t size() const noexcept { return weights.size(); }

    static DiscreteMeasure uniform(std::size_t n) {
        if (n == 0) throw std::invalid_argument("uniform measure on an empty set");
        return {std::vector<double>(n, 1.0 / static_cast<double>(n))};
    }
    static DiscreteMeasure dirac(std::size_t n, std::size_t at) {
        DiscreteMeasure m{std::vector<double>(n, 0.0)};
        m.weights.at(at) = 1.0;
        return m;
    }

    bool valid(double tol = Tolerances{}.mass) const {
        double s = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) return false;
            s += w;
        }
        return std::abs(s - 1.0) <= tol;
    }
};

/// Ground costs; +infinity marks a forbidden pair.
using CostMatrix = DenseMatrix;

/// Boolean n x m mask of allowed pairs.
class PairMask {
public:
    PairMask() = default;
    PairMask(std::size_t rows, std::size_t cols, bool fill = false) : rows_(rows), cols_(cols), bits_(rows * cols, fill) {}

    static PairMask from_relation(const Relation& r) {
        PairMask m(r.left_size(), r.right_size());
        for (const auto& [i, j] : r.pairs()) m.set(i, j);
        return m;
    }
    /// Pairs with cost <= threshold.
    static PairMask below(const CostMatrix& c, double threshold) {
        PairMask m(c.rows(), c.cols());
        for (std::size_t i = 0; i < c.rows(); ++i)
            for (std::size_t j = 0; j < c.cols(); ++j) m.bits_[i * m.cols_ + j] = (c(i, j) <= threshold);
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool operator()(std::size_t i, std::size_t j) const noexcept { return bits_[i * cols_ + j] != 0; }
    void set(std::size_t i, std::size_t j, bool v = true) noexcept { bits_[i * cols_ + j] = v ? 1 : 0; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<char> bits_;
};

class InfeasibleTransport : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline constexpr double flow_eps = 1e-15;

/// Dinic max-flow on real capacities.
class MaxFlow {
public:
    explicit MaxFlow(std::size_t n) : adj_(n), level_(n), it_(n) {}

    std::size_t add_edge(std::size_t u, std::size_t v, double cap) {
        adj_[u].push_back({v, adj_[v].size(), cap});
        adj_[v].push_back({u, adj_[u].size() - 1, 0.0});
        return adj_[u].size() - 1;
    }

    double run(std::size_t s, std::size_t t) {
        double total = 0.0;
        while (bfs(s, t)) {
            std::fill(it_.begin(), it_.end(), 0);
            for (double f; (f = dfs(s, t, std::numeric_limits<double>::infinity())) > flow_eps;) total += f;
        }
        return total;
    }

    /// Flow currently on edge number k out of u (the forward edge).
    double flow_on(std::size_t u, std::size_t k) const {
        const Edge& e = adj_[u][k];
        return adj_[e.to][e.rev].cap;
    }

private:
    struct Edge {
        std::size_t to;
        std::size_t rev;
        double cap;
    };

    bool bfs(std::size_t s, std::size_t t) {
        std::fill(level_.begin(), level_.end(), -1);
        std::queue<std::size_t> q;
        level_[s] = 0;
        q.push(s);
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop();
            for (const Edge& e : adj_[u])
                if (e.cap > flow_eps && level_[e.to] < 0) {
                    level_[e.to] = level_[u] + 1;
                    q.push(e.to);
                }
        }
        return level_[t] >= 0;
    }

    double dfs(std::size_t u, std::size_t t, double pushed) {
        if (u == t) return pushed;
        for (std::size_t& k = it_[u]; k < adj_[u].size(); ++k) {
            Edge& e = adj_[u][k];
            if (e.cap <= flow_eps || level_[e.to] != level_[u] + 1) continue;
            const double got = dfs(e.to, t, std::min(pushed, e.cap));
            if (got > flow_eps) {
                e.cap -= got;
                adj_[e.to][e.rev].cap += got;
                return got;
            }
        }
        return 0.0;
    }

    std::vector<std::vector<Edge>> adj_;
    std::vector<int> level_;
    std::vector<std::size_t> it_;
};

/// Successive shortest paths with Dijkstra and reduced-cost potentials, on
/// the transportation network source -> rows -> cols -> sink.
/// Returns the flow matrix; throws InfeasibleTransport if not all mass ships.
inline DenseMatrix min_cost_transport(const std::vector<double>& a, const std::vector<double>& b, const DenseMatrix& cost) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    const std::size_t source = n + m;
    const std::size_t sink = n + m + 1;
    const std::size_t nodes = n + m + 2;
    struct Edge {
        std::size_t to;
        std::size_t rev;
        double cap;
        double cost;
    };
    std::vector<std::vector<Edge>> g(nodes);
    auto add = [&](std::size_t u, std::size_t v, double cap, double c) {
        g[u].push_back({v, g[v].size(), cap, c});
        g[v].push_back({u, g[u].size() - 1, 0.0, -c});
    };
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) add(source, i, a[i], 0.0);
    for (std::size_t j = 0; j < m; ++j) add(n + j, sink, b[j], 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (std::isfinite(cost(i, j))) add(i, n + j, inf, cost(i, j));

    const double total = std::accumulate(a.begin(), a.end(), 0.0);
    double shipped = 0.0;
    std::vector<double> pot(nodes, 0.0), dist(nodes);
    std::vector<std::size_t> prev_node(nodes), prev_edge(nodes);
    std::vector<char> done(nodes);
    using Item = std::pair<double, std::size_t>;

    while (total - shipped > 1e-13) {
        std::fill(dist.begin(), dist.end(), inf);
        std::fill(done.begin(), done.end(), 0);
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[source] = 0.0;
        pq.push({0.0, source});
        while (!pq.empty()) {
            auto [du, u] = pq.top();
            pq.pop();
            if (done[u]) continue;
            done[u] = 1;
            if (u == sink) break;
            for (std::size_t k = 0; k < g[u].size(); ++k) {
                const Edge& e = g[u][k];
                if (e.cap <= flow_eps || done[e.to]) continue;
                const double reduced = std::max(0.0, e.cost + pot[u] - pot[e.to]);
                if (du + reduced < dist[e.to]) {
                    dist[e.to] = du + reduced;
                    prev_node[e.to] = u;
                    prev_edge[e.to] = k;
                    pq.push({dist[e.to], e.to});
                }
            }
        }
        if (!done[sink]) break;
        const double dt = dist[sink];
        for (std::size_t v = 0; v < nodes; ++v) pot[v] += std::min(done[v] ? dist[v] : dt, dt);

        double push = inf;
        for (std::size_t v = sink; v != source; v = prev_node[v]) push = std::min(push, g[prev_node[v]][prev_edge[v]].cap);
        for (std::size_t v = sink; v != source; v = prev_node[v]) {
            Edge& e = g[prev_node[v]][prev_edge[v]];
            e.cap -= push;
            g[v][e.rev].cap += push;
        }
        shipped += push;
    }
    if (total - shipped > 1e-9) throw InfeasibleTransport("no coupling avoids the forbidden (+inf) pairs");

    DenseMatrix flow(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (const Edge& e : g[i])
            if (e.to >= n && e.to < n + m) flow(i, e.to - n) = g[e.to][e.rev].cap;
    return flow;
}

inline void check_shapes(const DiscreteMeasure& mu, const DiscreteMeasure& nu, std::size_t rows, std::size_t cols) {
    if (mu.size() != rows || nu.size() != cols) throw std::invalid_argument("measure sizes do not match the cost matrix");
    if (mu.size() == 0 || nu.size() == 0) throw std::invalid_argument("empty measure");
}

inline std::vector<double> distinct_finite_costs(const CostMatrix& c) {
    std::vector<double> v;
    for (double x : c.data())
        if (std::isfinite(x)) v.push_back(x);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace detail

struct MassResult {
    double value = 0.0;
    DenseMatrix flow;  ///< sub-coupling supported on the mask, achieving value
};

/// Maximum of mu(R) over couplings, R = allowed pairs, as a max-flow.
inline MassResult max_mass_on(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const PairMask& allowed) {
    detail::check_shapes(mu, nu, allowed.rows(), allowed.cols());
    const std::size_t n = mu.size();
    const std::size_t m = nu.size();
    detail::MaxFlow mf(n + m + 2);
    const std::size_t s = n + m;
    const std::size_t t = n + m + 1;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> edge_ids(n);  // (col, edge index)
    for (std::size_t i = 0; i < n; ++i) mf.add_edge(s, i, mu.weights[i]);
    for (std::size_t j = 0; j < m; ++j) mf.add_edge(n + j, t, nu.weights[j]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (allowed(i, j)) edge_ids[i].emplace_back(j, mf.add_edge(i, n + j, std::numeric_limits<double>::infinity()));
    MassResult out;
    out.value = std::min(1.0, mf.run(s, t));
    out.flow = DenseMatrix(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [j, k] : edge_ids[i]) out.flow(i, j) = mf.flow_on(i, k);
    return out;
}

/// Extends a sub-coupling (entrywise below a full coupling's marginals) to a
/// full coupling by spreading the leftover marginals as a product.
inline Coupling complete_coupling(const DenseMatrix& partial, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    DenseMatrix m = partial;
    std::vector<double> ra(mu.size()), rb(nu.size());
    double left = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        ra[i] = std::max(0.0, mu.weights[i] - m.row_sum(i));
        left += ra[i];
    }
    for (std::size_t j = 0; j < nu.size(); ++j) rb[j] = std::max(0.0, nu.weights[j] - m.col_sum(j));
    if (left > 0.0)
        for (std::size_t i = 0; i < mu.size(); ++i)
            for (std::size_t j = 0; j < nu.size(); ++j) m(i, j) += ra[i] * rb[j] / left;
    return Coupling(std::move(m));
}

struct TransportResult {
    double value = 0.0;
    Coupling coupling;
};

/// Exact p-Wasserstein distance (1 <= p < inf) with an optimal coupling.
inline TransportResult wasserstein_p(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostMatrix& c, double p) {
    detail::check_shapes(mu, nu, c.rows(), c.cols());
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("wasserstein_p needs finite p >= 1");
    DenseMatrix powered(c.rows(), c.cols());
    for (std::size_t i = 0; i < c.rows(); ++i)
        for (std::size_t j = 0; j < c.cols(); ++j) {
            if (std::isnan(c(i, j)) || c(i, j) < 0.0) throw std::invalid_argument("costs must be nonnegative");
            powered(i, j) = std::isfinite(c(i, j)) ? std::pow(c(i, j), p) : c(i, j);
        }
    DenseMatrix flow = detail::min_cost_transport(mu.weights, nu.weights, powered);
    double acc = 0.0;
    for (std::size_t i = 0; i < c.rows(); ++i)
        for (std::size_t j = 0; j < c.cols(); ++j)
            if (flow(i, j) > 0.0) acc += flow(i, j) * powered(i, j);
    return {std::pow(acc, 1.0 / p), Coupling(std::move(flow))};
}

/// Bottleneck distance: least threshold t such that a full coupling lives on
/// {C <= t}. Binary search over the exact sorted cost values.
inline TransportResult wasserstein_inf(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostMatrix& c,
                                       double mass_tol = Tolerances{}.mass) {
    detail::check_shapes(mu, nu, c.rows(), c.cols());
    const std::vector<double> levels = detail::distinct_finite_costs(c);
    if (levels.empty()) throw InfeasibleTransport("all pairs are forbidden");
    auto feasible = [&](double t) { return max_mass_on(mu, nu, PairMask::below(c, t)); };
    MassResult top = feasible(levels.back());
    if (top.value < 1.0 - mass_tol) throw InfeasibleTransport("no coupling avoids the forbidden (+inf) pairs");
    std::size_t lo = 0, hi = levels.size() - 1;
    MassResult best = std::move(top);
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        MassResult r = feasible(levels[mid]);
        if (r.value >= 1.0 - mass_tol) {
            hi = mid;
            best = std::move(r);
        } else {
            lo = mid + 1;
        }
    }
    if (lo != levels.size() - 1 || best.flow.empty()) best = feasible(levels[lo]);
    return {levels[lo], complete_coupling(best.flow, mu, nu)};
}

struct ProkhorovResult {
    double value = 0.0;
    double resolution = 0.0;  ///< 0: exact
};

/// Prokhorov distance through its coupling form: least eps with a coupling
/// putting mass >= 1 - eps on {C <= eps}, capped at 1. Between consecutive
/// cost levels c_k the allowed set is fixed, so the infimum is
/// min_k max(c_k, 1 - M_k) with M_k the max mass on {C <= c_k}.
inline ProkhorovResult prokhorov(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostMatrix& c) {
    detail::check_shapes(mu, nu, c.rows(), c.cols());
    const std::vector<double> levels = detail::distinct_finite_costs(c);
    if (levels.empty()) return {1.0, 0.0};
    std::vector<double> mass(levels.size(), -1.0);
    auto mass_at = [&](std::size_t k) {
        if (mass[k] < 0.0) mass[k] = max_mass_on(mu, nu, PairMask::below(c, levels[k])).value;
        return mass[k];
    };
    // First level where the cost term dominates the mass term.
    std::size_t lo = 0, hi = levels.size();
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (levels[mid] >= 1.0 - mass_at(mid)) hi = mid;
        else lo = mid + 1;
    }
    double best = 1.0;
    if (lo < levels.size()) best = std::min(best, levels[lo]);
    if (lo > 0) best = std::min(best, 1.0 - mass_at(lo - 1));
    return {std::max(0.0, best), 0.0};
}

}  // namespace mmfield
