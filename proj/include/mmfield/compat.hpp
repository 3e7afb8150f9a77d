#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "mmfield/field.hpp"
#include "mmfield/relation.hpp"

namespace mmfield {

/// Counts search nodes against a limit shared by several calls.
class Budget {
public:
    explicit Budget(std::uint64_t limit) : limit_(limit) {}
    /// Consumes one node; false once the limit is exceeded.
    bool spend() { return ++used_ <= limit_; }
    bool exhausted() const { return used_ > limit_; }
    std::uint64_t used() const { return used_; }
    std::uint64_t limit() const { return limit_; }

private:
    std::uint64_t limit_;
    std::uint64_t used_ = 0;
};

namespace detail {

class Bitset {
public:
    Bitset() = default;
    explicit Bitset(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

    void set(std::size_t i) { w_[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
    void reset(std::size_t i) { w_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    bool test(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1U; }
    bool none() const {
        for (auto w : w_)
            if (w) return false;
        return true;
    }
    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : w_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }
    Bitset operator&(const Bitset& o) const {
        Bitset r = *this;
        for (std::size_t k = 0; k < w_.size(); ++k) r.w_[k] &= o.w_[k];
        return r;
    }
    Bitset and_not(const Bitset& o) const {
        Bitset r = *this;
        for (std::size_t k = 0; k < w_.size(); ++k) r.w_[k] &= ~o.w_[k];
        return r;
    }
    template <class F>
    void for_each(F&& f) const {
        for (std::size_t k = 0; k < w_.size(); ++k)
            for (std::uint64_t w = w_[k]; w; w &= w - 1) f(k * 64 + static_cast<std::size_t>(std::countr_zero(w)));
    }
    std::size_t first() const {
        for (std::size_t k = 0; k < w_.size(); ++k)
            if (w_[k]) return k * 64 + static_cast<std::size_t>(std::countr_zero(w_[k]));
        return n_;
    }

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

/// Lifts a matrix over the support index sets to the full index sets.
inline Coupling embed_support_coupling(const MMField& x, const MMField& y, const DenseMatrix& m) {
    const auto sx = x.support(), sy = y.support();
    DenseMatrix full(x.size(), y.size());
    for (std::size_t i = 0; i < sx.size(); ++i)
        for (std::size_t j = 0; j < sy.size(); ++j) full(sx[i], sy[j]) = m(i, j);
    return Coupling(std::move(full));
}

}  // namespace detail

/// Sorted critical values of a distortion threshold between X and Y:
/// 0, every ½|d_X(i,i') - d_Y(j,j')| and every d_B(π_X i, π_Y j), over the
/// given index subsets. Values within 1e-12 are merged keeping the largest,
/// so feasibility at a kept value covers its whole cluster.
inline std::vector<double> critical_levels(const MetricField& x, const MetricField& y, const std::vector<std::size_t>& xs,
                                           const std::vector<std::size_t>& ys) {
    std::vector<double> v{0.0};
    for (std::size_t a = 0; a < xs.size(); ++a)
        for (std::size_t b = a + 1; b < xs.size(); ++b) {
            const double dx = x.d(xs[a], xs[b]);
            v.push_back(0.5 * dx);  // against a repeated y
            for (std::size_t c = 0; c < ys.size(); ++c)
                for (std::size_t e = c + 1; e < ys.size(); ++e) v.push_back(0.5 * std::abs(dx - y.d(ys[c], ys[e])));
        }
    for (std::size_t c = 0; c < ys.size(); ++c)
        for (std::size_t e = c + 1; e < ys.size(); ++e) v.push_back(0.5 * y.d(ys[c], ys[e]));
    for (std::size_t i : xs)
        for (std::size_t j : ys) v.push_back(x.space()->distance(x.value(i), y.value(j)));
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double c : v) {
        if (!out.empty() && c - out.back() <= 1e-12) out.back() = c;
        else out.push_back(c);
    }
    return out;
}

inline std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

/// Pair-compatibility graph at a threshold eps: nodes are pairs (x, y) with
/// d_B(π_X x, π_Y y) <= eps; two nodes are adjacent iff
/// |d_X(x,x') - d_Y(y,y')| <= 2 eps. A relation has distortion <= 2 eps
/// iff it is a clique of this graph.
struct PairGraph {
    std::vector<std::size_t> xs;  ///< row index set (field indices)
    std::vector<std::size_t> ys;  ///< column index set
    std::vector<IndexPair> nodes;  ///< positions into xs / ys
    std::vector<detail::Bitset> adj;

    static PairGraph build(const MetricField& x, const MetricField& y, double eps, std::vector<std::size_t> xs,
                           std::vector<std::size_t> ys) {
        PairGraph g;
        g.xs = std::move(xs);
        g.ys = std::move(ys);
        for (std::size_t a = 0; a < g.xs.size(); ++a)
            for (std::size_t b = 0; b < g.ys.size(); ++b)
                if (x.space()->distance(x.value(g.xs[a]), y.value(g.ys[b])) <= eps) g.nodes.emplace_back(a, b);
        const std::size_t n = g.nodes.size();
        g.adj.assign(n, detail::Bitset(n));
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = u + 1; v < n; ++v) {
                const auto [a, b] = g.nodes[u];
                const auto [c, e] = g.nodes[v];
                if (std::abs(x.d(g.xs[a], g.xs[c]) - y.d(g.ys[b], g.ys[e])) <= 2.0 * eps) {
                    g.adj[u].set(v);
                    g.adj[v].set(u);
                }
            }
        return g;
    }

    std::size_t size() const { return nodes.size(); }
};

/// Bron–Kerbosch with pivoting over maximal cliques. The callback returns
/// false to stop early. Returns false if the budget ran out.
inline bool for_each_maximal_clique(const PairGraph& g, Budget& budget,
                                    const std::function<bool(const std::vector<std::size_t>&)>& visit) {
    const std::size_t n = g.size();
    if (n == 0) return true;
    std::vector<std::size_t> r;
    bool stop = false;
    std::function<bool(detail::Bitset, detail::Bitset)> rec = [&](detail::Bitset p, detail::Bitset x) -> bool {
        if (!budget.spend()) return false;
        if (p.none()) {
            if (x.none() && !visit(r)) stop = true;
            return true;
        }
        // Pivot: vertex of P ∪ X with the most neighbours in P.
        std::size_t pivot = n, best = 0;
        auto consider = [&](std::size_t u) {
            const std::size_t c = (p & g.adj[u]).count();
            if (pivot == n || c > best) {
                pivot = u;
                best = c;
            }
        };
        p.for_each(consider);
        x.for_each(consider);
        const detail::Bitset cand = p.and_not(g.adj[pivot]);
        std::vector<std::size_t> order;
        cand.for_each([&](std::size_t u) { order.push_back(u); });
        for (std::size_t u : order) {
            r.push_back(u);
            const bool ok = rec(p & g.adj[u], x & g.adj[u]);
            r.pop_back();
            if (!ok) return false;
            if (stop) return true;
            p.reset(u);
            x.set(u);
        }
        return true;
    };
    detail::Bitset all(n);
    for (std::size_t u = 0; u < n; ++u) all.set(u);
    return rec(all, detail::Bitset(n));
}

}  // namespace mmfield
