#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmfield/field.hpp"
#include "mmfield/gw.hpp"
#include "mmfield/random.hpp"
#include "mmfield/transport.hpp"

namespace mmfield {

/// An n x n pseudo-distance matrix with n points of B.
struct AugmentedDistanceMatrix {
    DenseMatrix r;
    std::vector<BPoint> b;

    std::size_t size() const noexcept { return b.size(); }
    friend bool operator==(const AugmentedDistanceMatrix&, const AugmentedDistanceMatrix&) = default;
};

using ADM = AugmentedDistanceMatrix;

/// Checks membership in the pseudo-metric part; values are unconstrained.
inline bool is_valid_adm(const ADM& a, double tol = Tolerances{}.metric) {
    const std::size_t n = a.size();
    if (a.r.rows() != n || a.r.cols() != n) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(a.r(i, i)) > tol) return false;
        for (std::size_t j = 0; j < n; ++j) {
            if (!(a.r(i, j) >= -tol) || std::abs(a.r(i, j) - a.r(j, i)) > tol) return false;
            for (std::size_t k = 0; k < n; ++k)
                if (a.r(i, k) > a.r(i, j) + a.r(j, k) + tol) return false;
        }
    }
    return true;
}

/// The ADM of an index tuple (repeats allowed).
inline ADM adm_of(const MetricField& x, const std::vector<std::size_t>& idx) {
    ADM a;
    a.r = DenseMatrix(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= x.size()) throw std::out_of_range("adm_of: index out of range");
        a.b.push_back(x.value(idx[i]));
        for (std::size_t j = 0; j < idx.size(); ++j) a.r(i, j) = x.d(idx[i], idx[j]);
    }
    return a;
}

/// max(½ max|r - r'|, max d_B(b_i, b'_i)).
inline double rho_n(const TargetSpace& space, const ADM& a, const ADM& c) {
    if (a.size() != c.size()) throw std::invalid_argument("rho_n: size mismatch");
    double mr = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mb = std::max(mb, space.distance(a.b[i], c.b[i]));
        for (std::size_t j = i + 1; j < a.size(); ++j) mr = std::max(mr, std::abs(a.r(i, j) - c.r(i, j)));
    }
    return std::max(0.5 * mr, mb);
}

/// Leading n' x n' block (projection onto the first n' coordinates).
inline ADM truncate_adm(const ADM& a, std::size_t n) {
    if (n > a.size()) throw std::invalid_argument("truncate_adm: n too large");
    ADM t;
    t.r = DenseMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        t.b.push_back(a.b[i]);
        for (std::size_t j = 0; j < n; ++j) t.r(i, j) = a.r(i, j);
    }
    return t;
}

/// A finitely supported law on ADMs of a common size. Sampled laws have
/// uniform weights 1/m.
struct ADMDistribution {
    struct Provenance {
        std::string field_id;
        std::size_t n = 0;
        std::size_t m = 0;
        std::uint64_t seed = 0;
    };
    TargetSpacePtr space;
    std::vector<ADM> samples;
    std::vector<double> weights;
    std::vector<std::vector<std::size_t>> tuples;  ///< source index tuples, when known
    Provenance provenance;

    std::size_t n() const { return samples.empty() ? 0 : samples.front().size(); }
};

using EmpiricalADMDistribution = ADMDistribution;

/// m i.i.d. n-tuples from μ_X^n, deterministic given the seed.
inline ADMDistribution sample_adm(const MMField& x, std::size_t n, std::size_t m, std::uint64_t seed,
                                  const std::string& field_id = "") {
    if (n == 0 || m == 0) throw std::invalid_argument("sample_adm: n and m must be positive");
    if (x.support().empty()) throw std::invalid_argument("sample_adm: empty support");
    Rng rng(seed);
    Categorical pick(x.weights());
    ADMDistribution d;
    d.space = x.field().space();
    d.provenance = {field_id, n, m, seed};
    d.samples.reserve(m);
    for (std::size_t s = 0; s < m; ++s) {
        std::vector<std::size_t> idx(n);
        for (auto& i : idx) i = pick(rng);
        d.samples.push_back(adm_of(x.field(), idx));
        d.tuples.push_back(std::move(idx));
    }
    d.weights.assign(m, 1.0 / static_cast<double>(m));
    return d;
}

/// The exact law of the ADM of an i.i.d. n-tuple: all support^n tuples
/// with product weights. Feasible only for small support^n.
inline ADMDistribution exact_adm_distribution(const MMField& x, std::size_t n, std::size_t max_tuples = 1u << 20) {
    const auto supp = x.support();
    if (supp.empty() || n == 0) throw std::invalid_argument("exact_adm_distribution: empty");
    double count = std::pow(static_cast<double>(supp.size()), static_cast<double>(n));
    if (count > static_cast<double>(max_tuples)) throw std::length_error("exact_adm_distribution: too many tuples");
    ADMDistribution d;
    d.space = x.field().space();
    d.provenance = {"", n, static_cast<std::size_t>(count), 0};
    std::vector<std::size_t> pos(n, 0);
    while (true) {
        std::vector<std::size_t> idx(n);
        double w = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            idx[k] = supp[pos[k]];
            w *= x.weight(idx[k]);
        }
        d.samples.push_back(adm_of(x.field(), idx));
        d.tuples.push_back(std::move(idx));
        d.weights.push_back(w);
        std::size_t k = 0;
        while (k < n && ++pos[k] == supp.size()) pos[k++] = 0;
        if (k == n) break;
    }
    return d;
}

namespace detail {

inline std::vector<double> adm_key(const ADM& a) {
    std::vector<double> key;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) key.push_back(a.r(i, j));
    for (const auto& b : a.b) {
        if (b.is_index()) key.push_back(static_cast<double>(b.idx()));
        else key.insert(key.end(), b.coords().begin(), b.coords().end());
    }
    return key;
}

/// Merges identical ADMs, summing their weights. Exact for transport.
inline void compress(const ADMDistribution& d, std::vector<const ADM*>& atoms, std::vector<double>& w) {
    std::map<std::vector<double>, std::size_t> seen;
    for (std::size_t s = 0; s < d.samples.size(); ++s) {
        auto [it, fresh] = seen.emplace(adm_key(d.samples[s]), atoms.size());
        if (fresh) {
            atoms.push_back(&d.samples[s]);
            w.push_back(d.weights[s]);
        } else {
            w[it->second] += d.weights[s];
        }
    }
}

}  // namespace detail

/// Wasserstein distance between two ADM laws with ground metric rho_n.
inline double adm_wasserstein(const ADMDistribution& d1, const ADMDistribution& d2, double p) {
    if (d1.samples.empty() || d2.samples.empty()) throw std::invalid_argument("adm_wasserstein: empty distribution");
    if (d1.n() != d2.n()) throw std::invalid_argument("adm_wasserstein: size mismatch");
    if (!same_space(d1.space, d2.space)) throw std::invalid_argument("adm_wasserstein: different target spaces");
    std::vector<const ADM*> a1, a2;
    DiscreteMeasure w1, w2;
    detail::compress(d1, a1, w1.weights);
    detail::compress(d2, a2, w2.weights);
    CostMatrix c(a1.size(), a2.size());
    for (std::size_t i = 0; i < a1.size(); ++i)
        for (std::size_t j = 0; j < a2.size(); ++j) c(i, j) = rho_n(*d1.space, *a1[i], *a2[j]);
    return std::isinf(p) ? wasserstein_inf(w1, w2, c).value : wasserstein_p(w1, w2, c, p).value;
}

struct ConvergencePoint {
    std::size_t n = 0;
    std::size_t m = 0;
    double p = 1.0;
    double estimate = 0.0;  ///< mean over replicates
    double stderr_ = 0.0;   ///< standard error of the mean
    std::vector<double> replicates;
    std::uint64_t seed = 0;
};

struct ConvergenceReport {
    std::vector<ConvergencePoint> curve;
    double reference_lower = 0.0;
    double reference_upper = 0.0;
    Status reference_status = Status::exact;
};

/// Seed of replicate `rep` at tuple size n; side 1 samples X, side 2 Y.
inline std::uint64_t replicate_seed(std::uint64_t seed, std::size_t n, std::size_t rep, int side) {
    return derive_seed(derive_seed(derive_seed(seed, n), rep), static_cast<std::uint64_t>(side));
}

/// Mean and standard error of the empirical estimator over k replicates
/// for each n, next to the exact (or bracketed) d_GW,inf reference.
inline ConvergenceReport gw_convergence_experiment(const MMField& x, const MMField& y, double p,
                                                   const std::vector<std::size_t>& n_list, std::size_t m,
                                                   std::uint64_t seed, std::size_t k = 8, const GWOptions& ref_opt = {}) {
    if (k == 0) throw std::invalid_argument("gw_convergence_experiment: k must be positive");
    ConvergenceReport rep;
    const GWResult ref = gw_solve(x, y, inf_p, ref_opt);
    rep.reference_lower = ref.lower;
    rep.reference_upper = ref.upper;
    rep.reference_status = ref.status;
    for (std::size_t n : n_list) {
        ConvergencePoint pt;
        pt.n = n;
        pt.m = m;
        pt.p = p;
        pt.seed = seed;
        for (std::size_t r = 0; r < k; ++r) {
            const auto dx = sample_adm(x, n, m, replicate_seed(seed, n, r, 1));
            const auto dy = sample_adm(y, n, m, replicate_seed(seed, n, r, 2));
            pt.replicates.push_back(adm_wasserstein(dx, dy, p));
        }
        double mean = 0.0;
        for (double v : pt.replicates) mean += v;
        mean /= static_cast<double>(k);
        double var = 0.0;
        for (double v : pt.replicates) var += (v - mean) * (v - mean);
        pt.estimate = mean;
        pt.stderr_ = k > 1 ? std::sqrt(var / static_cast<double>(k - 1) / static_cast<double>(k)) : 0.0;
        rep.curve.push_back(std::move(pt));
    }
    return rep;
}

struct ReconstructionReport {
    std::size_t n = 0;
    std::size_t m = 0;
    double p = 1.0;
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t permutations = 0;
    bool distinct = false;  ///< p_value below alpha
    double alpha = 0.05;
};

/// Empirical ADM distance between X and Y at tuple size n, plus a
/// permutation test of equal laws under rho_n.
inline ReconstructionReport reconstruction_test(const MMField& x, const MMField& y, std::size_t n, std::size_t m,
                                                std::uint64_t seed, double p = 1.0, std::size_t permutations = 99,
                                                double alpha = 0.05) {
    ReconstructionReport rep;
    rep.n = n;
    rep.m = m;
    rep.p = p;
    rep.permutations = permutations;
    rep.alpha = alpha;
    const auto dx = sample_adm(x, n, m, derive_seed(seed, 1));
    const auto dy = sample_adm(y, n, m, derive_seed(seed, 2));
    rep.statistic = adm_wasserstein(dx, dy, p);

    std::vector<ADM> pool = dx.samples;
    pool.insert(pool.end(), dy.samples.begin(), dy.samples.end());
    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(seed, 3));
    std::size_t at_least = 0;
    for (std::size_t t = 0; t < permutations; ++t) {
        rng.shuffle(order);
        ADMDistribution a, b;
        a.space = b.space = dx.space;
        for (std::size_t i = 0; i < m; ++i) a.samples.push_back(pool[order[i]]);
        for (std::size_t i = m; i < pool.size(); ++i) b.samples.push_back(pool[order[i]]);
        a.weights.assign(a.samples.size(), 1.0 / static_cast<double>(a.samples.size()));
        b.weights.assign(b.samples.size(), 1.0 / static_cast<double>(b.samples.size()));
        if (adm_wasserstein(a, b, p) >= rep.statistic - 1e-12) ++at_least;
    }
    rep.p_value = static_cast<double>(1 + at_least) / static_cast<double>(1 + permutations);
    rep.distinct = rep.p_value < alpha;
    return rep;
}

/// Fraction of trials whose i.i.d. n-tuple has empirical measure within eps
/// of μ_X in W_p over d_X.
inline double uniformity_mass(const MMField& x, std::size_t n, double eps, double p, std::size_t trials, std::uint64_t seed) {
    if (n == 0 || trials == 0) throw std::invalid_argument("uniformity_mass: n and trials must be positive");
    Rng rng(seed);
    Categorical pick(x.weights());
    DiscreteMeasure mu{x.weights()};
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        DiscreteMeasure emp{std::vector<double>(x.size(), 0.0)};
        for (std::size_t k = 0; k < n; ++k) emp.weights[pick(rng)] += 1.0 / static_cast<double>(n);
        const double w = std::isinf(p) ? wasserstein_inf(emp, mu, x.field().distances()).value
                                       : wasserstein_p(emp, mu, x.field().distances(), p).value;
        if (w <= eps) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace mmfield
