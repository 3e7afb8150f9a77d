#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "mmfield/compat.hpp"
#include "mmfield/constructions.hpp"
#include "mmfield/field.hpp"
#include "mmfield/gh.hpp"
#include "mmfield/relation.hpp"
#include "mmfield/transport.hpp"

namespace mmfield {

struct GPResult {
    double value = 0.0;
    Coupling coupling;  ///< a 2·value-coupling
    Relation relation;  ///< carries mass >= 1 - value, distortion <= 2·value
    Status status = Status::exact;
    double lower = 0.0;
    double upper = 0.0;
    double resolution = 0.0;  ///< 0: exact over the critical levels
    std::uint64_t nodes = 0;
};

namespace detail {

struct LevelMass {
    double mass = 0.0;
    DenseMatrix flow;          ///< on the support index sets
    std::vector<IndexPair> relation;  ///< support positions
    bool complete = true;
};

/// Max over relations of distortion <= 2 level of the largest coupling mass
/// they can carry.
inline LevelMass best_clique_mass(const MMField& x, const MMField& y, const std::vector<std::size_t>& sx,
                                  const std::vector<std::size_t>& sy, const DiscreteMeasure& a, const DiscreteMeasure& b,
                                  double level, Budget& budget) {
    PairGraph g = PairGraph::build(x.field(), y.field(), level, sx, sy);
    LevelMass out;
    out.flow = DenseMatrix(sx.size(), sy.size());
    out.complete = for_each_maximal_clique(g, budget, [&](const std::vector<std::size_t>& clique) {
        PairMask mask(sx.size(), sy.size());
        for (std::size_t u : clique) mask.set(g.nodes[u].first, g.nodes[u].second);
        MassResult mr = max_mass_on(a, b, mask);
        if (mr.value > out.mass) {
            out.mass = mr.value;
            out.flow = std::move(mr.flow);
            out.relation.clear();
            for (std::size_t u : clique) out.relation.push_back(g.nodes[u]);
        }
        return out.mass < 1.0 - 1e-12;
    });
    return out;
}

}  // namespace detail

/// Gromov-Prokhorov distance: the least δ with a coupling putting mass
/// >= 1 - δ on a relation of distortion <= 2δ, capped at 1. The clique mass
/// M(δ) only changes at critical levels c_k, so the value is
/// min(1, min_k max(c_k, 1 - M(c_k))).
inline GPResult gp_distance(const MMField& x, const MMField& y, std::uint64_t budget = default_gh_budget) {
    require_same_space(x.field(), y.field());
    const auto sx = x.support(), sy = y.support();
    if (sx.empty() || sy.empty()) throw std::invalid_argument("gp_distance: empty support");
    DiscreteMeasure a, b;
    for (std::size_t i : sx) a.weights.push_back(x.weight(i));
    for (std::size_t j : sy) b.weights.push_back(y.weight(j));

    std::vector<double> levels;
    for (double c : critical_levels(x.field(), y.field(), sx, sy))
        if (c < 1.0) levels.push_back(c);

    Budget bud(budget);
    std::vector<detail::LevelMass> evaluated(levels.size());
    std::vector<char> done(levels.size(), 0);
    bool exhausted = false;
    auto mass_at = [&](std::size_t k) -> const detail::LevelMass& {
        if (!done[k]) {
            evaluated[k] = detail::best_clique_mass(x, y, sx, sy, a, b, levels[k], bud);
            done[k] = 1;
            if (!evaluated[k].complete) exhausted = true;
        }
        return evaluated[k];
    };

    // First level where the distortion term dominates the mass term.
    std::size_t lo = 0, hi = levels.size();
    std::size_t largest_false = levels.size();  // none
    while (lo < hi && !exhausted) {
        const std::size_t mid = lo + (hi - lo) / 2;
        const auto& lm = mass_at(mid);
        if (exhausted) break;
        if (levels[mid] >= 1.0 - lm.mass) {
            hi = mid;
        } else {
            lo = mid + 1;
            largest_false = mid;
        }
    }

    GPResult res;
    res.nodes = bud.used();
    auto finish = [&](double value, std::size_t k) {
        res.value = value;
        if (k < levels.size() && done[k]) {
            const auto& lm = evaluated[k];
            res.coupling = detail::embed_support_coupling(x, y, complete_coupling(lm.flow, a, b).matrix());
            std::vector<IndexPair> rel;
            for (const auto& [i, j] : lm.relation) rel.emplace_back(sx[i], sy[j]);
            res.relation = Relation(x.size(), y.size(), std::move(rel));
        } else {
            res.coupling = detail::embed_support_coupling(x, y, Coupling::product(a.weights, b.weights).matrix());
            res.relation = Relation(x.size(), y.size(), {});
        }
    };

    if (!exhausted) {
        double best = 1.0;
        std::size_t arg = levels.size();
        if (lo < levels.size() && levels[lo] < best) {
            best = levels[lo];
            arg = lo;
        }
        if (lo > 0 && 1.0 - mass_at(lo - 1).mass < best) {
            best = std::max(0.0, 1.0 - mass_at(lo - 1).mass);
            arg = lo - 1;
        }
        finish(best, arg);
        res.status = Status::exact;
        res.lower = res.upper = res.value;
        return res;
    }

    // Bounds: any evaluated level gives an upper bound from its best clique.
    double upper = 1.0;
    std::size_t arg = levels.size();
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (!done[k]) continue;
        const double u = std::max(levels[k], 1.0 - evaluated[k].mass);
        if (u < upper) {
            upper = u;
            arg = k;
        }
    }
    finish(upper, arg);
    CostMatrix db(sx.size(), sy.size());
    for (std::size_t i = 0; i < sx.size(); ++i)
        for (std::size_t j = 0; j < sy.size(); ++j)
            db(i, j) = x.field().space()->distance(x.field().value(sx[i]), y.field().value(sy[j]));
    double lower = prokhorov(a, b, db).value;
    if (largest_false < levels.size()) {
        const double next = largest_false + 1 < levels.size() ? levels[largest_false + 1] : 1.0;
        lower = std::max(lower, std::min(1.0 - evaluated[largest_false].mass, next));
    }
    res.status = Status::bounds_only;
    res.upper = upper;
    res.lower = std::min(lower, upper);
    return res;
}

}  // namespace mmfield
