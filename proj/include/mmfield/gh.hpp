#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mmfield/compat.hpp"
#include "mmfield/constructions.hpp"
#include "mmfield/field.hpp"
#include "mmfield/relation.hpp"

namespace mmfield {

enum class Status { exact, local, bounds_only };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::exact: return "exact";
        case Status::local: return "local";
        case Status::bounds_only: return "bounds_only";
    }
    return "unknown";
}

struct GHResult {
    double value = 0.0;
    Relation witness;  ///< best correspondence found; attains value when exact
    Status status = Status::exact;
    double lower = 0.0;
    double upper = 0.0;
    std::uint64_t nodes = 0;
};

inline constexpr std::uint64_t default_gh_budget = 10'000'000;

/// Pair-count limit above which the exact search is not attempted.
inline constexpr std::size_t gh_exact_pair_limit = 1024;

struct GHSearch {
    enum class Outcome { found, infeasible, exhausted };
    Outcome outcome = Outcome::infeasible;
    Relation witness;
};

namespace detail {

class CorrespondenceSearch {
public:
    CorrespondenceSearch(const MetricField& x, const MetricField& y, double eps, Budget& budget)
        : x_(x), y_(y), n_(x.size()), m_(y.size()), budget_(budget), adm_(n_ * m_, 0), conflicts_(n_ * m_, 0),
          compat_(n_ * m_ * n_ * m_, 0), covered_(m_, 0) {
        std::vector<double> db(n_ * m_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < m_; ++j) {
                db[i * m_ + j] = x.space()->distance(x.value(i), y.value(j));
                adm_[i * m_ + j] = db[i * m_ + j] <= eps;
            }
        const std::size_t nn = n_ * m_;
        for (std::size_t u = 0; u < nn; ++u)
            for (std::size_t v = 0; v < nn; ++v) {
                const std::size_t i = u / m_, j = u % m_, k = v / m_, l = v % m_;
                compat_[u * nn + v] = std::abs(x.d(i, k) - y.d(j, l)) <= 2.0 * eps;
            }
        // Candidate orders: ascending d_B, ties by index.
        row_order_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < m_; ++j)
                if (adm_[i * m_ + j]) row_order_[i].push_back(j);
            std::stable_sort(row_order_[i].begin(), row_order_[i].end(),
                             [&](std::size_t a, std::size_t b) { return db[i * m_ + a] < db[i * m_ + b]; });
        }
        col_order_.resize(m_);
        for (std::size_t j = 0; j < m_; ++j) {
            for (std::size_t i = 0; i < n_; ++i)
                if (adm_[i * m_ + j]) col_order_[j].push_back(i);
            std::stable_sort(col_order_[j].begin(), col_order_[j].end(),
                             [&](std::size_t a, std::size_t b) { return db[a * m_ + j] < db[b * m_ + j]; });
        }
    }

    GHSearch run() {
        GHSearch out;
        if (!forward_ok(0)) return out;
        const int r = assign_rows(0);
        if (r > 0) {
            out.outcome = GHSearch::Outcome::found;
            std::vector<IndexPair> p;
            for (std::size_t u : chosen_) p.emplace_back(u / m_, u % m_);
            out.witness = Relation(n_, m_, std::move(p));
        } else if (r < 0) {
            out.outcome = GHSearch::Outcome::exhausted;
        }
        return out;
    }

private:
    bool live(std::size_t u) const { return adm_[u] && conflicts_[u] == 0; }

    void push(std::size_t u) {
        const std::size_t nn = n_ * m_;
        for (std::size_t v = 0; v < nn; ++v)
            if (!compat_[u * nn + v]) ++conflicts_[v];
        chosen_.push_back(u);
        ++covered_[u % m_];
    }
    void pop() {
        const std::size_t u = chosen_.back();
        const std::size_t nn = n_ * m_;
        for (std::size_t v = 0; v < nn; ++v)
            if (!compat_[u * nn + v]) --conflicts_[v];
        chosen_.pop_back();
        --covered_[u % m_];
    }

    /// Every unassigned row keeps a live pair and every uncovered column
    /// can still be reached.
    bool forward_ok(std::size_t next_row) const {
        for (std::size_t i = next_row; i < n_; ++i) {
            bool any = false;
            for (std::size_t j : row_order_[i])
                if (live(i * m_ + j)) {
                    any = true;
                    break;
                }
            if (!any) return false;
        }
        for (std::size_t j = 0; j < m_; ++j) {
            if (covered_[j]) continue;
            bool any = false;
            for (std::size_t i : col_order_[j])
                if (live(i * m_ + j)) {
                    any = true;
                    break;
                }
            if (!any) return false;
        }
        return true;
    }

    // 1 found, 0 infeasible, -1 budget exhausted.
    int assign_rows(std::size_t i) {
        if (i == n_) return cover_columns();
        for (std::size_t j : row_order_[i]) {
            const std::size_t u = i * m_ + j;
            if (!live(u)) continue;
            if (!budget_.spend()) return -1;
            push(u);
            if (forward_ok(i + 1)) {
                const int r = assign_rows(i + 1);
                if (r != 0) {
                    if (r < 0) pop();
                    return r;
                }
            }
            pop();
        }
        return 0;
    }

    int cover_columns() {
        std::size_t j = 0;
        while (j < m_ && covered_[j]) ++j;
        if (j == m_) return 1;
        for (std::size_t i : col_order_[j]) {
            const std::size_t u = i * m_ + j;
            if (!live(u)) continue;
            if (!budget_.spend()) return -1;
            push(u);
            if (forward_ok(n_)) {
                const int r = cover_columns();
                if (r != 0) {
                    if (r < 0) pop();
                    return r;
                }
            }
            pop();
        }
        return 0;
    }

    const MetricField& x_;
    const MetricField& y_;
    std::size_t n_, m_;
    Budget& budget_;
    std::vector<char> adm_;
    std::vector<int> conflicts_;
    std::vector<char> compat_;
    std::vector<int> covered_;
    std::vector<std::vector<std::size_t>> row_order_, col_order_;
    std::vector<std::size_t> chosen_;
};

/// Greedy correspondence (each step adds the pair that least increases the
/// distortion), refined by single-pair reassignments while they help.
inline Relation heuristic_correspondence(const MetricField& x, const MetricField& y) {
    const std::size_t n = x.size(), m = y.size();
    auto db = [&](std::size_t i, std::size_t j) { return x.space()->distance(x.value(i), y.value(j)); };
    std::vector<IndexPair> pairs;
    double current = 0.0;
    auto cost_with = [&](std::size_t i, std::size_t j) {
        double c = std::max(current, 2.0 * db(i, j));
        for (const auto& [a, b] : pairs) c = std::max(c, std::abs(x.d(i, a) - y.d(j, b)));
        return c;
    };
    std::vector<char> covered(m, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        double bc = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            const double c = cost_with(i, j);
            if (c < bc) {
                bc = c;
                best = j;
            }
        }
        pairs.emplace_back(i, best);
        covered[best] = 1;
        current = bc;
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (covered[j]) continue;
        std::size_t best = 0;
        double bc = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double c = cost_with(i, j);
            if (c < bc) {
                bc = c;
                best = i;
            }
        }
        pairs.emplace_back(best, j);
        current = bc;
    }

    Relation r(n, m, pairs);
    if (n * m > 2500) return r;
    double dis = distortion(x, y, r);
    for (int pass = 0; pass < 5; ++pass) {
        bool improved = false;
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const IndexPair keep = pairs[k];
            for (std::size_t alt = 0; alt < (k < n ? m : n); ++alt) {
                pairs[k] = k < n ? IndexPair{keep.first, alt} : IndexPair{alt, keep.second};
                Relation cand(n, m, pairs);
                if (!cand.is_correspondence()) continue;
                const double d = distortion(x, y, cand);
                if (d < dis) {
                    dis = d;
                    r = cand;
                    improved = true;
                    break;
                }
            }
            if (r.pairs() != Relation(n, m, pairs).pairs()) pairs[k] = keep;
        }
        if (!improved) break;
    }
    return r;
}

}  // namespace detail

/// Decision form with an explicit node budget.
inline GHSearch gh_search(const MetricField& x, const MetricField& y, double eps, Budget& budget) {
    require_same_space(x, y);
    if (eps < 0.0) throw std::invalid_argument("gh_feasible: eps must be nonnegative");
    if (x.size() == 0 || y.size() == 0) throw std::invalid_argument("gh_feasible: empty field");
    if (x.size() * y.size() > gh_exact_pair_limit) return {GHSearch::Outcome::exhausted, {}};
    return detail::CorrespondenceSearch(x, y, eps, budget).run();
}

/// A correspondence of distortion <= 2 eps, or none. Unlimited budget.
inline std::optional<Relation> gh_feasible(const MetricField& x, const MetricField& y, double eps) {
    Budget unlimited(std::numeric_limits<std::uint64_t>::max() - 1);
    GHSearch s = gh_search(x, y, eps, unlimited);
    if (s.outcome == GHSearch::Outcome::found) return s.witness;
    if (s.outcome == GHSearch::Outcome::exhausted) throw std::length_error("gh_feasible: instance too large");
    return std::nullopt;
}

/// Lower bound valid on every instance: half the diameter gap, and the
/// Hausdorff distance in B between the two images.
inline double gh_simple_lower_bound(const MetricField& x, const MetricField& y) {
    return std::max(0.5 * std::abs(x.diameter() - y.diameter()), hausdorff_in_target(*x.space(), x.values(), y.values()));
}

/// Field Gromov-Hausdorff distance as the least half-distortion over
/// correspondences; binary search over the critical levels.
inline GHResult gh_distance(const MetricField& x, const MetricField& y, std::uint64_t budget = default_gh_budget) {
    require_same_space(x, y);
    if (x.size() == 0 || y.size() == 0) throw std::invalid_argument("gh_distance: empty field");
    const std::vector<double> levels = critical_levels(x, y, all_indices(x.size()), all_indices(y.size()));
    Budget b(budget);
    GHResult res;

    // Top level: every pair is admissible and compatible.
    std::size_t lo = 0, hi = levels.size() - 1;
    Relation best_rel = Relation::full(x.size(), y.size());
    bool exhausted = x.size() * y.size() > gh_exact_pair_limit;
    std::size_t infeasible_below = 0;  // levels[0 .. infeasible_below-1] proven infeasible
    while (!exhausted && lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        GHSearch s = gh_search(x, y, levels[mid], b);
        if (s.outcome == GHSearch::Outcome::found) {
            hi = mid;
            best_rel = std::move(s.witness);
        } else if (s.outcome == GHSearch::Outcome::infeasible) {
            lo = mid + 1;
            infeasible_below = mid + 1;
        } else {
            exhausted = true;
        }
    }
    res.nodes = b.used();
    if (!exhausted) {
        res.value = levels[lo];
        res.lower = res.upper = res.value;
        res.witness = std::move(best_rel);
        res.status = Status::exact;
        return res;
    }

    Relation heur = detail::heuristic_correspondence(x, y);
    const double heur_upper = distortion(x, y, heur) / 2.0;
    const double known_upper = distortion(x, y, best_rel) / 2.0;
    res.status = Status::bounds_only;
    if (heur_upper <= known_upper) {
        res.upper = heur_upper;
        res.witness = std::move(heur);
    } else {
        res.upper = known_upper;
        res.witness = std::move(best_rel);
    }
    double lower = gh_simple_lower_bound(x, y);
    if (infeasible_below > 0 && infeasible_below < levels.size()) lower = std::max(lower, levels[infeasible_below]);
    res.lower = std::min(lower, res.upper);
    res.value = res.upper;
    return res;
}

}  // namespace mmfield
