#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmfield/field.hpp"
#include "mmfield/relation.hpp"

namespace mmfield {

/// Thrown by coproduct() when r < distortion/2 or r <= 0.
class InadmissibleRadius : public std::invalid_argument {
public:
    InadmissibleRadius(double requested, double minimal)
        : std::invalid_argument("coproduct radius " + std::to_string(requested) +
                                " is below the minimal admissible radius " + std::to_string(minimal)),
          requested_(requested), minimal_(minimal) {}
    double requested() const noexcept { return requested_; }
    double minimal() const noexcept { return minimal_; }

private:
    double requested_;
    double minimal_;
};

class NotIsometricEmbedding : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void require_same_space(const MetricField& x, const MetricField& y) {
    if (!same_space(x.space(), y.space())) throw std::invalid_argument("fields live over different target spaces");
}

/// Metric field distortion of R: the larger of the worst pairwise distance
/// discrepancy over R x R and twice the worst value discrepancy over R.
inline double distortion(const MetricField& x, const MetricField& y, const Relation& r) {
    require_same_space(x, y);
    if (r.empty()) throw std::invalid_argument("distortion of an empty relation");
    if (r.left_size() != x.size() || r.right_size() != y.size())
        throw std::out_of_range("relation does not match field sizes");
    double metric_part = 0.0;
    double value_part = 0.0;
    const auto& p = r.pairs();
    for (std::size_t a = 0; a < p.size(); ++a) {
        value_part = std::max(value_part, x.space()->distance(x.value(p[a].first), y.value(p[a].second)));
        for (std::size_t b = a + 1; b < p.size(); ++b)
            metric_part = std::max(metric_part, std::abs(x.d(p[a].first, p[b].first) - y.d(p[a].second, p[b].second)));
    }
    return std::max(metric_part, 2.0 * value_part);
}

/// The connecting field X ∐_{R,r} Y on |X| + |Y| points: X block first,
/// cross distance r + min over (x',y') in R of d_X(x,x') + d_Y(y',y).
inline MetricField coproduct(const MetricField& x, const MetricField& y, const Relation& r, double radius) {
    const double minimal = distortion(x, y, r) / 2.0;
    if (!(radius > 0.0) || radius < minimal) throw InadmissibleRadius(radius, minimal);

    const std::size_t n = x.size();
    const std::size_t m = y.size();
    DenseMatrix d(n + m, n + m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d(i, j) = x.d(i, j);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) d(n + i, n + j) = y.d(i, j);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& [xp, yp] : r.pairs()) best = std::min(best, x.d(i, xp) + y.d(yp, j));
            d(i, n + j) = d(n + j, i) = radius + best;
        }

    std::vector<BPoint> vals = x.values();
    vals.insert(vals.end(), y.values().begin(), y.values().end());
    std::vector<std::string> labels;
    if (!x.labels().empty() && !y.labels().empty()) {
        labels = x.labels();
        labels.insert(labels.end(), y.labels().begin(), y.labels().end());
    }
    return MetricField(x.space(), std::move(d), std::move(vals), std::move(labels), x.pseudo_ok() || y.pseudo_ok());
}

/// Result of gluing Z1 and Z2 along a common subfield Y.
struct Amalgamation {
    MetricField field;
    std::vector<std::size_t> z1_embedding;  ///< index of each Z1 point in the glued field
    std::vector<std::size_t> z2_embedding;  ///< index of each Z2 point in the glued field
};

namespace detail {

inline void check_isometric_embedding(const MetricField& y, const MetricField& z, const std::vector<std::size_t>& map,
                                      double tol, const char* name) {
    if (map.size() != y.size()) throw NotIsometricEmbedding(std::string(name) + ": map length differs from |Y|");
    for (std::size_t a = 0; a < map.size(); ++a) {
        if (map[a] >= z.size()) throw NotIsometricEmbedding(std::string(name) + ": image index out of range");
        if (y.space()->distance(y.value(a), z.value(map[a])) > tol)
            throw NotIsometricEmbedding(std::string(name) + ": values are not preserved");
        for (std::size_t b = 0; b < map.size(); ++b)
            if (std::abs(y.d(a, b) - z.d(map[a], map[b])) > tol)
                throw NotIsometricEmbedding(std::string(name) + ": distances are not preserved");
    }
}

}  // namespace detail

/// Gluing Z1 and Z2 along isometric embeddings phi: Y -> Z1, psi: Y -> Z2.
/// Z1 keeps indices 0..|Z1|-1; Z2 points outside psi(Y) follow in order,
/// and psi(y) is identified with phi(y).
inline Amalgamation amalgamate(const MetricField& z1, const MetricField& z2, const MetricField& y,
                               const std::vector<std::size_t>& phi, const std::vector<std::size_t>& psi,
                               const Tolerances& tol = {}) {
    require_same_space(z1, z2);
    require_same_space(z1, y);
    if (y.size() == 0) throw std::invalid_argument("amalgamation along an empty field");
    detail::check_isometric_embedding(y, z1, phi, tol.metric, "phi");
    detail::check_isometric_embedding(y, z2, psi, tol.metric, "psi");

    const std::size_t n1 = z1.size();
    const std::size_t n2 = z2.size();
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> merged_with(n2, none);
    for (std::size_t a = 0; a < psi.size(); ++a)
        if (merged_with[psi[a]] == none) merged_with[psi[a]] = phi[a];

    Amalgamation out;
    out.z1_embedding.resize(n1);
    for (std::size_t i = 0; i < n1; ++i) out.z1_embedding[i] = i;
    out.z2_embedding.resize(n2);
    std::vector<std::size_t> fresh;  // Z2 indices that become new points
    for (std::size_t j = 0; j < n2; ++j) {
        if (merged_with[j] != none) {
            out.z2_embedding[j] = merged_with[j];
        } else {
            out.z2_embedding[j] = n1 + fresh.size();
            fresh.push_back(j);
        }
    }

    const std::size_t total = n1 + fresh.size();
    DenseMatrix d(total, total);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n1; ++j) d(i, j) = z1.d(i, j);
    for (std::size_t a = 0; a < fresh.size(); ++a)
        for (std::size_t b = 0; b < fresh.size(); ++b) d(n1 + a, n1 + b) = z2.d(fresh[a], fresh[b]);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t a = 0; a < fresh.size(); ++a) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < y.size(); ++k) best = std::min(best, z1.d(i, phi[k]) + z2.d(psi[k], fresh[a]));
            d(i, n1 + a) = d(n1 + a, i) = best;
        }

    std::vector<BPoint> vals = z1.values();
    for (std::size_t j : fresh) vals.push_back(z2.value(j));
    out.field = MetricField(z1.space(), std::move(d), std::move(vals), {}, z1.pseudo_ok() || z2.pseudo_ok());
    return out;
}

/// Hausdorff distance between two nonempty index sets of an ambient field.
inline double hausdorff(const MetricField& ambient, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("hausdorff distance of an empty set");
    for (std::size_t i : a)
        if (i >= ambient.size()) throw std::out_of_range("hausdorff index out of range");
    for (std::size_t i : b)
        if (i >= ambient.size()) throw std::out_of_range("hausdorff index out of range");
    auto directed = [&](const std::vector<std::size_t>& from, const std::vector<std::size_t>& to) {
        double worst = 0.0;
        for (std::size_t p : from) {
            double nearest = std::numeric_limits<double>::infinity();
            for (std::size_t q : to) nearest = std::min(nearest, ambient.d(p, q));
            worst = std::max(worst, nearest);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

/// Hausdorff distance in B between two finite point sets.
inline double hausdorff_in_target(const TargetSpace& space, const std::vector<BPoint>& a, const std::vector<BPoint>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("hausdorff distance of an empty set");
    auto directed = [&](const std::vector<BPoint>& from, const std::vector<BPoint>& to) {
        double worst = 0.0;
        for (const auto& p : from) {
            double nearest = std::numeric_limits<double>::infinity();
            for (const auto& q : to) nearest = std::min(nearest, space.distance(p, q));
            worst = std::max(worst, nearest);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

}  // namespace mmfield
