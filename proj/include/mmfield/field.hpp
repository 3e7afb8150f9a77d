#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmfield/matrix.hpp"
#include "mmfield/target_space.hpp"

namespace mmfield {

/// A finite B-field: a metric (or, when pseudo_ok, pseudo-metric) domain with
/// a 1-Lipschitz map into B. Immutable after construction; the constructor
/// only checks shapes, use validate_field() for the metric axioms.
class MetricField {
public:
    MetricField() = default;

    MetricField(TargetSpacePtr space, DenseMatrix d, std::vector<BPoint> values,
                std::vector<std::string> labels = {}, bool pseudo_ok = false)
        : space_(std::move(space)), d_(std::move(d)), values_(std::move(values)),
          labels_(std::move(labels)), pseudo_ok_(pseudo_ok) {
        if (!space_) throw std::invalid_argument("field needs a target space");
        if (d_.rows() != d_.cols()) throw std::invalid_argument("distance matrix must be square");
        if (values_.size() != d_.rows()) throw std::invalid_argument("values length must equal point count");
        if (!labels_.empty() && labels_.size() != d_.rows())
            throw std::invalid_argument("labels length must equal point count");
        for (const auto& v : values_)
            if (!space_->admits(v)) throw std::invalid_argument("field value is not a point of the target space");
    }

    std::size_t size() const noexcept { return d_.rows(); }
    const TargetSpacePtr& space() const noexcept { return space_; }
    const DenseMatrix& distances() const noexcept { return d_; }
    double d(std::size_t i, std::size_t j) const noexcept { return d_(i, j); }
    const std::vector<BPoint>& values() const noexcept { return values_; }
    const BPoint& value(std::size_t i) const { return values_.at(i); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    bool pseudo_ok() const noexcept { return pseudo_ok_; }

    /// d_B(pi(i), pi(j)) inside this field.
    double value_distance(std::size_t i, std::size_t j) const { return space_->distance(values_[i], values_[j]); }

    double diameter() const {
        double m = 0.0;
        for (double v : d_.data()) m = std::max(m, v);
        return m;
    }

    /// Restriction to a list of indices (repeats allowed; repeats force pseudo_ok).
    MetricField restricted(const std::vector<std::size_t>& idx) const {
        DenseMatrix sub(idx.size(), idx.size());
        std::vector<BPoint> vals;
        vals.reserve(idx.size());
        bool repeats = false;
        for (std::size_t a = 0; a < idx.size(); ++a) {
            if (idx[a] >= size()) throw std::out_of_range("restriction index out of range");
            vals.push_back(values_[idx[a]]);
            for (std::size_t b = 0; b < idx.size(); ++b) {
                sub(a, b) = d_(idx[a], idx[b]);
                if (a != b && idx[a] == idx[b]) repeats = true;
            }
        }
        return MetricField(space_, std::move(sub), std::move(vals), {}, pseudo_ok_ || repeats);
    }

private:
    TargetSpacePtr space_;
    DenseMatrix d_;
    std::vector<BPoint> values_;
    std::vector<std::string> labels_;
    bool pseudo_ok_ = false;
};

/// A metric-measure field: a MetricField with a probability vector.
class MMField {
public:
    MMField() = default;
    MMField(MetricField base, std::vector<double> weights) : base_(std::move(base)), weights_(std::move(weights)) {
        if (weights_.size() != base_.size()) throw std::invalid_argument("weights length must equal point count");
    }

    /// Uniform weights on every point.
    static MMField uniform(MetricField base) {
        const std::size_t n = base.size();
        if (n == 0) throw std::invalid_argument("uniform weights need at least one point");
        return MMField(std::move(base), std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    const MetricField& field() const noexcept { return base_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double weight(std::size_t i) const { return weights_.at(i); }
    std::size_t size() const noexcept { return base_.size(); }

    std::vector<std::size_t> support() const {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < weights_.size(); ++i)
            if (weights_[i] > 0.0) s.push_back(i);
        return s;
    }

private:
    MetricField base_;
    std::vector<double> weights_;
};

struct Violation {
    enum class Kind {
        nonfinite,
        negative_distance,
        nonzero_diagonal,
        asymmetric,
        triangle,
        lipschitz,
        zero_distance,
        negative_weight,
        weight_sum,
        empty_support
    };
    Kind kind;
    std::size_t i = 0;
    std::size_t j = 0;
    std::size_t k = 0;
    double magnitude = 0.0;
};

inline const char* to_string(Violation::Kind k) {
    switch (k) {
        case Violation::Kind::nonfinite: return "nonfinite";
        case Violation::Kind::negative_distance: return "negative_distance";
        case Violation::Kind::nonzero_diagonal: return "nonzero_diagonal";
        case Violation::Kind::asymmetric: return "asymmetric";
        case Violation::Kind::triangle: return "triangle";
        case Violation::Kind::lipschitz: return "lipschitz";
        case Violation::Kind::zero_distance: return "zero_distance";
        case Violation::Kind::negative_weight: return "negative_weight";
        case Violation::Kind::weight_sum: return "weight_sum";
        case Violation::Kind::empty_support: return "empty_support";
    }
    return "unknown";
}

struct ValidationReport {
    std::vector<Violation> violations;

    bool valid() const noexcept { return violations.empty(); }
    std::size_t count(Violation::Kind k) const {
        std::size_t c = 0;
        for (const auto& v : violations) c += (v.kind == k);
        return c;
    }
};

namespace detail {

inline void validate_metric_part(const MetricField& f, const Tolerances& tol, ValidationReport& rep) {
    using K = Violation::Kind;
    const std::size_t n = f.size();
    const DenseMatrix& d = f.distances();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = d(i, j);
            if (!std::isfinite(v)) {
                rep.violations.push_back({K::nonfinite, i, j, 0, 0.0});
                continue;
            }
            if (v < -tol.metric) rep.violations.push_back({K::negative_distance, i, j, 0, -v});
        }
        if (std::abs(d(i, i)) > tol.metric) rep.violations.push_back({K::nonzero_diagonal, i, i, 0, std::abs(d(i, i))});
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double asym = std::abs(d(i, j) - d(j, i));
            if (asym > tol.metric) rep.violations.push_back({K::asymmetric, i, j, 0, asym});
            if (!f.pseudo_ok() && d(i, j) <= 0.0) rep.violations.push_back({K::zero_distance, i, j, 0, 0.0});
            const double excess = f.value_distance(i, j) - d(i, j);
            if (excess > tol.metric) rep.violations.push_back({K::lipschitz, i, j, 0, excess});
        }
    // Triangle d(i,k) <= d(i,j) + d(j,k); each unordered endpoint pair once.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 1; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i || j == k) continue;
                const double excess = d(i, k) - d(i, j) - d(j, k);
                if (excess > tol.metric) rep.violations.push_back({K::triangle, i, j, k, excess});
            }
}

}  // namespace detail

/// Checks every MetricField invariant. Never throws; an empty report means valid.
inline ValidationReport validate_field(const MetricField& f, const Tolerances& tol = {}) {
    ValidationReport rep;
    detail::validate_metric_part(f, tol, rep);
    return rep;
}

inline ValidationReport validate_field(const MMField& f, const Tolerances& tol = {}) {
    using K = Violation::Kind;
    ValidationReport rep = validate_field(f.field(), tol);
    double total = 0.0;
    bool any_positive = false;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double w = f.weights()[i];
        if (!std::isfinite(w)) {
            rep.violations.push_back({K::nonfinite, i, i, 0, 0.0});
            continue;
        }
        if (w < 0.0) rep.violations.push_back({K::negative_weight, i, i, 0, -w});
        if (w > 0.0) any_positive = true;
        total += w;
    }
    if (std::abs(total - 1.0) > tol.mass) rep.violations.push_back({K::weight_sum, 0, 0, 0, std::abs(total - 1.0)});
    if (!any_positive) rep.violations.push_back({K::empty_support, 0, 0, 0, 0.0});
    return rep;
}

/// Smallest uniform factor c >= 1 such that c * d_X makes the value map
/// 1-Lipschitz. Reported only; fields are never rescaled silently.
/// Returns nullopt when some pair has zero distance but distinct values.
inline std::optional<double> lipschitz_rescale_factor(const MetricField& f) {
    double c = 1.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = i + 1; j < f.size(); ++j) {
            const double vb = f.value_distance(i, j);
            const double dx = f.d(i, j);
            if (dx <= 0.0) {
                if (vb > 0.0) return std::nullopt;
                continue;
            }
            c = std::max(c, vb / dx);
        }
    return c;
}

}  // namespace mmfield
