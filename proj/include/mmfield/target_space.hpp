#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mmfield/matrix.hpp"

namespace mmfield {

/// Default absolute tolerances for metric axioms / Lipschitz checks and for
/// probability sums.
struct Tolerances {
    double metric = 1e-9;
    double mass = 1e-9;
};

using Coords = std::vector<double>;

/// A point of the target space B: either a coordinate vector (Euclidean B)
/// or an index into an explicit finite metric.
class BPoint {
public:
    BPoint() : v_(Coords{}) {}
    BPoint(Coords c) : v_(std::move(c)) {}  // NOLINT(google-explicit-constructor)
    BPoint(std::initializer_list<double> c) : v_(Coords(c)) {}

    static BPoint index(std::size_t i) {
        BPoint p;
        p.v_ = i;
        return p;
    }

    bool is_index() const noexcept { return std::holds_alternative<std::size_t>(v_); }
    const Coords& coords() const { return std::get<Coords>(v_); }
    std::size_t idx() const { return std::get<std::size_t>(v_); }

    friend bool operator==(const BPoint&, const BPoint&) = default;

private:
    std::variant<Coords, std::size_t> v_;
};

/// The codomain B of every field. All operations touch B only through
/// distance(), so new kinds are additive.
class TargetSpace {
public:
    enum class Kind { euclidean, explicit_finite };

    static std::shared_ptr<const TargetSpace> euclidean(std::size_t dim) {
        if (dim == 0) throw std::invalid_argument("euclidean target space needs dim >= 1");
        auto s = std::shared_ptr<TargetSpace>(new TargetSpace());
        s->kind_ = Kind::euclidean;
        s->dim_ = dim;
        return s;
    }

    /// Explicit finite metric. Throws if the matrix is not a metric within tol.
    static std::shared_ptr<const TargetSpace> explicit_metric(DenseMatrix m, double tol = Tolerances{}.metric) {
        if (m.rows() != m.cols() || m.rows() == 0)
            throw std::invalid_argument("explicit target metric must be a nonempty square matrix");
        const std::size_t n = m.rows();
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(m(i, i)) > tol) throw std::invalid_argument("explicit target metric: nonzero diagonal");
            for (std::size_t j = 0; j < n; ++j) {
                if (!(m(i, j) >= 0.0) || !std::isfinite(m(i, j)))
                    throw std::invalid_argument("explicit target metric: entries must be finite and nonnegative");
                if (std::abs(m(i, j) - m(j, i)) > tol)
                    throw std::invalid_argument("explicit target metric: not symmetric");
                for (std::size_t k = 0; k < n; ++k)
                    if (m(i, k) > m(i, j) + m(j, k) + tol)
                        throw std::invalid_argument("explicit target metric: triangle inequality violated");
            }
        }
        auto s = std::shared_ptr<TargetSpace>(new TargetSpace());
        s->kind_ = Kind::explicit_finite;
        s->matrix_ = std::move(m);
        return s;
    }

    Kind kind() const noexcept { return kind_; }
    bool is_euclidean() const noexcept { return kind_ == Kind::euclidean; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return matrix_.rows(); }
    const DenseMatrix& matrix() const noexcept { return matrix_; }

    /// True when p has the shape of a point of this space.
    bool admits(const BPoint& p) const {
        if (kind_ == Kind::euclidean) return !p.is_index() && p.coords().size() == dim_;
        return p.is_index() && p.idx() < matrix_.rows();
    }

    double distance(const BPoint& a, const BPoint& b) const {
        if (kind_ == Kind::explicit_finite) {
            if (!admits(a) || !admits(b)) throw std::invalid_argument("point is not an index of the explicit target");
            return matrix_(a.idx(), b.idx());
        }
        if (!admits(a) || !admits(b)) throw std::invalid_argument("point dimension does not match target space");
        const Coords& x = a.coords();
        const Coords& y = b.coords();
        double s = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double t = x[i] - y[i];
            s += t * t;
        }
        return std::sqrt(s);
    }

    friend bool operator==(const TargetSpace& a, const TargetSpace& b) {
        return a.kind_ == b.kind_ && a.dim_ == b.dim_ && a.matrix_ == b.matrix_;
    }

private:
    TargetSpace() = default;

    Kind kind_ = Kind::euclidean;
    std::size_t dim_ = 0;
    DenseMatrix matrix_;
};

using TargetSpacePtr = std::shared_ptr<const TargetSpace>;

inline bool same_space(const TargetSpacePtr& a, const TargetSpacePtr& b) {
    return a == b || (a && b && *a == *b);
}

}  // namespace mmfield
