#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mmfield/matrix.hpp"
#include "mmfield/target_space.hpp"

namespace mmfield {

using IndexPair = std::pair<std::size_t, std::size_t>;

/// A relation R between index sets {0..nx-1} and {0..ny-1}. Pairs are kept
/// sorted and unique, so two relations with the same pairs compare equal.
class Relation {
public:
    Relation() = default;
    Relation(std::size_t nx, std::size_t ny, std::vector<IndexPair> pairs) : nx_(nx), ny_(ny), pairs_(std::move(pairs)) {
        for (const auto& [i, j] : pairs_)
            if (i >= nx_ || j >= ny_) throw std::out_of_range("relation pair out of range");
        std::sort(pairs_.begin(), pairs_.end());
        pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
    }

    static Relation identity(std::size_t n) {
        std::vector<IndexPair> p;
        for (std::size_t i = 0; i < n; ++i) p.emplace_back(i, i);
        return Relation(n, n, std::move(p));
    }

    static Relation full(std::size_t nx, std::size_t ny) {
        std::vector<IndexPair> p;
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ny; ++j) p.emplace_back(i, j);
        return Relation(nx, ny, std::move(p));
    }

    std::size_t left_size() const noexcept { return nx_; }
    std::size_t right_size() const noexcept { return ny_; }
    const std::vector<IndexPair>& pairs() const noexcept { return pairs_; }
    bool empty() const noexcept { return pairs_.empty(); }
    bool contains(std::size_t i, std::size_t j) const {
        return std::binary_search(pairs_.begin(), pairs_.end(), IndexPair{i, j});
    }

    bool left_surjective() const {
        std::vector<char> hit(nx_, 0);
        for (const auto& pr : pairs_) hit[pr.first] = 1;
        return std::all_of(hit.begin(), hit.end(), [](char c) { return c != 0; });
    }
    bool right_surjective() const {
        std::vector<char> hit(ny_, 0);
        for (const auto& pr : pairs_) hit[pr.second] = 1;
        return std::all_of(hit.begin(), hit.end(), [](char c) { return c != 0; });
    }
    bool is_correspondence() const { return !pairs_.empty() && left_surjective() && right_surjective(); }

    Relation transposed() const {
        std::vector<IndexPair> p;
        p.reserve(pairs_.size());
        for (const auto& [i, j] : pairs_) p.emplace_back(j, i);
        return Relation(ny_, nx_, std::move(p));
    }

    friend bool operator==(const Relation&, const Relation&) = default;

private:
    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
    std::vector<IndexPair> pairs_;
};

/// A nonnegative n x m matrix whose marginals are two probability vectors.
class Coupling {
public:
    Coupling() = default;
    explicit Coupling(DenseMatrix m) : m_(std::move(m)) {}

    /// Independent (product) coupling.
    static Coupling product(const std::vector<double>& a, const std::vector<double>& b) {
        DenseMatrix m(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
        return Coupling(std::move(m));
    }

    const DenseMatrix& matrix() const noexcept { return m_; }
    std::size_t rows() const noexcept { return m_.rows(); }
    std::size_t cols() const noexcept { return m_.cols(); }
    double operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }

    /// Largest marginal error against (a, b); +inf on shape mismatch or negative entries.
    double marginal_error(const std::vector<double>& a, const std::vector<double>& b) const {
        if (a.size() != m_.rows() || b.size() != m_.cols()) return INFINITY;
        double err = 0.0;
        for (double v : m_.data())
            if (v < 0.0) return INFINITY;
        for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(m_.row_sum(i) - a[i]));
        for (std::size_t j = 0; j < b.size(); ++j) err = std::max(err, std::abs(m_.col_sum(j) - b[j]));
        return err;
    }

    bool has_marginals(const std::vector<double>& a, const std::vector<double>& b, double tol = Tolerances{}.mass) const {
        return marginal_error(a, b) <= tol;
    }

    /// Pairs carrying mass above the support threshold.
    Relation support(double tau = 1e-12) const {
        std::vector<IndexPair> p;
        for (std::size_t i = 0; i < m_.rows(); ++i)
            for (std::size_t j = 0; j < m_.cols(); ++j)
                if (m_(i, j) > tau) p.emplace_back(i, j);
        return Relation(m_.rows(), m_.cols(), std::move(p));
    }

    Coupling transposed() const { return Coupling(m_.transposed()); }

private:
    DenseMatrix m_;
};

}  // namespace mmfield
