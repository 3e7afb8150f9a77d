#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mmfield {

/// minimize cost·x  subject to  rows (a·x {<=,=,>=} b),  0 <= x <= upper.
/// Small dense problems only (tens of variables).
struct LinearProgram {
    enum class Sense { le, eq, ge };
    struct Row {
        std::vector<double> a;
        Sense sense;
        double b;
    };

    std::size_t vars = 0;
    std::vector<double> cost;
    std::vector<double> upper;  ///< +inf for none; empty means all +inf
    std::vector<Row> rows;
};

struct LPResult {
    enum class Status { optimal, infeasible, unbounded };
    Status status = Status::infeasible;
    std::vector<double> x;
    double objective = 0.0;
};

namespace detail {

/// Dense tableau simplex with Bland's rule.
class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), t_((rows + 1) * (cols + 1), 0.0), basis_(rows) {}

    double& at(std::size_t r, std::size_t c) { return t_[r * (n_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, n_); }
    double& obj(std::size_t c) { return at(m_, c); }
    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }
    std::vector<std::size_t>& basis() { return basis_; }

    void pivot(std::size_t r, std::size_t c) {
        const double p = at(r, c);
        for (std::size_t j = 0; j <= n_; ++j) at(r, j) /= p;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == r) continue;
            const double f = at(i, c);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
            at(i, c) = 0.0;
        }
        basis_[r] = c;
    }

    /// Runs simplex on columns < allowed_cols. Returns false if unbounded.
    bool run(std::size_t allowed_cols) {
        constexpr double eps = 1e-11;
        for (std::size_t iter = 0; iter < 100000; ++iter) {
            std::size_t enter = allowed_cols;
            for (std::size_t c = 0; c < allowed_cols; ++c)
                if (obj(c) < -eps) {
                    enter = c;
                    break;
                }
            if (enter == allowed_cols) return true;
            std::size_t leave = m_;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m_; ++r) {
                if (at(r, enter) <= eps) continue;
                const double ratio = rhs(r) / at(r, enter);
                if (ratio < best - 1e-14 || (ratio <= best + 1e-14 && leave < m_ && basis_[r] < basis_[leave])) {
                    best = ratio;
                    leave = r;
                }
            }
            if (leave == m_) return false;
            pivot(leave, enter);
        }
        throw std::runtime_error("simplex iteration limit");
    }

    /// Removes row r (used for redundant constraints after phase one).
    void drop_row(std::size_t r) {
        std::vector<double> nt;
        nt.reserve(m_ * (n_ + 1));
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == r) continue;
            for (std::size_t j = 0; j <= n_; ++j) nt.push_back(at(i, j));
        }
        t_ = std::move(nt);
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
        --m_;
    }

private:
    std::size_t m_;
    std::size_t n_;
    std::vector<double> t_;
    std::vector<std::size_t> basis_;
};

}  // namespace detail

inline LPResult solve_lp(const LinearProgram& lp) {
    using Sense = LinearProgram::Sense;
    const std::size_t nv = lp.vars;
    if (lp.cost.size() != nv) throw std::invalid_argument("lp: cost length");
    if (!lp.upper.empty() && lp.upper.size() != nv) throw std::invalid_argument("lp: upper length");

    // Standard form rows: original rows plus one row per finite upper bound.
    struct StdRow {
        std::vector<double> a;
        Sense sense;
        double b;
    };
    std::vector<StdRow> rows;
    for (const auto& r : lp.rows) {
        if (r.a.size() != nv) throw std::invalid_argument("lp: row length");
        rows.push_back({r.a, r.sense, r.b});
    }
    for (std::size_t j = 0; j < nv && !lp.upper.empty(); ++j)
        if (std::isfinite(lp.upper[j])) {
            std::vector<double> a(nv, 0.0);
            a[j] = 1.0;
            rows.push_back({std::move(a), Sense::le, lp.upper[j]});
        }

    const std::size_t m = rows.size();
    std::size_t slacks = 0;
    for (const auto& r : rows) slacks += (r.sense != Sense::eq);
    const std::size_t n_struct = nv + slacks;
    const std::size_t n_total = n_struct + m;  // artificials last
    detail::Tableau t(m, n_total);

    std::size_t s = nv;
    for (std::size_t i = 0; i < m; ++i) {
        const double sign = rows[i].b < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < nv; ++j) t.at(i, j) = sign * rows[i].a[j];
        if (rows[i].sense == Sense::le) t.at(i, s++) = sign;
        else if (rows[i].sense == Sense::ge) t.at(i, s++) = -sign;
        t.rhs(i) = sign * rows[i].b;
        t.at(i, n_struct + i) = 1.0;
        t.basis()[i] = n_struct + i;
    }

    // Phase one: minimize the sum of artificials.
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j <= n_total; ++j)
            if (j < n_struct || j == n_total) t.obj(j) -= t.at(i, j);
    t.run(n_struct);
    LPResult res;
    if (-t.obj(n_total) > 1e-8) return res;  // infeasible

    // Drive artificials out of the basis; drop rows that are redundant.
    for (std::size_t i = 0; i < t.rows();) {
        if (t.basis()[i] < n_struct) {
            ++i;
            continue;
        }
        std::size_t col = n_struct;
        for (std::size_t j = 0; j < n_struct; ++j)
            if (std::abs(t.at(i, j)) > 1e-9) {
                col = j;
                break;
            }
        if (col == n_struct) {
            t.drop_row(i);
        } else {
            t.pivot(i, col);
            ++i;
        }
    }

    // Phase two objective in terms of the current basis.
    for (std::size_t j = 0; j <= n_total; ++j) t.obj(j) = 0.0;
    for (std::size_t j = 0; j < nv; ++j) t.obj(j) = lp.cost[j];
    for (std::size_t i = 0; i < t.rows(); ++i) {
        const std::size_t b = t.basis()[i];
        const double cb = b < nv ? lp.cost[b] : 0.0;
        if (cb == 0.0) continue;
        for (std::size_t j = 0; j <= n_total; ++j) t.obj(j) -= cb * t.at(i, j);
    }
    if (!t.run(n_struct)) {
        res.status = LPResult::Status::unbounded;
        return res;
    }
    res.status = LPResult::Status::optimal;
    res.x.assign(nv, 0.0);
    for (std::size_t i = 0; i < t.rows(); ++i)
        if (t.basis()[i] < nv) res.x[t.basis()[i]] = std::max(0.0, t.rhs(i));
    res.objective = 0.0;
    for (std::size_t j = 0; j < nv; ++j) res.objective += lp.cost[j] * res.x[j];
    return res;
}

}  // namespace mmfield
