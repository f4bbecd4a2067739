#pragma once

// Revised simplex for standard-form LPs
//
//     min/max  c^T x   s.t.  A x = b,  x_j >= 0 or free,
//
// with columns supplied on demand. Designed for few rows (tens) and many
// columns (hundreds of thousands): the basis inverse is a small dense matrix
// and pricing is a single pass of A^T y over the column source.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "rhb/errors.hpp"

namespace rhb {

enum class Sense { Minimize, Maximize };
enum class ColumnBound { NonNegative, Free };
enum class LPStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LPStatus s) {
    switch (s) {
        case LPStatus::Optimal: return "optimal";
        case LPStatus::Infeasible: return "infeasible";
        case LPStatus::Unbounded: return "unbounded";
    }
    return "?";
}

// Column-wise access to A and c.
class ColumnSource {
public:
    virtual ~ColumnSource() = default;
    [[nodiscard]] virtual std::size_t num_rows() const = 0;
    [[nodiscard]] virtual std::size_t num_cols() const = 0;
    [[nodiscard]] virtual double cost(std::size_t j) const = 0;
    virtual void column(std::size_t j, std::span<double> out) const = 0;

    // out_j = cost_weight * c_j - y^T a_j for every column. Override when the
    // column structure allows something faster than a dot product per column.
    virtual void reduced_costs(std::span<const double> y, double cost_weight, std::span<double> out) const {
        std::vector<double> a(num_rows());
        for (std::size_t j = 0; j < num_cols(); ++j) {
            column(j, a);
            double dot = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) dot += y[i] * a[i];
            out[j] = cost_weight * cost(j) - dot;
        }
    }
};

class DenseColumns : public ColumnSource {
public:
    DenseColumns(Eigen::MatrixXd A, std::vector<double> c) : A_(std::move(A)), c_(std::move(c)) {
        if (static_cast<std::size_t>(A_.cols()) != c_.size())
            throw DomainError("objective length does not match column count");
    }

    [[nodiscard]] std::size_t num_rows() const override { return static_cast<std::size_t>(A_.rows()); }
    [[nodiscard]] std::size_t num_cols() const override { return static_cast<std::size_t>(A_.cols()); }
    [[nodiscard]] double cost(std::size_t j) const override { return c_.at(j); }
    void column(std::size_t j, std::span<double> out) const override {
        for (Eigen::Index i = 0; i < A_.rows(); ++i) out[static_cast<std::size_t>(i)] = A_(i, static_cast<Eigen::Index>(j));
    }
    void reduced_costs(std::span<const double> y, double cost_weight, std::span<double> out) const override {
        Eigen::Map<const Eigen::VectorXd> yv(y.data(), A_.rows());
        Eigen::VectorXd r = A_.transpose() * yv;
        for (std::size_t j = 0; j < c_.size(); ++j) out[j] = cost_weight * c_[j] - r[static_cast<Eigen::Index>(j)];
    }

    [[nodiscard]] const Eigen::MatrixXd& matrix() const { return A_; }
    [[nodiscard]] const std::vector<double>& costs() const { return c_; }

private:
    Eigen::MatrixXd A_;
    std::vector<double> c_;
};

struct StandardLP {
    Sense sense = Sense::Minimize;
    std::shared_ptr<const ColumnSource> columns;
    std::vector<double> rhs;
    std::vector<ColumnBound> bounds;  // empty: every column non-negative

    [[nodiscard]] std::size_t num_rows() const { return rhs.size(); }
    [[nodiscard]] std::size_t num_cols() const { return columns ? columns->num_cols() : 0; }
    [[nodiscard]] ColumnBound bound(std::size_t j) const {
        return bounds.empty() ? ColumnBound::NonNegative : bounds[j];
    }

    void validate() const {
        if (!columns) throw DomainError("LP has no column source");
        if (columns->num_rows() != rhs.size()) throw DomainError("row count does not match right-hand side length");
        if (columns->num_rows() == 0) throw DomainError("LP has no rows");
        if (!bounds.empty() && bounds.size() != columns->num_cols())
            throw DomainError("bounds length does not match column count");
        for (double v : rhs)
            if (!std::isfinite(v)) throw DomainError("non-finite right-hand side");
        std::vector<double> a(rhs.size());
        for (std::size_t j = 0; j < columns->num_cols(); ++j) {
            if (!std::isfinite(columns->cost(j))) throw DomainError("non-finite objective coefficient");
            columns->column(j, a);
            for (double v : a)
                if (!std::isfinite(v)) throw DomainError("non-finite constraint coefficient in column " + std::to_string(j));
        }
    }

    // Plain-text row/column listing for debugging.
    void write_listing(std::ostream& os, std::size_t max_cols = 200) const {
        os << (sense == Sense::Minimize ? "minimize" : "maximize") << "  rows=" << num_rows()
           << " cols=" << num_cols() << "\n";
        std::vector<double> a(num_rows());
        const std::size_t shown = std::min(max_cols, num_cols());
        for (std::size_t j = 0; j < shown; ++j) {
            columns->column(j, a);
            os << "col " << j << (bound(j) == ColumnBound::Free ? " free" : " >=0") << " cost " << columns->cost(j)
               << " :";
            for (std::size_t i = 0; i < a.size(); ++i)
                if (a[i] != 0.0) os << " r" << i << "=" << a[i];
            os << "\n";
        }
        if (shown < num_cols()) os << "... " << (num_cols() - shown) << " more columns\n";
        for (std::size_t i = 0; i < rhs.size(); ++i) os << "rhs r" << i << " = " << rhs[i] << "\n";
    }
};

struct SolverOptions {
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
    double pivot_tol = 1e-9;
    std::size_t max_iter = 200000;
    std::size_t refactor_every = 50;
    std::size_t degenerate_before_bland = 50;
    bool scaling = true;
    std::optional<std::vector<std::size_t>> warm_basis;  // internal basis indices from a previous solve
};

struct CertificateResiduals {
    double primal = 0.0;           // max |A x - b|_i and max negative part of bounded x_j
    double dual = 0.0;             // max dual infeasibility of the reduced costs
    double complementarity = 0.0;  // sum_j |x_j d_j|
    double gap = 0.0;              // |c^T x - b^T y| / (1 + |c^T x|)

    [[nodiscard]] bool within(double tol) const {
        return primal <= tol && dual <= tol && complementarity <= tol && gap <= tol;
    }
};

struct LPSolution {
    LPStatus status = LPStatus::Infeasible;
    std::vector<double> x;  // primal values per column
    std::vector<double> y;  // row multipliers; b^T y equals the optimal objective in the LP's own sense
    double objective = 0.0;
    CertificateResiduals residuals;
    std::vector<std::size_t> basis;  // internal indices: < n original, n.. split copies of free columns, then artificials
    std::size_t iterations = 0;
    std::vector<double> farkas;  // Infeasible: A^T f <= 0, b^T f > 0
    std::vector<double> ray;     // Unbounded: A r = 0, r >= 0, objective improving along r
    bool primal_degenerate = false;  // some basic variable sits at zero: alternative row multipliers may exist
    bool dual_degenerate = false;    // some nonbasic reduced cost is zero: alternative primal optima may exist
};

// Recomputes certificate residuals directly from the columns, independent of
// the factorisation used during the solve.
inline CertificateResiduals verify_certificates(const StandardLP& lp, const LPSolution& sol) {
    const std::size_t m = lp.num_rows();
    const std::size_t n = lp.num_cols();
    if (sol.status != LPStatus::Optimal) throw DomainError("certificates exist only for optimal solutions");
    if (sol.x.size() != n || sol.y.size() != m) throw DomainError("solution dimensions do not match the LP");
    CertificateResiduals res;
    const double sgn = lp.sense == Sense::Minimize ? 1.0 : -1.0;
    std::vector<double> a(m);
    std::vector<long double> ax(m, 0.0L);
    long double cx = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
        lp.columns->column(j, a);
        const double cj = lp.columns->cost(j);
        long double ya = 0.0L;
        for (std::size_t i = 0; i < m; ++i) {
            ax[i] += static_cast<long double>(a[i]) * sol.x[j];
            ya += static_cast<long double>(a[i]) * sol.y[i];
        }
        cx += static_cast<long double>(cj) * sol.x[j];
        // Min: c - A^T y >= 0. Max: A^T y - c >= 0.
        const double d = static_cast<double>(sgn * (cj - ya));
        if (lp.bound(j) == ColumnBound::Free) {
            res.dual = std::max(res.dual, std::abs(d));
        } else {
            res.dual = std::max(res.dual, -d);
            res.primal = std::max(res.primal, -sol.x[j]);
        }
        res.complementarity += std::abs(sol.x[j] * d);
    }
    long double by = 0.0L;
    for (std::size_t i = 0; i < m; ++i) {
        res.primal = std::max(res.primal, static_cast<double>(std::abs(ax[i] - lp.rhs[i])));
        by += static_cast<long double>(lp.rhs[i]) * sol.y[i];
    }
    res.gap = static_cast<double>(std::abs(cx - by) / (1.0L + std::abs(cx)));
    return res;
}

namespace detail {

class SimplexEngine {
public:
    SimplexEngine(const StandardLP& lp, const SolverOptions& opt) : lp_(lp), opt_(opt) {
        lp_.validate();
        src_ = lp_.columns.get();
        m_ = lp_.num_rows();
        n_ = lp_.num_cols();
        for (std::size_t j = 0; j < n_; ++j)
            if (lp_.bound(j) == ColumnBound::Free) free_.push_back(j);
        ns_ = n_ + free_.size();
        sigma_ = lp_.sense == Sense::Minimize ? 1.0 : -1.0;
        buf_.resize(m_);
        raw_d_.resize(n_);
        d_.resize(ns_);
        setup_scaling();
    }

    [[nodiscard]] std::size_t num_structural() const { return ns_; }
    [[nodiscard]] std::size_t num_rows() const { return m_; }

    // --- scaled data -----------------------------------------------------

    [[nodiscard]] std::size_t original(std::size_t j) const { return j < n_ ? j : free_[j - n_]; }
    [[nodiscard]] double orient(std::size_t j) const { return j < n_ ? 1.0 : -1.0; }
    [[nodiscard]] bool is_artificial(std::size_t j) const { return j >= ns_; }

    void scaled_column(std::size_t j, Eigen::VectorXd& out) const {
        out.setZero(static_cast<Eigen::Index>(m_));
        if (is_artificial(j)) {
            out[static_cast<Eigen::Index>(j - ns_)] = 1.0;
            return;
        }
        const std::size_t oj = original(j);
        src_->column(oj, buf_);
        const double f = col_scale_[oj] * orient(j);
        for (std::size_t i = 0; i < m_; ++i) out[static_cast<Eigen::Index>(i)] = row_factor_[i] * buf_[i] * f;
    }

    [[nodiscard]] double scaled_cost(std::size_t j, int phase) const {
        if (phase == 1) return is_artificial(j) ? 1.0 : 0.0;
        if (is_artificial(j)) return 0.0;
        const std::size_t oj = original(j);
        return sigma_ * src_->cost(oj) * col_scale_[oj] * orient(j);
    }

    // --- basis management ----------------------------------------------

    void set_basis(std::vector<std::size_t> basis) {
        basis_ = std::move(basis);
        is_basic_.assign(ns_ + m_, 0);
        for (auto j : basis_) is_basic_[j] = 1;
        refactor();
    }

    void slack_basis() {
        std::vector<std::size_t> b(m_);
        for (std::size_t i = 0; i < m_; ++i) b[i] = ns_ + i;
        set_basis(std::move(b));
    }

    // Returns false when the basis matrix is singular.
    bool try_refactor() {
        Eigen::MatrixXd B(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
        Eigen::VectorXd col;
        for (std::size_t r = 0; r < m_; ++r) {
            scaled_column(basis_[r], col);
            B.col(static_cast<Eigen::Index>(r)) = col;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
        lu.setThreshold(1e-11);
        if (!lu.isInvertible()) return false;
        Binv_ = lu.inverse();
        xB_ = Binv_ * b_;
        since_refactor_ = 0;
        return true;
    }

    void refactor() {
        if (!try_refactor())
            throw NumericalError("singular basis at iteration " + std::to_string(iterations_));
    }

    // y' = B^{-T} c_B in scaled units.
    [[nodiscard]] Eigen::VectorXd duals(int phase) const {
        Eigen::VectorXd cB(static_cast<Eigen::Index>(m_));
        for (std::size_t r = 0; r < m_; ++r) cB[static_cast<Eigen::Index>(r)] = scaled_cost(basis_[r], phase);
        return Binv_.transpose() * cB;
    }

    // Scaled reduced costs of all structural columns for scaled duals y'.
    // cost_weight 0 gives -(row combination) values for a row of B^{-1}.
    void price(const Eigen::VectorXd& y_scaled, double cost_weight, std::vector<double>& out) {
        std::vector<double> y(m_);
        for (std::size_t i = 0; i < m_; ++i) y[i] = row_factor_[i] * y_scaled[static_cast<Eigen::Index>(i)];
        src_->reduced_costs(y, cost_weight * sigma_, raw_d_);
        out.resize(ns_);
        for (std::size_t j = 0; j < n_; ++j) out[j] = raw_d_[j] * col_scale_[j];
        for (std::size_t f = 0; f < free_.size(); ++f) out[n_ + f] = -out[free_[f]];
    }

    void pivot(std::size_t r, std::size_t q, const Eigen::VectorXd& alpha) {
        const auto R = static_cast<Eigen::Index>(r);
        const double ar = alpha[R];
        Eigen::RowVectorXd row = Binv_.row(R) / ar;
        for (Eigen::Index i = 0; i < Binv_.rows(); ++i) {
            if (i == R) continue;
            if (alpha[i] != 0.0) Binv_.row(i) -= alpha[i] * row;
        }
        Binv_.row(R) = row;
        is_basic_[basis_[r]] = 0;
        basis_[r] = q;
        is_basic_[q] = 1;
        ++since_refactor_;
    }

    // --- simplex phases --------------------------------------------------

    enum class PhaseResult { Optimal, Unbounded };

    PhaseResult run_phase(int phase) {
        std::size_t degenerate_run = 0;
        Eigen::VectorXd aq;
        while (true) {
            if (iterations_ >= opt_.max_iter)
                throw NumericalError("simplex iteration limit " + std::to_string(opt_.max_iter) + " reached in phase " +
                                     std::to_string(phase));
            if (since_refactor_ >= opt_.refactor_every) refactor();
            const Eigen::VectorXd y = duals(phase);
            price(y, phase == 2 ? 1.0 : 0.0, d_);
            const bool bland = degenerate_run >= opt_.degenerate_before_bland;

            std::size_t q = ns_;
            double best = -opt_.opt_tol;
            for (std::size_t j = 0; j < ns_; ++j) {
                if (is_basic_[j]) continue;
                if (d_[j] < best) {
                    q = j;
                    if (bland) break;
                    best = d_[j];
                }
            }
            if (q == ns_) return PhaseResult::Optimal;

            scaled_column(q, aq);
            const Eigen::VectorXd alpha = Binv_ * aq;

            std::size_t r = m_;
            if (bland) {
                double best_ratio = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < m_; ++i) {
                    const double ai = alpha[static_cast<Eigen::Index>(i)];
                    if (ai <= opt_.pivot_tol) continue;
                    const double ratio = std::max(xB_[static_cast<Eigen::Index>(i)], 0.0) / ai;
                    if (ratio < best_ratio - 1e-15 ||
                        (ratio <= best_ratio + 1e-15 && r < m_ && basis_[i] < basis_[r])) {
                        if (ratio < best_ratio) best_ratio = ratio;
                        r = i;
                    }
                }
            } else {
                // Harris: relaxed bound first, then the largest pivot inside it.
                double theta_max = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < m_; ++i) {
                    const double ai = alpha[static_cast<Eigen::Index>(i)];
                    if (ai > opt_.pivot_tol)
                        theta_max = std::min(theta_max, (xB_[static_cast<Eigen::Index>(i)] + opt_.feas_tol) / ai);
                }
                double best_alpha = 0.0;
                for (std::size_t i = 0; i < m_; ++i) {
                    const double ai = alpha[static_cast<Eigen::Index>(i)];
                    if (ai <= opt_.pivot_tol) continue;
                    if (xB_[static_cast<Eigen::Index>(i)] / ai > theta_max) continue;
                    // Artificial variables leave first.
                    const double score = ai + (is_artificial(basis_[i]) ? 1e6 : 0.0);
                    if (score > best_alpha) {
                        best_alpha = score;
                        r = i;
                    }
                }
            }
            if (r == m_) {
                if (phase == 1) throw NumericalError("unbounded direction in phase 1 (numerical breakdown)");
                unbounded_column_ = q;
                unbounded_alpha_ = alpha;
                return PhaseResult::Unbounded;
            }

            const double theta = std::max(xB_[static_cast<Eigen::Index>(r)], 0.0) / alpha[static_cast<Eigen::Index>(r)];
            degenerate_run = theta <= 1e-12 ? degenerate_run + 1 : 0;
            xB_ -= theta * alpha;
            xB_[static_cast<Eigen::Index>(r)] = theta;
            pivot(r, q, alpha);
            ++iterations_;
            if (!std::isfinite(xB_.sum()))
                throw NumericalError("non-finite basic solution at iteration " + std::to_string(iterations_));
        }
    }

    // Pivots zero-level artificial variables out of the basis where possible.
    void drive_out_artificials() {
        std::vector<double> row_vals;
        Eigen::VectorXd aq;
        for (std::size_t r = 0; r < m_; ++r) {
            if (!is_artificial(basis_[r])) continue;
            const Eigen::VectorXd rho = Binv_.row(static_cast<Eigen::Index>(r)).transpose();
            price(rho, 0.0, row_vals);  // row_vals_j = -(B^{-1} A)_{rj}
            std::size_t q = ns_;
            double best = opt_.pivot_tol * 1e3;
            for (std::size_t j = 0; j < ns_; ++j) {
                if (is_basic_[j]) continue;
                if (std::abs(row_vals[j]) > best) {
                    best = std::abs(row_vals[j]);
                    q = j;
                }
            }
            if (q == ns_) continue;  // redundant row: the artificial stays basic at zero
            scaled_column(q, aq);
            const Eigen::VectorXd alpha = Binv_ * aq;
            pivot(r, q, alpha);
            refactor();
        }
    }

    LPSolution solve() {
        LPSolution sol;
        bool warm = false;
        if (opt_.warm_basis && opt_.warm_basis->size() == m_) {
            basis_ = *opt_.warm_basis;
            is_basic_.assign(ns_ + m_, 0);
            bool ok = true;
            for (auto j : basis_) {
                if (j >= ns_ + m_ || is_basic_[j]) ok = false;
                else is_basic_[j] = 1;
            }
            if (ok && try_refactor() && xB_.minCoeff() >= -opt_.feas_tol) {
                warm = true;
                for (std::size_t r = 0; r < m_; ++r)
                    if (is_artificial(basis_[r]) && xB_[static_cast<Eigen::Index>(r)] > opt_.feas_tol) warm = false;
            }
        }
        if (!warm) {
            slack_basis();
            run_phase(1);
            refactor();
            double infeas = 0.0;
            for (std::size_t r = 0; r < m_; ++r)
                if (is_artificial(basis_[r])) infeas += std::max(xB_[static_cast<Eigen::Index>(r)], 0.0);
            const double bscale = std::max(1.0, b_.cwiseAbs().maxCoeff());
            if (infeas > opt_.feas_tol * bscale) {
                sol.status = LPStatus::Infeasible;
                const Eigen::VectorXd y1 = duals(1);
                // Phase-1 duals: A'^T y1 <= 0 and b'^T y1 = infeasibility > 0.
                sol.farkas.resize(m_);
                for (std::size_t i = 0; i < m_; ++i)
                    sol.farkas[i] = row_factor_[i] * y1[static_cast<Eigen::Index>(i)];
                sol.iterations = iterations_;
                return sol;
            }
            drive_out_artificials();
        }

        if (run_phase(2) == PhaseResult::Unbounded) {
            sol.status = LPStatus::Unbounded;
            sol.ray.assign(n_, 0.0);
            auto add = [&](std::size_t j, double v) { sol.ray[original(j)] += orient(j) * col_scale_[original(j)] * v; };
            add(unbounded_column_, 1.0);
            for (std::size_t r = 0; r < m_; ++r)
                if (!is_artificial(basis_[r])) add(basis_[r], -unbounded_alpha_[static_cast<Eigen::Index>(r)]);
            sol.iterations = iterations_;
            return sol;
        }

        refactor();
        sol.status = LPStatus::Optimal;
        fill_solution(sol);
        return sol;
    }

    void fill_solution(LPSolution& sol) {
        sol.x.assign(n_, 0.0);
        for (std::size_t r = 0; r < m_; ++r) {
            const std::size_t j = basis_[r];
            if (is_artificial(j)) continue;
            const double v = std::max(xB_[static_cast<Eigen::Index>(r)], 0.0);
            sol.x[original(j)] += orient(j) * col_scale_[original(j)] * v;
        }
        const Eigen::VectorXd y2 = duals(2);
        sol.y.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) sol.y[i] = sigma_ * row_factor_[i] * y2[static_cast<Eigen::Index>(i)];
        long double obj = 0.0L;
        for (std::size_t j = 0; j < n_; ++j)
            if (sol.x[j] != 0.0) obj += static_cast<long double>(src_->cost(j)) * sol.x[j];
        sol.objective = static_cast<double>(obj);
        sol.basis = basis_;
        sol.iterations = iterations_;

        price(y2, 1.0, d_);
        for (std::size_t r = 0; r < m_; ++r)
            if (xB_[static_cast<Eigen::Index>(r)] <= opt_.feas_tol) sol.primal_degenerate = true;
        for (std::size_t j = 0; j < ns_; ++j)
            if (!is_basic_[j] && std::abs(d_[j]) <= opt_.opt_tol) {
                sol.dual_degenerate = true;
                break;
            }
        sol.residuals = verify_certificates(lp_, sol);
    }

    // --- alternative optimal multipliers ---------------------------------

    // Dual-feasible bases reachable by degenerate pivots (basic variables at
    // zero leave; the entering column passes a dual ratio test), explored
    // breadth-first from `start`. Returns the distinct multipliers found.
    std::vector<std::vector<double>> alternative_duals(const std::vector<std::size_t>& start, std::size_t max_bases) {
        std::vector<std::vector<double>> found;
        std::set<std::vector<std::size_t>> seen;
        std::deque<std::vector<std::size_t>> queue;
        auto key = [](std::vector<std::size_t> b) {
            std::sort(b.begin(), b.end());
            return b;
        };
        queue.push_back(start);
        seen.insert(key(start));
        std::vector<double> row_vals;
        while (!queue.empty() && seen.size() <= max_bases) {
            auto basis = queue.front();
            queue.pop_front();
            basis_ = basis;
            is_basic_.assign(ns_ + m_, 0);
            for (auto j : basis_) is_basic_[j] = 1;
            if (!try_refactor()) continue;
            const Eigen::VectorXd y2 = duals(2);
            std::vector<double> y(m_);
            for (std::size_t i = 0; i < m_; ++i) y[i] = sigma_ * row_factor_[i] * y2[static_cast<Eigen::Index>(i)];
            bool dup = false;
            for (const auto& f : found) {
                double diff = 0.0;
                for (std::size_t i = 0; i < m_; ++i) diff = std::max(diff, std::abs(f[i] - y[i]));
                if (diff <= 1e-10) dup = true;
            }
            if (!dup) found.push_back(y);
            price(y2, 1.0, d_);
            for (std::size_t r = 0; r < m_; ++r) {
                if (xB_[static_cast<Eigen::Index>(r)] > opt_.feas_tol) continue;
                const Eigen::VectorXd rho = Binv_.row(static_cast<Eigen::Index>(r)).transpose();
                price(rho, 0.0, row_vals);
                for (double sign : {-1.0, 1.0}) {
                    std::size_t q = ns_;
                    double best = std::numeric_limits<double>::infinity();
                    for (std::size_t j = 0; j < ns_; ++j) {
                        if (is_basic_[j]) continue;
                        const double a = -row_vals[j];  // (B^{-1} A)_{rj}
                        if (sign * a >= -opt_.pivot_tol * 1e3) continue;
                        const double ratio = std::max(d_[j], 0.0) / std::abs(a);
                        if (ratio < best) {
                            best = ratio;
                            q = j;
                        }
                    }
                    if (q == ns_) continue;
                    auto next = basis;
                    next[r] = q;
                    auto k = key(next);
                    if (seen.count(k) || seen.size() > max_bases) continue;
                    seen.insert(std::move(k));
                    queue.push_back(std::move(next));
                }
            }
        }
        return found;
    }

private:
    void setup_scaling() {
        row_factor_.assign(m_, 1.0);
        col_scale_.assign(n_, 1.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (lp_.rhs[i] < 0.0) row_factor_[i] = -1.0;
        if (opt_.scaling) {
            std::vector<double> row_max(m_, 0.0);
            for (std::size_t j = 0; j < n_; ++j) {
                src_->column(j, buf_);
                for (std::size_t i = 0; i < m_; ++i) row_max[i] = std::max(row_max[i], std::abs(buf_[i]));
            }
            for (std::size_t i = 0; i < m_; ++i)
                if (row_max[i] > 0.0) row_factor_[i] /= row_max[i];
            for (std::size_t j = 0; j < n_; ++j) {
                src_->column(j, buf_);
                double cmax = 0.0;
                for (std::size_t i = 0; i < m_; ++i) cmax = std::max(cmax, std::abs(row_factor_[i] * buf_[i]));
                if (cmax > 0.0) col_scale_[j] = 1.0 / cmax;
            }
        }
        b_.resize(static_cast<Eigen::Index>(m_));
        for (std::size_t i = 0; i < m_; ++i) b_[static_cast<Eigen::Index>(i)] = row_factor_[i] * lp_.rhs[i];
    }

    const StandardLP& lp_;
    SolverOptions opt_;
    const ColumnSource* src_ = nullptr;
    std::size_t m_ = 0, n_ = 0, ns_ = 0;
    std::vector<std::size_t> free_;
    double sigma_ = 1.0;
    std::vector<double> row_factor_;  // row sign flip times equilibration factor
    std::vector<double> col_scale_;
    Eigen::VectorXd b_;
    Eigen::MatrixXd Binv_;
    Eigen::VectorXd xB_;
    std::vector<std::size_t> basis_;
    std::vector<char> is_basic_;
    std::vector<double> d_;
    std::vector<double> raw_d_;
    mutable std::vector<double> buf_;
    std::size_t since_refactor_ = 0;
    std::size_t iterations_ = 0;
    std::size_t unbounded_column_ = 0;
    Eigen::VectorXd unbounded_alpha_;
};

}  // namespace detail

inline LPSolution solve(const StandardLP& lp, const SolverOptions& options = {}) {
    detail::SimplexEngine engine(lp, options);
    return engine.solve();
}

// Distinct optimal row multipliers reachable from an optimal basis through
// degenerate pivots, at most `max_bases` bases explored. The first entry is
// the multiplier of `sol` itself.
inline std::vector<std::vector<double>> enumerate_alternative_duals(const StandardLP& lp, const LPSolution& sol,
                                                                    const SolverOptions& options = {},
                                                                    std::size_t max_bases = 100) {
    if (sol.status != LPStatus::Optimal) throw DomainError("alternative multipliers need an optimal solution");
    detail::SimplexEngine engine(lp, options);
    return engine.alternative_duals(sol.basis, max_bases);
}

}  // namespace rhb
