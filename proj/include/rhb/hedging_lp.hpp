#pragma once

// Discretised semi-static super- and sub-hedging. The LP is assembled in its
// measure form: one column per grid state, rows for total mass, call
// repricing and the martingale conditions of each strategy basis function.
// The hedge (cash, option weights, strategy coefficients) is read off the row
// multipliers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rhb/errors.hpp"
#include "rhb/lp_solver.hpp"
#include "rhb/market_data.hpp"

namespace rhb {

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

// Product grid over the maturities; state index is maturity-major, i.e. for
// two maturities index = i1 * n2 + i2.
class StateGrid {
public:
    StateGrid(std::vector<double> maturities, std::vector<std::vector<double>> nodes)
        : maturities_(std::move(maturities)), nodes_(std::move(nodes)) {
        if (maturities_.empty()) throw DomainError("grid needs at least one maturity");
        if (nodes_.size() != maturities_.size()) throw DomainError("one node list per maturity required");
        for (std::size_t t = 0; t < maturities_.size(); ++t) {
            if (t > 0 && !(maturities_[t] > maturities_[t - 1]))
                throw DomainError("grid maturities must be strictly increasing");
            if (nodes_[t].empty()) throw DomainError("empty node list");
            for (std::size_t i = 0; i < nodes_[t].size(); ++i) {
                if (!(nodes_[t][i] > 0.0)) throw DomainError("grid nodes must be positive");
                if (i > 0 && !(nodes_[t][i] > nodes_[t][i - 1])) throw DomainError("grid nodes must increase");
            }
        }
        strides_.assign(maturities_.size(), 1);
        for (std::size_t t = maturities_.size() - 1; t > 0; --t) strides_[t - 1] = strides_[t] * nodes_[t].size();
        total_ = strides_[0] * nodes_[0].size();
    }

    [[nodiscard]] const std::vector<double>& maturities() const { return maturities_; }
    [[nodiscard]] std::size_t num_maturities() const { return maturities_.size(); }
    [[nodiscard]] const std::vector<double>& nodes(std::size_t t) const { return nodes_.at(t); }
    [[nodiscard]] std::size_t num_states() const { return total_; }

    // Node index per maturity of a state.
    [[nodiscard]] std::size_t coordinate(std::size_t state, std::size_t t) const {
        return (state / strides_[t]) % nodes_[t].size();
    }

    void state(std::size_t idx, std::span<double> out) const {
        for (std::size_t t = 0; t < maturities_.size(); ++t) out[t] = nodes_[t][coordinate(idx, t)];
    }

    [[nodiscard]] std::vector<double> state(std::size_t idx) const {
        std::vector<double> s(maturities_.size());
        state(idx, s);
        return s;
    }

    [[nodiscard]] std::size_t maturity_index(double t) const {
        for (std::size_t i = 0; i < maturities_.size(); ++i)
            if (maturities_[i] == t) return i;
        throw DomainError("maturity " + std::to_string(t) + " is not a grid maturity");
    }

private:
    std::vector<double> maturities_;
    std::vector<std::vector<double>> nodes_;
    std::vector<std::size_t> strides_;
    std::size_t total_ = 0;
};

// Uniform nodes s_i = i * s_max / n_points, i = 1..n_points, for every maturity.
inline StateGrid build_grid(std::size_t n_points, double s_max, const std::vector<double>& maturities) {
    if (n_points < 2) throw DomainError("grid needs at least 2 points");
    if (!(s_max > 0.0)) throw DomainError("grid extent must be positive");
    std::vector<double> nodes(n_points);
    for (std::size_t i = 0; i < n_points; ++i) nodes[i] = static_cast<double>(i + 1) * s_max / static_cast<double>(n_points);
    return StateGrid(maturities, std::vector<std::vector<double>>(maturities.size(), nodes));
}

// ---------------------------------------------------------------------------
// Instruments, strategies, payoffs
// ---------------------------------------------------------------------------

struct TradedCall {
    std::size_t maturity_index;  // index into the grid maturities
    double maturity;
    double strike;
    double price;
};

struct InstrumentSet {
    std::vector<TradedCall> calls;  // maturity-major, strike-minor

    [[nodiscard]] std::size_t size() const { return calls.size(); }
    [[nodiscard]] std::vector<double> prices() const {
        std::vector<double> p;
        for (const auto& c : calls) p.push_back(c.price);
        return p;
    }
    [[nodiscard]] InstrumentSet with_prices(std::span<const double> prices) const {
        if (prices.size() != calls.size()) throw DomainError("price vector length mismatch");
        InstrumentSet out = *this;
        for (std::size_t i = 0; i < calls.size(); ++i) out.calls[i].price = prices[i];
        return out;
    }

    static InstrumentSet from_quotes(const CallQuoteSet& q, const StateGrid& grid) {
        InstrumentSet set;
        for (const auto& s : q.slices()) {
            const std::size_t ti = grid.maturity_index(s.maturity);
            for (std::size_t i = 0; i < s.size(); ++i) set.calls.push_back({ti, s.maturity, s.strikes[i], s.prices[i]});
        }
        return set;
    }
};

// One strategy basis function: theta(s_1..s_period) * (S_{period+1} - S_period),
// theta a monomial with the given exponents (size == period).
struct StrategyFunction {
    std::size_t period;              // 1-based index of the last observed maturity
    std::vector<unsigned> exponents;
};

struct StrategyBasis {
    bool initial_forward = true;     // a0 slot: constant position over [t0, t1], payoff S_{t1} - 1
    std::vector<StrategyFunction> functions;

    [[nodiscard]] std::size_t size() const { return functions.size() + (initial_forward ? 1 : 0); }

    // Monomials of total degree <= degree[j-1] in (s_1..s_j) for each period j = 1..n-1.
    static StrategyBasis monomial(std::size_t num_maturities, const std::vector<unsigned>& degrees) {
        if (num_maturities == 0) throw DomainError("basis needs at least one maturity");
        if (degrees.size() + 1 != num_maturities && !(num_maturities == 1 && degrees.empty()))
            throw DomainError("one degree cap per intermediate period required");
        StrategyBasis b;
        for (std::size_t j = 1; j < num_maturities; ++j) {
            const unsigned cap = degrees[j - 1];
            std::vector<unsigned> e(j, 0);
            // Enumerate exponent tuples by total degree, then lexicographically.
            for (unsigned total = 0; total <= cap; ++total) {
                std::function<void(std::size_t, unsigned)> rec = [&](std::size_t pos, unsigned left) {
                    if (pos + 1 == j) {
                        e[pos] = left;
                        b.functions.push_back({j, e});
                        return;
                    }
                    for (unsigned v = left + 1; v-- > 0;) {
                        e[pos] = v;
                        rec(pos + 1, left - v);
                    }
                };
                rec(0, total);
            }
        }
        return b;
    }

    static StrategyBasis uniform_degree(std::size_t num_maturities, unsigned degree) {
        return monomial(num_maturities, std::vector<unsigned>(num_maturities > 0 ? num_maturities - 1 : 0, degree));
    }
};

inline double strategy_value(const StrategyFunction& f, std::span<const double> s) {
    double theta = 1.0;
    for (std::size_t i = 0; i < f.exponents.size(); ++i)
        for (unsigned e = 0; e < f.exponents[i]; ++e) theta *= s[i];
    return theta * (s[f.period] - s[f.period - 1]);
}

struct PayoffSpec {
    enum class Kind { ForwardStartStraddle, Forward, TradedCall, Custom };
    Kind kind = Kind::Custom;
    std::string description;
    std::function<double(std::span<const double>)> evaluate;

    double operator()(std::span<const double> s) const { return evaluate(s); }
};

// |S_{t2} - strike * S_{t1}|
inline PayoffSpec forward_start_straddle(double strike) {
    if (!(strike > 0.0)) throw DomainError("forward-start strike must be positive");
    return {PayoffSpec::Kind::ForwardStartStraddle, "forward-start straddle K=" + std::to_string(strike),
            [strike](std::span<const double> s) {
                if (s.size() < 2) throw DomainError("forward-start straddle needs two maturities");
                return std::abs(s[1] - strike * s[0]);
            }};
}

// S_t - 1 at the given maturity index.
inline PayoffSpec forward_payoff(std::size_t maturity_index) {
    return {PayoffSpec::Kind::Forward, "forward t#" + std::to_string(maturity_index),
            [maturity_index](std::span<const double> s) { return s[maturity_index] - 1.0; }};
}

inline PayoffSpec traded_call_payoff(std::size_t maturity_index, double strike) {
    return {PayoffSpec::Kind::TradedCall, "call t#" + std::to_string(maturity_index) + " K=" + std::to_string(strike),
            [maturity_index, strike](std::span<const double> s) { return std::max(s[maturity_index] - strike, 0.0); }};
}

inline PayoffSpec custom_payoff(std::string description, std::function<double(std::span<const double>)> f) {
    return {PayoffSpec::Kind::Custom, std::move(description), std::move(f)};
}

inline PayoffSpec negated(const PayoffSpec& p) {
    auto f = p.evaluate;
    return {PayoffSpec::Kind::Custom, "-(" + p.description + ")", [f](std::span<const double> s) { return -f(s); }};
}

inline PayoffSpec shifted(const PayoffSpec& p, double beta) {
    auto f = p.evaluate;
    return {PayoffSpec::Kind::Custom, p.description + " + " + std::to_string(beta),
            [f, beta](std::span<const double> s) { return f(s) + beta; }};
}

// ---------------------------------------------------------------------------
// Measure-form LP
// ---------------------------------------------------------------------------

enum class HedgeSide { Super, Sub };

inline const char* to_string(HedgeSide s) { return s == HedgeSide::Super ? "super" : "sub"; }

// Row layout: [mass] [calls] [a0 if present] [strategy functions].
struct RowLayout {
    std::size_t mass = 0;
    std::size_t first_call = 1;
    std::size_t num_calls = 0;
    std::size_t first_strategy = 0;  // a0 row first when present
    std::size_t num_strategy = 0;
    bool has_initial_forward = true;

    [[nodiscard]] std::size_t num_rows() const { return 1 + num_calls + num_strategy; }
};

class HedgingColumns : public ColumnSource {
public:
    HedgingColumns(const PayoffSpec& payoff, InstrumentSet instruments, StrategyBasis basis, StateGrid grid,
                   double cost_sign = 1.0)
        : instruments_(std::move(instruments)), basis_(std::move(basis)), grid_(std::move(grid)) {
        const std::size_t T = grid_.num_maturities();
        for (const auto& c : instruments_.calls) {
            if (c.maturity_index >= T) throw DomainError("instrument maturity outside the grid");
            if (grid_.maturities()[c.maturity_index] != c.maturity)
                throw DomainError("instrument maturity does not match its grid index");
        }
        for (const auto& f : basis_.functions)
            if (f.period == 0 || f.period >= T || f.exponents.size() != f.period)
                throw DomainError("strategy function does not fit the grid maturities");
        layout_.num_calls = instruments_.size();
        layout_.has_initial_forward = basis_.initial_forward;
        layout_.first_strategy = 1 + layout_.num_calls;
        layout_.num_strategy = basis_.size();

        payoff_.resize(grid_.num_states());
        std::vector<double> s(T);
        for (std::size_t j = 0; j < payoff_.size(); ++j) {
            grid_.state(j, s);
            payoff_[j] = cost_sign * payoff(s);
            if (!std::isfinite(payoff_[j])) throw DomainError("payoff is not finite at grid state " + std::to_string(j));
        }
    }

    [[nodiscard]] std::size_t num_rows() const override { return layout_.num_rows(); }
    [[nodiscard]] std::size_t num_cols() const override { return grid_.num_states(); }
    [[nodiscard]] double cost(std::size_t j) const override { return payoff_[j]; }

    void column(std::size_t j, std::span<double> out) const override {
        const std::size_t T = grid_.num_maturities();
        double sbuf[16];
        std::vector<double> sv;
        std::span<double> s;
        if (T <= 16) {
            s = std::span<double>(sbuf, T);
        } else {
            sv.resize(T);
            s = sv;
        }
        grid_.state(j, s);
        std::size_t r = 0;
        out[r++] = 1.0;
        for (const auto& c : instruments_.calls) out[r++] = std::max(s[c.maturity_index] - c.strike, 0.0);
        if (basis_.initial_forward) out[r++] = s[0] - 1.0;
        for (const auto& f : basis_.functions) out[r++] = strategy_value(f, s);
    }

    void reduced_costs(std::span<const double> y, double cost_weight, std::span<double> out) const override {
        if (grid_.num_maturities() == 2) {
            two_period_reduced_costs(y, cost_weight, out);
            return;
        }
        ColumnSource::reduced_costs(y, cost_weight, out);
    }

    [[nodiscard]] const RowLayout& layout() const { return layout_; }
    [[nodiscard]] const StateGrid& grid() const { return grid_; }
    [[nodiscard]] const InstrumentSet& instruments() const { return instruments_; }
    [[nodiscard]] const StrategyBasis& basis() const { return basis_; }
    [[nodiscard]] const std::vector<double>& payoff_values() const { return payoff_; }

private:
    // y^T a(s1, s2) = F(s1) + G(s2) + (s2 - s1) P(s1).
    void two_period_reduced_costs(std::span<const double> y, double cost_weight, std::span<double> out) const {
        const auto& n1 = grid_.nodes(0);
        const auto& n2 = grid_.nodes(1);
        std::vector<double> F(n1.size(), y[layout_.mass]), G(n2.size(), 0.0), P(n1.size(), 0.0);
        std::size_t r = layout_.first_call;
        for (const auto& c : instruments_.calls) {
            const double yc = y[r++];
            if (yc == 0.0) continue;
            if (c.maturity_index == 0) {
                for (std::size_t i = 0; i < n1.size(); ++i) F[i] += yc * std::max(n1[i] - c.strike, 0.0);
            } else {
                for (std::size_t i = 0; i < n2.size(); ++i) G[i] += yc * std::max(n2[i] - c.strike, 0.0);
            }
        }
        if (basis_.initial_forward) {
            const double ya = y[r++];
            for (std::size_t i = 0; i < n1.size(); ++i) F[i] += ya * (n1[i] - 1.0);
        }
        for (const auto& f : basis_.functions) {
            const double yf = y[r++];
            for (std::size_t i = 0; i < n1.size(); ++i) {
                double theta = 1.0;
                for (unsigned e = 0; e < f.exponents[0]; ++e) theta *= n1[i];
                P[i] += yf * theta;
            }
        }
        const std::size_t m2 = n2.size();
        for (std::size_t i1 = 0; i1 < n1.size(); ++i1) {
            const double s1 = n1[i1];
            const double f1 = F[i1];
            const double p1 = P[i1];
            const std::size_t base = i1 * m2;
            for (std::size_t i2 = 0; i2 < m2; ++i2)
                out[base + i2] = cost_weight * payoff_[base + i2] - (f1 + G[i2] + (n2[i2] - s1) * p1);
        }
    }

    InstrumentSet instruments_;
    StrategyBasis basis_;
    StateGrid grid_;
    RowLayout layout_;
    std::vector<double> payoff_;
};

struct AssembledLP {
    StandardLP lp;
    std::shared_ptr<const HedgingColumns> columns;
};

// Super: maximise E_mu[Phi]; sub: minimise.
inline AssembledLP assemble(const PayoffSpec& payoff, const InstrumentSet& instruments, const StrategyBasis& basis,
                            const StateGrid& grid, HedgeSide side) {
    auto cols = std::make_shared<const HedgingColumns>(payoff, instruments, basis, grid);
    AssembledLP out;
    out.columns = cols;
    out.lp.sense = side == HedgeSide::Super ? Sense::Maximize : Sense::Minimize;
    out.lp.columns = cols;
    out.lp.rhs.assign(cols->num_rows(), 0.0);
    out.lp.rhs[cols->layout().mass] = 1.0;
    for (std::size_t i = 0; i < instruments.size(); ++i)
        out.lp.rhs[cols->layout().first_call + i] = instruments.calls[i].price;
    return out;
}

// ---------------------------------------------------------------------------
// Solutions
// ---------------------------------------------------------------------------

struct HedgeSolution {
    HedgeSide side = HedgeSide::Super;
    double lambda = 0.0;
    std::vector<double> w;  // option weights, instrument order
    std::vector<double> a;  // strategy coefficients, a0 first when present
    double bound = 0.0;
    double slack_min = 0.0;
    double slack_mean = 0.0;
    CertificateResiduals certificates;
    bool alternative_optima_possible = false;

    // The LP actually solved (for sub-hedging: the super-hedging LP of -Phi)
    // and its raw solution; orientation maps its multipliers to this hedge.
    std::shared_ptr<const AssembledLP> solved;
    LPSolution raw;
    double orientation = 1.0;
};

struct DiscreteMeasure {
    std::vector<double> weights;  // per grid state
    double mass = 0.0;
    std::vector<double> implied_call_prices;
    std::vector<double> call_residuals;        // implied - input
    std::vector<double> martingale_residuals;  // E_mu[basis payoff] per strategy row
};

struct HedgeOptions {
    SolverOptions solver;
    double certificate_tol = 1e-8;
    // called after every completed hedge() solve
    std::function<void(const HedgeSolution&)> on_solve;
};

// Portfolio value lambda + <w, calls> + strategy gains at one state.
inline double portfolio_value(const HedgeSolution& h, const InstrumentSet& instruments, const StrategyBasis& basis,
                              std::span<const double> s) {
    double v = h.lambda;
    for (std::size_t i = 0; i < instruments.size(); ++i) {
        const auto& c = instruments.calls[i];
        v += h.w[i] * std::max(s[c.maturity_index] - c.strike, 0.0);
    }
    std::size_t k = 0;
    if (basis.initial_forward) v += h.a[k++] * (s[0] - 1.0);
    for (const auto& f : basis.functions) v += h.a[k++] * strategy_value(f, s);
    return v;
}

struct DominanceCheck {
    double min_slack;
    double mean_slack;
    std::size_t worst_state;
};

// Evaluates the hedge at every grid state, independently of the LP rows.
inline DominanceCheck dominance_recheck(const HedgeSolution& h, const PayoffSpec& payoff,
                                        const InstrumentSet& instruments, const StrategyBasis& basis,
                                        const StateGrid& grid) {
    DominanceCheck out{std::numeric_limits<double>::infinity(), 0.0, 0};
    std::vector<double> s(grid.num_maturities());
    long double sum = 0.0L;
    for (std::size_t j = 0; j < grid.num_states(); ++j) {
        grid.state(j, s);
        const double diff = portfolio_value(h, instruments, basis, s) - payoff(s);
        const double slack = h.side == HedgeSide::Super ? diff : -diff;
        sum += slack;
        if (slack < out.min_slack) {
            out.min_slack = slack;
            out.worst_state = j;
        }
    }
    out.mean_slack = static_cast<double>(sum / static_cast<long double>(grid.num_states()));
    return out;
}

namespace detail {

inline DiscreteMeasure measure_from(const AssembledLP& a, const LPSolution& sol) {
    DiscreteMeasure m;
    m.weights = sol.x;
    const auto& cols = *a.columns;
    const auto& L = cols.layout();
    std::vector<double> col(L.num_rows());
    std::vector<long double> acc(L.num_rows(), 0.0L);
    for (std::size_t j = 0; j < sol.x.size(); ++j) {
        if (sol.x[j] == 0.0) continue;
        cols.column(j, col);
        for (std::size_t i = 0; i < col.size(); ++i) acc[i] += static_cast<long double>(col[i]) * sol.x[j];
    }
    m.mass = static_cast<double>(acc[L.mass]);
    for (std::size_t i = 0; i < L.num_calls; ++i) {
        const double implied = static_cast<double>(acc[L.first_call + i]);
        m.implied_call_prices.push_back(implied);
        m.call_residuals.push_back(implied - cols.instruments().calls[i].price);
    }
    for (std::size_t i = 0; i < L.num_strategy; ++i)
        m.martingale_residuals.push_back(static_cast<double>(acc[L.first_strategy + i]));
    return m;
}

inline void raise_on_status(const LPSolution& sol) {
    if (sol.status == LPStatus::Infeasible)
        throw ArbitrageError(
            "inputs admit arbitrage: no martingale measure on the grid reprices every call (check quotes and grid extent)");
    if (sol.status == LPStatus::Unbounded) throw UnboundedError("payoff cannot be dominated by the hedging instruments");
}

}  // namespace detail

inline std::pair<HedgeSolution, DiscreteMeasure> superhedge(const PayoffSpec& payoff, const InstrumentSet& instruments,
                                                            const StrategyBasis& basis, const StateGrid& grid,
                                                            const HedgeOptions& opts = {}) {
    auto assembled = std::make_shared<const AssembledLP>(assemble(payoff, instruments, basis, grid, HedgeSide::Super));
    LPSolution sol = solve(assembled->lp, opts.solver);
    detail::raise_on_status(sol);
    const auto& L = assembled->columns->layout();

    HedgeSolution h;
    h.side = HedgeSide::Super;
    h.lambda = sol.y[L.mass];
    h.w.assign(sol.y.begin() + static_cast<std::ptrdiff_t>(L.first_call),
               sol.y.begin() + static_cast<std::ptrdiff_t>(L.first_call + L.num_calls));
    h.a.assign(sol.y.begin() + static_cast<std::ptrdiff_t>(L.first_strategy),
               sol.y.begin() + static_cast<std::ptrdiff_t>(L.first_strategy + L.num_strategy));
    h.bound = h.lambda;
    for (std::size_t i = 0; i < instruments.size(); ++i) h.bound += h.w[i] * instruments.calls[i].price;
    h.certificates = sol.residuals;
    h.alternative_optima_possible = sol.primal_degenerate;
    const auto dom = dominance_recheck(h, payoff, instruments, basis, grid);
    h.slack_min = dom.min_slack;
    h.slack_mean = dom.mean_slack;
    DiscreteMeasure m = detail::measure_from(*assembled, sol);
    h.solved = assembled;
    h.raw = std::move(sol);
    h.orientation = 1.0;
    return {std::move(h), std::move(m)};
}

// Sub-hedging through the identity sub(Phi) = -super(-Phi).
inline std::pair<HedgeSolution, DiscreteMeasure> subhedge(const PayoffSpec& payoff, const InstrumentSet& instruments,
                                                          const StrategyBasis& basis, const StateGrid& grid,
                                                          const HedgeOptions& opts = {}) {
    auto [h, m] = superhedge(negated(payoff), instruments, basis, grid, opts);
    h.side = HedgeSide::Sub;
    h.lambda = -h.lambda;
    for (auto& v : h.w) v = -v;
    for (auto& v : h.a) v = -v;
    h.bound = -h.bound;
    h.orientation = -1.0;
    const auto dom = dominance_recheck(h, payoff, instruments, basis, grid);
    h.slack_min = dom.min_slack;
    h.slack_mean = dom.mean_slack;
    return {std::move(h), std::move(m)};
}

inline std::pair<HedgeSolution, DiscreteMeasure> hedge(HedgeSide side, const PayoffSpec& payoff,
                                                       const InstrumentSet& instruments, const StrategyBasis& basis,
                                                       const StateGrid& grid, const HedgeOptions& opts = {}) {
    auto out = side == HedgeSide::Super ? superhedge(payoff, instruments, basis, grid, opts)
                                        : subhedge(payoff, instruments, basis, grid, opts);
    if (opts.on_solve) opts.on_solve(out.first);
    return out;
}

struct DualityReport {
    double primal_value;  // lambda + <c, w>
    double dual_value;    // E_mu[Phi]
    double relative_gap;
    double complementary_slackness;  // max_j mu_j * |A(w_j) - Phi(w_j)|
    double mass_residual;
    double max_call_residual;
    double max_martingale_residual;
};

inline DualityReport duality_report(const HedgeSolution& h, const DiscreteMeasure& m) {
    if (!h.solved) throw DomainError("hedge carries no solved LP");
    const auto& cols = *h.solved->columns;
    DualityReport r{};
    r.primal_value = h.bound;
    long double ev = 0.0L;
    std::vector<double> s(cols.grid().num_maturities());
    for (std::size_t j = 0; j < m.weights.size(); ++j) {
        if (m.weights[j] == 0.0) continue;
        // cost() holds the payoff of the LP that was solved (negated for sub).
        const double phi = h.orientation * cols.cost(j);
        ev += static_cast<long double>(m.weights[j]) * phi;
        cols.grid().state(j, s);
        const double slack = std::abs(portfolio_value(h, cols.instruments(), cols.basis(), s) - phi);
        r.complementary_slackness = std::max(r.complementary_slackness, m.weights[j] * slack);
    }
    r.dual_value = static_cast<double>(ev);
    r.relative_gap = std::abs(r.primal_value - r.dual_value) / (1.0 + std::abs(r.primal_value));
    r.mass_residual = std::abs(m.mass - 1.0);
    for (double v : m.call_residuals) r.max_call_residual = std::max(r.max_call_residual, std::abs(v));
    for (double v : m.martingale_residuals) r.max_martingale_residual = std::max(r.max_martingale_residual, std::abs(v));
    return r;
}

// Bounds for increasing strategy degree caps (same degree for every period).
inline std::vector<double> refine_basis_study(const PayoffSpec& payoff, const InstrumentSet& instruments,
                                              const StateGrid& grid, const std::vector<unsigned>& degrees,
                                              HedgeSide side, const HedgeOptions& opts = {}) {
    for (std::size_t i = 1; i < degrees.size(); ++i)
        if (!(degrees[i] > degrees[i - 1])) throw DomainError("degree list must be increasing");
    std::vector<double> out;
    for (unsigned d : degrees) {
        const auto basis = StrategyBasis::uniform_degree(grid.num_maturities(), d);
        out.push_back(hedge(side, payoff, instruments, basis, grid, opts).first.bound);
    }
    return out;
}

}  // namespace rhb
