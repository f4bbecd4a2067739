#pragma once

// First-order sensitivity of hedging bounds to call-price perturbations,
// directly or through a parametrised implied-variance surface.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rhb/errors.hpp"
#include "rhb/hedging_lp.hpp"
#include "rhb/lp_solver.hpp"
#include "rhb/market_data.hpp"
#include "rhb/static_arbitrage.hpp"
#include "rhb/wing_extrapolation.hpp"

namespace rhb {

struct MomentConeCheck {
    bool interior = false;
    double margin = 0.0;  // smallest distance to (1-K)+ or 1 over all prices
    ValidationReport report;
};

// Perturbed prices must lie strictly inside their bounds and pass validate_quotes.
inline MomentConeCheck moment_cone_interior_check(const CallQuoteSet& base, std::span<const double> prices) {
    if (prices.size() != base.size()) throw DomainError("price vector length mismatch");
    MomentConeCheck out;
    out.margin = std::numeric_limits<double>::infinity();
    std::size_t idx = 0;
    for (const auto& s : base.slices())
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double c = prices[idx++];
            const double lower = intrinsic_value(std::log(s.strikes[i]));
            out.margin = std::min({out.margin, c - lower, 1.0 - c});
        }
    out.report = validate_quotes(base.with_prices(std::vector<double>(prices.begin(), prices.end())));
    out.interior = out.margin > 0.0 && out.report.passed;
    return out;
}

// dc/dw at one quote: Vega / (2 I sqrt(t)) with I = sqrt(w) the total implied
// volatility, i.e. n(d) / (2 sqrt(w)).
inline double call_price_variance_sensitivity(double k, double t, double w) {
    if (!(w > 0.0)) throw DomainError("total variance must be positive");
    const double I = std::sqrt(w);
    return bs_vega(k, I / std::sqrt(t), t) / (2.0 * I * std::sqrt(t));
}

// Jacobian of extrapolated_call_prices with respect to the family parameters,
// rows maturity-major / strike-minor.
template <VarianceFamily F>
Eigen::MatrixXd call_price_jacobian(const F& family, const std::vector<std::vector<double>>& strikes,
                                    std::span<const double> p0) {
    if (p0.size() != family.num_params()) throw DomainError("parameter vector length mismatch");
    const TotalVarianceSurface surface = family.surface(p0);
    if (strikes.size() != surface.num_maturities()) throw DomainError("one strike list per maturity required");
    std::size_t rows = 0;
    for (const auto& s : strikes) rows += s.size();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p0.size()));
    Eigen::Index r = 0;
    for (std::size_t s = 0; s < strikes.size(); ++s) {
        const double t = surface.slice(s).maturity();
        for (double K : strikes[s]) {
            const double k = std::log(K);
            const auto grad = family.variance_gradient(p0, s, k);
            bool any = false;
            for (double g : grad) any = any || g != 0.0;
            if (any) {
                const double dcdw = call_price_variance_sensitivity(k, t, surface.w(k, s));
                for (std::size_t j = 0; j < grad.size(); ++j) J(r, static_cast<Eigen::Index>(j)) = dcdw * grad[j];
            }
            ++r;
        }
    }
    return J;
}

struct DirectionalDerivative {
    double value = 0.0;                // <w*, h> at the returned optimal hedge
    bool alternative_optima = false;   // basis was primal degenerate
    std::size_t alternatives = 1;      // distinct optimal hedges enumerated
    std::optional<double> min_value;   // over enumerated optimal hedges
    std::optional<double> max_value;
    // inf over optimal hedges (super) / sup (sub) when enumerated, otherwise value.
    [[nodiscard]] double extremal(HedgeSide side) const {
        if (side == HedgeSide::Super) return min_value.value_or(value);
        return max_value.value_or(value);
    }
};

inline void require_certified(const HedgeSolution& h, double tol = 1e-8) {
    if (!h.certificates.within(tol))
        throw DomainError("hedge is not certified optimal (residuals above " + std::to_string(tol) + ")");
}

inline DirectionalDerivative directional_derivative(const HedgeSolution& hedge, std::span<const double> direction,
                                                    bool enumerate_alternatives = false,
                                                    std::size_t max_bases = 100) {
    require_certified(hedge);
    if (direction.size() != hedge.w.size()) throw DomainError("direction length must equal the number of options");
    DirectionalDerivative out;
    for (std::size_t i = 0; i < direction.size(); ++i) out.value += hedge.w[i] * direction[i];
    out.alternative_optima = hedge.alternative_optima_possible;
    if (enumerate_alternatives && hedge.alternative_optima_possible && hedge.solved) {
        const auto ys = enumerate_alternative_duals(hedge.solved->lp, hedge.raw, {}, max_bases);
        const auto& L = hedge.solved->columns->layout();
        out.alternatives = ys.size();
        double lo = out.value, hi = out.value;
        for (const auto& y : ys) {
            double v = 0.0;
            for (std::size_t i = 0; i < direction.size(); ++i) v += hedge.orientation * y[L.first_call + i] * direction[i];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        out.min_value = lo;
        out.max_value = hi;
    }
    return out;
}

// <w*, J h>
inline double chain_rule_derivative(std::span<const double> w, const Eigen::MatrixXd& jac,
                                    std::span<const double> h_param) {
    if (static_cast<std::size_t>(jac.rows()) != w.size() || static_cast<std::size_t>(jac.cols()) != h_param.size())
        throw DomainError("chain rule dimensions do not align");
    Eigen::Map<const Eigen::VectorXd> hv(h_param.data(), static_cast<Eigen::Index>(h_param.size()));
    const Eigen::VectorXd u = jac * hv;
    double out = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) out += w[i] * u[static_cast<Eigen::Index>(i)];
    return out;
}

inline double first_order_estimate(double base_bound, std::span<const double> w, const Eigen::MatrixXd& jac,
                                   std::span<const double> dp) {
    return base_bound + chain_rule_derivative(w, jac, dp);
}

// ---------------------------------------------------------------------------
// Perturbation studies
// ---------------------------------------------------------------------------

template <VarianceFamily F>
struct ParametricSetup {
    F family;
    std::vector<double> base_params;
    std::vector<std::vector<double>> strikes;  // per maturity, all instruments fed to the LP
    StateGrid grid;
    StrategyBasis basis;
    PayoffSpec payoff;

    [[nodiscard]] CallQuoteSet quotes(std::span<const double> params) const {
        return extrapolated_quotes(family.surface(params), strikes);
    }
};

struct SensitivityRow {
    std::string label;
    std::vector<double> params;
    bool valid = true;
    std::string note;
    double derivative = 0.0;  // <w*, J(p0)(p - p0)>
    double optimal_value = 0.0;
    double estimated_value = 0.0;
    double abs_diff = 0.0;
};

struct SensitivityReport {
    HedgeSide side = HedgeSide::Super;
    double base_value = 0.0;
    std::vector<double> base_weights;
    bool alternative_optima = false;
    std::vector<SensitivityRow> rows;
};

struct Perturbation {
    std::string label;
    std::vector<double> params;
};

// Derivatives and estimates use the optimal hedge and Jacobian at the base
// parameters; each row is re-solved from scratch.
template <VarianceFamily F>
SensitivityReport perturbation_study(const ParametricSetup<F>& setup, HedgeSide side,
                                     const std::vector<Perturbation>& perturbations, const HedgeOptions& opts = {}) {
    const CallQuoteSet base_quotes = setup.quotes(setup.base_params);
    const InstrumentSet base_inst = InstrumentSet::from_quotes(base_quotes, setup.grid);
    const auto base_check = moment_cone_interior_check(base_quotes, base_quotes.price_vector());
    if (!base_check.interior) throw ValidationError("base prices are not in the interior of the moment cone");
    auto [h0, m0] = hedge(side, setup.payoff, base_inst, setup.basis, setup.grid, opts);
    require_certified(h0);
    const Eigen::MatrixXd J = call_price_jacobian(setup.family, setup.strikes, setup.base_params);

    SensitivityReport rep;
    rep.side = side;
    rep.base_value = h0.bound;
    rep.base_weights = h0.w;
    rep.alternative_optima = h0.alternative_optima_possible;
    for (const auto& p : perturbations) {
        SensitivityRow row;
        row.label = p.label;
        row.params = p.params;
        if (p.params.size() != setup.base_params.size()) throw DomainError("perturbation parameter length mismatch");
        std::vector<double> dp(p.params.size());
        bool is_base = true;
        for (std::size_t j = 0; j < dp.size(); ++j) {
            dp[j] = p.params[j] - setup.base_params[j];
            is_base = is_base && dp[j] == 0.0;
        }
        row.derivative = chain_rule_derivative(h0.w, J, dp);
        row.estimated_value = h0.bound + row.derivative;
        if (is_base) {
            row.optimal_value = h0.bound;
            row.estimated_value = h0.bound;
            row.derivative = 0.0;
            rep.rows.push_back(row);
            continue;
        }
        std::vector<double> prices;
        try {
            prices = extrapolated_call_prices(setup.family.surface(p.params), setup.strikes);
        } catch (const DomainError& e) {
            row.valid = false;
            row.note = e.what();
            rep.rows.push_back(row);
            continue;
        }
        const auto check = moment_cone_interior_check(base_quotes, prices);
        if (!check.interior) {
            row.valid = false;
            row.note = "perturbed prices leave the interior of the moment cone";
            rep.rows.push_back(row);
            continue;
        }
        try {
            const auto inst = base_inst.with_prices(prices);
            row.optimal_value = hedge(side, setup.payoff, inst, setup.basis, setup.grid, opts).first.bound;
            row.abs_diff = std::abs(row.optimal_value - row.estimated_value);
        } catch (const Error& e) {
            row.valid = false;
            row.note = e.what();
        }
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace rhb
