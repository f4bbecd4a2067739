#pragma once

// Arbitrage-free extrapolation of total implied variance beyond the quoted
// strikes: Lee's moment formula, flat-smile wings and Heston moment wings.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rhb/errors.hpp"
#include "rhb/market_data.hpp"
#include "rhb/static_arbitrage.hpp"

namespace rhb {

// ---------------------------------------------------------------------------
// Lee's moment formula
// ---------------------------------------------------------------------------

// psi(z) = 2 - 4(sqrt(z(z+1)) - z), written without the cancellation at large z.
inline double lee_psi(double z) {
    if (!(z >= 0.0)) throw DomainError("lee_psi requires z >= 0");
    if (z == 0.0) return 2.0;
    // 2 - 4(r - z) with r = sqrt(z(z+1)), rewritten as 2z/(r+z)^2 to avoid cancellation
    const double s = std::sqrt(z * (z + 1.0)) + z;
    return 2.0 * z / (s * s);
}

// d psi / dz = -psi(z) / sqrt(z(z+1))
inline double lee_psi_derivative(double z) {
    if (!(z > 0.0)) throw DomainError("lee_psi_derivative requires z > 0");
    return -lee_psi(z) / std::sqrt(z * (z + 1.0));
}

// Largest symmetric slope a with w = a|k| + sigma^2 t free of butterfly arbitrage
// for every k: sqrt(4 - (2 - sigma^2 t)^2).
inline double bs_max_slope(double sigma, double t) {
    const double base = sigma * sigma * t;
    if (!(base < 4.0)) throw DomainError("bs_max_slope requires sigma^2 t < 4");
    if (!(base >= 0.0)) throw DomainError("bs_max_slope requires sigma^2 t >= 0");
    return std::sqrt(std::max(4.0 - (2.0 - base) * (2.0 - base), 0.0));
}

// ---------------------------------------------------------------------------
// Heston critical moments
// ---------------------------------------------------------------------------

struct HestonParams {
    double kappa;  // mean reversion speed
    double theta;  // long-run variance
    double xi;     // vol of vol
    double v0;     // initial variance
    double rho;    // spot/variance correlation

    void validate() const {
        if (!(kappa > 0.0)) throw DomainError("heston kappa must be positive");
        if (!(theta > 0.0)) throw DomainError("heston theta must be positive");
        if (!(xi > 0.0)) throw DomainError("heston xi must be positive");
        if (!(v0 > 0.0)) throw DomainError("heston v0 must be positive");
        if (!(rho >= -1.0 && rho <= 1.0)) throw DomainError("heston rho must lie in [-1, 1]");
    }

    // Parameters of 1/S under the share measure: kappa - rho xi, kappa theta / (kappa - rho xi), -rho.
    [[nodiscard]] HestonParams inverted() const {
        const double kt = kappa - rho * xi;
        if (!(kt > 0.0)) throw DomainError("symmetric transform invalid: kappa - rho*xi <= 0");
        return {kt, kappa * theta / kt, xi, v0, -rho};
    }
};

struct CriticalMoments {
    double maturity;
    double p_star;  // right wing
    double q_star;  // left wing
};

// (kappa - rho xi p) + gamma cot(gamma t / 2), gamma^2 = xi^2 p(p-1) - (kappa - rho xi p)^2.
// Defined only where gamma is real and positive.
inline std::optional<double> moment_explosion_function(double p, const HestonParams& h, double t) {
    const double beta = h.kappa - h.rho * h.xi * p;
    const double gamma2 = h.xi * h.xi * p * (p - 1.0) - beta * beta;
    if (!(gamma2 > 0.0)) return std::nullopt;
    const double gamma = std::sqrt(gamma2);
    const double arg = 0.5 * gamma * t;
    return beta + gamma * std::cos(arg) / std::sin(arg);
}

// Smallest root p > 1 of the moment explosion equation. The scan stays inside
// the first cot branch (gamma t / 2 < pi), so no pole is ever bracketed.
inline double heston_critical_moment_right(const HestonParams& h, double t) {
    h.validate();
    if (!(std::abs(h.rho) < 1.0)) throw DomainError("critical moment requires |rho| < 1");
    if (!(t > 0.0)) throw DomainError("maturity must be positive");

    auto in_branch = [&](double p) {
        const double beta = h.kappa - h.rho * h.xi * p;
        const double gamma2 = h.xi * h.xi * p * (p - 1.0) - beta * beta;
        return gamma2 > 0.0 && 0.5 * std::sqrt(gamma2) * t < std::numbers::pi;
    };

    constexpr int kScanPoints = 20000;
    const double log_lo = std::log(1.0 + 1e-9);
    const double log_hi = std::log(200.0);
    std::optional<std::pair<double, double>> prev;
    for (int i = 0; i <= kScanPoints; ++i) {
        const double p = std::exp(log_lo + (log_hi - log_lo) * i / kScanPoints);
        auto f = in_branch(p) ? moment_explosion_function(p, h, t) : std::nullopt;
        if (!f) {
            prev.reset();
            continue;
        }
        if (prev && ((prev->second > 0.0) != (*f > 0.0))) {
            double a = prev->first, b = p;
            double fa = prev->second;
            for (int it = 0; it < 200 && (b - a) > 1e-14 * b; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = *moment_explosion_function(m, h, t);
                if (fm == 0.0) return m;
                if ((fm > 0.0) == (fa > 0.0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            const double root = 0.5 * (a + b);
            const double residual = std::abs(*moment_explosion_function(root, h, t));
            if (residual > 1e-9)
                throw NumericalError("critical moment residual " + std::to_string(residual) + " above 1e-9");
            return root;
        }
        prev = std::make_pair(p, *f);
    }
    throw NumericalError("critical moment: no root found in (1, 200]");
}

// Left wing: the same equation for 1/S under the transformed parameters.
inline double heston_critical_moment_left(const HestonParams& h, double t) {
    h.validate();
    return heston_critical_moment_right(h.inverted(), t);
}

inline CriticalMoments heston_critical_moments(const HestonParams& h, double t) {
    return {t, heston_critical_moment_right(h, t), heston_critical_moment_left(h, t)};
}

// ---------------------------------------------------------------------------
// Total variance surfaces
// ---------------------------------------------------------------------------

struct WingSpec {
    Side side = Side::Right;
    double anchor_k = 0.0;  // log-moneyness of the first/last quoted strike
    double anchor_w = 0.0;  // total variance at the anchor
    double slope = 0.0;     // psi(moment order) or a raw slope, in [0, 2]

    void validate() const {
        if (!(slope >= 0.0 && slope <= 2.0)) throw DomainError("wing slope must lie in [0, 2]");
        if (!(anchor_w > 0.0)) throw DomainError("wing anchor variance must be positive");
    }
    [[nodiscard]] double offset(double k) const { return std::abs(k - anchor_k); }
    [[nodiscard]] double value(double k) const { return slope * offset(k) + anchor_w; }
};

struct VarianceDerivatives {
    double w;
    double wk;
    double wkk;
};

// One maturity: piecewise-linear w on quoted nodes plus linear wings.
class VarianceSlice {
public:
    VarianceSlice(double maturity, std::vector<double> k_nodes, std::vector<double> w_nodes, double left_slope,
                  double right_slope)
        : maturity_(maturity), k_(std::move(k_nodes)), w_(std::move(w_nodes)) {
        if (!(maturity_ > 0.0)) throw DomainError("maturity must be positive");
        if (k_.empty() || k_.size() != w_.size()) throw DomainError("variance slice needs quoted nodes");
        for (std::size_t i = 0; i < k_.size(); ++i) {
            if (!(w_[i] > 0.0)) throw DomainError("total variance must be positive");
            if (i > 0 && !(k_[i] > k_[i - 1])) throw DomainError("variance nodes must be strictly increasing in k");
        }
        left_ = {Side::Left, k_.front(), w_.front(), left_slope};
        right_ = {Side::Right, k_.back(), w_.back(), right_slope};
        left_.validate();
        right_.validate();
    }

    [[nodiscard]] double maturity() const { return maturity_; }
    [[nodiscard]] const WingSpec& left() const { return left_; }
    [[nodiscard]] const WingSpec& right() const { return right_; }
    [[nodiscard]] const std::vector<double>& k_nodes() const { return k_; }
    [[nodiscard]] const std::vector<double>& w_nodes() const { return w_; }

    [[nodiscard]] double operator()(double k) const { return derivatives(k).w; }

    // Derivatives of the piece containing k (right piece at a node).
    [[nodiscard]] VarianceDerivatives derivatives(double k) const {
        if (k < left_.anchor_k) return {left_.value(k), -left_.slope, 0.0};
        if (k >= right_.anchor_k) return {right_.value(k), right_.slope, 0.0};
        auto it = std::upper_bound(k_.begin(), k_.end(), k);
        const std::size_t hi = static_cast<std::size_t>(it - k_.begin());
        const std::size_t lo = hi - 1;
        const double slope = (w_[hi] - w_[lo]) / (k_[hi] - k_[lo]);
        return {w_[lo] + slope * (k - k_[lo]), slope, 0.0};
    }

    [[nodiscard]] bool in_left_wing(double k) const { return k < left_.anchor_k; }
    [[nodiscard]] bool in_right_wing(double k) const { return k > right_.anchor_k; }

private:
    double maturity_;
    std::vector<double> k_;
    std::vector<double> w_;
    WingSpec left_;
    WingSpec right_;
};

class TotalVarianceSurface {
public:
    TotalVarianceSurface() = default;
    explicit TotalVarianceSurface(std::vector<VarianceSlice> slices) : slices_(std::move(slices)) {
        for (std::size_t i = 1; i < slices_.size(); ++i)
            if (!(slices_[i].maturity() > slices_[i - 1].maturity()))
                throw DomainError("surface maturities must be strictly increasing");
    }

    [[nodiscard]] const std::vector<VarianceSlice>& slices() const { return slices_; }
    [[nodiscard]] const VarianceSlice& slice(std::size_t i) const { return slices_.at(i); }
    [[nodiscard]] std::size_t num_maturities() const { return slices_.size(); }

    [[nodiscard]] std::size_t index_of(double t) const {
        for (std::size_t i = 0; i < slices_.size(); ++i)
            if (slices_[i].maturity() == t) return i;
        throw DomainError("maturity " + std::to_string(t) + " not on the surface");
    }

    [[nodiscard]] double w(double k, std::size_t slice_index) const { return slices_.at(slice_index)(k); }

private:
    std::vector<VarianceSlice> slices_;
};

// w(k, t) = a_t |k| + sigma^2 t with symmetric wings anchored at k = 0.
inline TotalVarianceSurface bs_flat_wing_surface(double sigma, const std::vector<double>& maturities,
                                                 const std::vector<double>& slopes) {
    BSParams{sigma}.validate();
    if (maturities.size() != slopes.size()) throw DomainError("one slope per maturity required");
    std::vector<VarianceSlice> slices;
    for (std::size_t i = 0; i < maturities.size(); ++i) {
        const double t = maturities[i];
        const double a = slopes[i];
        const double bound = bs_max_slope(sigma, t);
        if (!(a >= 0.0) || a > bound)
            throw DomainError("inadmissible extrapolation: slope " + std::to_string(a) + " outside [0, " +
                              std::to_string(bound) + "] at t=" + std::to_string(t));
        slices.emplace_back(t, std::vector<double>{0.0}, std::vector<double>{sigma * sigma * t}, a, a);
    }
    return TotalVarianceSurface(std::move(slices));
}

// Quoted (k, w) nodes of one maturity.
struct VarianceNodes {
    double maturity;
    std::vector<double> k;
    std::vector<double> w;
};

// Implied total variance at every quote.
inline std::vector<VarianceNodes> quoted_variance(const CallQuoteSet& q) {
    std::vector<VarianceNodes> out;
    for (const auto& s : q.slices()) {
        VarianceNodes n{s.maturity, {}, {}};
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double k = s.log_strike(i);
            n.k.push_back(k);
            n.w.push_back(total_variance(k, s.maturity, s.prices[i]));
        }
        out.push_back(std::move(n));
    }
    return out;
}

// Linear wings with slopes psi(q_t) (left) and psi(p_t) (right).
inline TotalVarianceSurface heston_wing_surface(const std::vector<VarianceNodes>& quoted, const std::vector<double>& p,
                                                const std::vector<double>& q) {
    if (quoted.empty()) throw DomainError("heston wing surface needs quoted variance");
    if (p.size() != quoted.size() || q.size() != quoted.size())
        throw DomainError("one (p, q) pair per maturity required");
    std::vector<VarianceSlice> slices;
    for (std::size_t i = 0; i < quoted.size(); ++i) {
        if (quoted[i].k.empty()) throw DomainError("empty quoted region");
        if (!(p[i] > 0.0) || !(q[i] > 0.0)) throw DomainError("moment orders must be positive");
        slices.emplace_back(quoted[i].maturity, quoted[i].k, quoted[i].w, lee_psi(q[i]), lee_psi(p[i]));
    }
    return TotalVarianceSurface(std::move(slices));
}

// Prices c_BS(k, sqrt(w(k,t))) ordered maturity-major, strike-minor.
inline std::vector<double> extrapolated_call_prices(const TotalVarianceSurface& surface,
                                                    const std::vector<std::vector<double>>& strikes) {
    if (strikes.size() != surface.num_maturities()) throw DomainError("one strike list per maturity required");
    std::vector<double> out;
    for (std::size_t s = 0; s < strikes.size(); ++s) {
        for (double K : strikes[s]) {
            if (!(K > 0.0)) throw DomainError("moneyness must be positive");
            const double k = std::log(K);
            const double w = surface.w(k, s);
            if (!(w > 0.0)) throw NumericalError("surface evaluation failed at K=" + std::to_string(K));
            const double c = bs_call_price(k, std::sqrt(w));
            if (!(c > intrinsic_value(k)) || !(c < 1.0))
                throw DomainError("extrapolated price at K=" + std::to_string(K) +
                                  " not strictly inside its no-arbitrage bounds");
            out.push_back(c);
        }
    }
    return out;
}

inline CallQuoteSet extrapolated_quotes(const TotalVarianceSurface& surface,
                                        const std::vector<std::vector<double>>& strikes) {
    const auto prices = extrapolated_call_prices(surface, strikes);
    std::vector<CallQuote> quotes;
    std::size_t idx = 0;
    for (std::size_t s = 0; s < strikes.size(); ++s)
        for (double K : strikes[s]) quotes.push_back({surface.slice(s).maturity(), K, prices[idx++]});
    return CallQuoteSet::from_quotes(std::move(quotes));
}

// Validates a surface on a diagnostic strike grid: price checks via
// validate_quotes, calendar ordering of w, and the minimum of g on both wings.
inline ValidationReport check_surface(const TotalVarianceSurface& surface, const std::vector<double>& diagnostic_strikes,
                                      double g_tol = 1e-10) {
    std::vector<std::vector<double>> strikes(surface.num_maturities(), diagnostic_strikes);
    ValidationReport rep;
    try {
        rep = validate_quotes(extrapolated_quotes(surface, strikes));
    } catch (const DomainError& e) {
        rep.add({condition::kPriceBound, 0.0, {}, 1.0});
    }
    rep.g_min.assign(surface.num_maturities(), std::nullopt);
    for (std::size_t s = 0; s < surface.num_maturities(); ++s) {
        const auto& sl = surface.slice(s);
        double gmin = std::numeric_limits<double>::infinity();
        for (double K : diagnostic_strikes) {
            const double k = std::log(K);
            if (!sl.in_left_wing(k) && !sl.in_right_wing(k)) continue;
            const auto d = sl.derivatives(k);
            gmin = std::min(gmin, g_function(d.w, d.wk, d.wkk, k));
        }
        if (std::isfinite(gmin)) {
            rep.g_min[s] = gmin;
            if (gmin < -g_tol) rep.add({condition::kConvexity, sl.maturity(), {}, -gmin});
        }
        if (s + 1 < surface.num_maturities()) {
            for (double K : diagnostic_strikes) {
                const double k = std::log(K);
                const double diff = sl(k) - surface.slice(s + 1)(k);
                if (diff > kArbitrageTol) rep.add({condition::kCalendar, sl.maturity(), {K}, diff});
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Parametrised surface families (used for price Jacobians)
// ---------------------------------------------------------------------------

template <class F>
concept VarianceFamily = requires(const F& f, std::span<const double> params, std::size_t slice, double k) {
    { f.num_params() } -> std::convertible_to<std::size_t>;
    { f.surface(params) } -> std::same_as<TotalVarianceSurface>;
    { f.variance_gradient(params, slice, k) } -> std::same_as<std::vector<double>>;
};

// w(k, t; p) = p_t |k| + sigma^2 t, one slope parameter per maturity.
struct BsSlopeFamily {
    double sigma;
    std::vector<double> maturities;

    [[nodiscard]] std::size_t num_params() const { return maturities.size(); }

    [[nodiscard]] TotalVarianceSurface surface(std::span<const double> params) const {
        return bs_flat_wing_surface(sigma, maturities, std::vector<double>(params.begin(), params.end()));
    }

    [[nodiscard]] std::vector<double> variance_gradient(std::span<const double>, std::size_t slice, double k) const {
        std::vector<double> g(num_params(), 0.0);
        g.at(slice) = std::abs(k);
        return g;
    }
};

// Heston-style wings, parameters (q_t1, p_t1, q_t2, p_t2, ...): moment orders
// whose psi gives the left and right slopes of each maturity.
struct MomentWingFamily {
    std::vector<VarianceNodes> quoted;

    [[nodiscard]] std::size_t num_params() const { return 2 * quoted.size(); }

    [[nodiscard]] TotalVarianceSurface surface(std::span<const double> params) const {
        if (params.size() != num_params()) throw DomainError("moment wing family expects (q, p) per maturity");
        std::vector<double> p, q;
        for (std::size_t i = 0; i < quoted.size(); ++i) {
            q.push_back(params[2 * i]);
            p.push_back(params[2 * i + 1]);
        }
        return heston_wing_surface(quoted, p, q);
    }

    [[nodiscard]] std::vector<double> variance_gradient(std::span<const double> params, std::size_t slice,
                                                        double k) const {
        std::vector<double> g(num_params(), 0.0);
        const auto& nodes = quoted.at(slice);
        const double kL = nodes.k.front();
        const double kR = nodes.k.back();
        if (k < kL) g[2 * slice] = std::abs(k - kL) * lee_psi_derivative(params[2 * slice]);
        if (k > kR) g[2 * slice + 1] = std::abs(k - kR) * lee_psi_derivative(params[2 * slice + 1]);
        return g;
    }
};

static_assert(VarianceFamily<BsSlopeFamily>);
static_assert(VarianceFamily<MomentWingFamily>);

}  // namespace rhb
