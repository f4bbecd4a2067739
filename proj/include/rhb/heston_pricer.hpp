#pragma once

// Heston call prices by Fourier inversion (Lewis form) of the characteristic
// function of log S_t, normalised to s0 = 1 and zero rates.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "rhb/errors.hpp"
#include "rhb/market_data.hpp"
#include "rhb/wing_extrapolation.hpp"

namespace rhb {

struct HestonQuadratureConfig {
    double truncation = 0.0;  // upper integration bound; 0 picks it from the integrand decay
    double abs_tol = 1e-13;
    double rel_tol = 1e-10;
    std::size_t node_budget = 400000;

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw DomainError("quadrature tolerances must be positive");
        if (!(truncation >= 0.0)) throw DomainError("truncation must be non-negative");
        if (node_budget < 64) throw DomainError("node budget too small");
    }
};

namespace detail {

using cplx = std::complex<double>;

// log(1 + z) / z, accurate for small |z|.
inline cplx log1p_over(cplx z) {
    if (std::abs(z) < 1e-5) return 1.0 - z * (0.5 - z * (1.0 / 3.0 - 0.25 * z));
    return std::log(1.0 + z) / z;
}

// e^z - 1 without cancellation for small |z|.
inline cplx expm1_c(cplx z) {
    const double half_sin = std::sin(0.5 * z.imag());
    const cplx eiy_minus_1(-2.0 * half_sin * half_sin, std::sin(z.imag()));
    return std::expm1(z.real()) * std::exp(cplx(0.0, z.imag())) + eiy_minus_1;
}

}  // namespace detail

// E[exp(i u log S_t)] in the "little trap" form. The beta - d cancellation is
// removed algebraically so the xi -> 0 limit is exact.
inline std::complex<double> heston_char_fn(std::complex<double> u, double t, const HestonParams& h) {
    using detail::cplx;
    if (!(t > 0.0)) throw DomainError("maturity must be positive");
    const cplx i(0.0, 1.0);
    const cplx iu = i * u;
    const cplx a = iu + u * u;  // i u + u^2
    const cplx beta = h.kappa - h.rho * h.xi * iu;
    const cplx d = std::sqrt(beta * beta + h.xi * h.xi * a);
    const cplx bpd = beta + d;
    const cplx m = a / bpd;                   // (d - beta) / xi^2
    const cplx g = -h.xi * h.xi * m / bpd;    // (beta - d) / (beta + d)
    const cplx e = std::exp(-d * t);
    const cplx one_minus_e = -detail::expm1_c(-d * t);
    const cplx D = -m * one_minus_e / (1.0 - g * e);
    // log((1 - g e)/(1 - g)) = log(1 + z), z = g (1 - e)/(1 - g); divided by xi^2.
    const cplx z_over_xi2 = -m * one_minus_e / (bpd * (1.0 - g));
    const cplx z = h.xi * h.xi * z_over_xi2;
    const cplx log_term_over_xi2 = detail::log1p_over(z) * z_over_xi2;
    const cplx C = h.kappa * h.theta * (-m * t - 2.0 * log_term_over_xi2);
    return std::exp(C + D * h.v0);
}

namespace detail {

struct LobattoState {
    std::size_t evaluations = 0;
    std::size_t budget = 0;
    double tol = 0.0;
};

template <class F>
double adapt_lobatto(const F& f, double a, double b, double fa, double fb, LobattoState& st, int depth) {
    static const double alpha = std::sqrt(2.0 / 3.0);
    static const double beta = 1.0 / std::sqrt(5.0);
    const double h = 0.5 * (b - a);
    const double m = 0.5 * (a + b);
    const double mll = m - alpha * h, ml = m - beta * h, mr = m + beta * h, mrr = m + alpha * h;
    const double fmll = f(mll), fml = f(ml), fm = f(m), fmr = f(mr), fmrr = f(mrr);
    st.evaluations += 5;
    const double i2 = (h / 6.0) * (fa + fb + 5.0 * (fml + fmr));
    const double i1 = (h / 1470.0) * (77.0 * (fa + fb) + 432.0 * (fmll + fmrr) + 625.0 * (fml + fmr) + 672.0 * fm);
    if (std::abs(i1 - i2) <= st.tol || mll <= a || b <= mrr || depth > 60) return i1;
    if (st.evaluations > st.budget)
        throw NumericalError("heston quadrature exceeded node budget (" + std::to_string(st.budget) +
                             " evaluations, interval [" + std::to_string(a) + ", " + std::to_string(b) +
                             "], local error " + std::to_string(std::abs(i1 - i2)) + ")");
    return adapt_lobatto(f, a, mll, fa, fmll, st, depth + 1) +
           adapt_lobatto(f, mll, ml, fmll, fml, st, depth + 1) +
           adapt_lobatto(f, ml, m, fml, fm, st, depth + 1) +
           adapt_lobatto(f, m, mr, fm, fmr, st, depth + 1) +
           adapt_lobatto(f, mr, mrr, fmr, fmrr, st, depth + 1) +
           adapt_lobatto(f, mrr, b, fmrr, fb, st, depth + 1);
}

}  // namespace detail

// Lewis: C = 1 - sqrt(K)/pi * int_0^inf Re[e^{-iuk} phi(u - i/2)] / (u^2 + 1/4) du.
inline double heston_call(double k, double t, const HestonParams& params, const HestonQuadratureConfig& config = {}) {
    params.validate();
    config.validate();
    if (!(t > 0.0)) throw DomainError("maturity must be positive");
    if (k == -std::numeric_limits<double>::infinity()) return 1.0;
    if (!std::isfinite(k)) throw DomainError("log-moneyness must be finite");

    auto integrand = [&](double u) {
        const std::complex<double> phi = heston_char_fn({u, -0.5}, t, params);
        return (std::exp(std::complex<double>(0.0, -u * k)) * phi).real() / (u * u + 0.25);
    };
    // |integrand| <= |phi(u - i/2)| / (u^2 + 1/4); grow the bound until that envelope is negligible.
    auto envelope = [&](double u) { return std::abs(heston_char_fn({u, -0.5}, t, params)) / (u * u + 0.25); };

    double upper = config.truncation;
    if (upper == 0.0) {
        upper = 8.0;
        const double target = 0.01 * config.abs_tol;
        while (upper < 1e5) {
            double tail = 0.0;
            for (int j = 0; j <= 8; ++j) tail = std::max(tail, envelope(upper * (1.0 + 0.125 * j)));
            if (tail * upper < target) break;
            upper *= 2.0;
        }
        if (upper >= 1e5) throw NumericalError("heston quadrature: integrand does not decay by u = 1e5");
    }

    // Split at a few breakpoints so each piece sees a similar scale of oscillation.
    detail::LobattoState st;
    st.budget = config.node_budget;
    double coarse = 0.0;
    std::vector<double> edges{0.0};
    for (double e = 1.0; e < upper; e *= 4.0) edges.push_back(e);
    edges.push_back(upper);
    for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
        const double a = edges[j], b = edges[j + 1];
        coarse += 0.5 * (b - a) * (integrand(a) + integrand(b));
    }
    st.tol = std::max(config.abs_tol, config.rel_tol * std::abs(coarse));
    double integral = 0.0;
    for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
        const double a = edges[j], b = edges[j + 1];
        integral += detail::adapt_lobatto(integrand, a, b, integrand(a), integrand(b), st, 0);
    }

    const double price = 1.0 - std::exp(0.5 * k) / std::numbers::pi * integral;
    if (!std::isfinite(price)) throw NumericalError("heston quadrature produced a non-finite price");
    return price;
}

inline std::vector<double> heston_call_prices(const std::vector<double>& strikes, double t, const HestonParams& params,
                                              const HestonQuadratureConfig& config = {}) {
    std::vector<double> out;
    out.reserve(strikes.size());
    for (double K : strikes) {
        if (!(K > 0.0)) throw DomainError("moneyness must be positive");
        out.push_back(heston_call(std::log(K), t, params, config));
    }
    return out;
}

// Quotes for every (maturity, strike) pair; prices must sit strictly inside
// their no-arbitrage bounds.
inline CallQuoteSet heston_quotes(const HestonParams& params, const std::vector<double>& maturities,
                                  const std::vector<double>& strikes, const HestonQuadratureConfig& config = {}) {
    std::vector<CallQuote> quotes;
    for (double t : maturities) {
        const auto prices = heston_call_prices(strikes, t, params, config);
        for (std::size_t i = 0; i < strikes.size(); ++i) {
            const double lower = intrinsic_value(std::log(strikes[i]));
            if (!(prices[i] > lower) || !(prices[i] < 1.0))
                throw NumericalError("heston price " + std::to_string(prices[i]) + " at K=" +
                                     std::to_string(strikes[i]) + ", t=" + std::to_string(t) +
                                     " outside its no-arbitrage bounds");
            quotes.push_back({t, strikes[i], prices[i]});
        }
    }
    return CallQuoteSet::from_quotes(std::move(quotes));
}

}  // namespace rhb
