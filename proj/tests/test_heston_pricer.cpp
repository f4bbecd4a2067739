#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "rhb/heston_pricer.hpp"
#include "rhb/static_arbitrage.hpp"

using namespace rhb;
using Catch::Approx;

namespace {

const HestonParams kBase{1.0, 0.07, 0.4, 0.07, -0.8};

// log S_t ~ N(-s2 t / 2, s2 t)
std::complex<double> bs_char_fn(std::complex<double> u, double t, double s2) {
    const std::complex<double> i(0.0, 1.0);
    return std::exp(-0.5 * s2 * t * (i * u + u * u));
}

// phi = exp(A + B v0) with B' = xi^2 B^2 / 2 - (kappa - i rho xi u) B - (u^2 + i u) / 2, A' = kappa theta B,
// integrated by classical RK4 from zero.
std::complex<double> riccati_char_fn(double u, double t, const HestonParams& h, int steps) {
    using C = std::complex<double>;
    const C i(0.0, 1.0);
    const C beta = h.kappa - i * h.rho * h.xi * u;
    const C forcing = -0.5 * (u * u + i * u);
    auto f = [&](C B) { return 0.5 * h.xi * h.xi * B * B - beta * B + forcing; };
    C A = 0.0, B = 0.0;
    const double dt = t / steps;
    for (int s = 0; s < steps; ++s) {
        const C k1 = f(B), k2 = f(B + 0.5 * dt * k1), k3 = f(B + 0.5 * dt * k2), k4 = f(B + dt * k3);
        A += h.kappa * h.theta * dt / 6.0 * (B + 2.0 * (B + 0.5 * dt * k1) + 2.0 * (B + 0.5 * dt * k2) + (B + dt * k3));
        B += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return std::exp(A + B * h.v0);
}

struct McPrice {
    std::vector<double> price, se;
};

// Full-truncation Euler on (log S, V), martingale step for log S.
McPrice monte_carlo(const HestonParams& h, double t, const std::vector<double>& strikes, std::size_t paths,
                    std::size_t steps, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    const double dt = t / static_cast<double>(steps), sq = std::sqrt(dt);
    const double rc = std::sqrt(1.0 - h.rho * h.rho);
    std::vector<double> sum(strikes.size(), 0.0), sum2(strikes.size(), 0.0);
    for (std::size_t p = 0; p < paths; ++p) {
        double x = 0.0, v = h.v0;
        for (std::size_t s = 0; s < steps; ++s) {
            const double z1 = z(rng), z2 = h.rho * z1 + rc * z(rng);
            const double vp = std::max(v, 0.0), sv = std::sqrt(vp);
            x += -0.5 * vp * dt + sv * sq * z1;
            v += h.kappa * (h.theta - vp) * dt + h.xi * sv * sq * z2;
        }
        const double S = std::exp(x);
        for (std::size_t i = 0; i < strikes.size(); ++i) {
            const double pay = std::max(S - strikes[i], 0.0);
            sum[i] += pay;
            sum2[i] += pay * pay;
        }
    }
    McPrice out;
    const double n = static_cast<double>(paths);
    for (std::size_t i = 0; i < strikes.size(); ++i) {
        const double m = sum[i] / n;
        out.price.push_back(m);
        out.se.push_back(std::sqrt((sum2[i] / n - m * m) / (n - 1.0)));
    }
    return out;
}

}  // namespace

TEST_CASE("heston_char_fn normalisation", "[heston_pricer]") {
    for (double t : {0.1, 1.0, 1.5, 10.0}) {
        REQUIRE(std::abs(heston_char_fn(0.0, t, kBase) - 1.0) <= 1e-15);
        REQUIRE(std::abs(heston_char_fn({0.0, -1.0}, t, kBase) - 1.0) <= 1e-12);
    }
    REQUIRE_THROWS_AS(heston_char_fn(1.0, 0.0, kBase), DomainError);
}

TEST_CASE("heston_char_fn bounded for real arguments", "[heston_pricer][property]") {
    for (double t : {0.25, 1.0, 1.5, 5.0, 30.0})
        for (double u = -200.0; u <= 200.0; u += 0.37) REQUIRE(std::abs(heston_char_fn(u, t, kBase)) <= 1.0 + 1e-13);
}

TEST_CASE("heston_char_fn matches the Riccati ODE at long maturities", "[heston_pricer][property]") {
    // a principal-branch logarithm would be off by 2 pi i multiples here
    const HestonParams h{0.5, 0.09, 1.0, 0.09, -0.9};
    for (double u : {0.5, 3.0, 7.5, 20.0}) {
        const auto ode = riccati_char_fn(u, 20.0, h, 40000);
        REQUIRE(std::abs(heston_char_fn(u, 20.0, h) - ode) <= 1e-9);
    }
    for (double u : {0.5, 3.0}) REQUIRE(std::abs(heston_char_fn(u, 1.5, kBase) - riccati_char_fn(u, 1.5, kBase, 4000)) <= 1e-11);
}

TEST_CASE("heston_char_fn has the Black-Scholes limit", "[heston_pricer]") {
    const HestonParams h{1.0, 0.04, 1e-8, 0.04, 0.0};
    for (double t : {0.5, 1.0, 1.5})
        for (double u : {0.0, 0.3, 1.0, 4.0, 25.0}) {
            for (double im : {0.0, -0.5, -1.0}) {
                const std::complex<double> w(u, im);
                REQUIRE(std::abs(heston_char_fn(w, t, h) - bs_char_fn(w, t, 0.04)) <= 1e-10);
            }
        }
}

TEST_CASE("heston_call examples", "[heston_pricer]") {
    const HestonParams h{1.0, 0.04, 1e-8, 0.04, -0.5};
    REQUIRE(heston_call(0.0, 1.0, h) == Approx(bs_call_price(0.0, 0.2)).margin(5e-6));
    REQUIRE(heston_call(-30.0, 1.0, kBase) == Approx(1.0).margin(1e-9));
    REQUIRE(heston_call(-std::numeric_limits<double>::infinity(), 1.0, kBase) == 1.0);

    const std::vector<double> K{0.8, 0.9, 1.0, 1.1, 1.2};
    const auto q = heston_quotes(kBase, {1.0, 1.5}, K);
    REQUIRE(validate_quotes(q).passed);
    for (const auto& e : convex_order_check(q, K)) REQUIRE_FALSE(e.violated);

    REQUIRE_THROWS_AS(heston_call(0.0, 0.0, kBase), DomainError);
    HestonQuadratureConfig tiny;
    tiny.node_budget = 64;
    tiny.rel_tol = 1e-15;
    tiny.abs_tol = 1e-18;
    REQUIRE_THROWS_AS(heston_call(0.0, 1.0, kBase, tiny), NumericalError);
    HestonQuadratureConfig bad;
    bad.abs_tol = 0.0;
    REQUIRE_THROWS_AS(heston_call(0.0, 1.0, kBase, bad), DomainError);
}

TEST_CASE("heston prices over a wide strike range are arbitrage free", "[heston_pricer][property]") {
    std::vector<double> K;
    for (int i = 0; i <= 30; ++i) K.push_back(0.5 + 0.05 * i);
    const auto q = heston_quotes(kBase, {1.0, 1.5}, K);
    const auto rep = validate_quotes(q);
    INFO((rep.violations.empty() ? std::string() : rep.violations.front().condition));
    REQUIRE(rep.passed);
    for (const auto& e : convex_order_check(q, K)) REQUIRE_FALSE(e.violated);
}

TEST_CASE("heston implied vols are smooth in strike", "[heston_pricer][property]") {
    for (double t : {1.0, 1.5}) {
        std::vector<double> iv;
        for (int i = 0; i <= 150; ++i) {
            const double k = std::log(0.5 + 0.01 * i);
            const double v = implied_total_vol(k, heston_call(k, t, kBase)) / std::sqrt(t);
            REQUIRE(std::isfinite(v));
            iv.push_back(v);
        }
        // second differences stay at the smooth-smile scale: no quadrature ripple
        for (std::size_t i = 1; i + 1 < iv.size(); ++i) REQUIRE(std::abs(iv[i - 1] - 2 * iv[i] + iv[i + 1]) <= 1e-4);
    }
}

TEST_CASE("heston prices agree with Monte Carlo", "[heston_pricer][property]") {
    const std::vector<double> K{0.8, 0.9, 1.0, 1.1, 1.2};
    const auto mc = monte_carlo(kBase, 1.0, K, 200000, 200, 2024);
    for (std::size_t i = 0; i < K.size(); ++i) {
        const double exact = heston_call(std::log(K[i]), 1.0, kBase);
        INFO("K = " << K[i] << " quadrature " << exact << " mc " << mc.price[i] << " se " << mc.se[i]);
        REQUIRE(std::abs(mc.price[i] - exact) <= 3.0 * mc.se[i]);
    }
}
