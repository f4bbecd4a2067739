#pragma once

// The two numerical experiments: a flat Black-Scholes smile with linear wings,
// and Heston quotes on a narrow strike range extrapolated with moment wings.
// Both price an ATM forward-start straddle over two maturities.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "rhb/heston_pricer.hpp"
#include "rhb/hedging_lp.hpp"
#include "rhb/sensitivity.hpp"
#include "rhb/wing_extrapolation.hpp"

namespace rhb {

// 0.3, 0.4, ..., 2.0
inline std::vector<double> default_strikes() {
    std::vector<double> k;
    for (int i = 3; i <= 20; ++i) k.push_back(i / 10.0);
    return k;
}

// 0.8, 0.9, ..., 1.2
inline std::vector<double> heston_traded_strikes() {
    std::vector<double> k;
    for (int i = 8; i <= 12; ++i) k.push_back(i / 10.0);
    return k;
}

struct GridSpec {
    std::size_t points = 500;
    double s_max = 5.0;
    unsigned degree = 4;
    double fs_strike = 1.0;
};

struct BsExperiment {
    double sigma = 0.2;
    std::vector<double> maturities{1.0, 1.5};
    std::vector<double> strikes = default_strikes();
    GridSpec grid;

    [[nodiscard]] ParametricSetup<BsSlopeFamily> setup() const {
        BsSlopeFamily family{sigma, maturities};
        return {family,
                std::vector<double>(maturities.size(), 0.0),
                std::vector<std::vector<double>>(maturities.size(), strikes),
                build_grid(grid.points, grid.s_max, maturities),
                StrategyBasis::uniform_degree(maturities.size(), grid.degree),
                forward_start_straddle(grid.fs_strike)};
    }
};

struct HestonExperiment {
    HestonParams params{1.0, 0.07, 0.4, 0.07, -0.8};
    std::vector<double> maturities{1.0, 1.5};
    std::vector<double> traded = heston_traded_strikes();
    std::vector<double> strikes = default_strikes();
    // (q_t1, p_t1, q_t2, p_t2)
    std::vector<double> moment_orders{5.058, 24.21, 6.83, 30.714};
    HestonQuadratureConfig quadrature;
    GridSpec grid;

    [[nodiscard]] CallQuoteSet traded_quotes() const { return heston_quotes(params, maturities, traded, quadrature); }

    [[nodiscard]] ParametricSetup<MomentWingFamily> setup() const {
        MomentWingFamily family{quoted_variance(traded_quotes())};
        return {family,
                moment_orders,
                std::vector<std::vector<double>>(maturities.size(), strikes),
                build_grid(grid.points, grid.s_max, maturities),
                StrategyBasis::uniform_degree(maturities.size(), grid.degree),
                forward_start_straddle(grid.fs_strike)};
    }
};

// Perturbation rows of the flat-smile study: equal slopes on both maturities.
inline std::vector<Perturbation> bs_slope_perturbations(const std::vector<double>& slopes, std::size_t maturities = 2) {
    std::vector<Perturbation> out;
    for (double a : slopes) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", a);
        out.push_back({buf, std::vector<double>(maturities, a)});
    }
    return out;
}

inline std::vector<double> table1_slopes() { return {0.0, 5e-5, 1e-4, 5e-3, 0.0476, 0.202}; }

// Moment-order sets (q_t1, p_t1, q_t2, p_t2).
inline std::vector<Perturbation> heston_moment_sets() {
    return {{"Set 1", {5.058, 24.21, 6.83, 30.714}}, {"Set 2", {5.06, 24.22, 6.84, 30.72}},
            {"Set 3", {5.2, 24.35, 6.9, 30.73}},     {"Set 4", {6.0, 25.1, 7.1, 31.1}},
            {"Set 5", {10.0, 35.0, 10.0, 35.0}},     {"Set 6", {12.0, 37.0, 12.0, 37.0}}};
}

template <VarianceFamily F>
InstrumentSet base_instruments(const ParametricSetup<F>& s) {
    return InstrumentSet::from_quotes(s.quotes(s.base_params), s.grid);
}

}  // namespace rhb
