#pragma once

// Independent oracles and fixtures shared by the unit tests and the acceptance
// runner. Nothing here calls into the solver paths it is used to check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "rhb/hedging_lp.hpp"
#include "rhb/lp_solver.hpp"
#include "rhb/market_data.hpp"

namespace rhb::testing {

// Normal CDF from the Taylor series of erf (|x| <= 3) or the Laplace continued
// fraction for the tail, in long double.
inline long double normal_cdf_oracle(long double x) {
    const long double z = x / std::sqrt(2.0L);
    if (std::abs(z) <= 3.0L) {
        long double term = z, sum = z;
        for (int n = 1; n < 200; ++n) {
            term *= -z * z / n;
            const long double add = term / (2 * n + 1);
            sum += add;
            if (std::abs(add) < 1e-30L) break;
        }
        const long double erf = 2.0L / std::sqrt(3.14159265358979323846264338327950288L) * sum;
        return 0.5L * (1.0L + erf);
    }
    // Q(|x|) = n(x) / (|x| + 1/(|x| + 2/(|x| + 3/(...))))
    const long double a = std::abs(x);
    long double frac = a;
    for (int n = 200; n >= 1; --n) frac = a + n / frac;
    const long double q = std::exp(-0.5L * a * a) / std::sqrt(2.0L * 3.14159265358979323846264338327950288L) / frac;
    return x > 0 ? 1.0L - q : q;
}

// Gaussian elimination with partial pivoting in long double; nullopt when singular.
inline std::optional<std::vector<long double>> solve_small(std::vector<std::vector<long double>> A,
                                                           std::vector<long double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
        if (std::abs(A[p][c]) < 1e-11L) return std::nullopt;
        std::swap(A[p], A[c]);
        std::swap(b[p], b[c]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const long double f = A[r][c] / A[c][c];
            for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<long double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        long double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
        x[i] = s / A[i][i];
    }
    return x;
}

struct VertexResult {
    std::optional<double> best;  // nullopt: no feasible basic solution
    std::size_t vertices = 0;
};

// Exhaustive search over basic feasible solutions of {A x = b, x >= 0} for the
// optimum of c^T x. A must have full row rank; the feasible set must be bounded.
inline VertexResult vertex_enumeration(const Eigen::MatrixXd& A, const std::vector<double>& b,
                                       const std::vector<double>& c, bool maximize) {
    const std::size_t m = static_cast<std::size_t>(A.rows());
    const std::size_t n = static_cast<std::size_t>(A.cols());
    VertexResult out;
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    while (true) {
        std::vector<std::vector<long double>> B(m, std::vector<long double>(m));
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t k = 0; k < m; ++k) B[r][k] = A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(idx[k]));
        std::vector<long double> rhs(b.begin(), b.end());
        if (auto x = solve_small(B, rhs)) {
            bool feasible = true;
            long double obj = 0.0L;
            for (std::size_t k = 0; k < m; ++k) {
                if ((*x)[k] < -1e-10L) feasible = false;
                obj += (*x)[k] * c[idx[k]];
            }
            if (feasible) {
                ++out.vertices;
                const double v = static_cast<double>(obj);
                if (!out.best || (maximize ? v > *out.best : v < *out.best)) out.best = v;
            }
        }
        // next m-subset of n
        std::size_t i = m;
        while (i > 0 && idx[i - 1] == n - m + i - 1) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t k = i; k < m; ++k) idx[k] = idx[k - 1] + 1;
    }
    return out;
}

// Materialises the constraint matrix and costs of any LP.
inline std::pair<Eigen::MatrixXd, std::vector<double>> dense_form(const StandardLP& lp) {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(lp.num_rows()), static_cast<Eigen::Index>(lp.num_cols()));
    std::vector<double> col(lp.num_rows()), c(lp.num_cols());
    for (std::size_t j = 0; j < lp.num_cols(); ++j) {
        lp.columns->column(j, col);
        for (std::size_t i = 0; i < col.size(); ++i) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
        c[j] = lp.columns->cost(j);
    }
    return {A, c};
}

// Two-period martingale measure on a product grid: S_t1 has mean 1 and each
// conditional law of S_t2 given S_t1 has mean S_t1. Built from random two-point
// splits, so E[theta(S_t1)(S_t2 - S_t1)] = 0 for every theta.
inline std::vector<double> random_martingale_measure(const StateGrid& grid, std::mt19937_64& rng,
                                                     std::size_t mixtures = 3) {
    const auto& x = grid.nodes(0);
    const auto& y = grid.nodes(1);
    const std::size_t n1 = x.size(), n2 = y.size();
    std::uniform_real_distribution<double> u(0.0, 1.0);

    // Law with mean m on nodes v: mixture of two-point laws straddling m.
    auto law = [&](const std::vector<double>& v, double m) {
        std::vector<double> p(v.size(), 0.0);
        std::vector<std::size_t> below, above;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] <= m) below.push_back(i);
            if (v[i] >= m) above.push_back(i);
        }
        for (std::size_t r = 0; r < mixtures; ++r) {
            const std::size_t a = below[static_cast<std::size_t>(u(rng) * static_cast<double>(below.size())) % below.size()];
            const std::size_t b = above[static_cast<std::size_t>(u(rng) * static_cast<double>(above.size())) % above.size()];
            if (v[a] == v[b]) {
                p[a] += 1.0 / static_cast<double>(mixtures);
            } else {
                p[a] += (v[b] - m) / (v[b] - v[a]) / static_cast<double>(mixtures);
                p[b] += (m - v[a]) / (v[b] - v[a]) / static_cast<double>(mixtures);
            }
        }
        return p;
    };

    const auto p1 = law(x, 1.0);
    std::vector<double> mu(n1 * n2, 0.0);
    for (std::size_t i = 0; i < n1; ++i) {
        if (p1[i] == 0.0) continue;
        const auto p2 = law(y, x[i]);
        for (std::size_t j = 0; j < n2; ++j) mu[i * n2 + j] = p1[i] * p2[j];
    }
    return mu;
}

// Prices of calls on a grid under a discrete measure.
inline InstrumentSet price_under(const std::vector<double>& mu, const StateGrid& grid,
                                 const std::vector<std::vector<double>>& strikes) {
    InstrumentSet inst;
    for (std::size_t t = 0; t < strikes.size(); ++t)
        for (double K : strikes[t]) {
            long double p = 0.0L;
            for (std::size_t j = 0; j < grid.num_states(); ++j)
                p += static_cast<long double>(mu[j]) * std::max(grid.nodes(t)[grid.coordinate(j, t)] - K, 0.0);
            inst.calls.push_back({t, grid.maturities()[t], K, static_cast<double>(p)});
        }
    return inst;
}

inline double expectation(const std::vector<double>& mu, const StateGrid& grid, const PayoffSpec& phi) {
    long double e = 0.0L;
    for (std::size_t j = 0; j < grid.num_states(); ++j) e += static_cast<long double>(mu[j]) * phi(grid.state(j));
    return static_cast<double>(e);
}

// Flat Black-Scholes quotes on the default strike set, for small grid setups.
inline CallQuoteSet bs_quotes(double sigma, const std::vector<double>& maturities, const std::vector<double>& strikes) {
    std::vector<CallQuote> q;
    for (double t : maturities)
        for (double K : strikes) q.push_back({t, K, bs_call_price(std::log(K), sigma * std::sqrt(t))});
    return CallQuoteSet::from_quotes(q);
}

}  // namespace rhb::testing
