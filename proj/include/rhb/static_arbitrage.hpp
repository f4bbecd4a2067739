#pragma once

// Static-arbitrage checks on call quotes and on linear total-variance wings.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rhb/errors.hpp"
#include "rhb/market_data.hpp"

namespace rhb {

// Condition identifiers used in reports.
namespace condition {
inline constexpr const char* kPriceBound = "price-bound";        // (1-K)+ < c < 1
inline constexpr const char* kFirstChord = "ii";                // first chord slope >= -1
inline constexpr const char* kMonotone = "v";                   // strictly decreasing in strike
inline constexpr const char* kConvexity = "convexity";          // butterflies >= 0
inline constexpr const char* kZeroButterfly = "zero-butterfly";  // butterfly priced at zero
inline constexpr const char* kCalendar = "vi";                  // c(K,t1) <= c(K,t2)
}  // namespace condition

struct Violation {
    std::string condition;
    double maturity = 0.0;
    std::vector<double> strikes;
    double magnitude = 0.0;  // always > 0
};

struct ValidationReport {
    bool passed = true;
    std::vector<Violation> violations;
    // Per-maturity minimum of the butterfly function g over the checked k-range;
    // only populated when a variance surface (not raw quotes) was checked.
    std::vector<std::optional<double>> g_min;

    void add(Violation v) {
        passed = false;
        violations.push_back(std::move(v));
    }
    void merge(const ValidationReport& other) {
        for (const auto& v : other.violations) add(v);
    }
};

inline constexpr double kArbitrageTol = 1e-12;

namespace detail {

// Strict requirement `margin > 0` with tolerance band; magnitude is the shortfall plus tol.
inline void check_strict(ValidationReport& rep, double margin, const char* cond, double t,
                         std::vector<double> strikes, double tol) {
    if (margin <= tol) rep.add({cond, t, std::move(strikes), std::max(-margin, 0.0) + tol});
}

}  // namespace detail

// Checks one maturity slice: strict price bounds, strict monotonicity,
// first-chord slope, discrete convexity (zero butterflies are flagged).
inline ValidationReport validate_slice(const MaturitySlice& s, double tol = kArbitrageTol) {
    ValidationReport rep;
    const double t = s.maturity;
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double K = s.strikes[i];
        const double c = s.prices[i];
        detail::check_strict(rep, c - std::max(1.0 - K, 0.0), condition::kPriceBound, t, {K}, tol);
        detail::check_strict(rep, 1.0 - c, condition::kPriceBound, t, {K}, tol);
    }
    for (std::size_t i = 0; i + 1 < n; ++i)
        detail::check_strict(rep, s.prices[i] - s.prices[i + 1], condition::kMonotone, t,
                             {s.strikes[i], s.strikes[i + 1]}, tol);
    if (n >= 2) {
        const double slope = (s.prices[1] - s.prices[0]) / (s.strikes[1] - s.strikes[0]);
        if (slope < -1.0 - tol) rep.add({condition::kFirstChord, t, {s.strikes[0], s.strikes[1]}, -1.0 - slope});
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double left = (s.prices[i] - s.prices[i - 1]) / (s.strikes[i] - s.strikes[i - 1]);
        const double right = (s.prices[i + 1] - s.prices[i]) / (s.strikes[i + 1] - s.strikes[i]);
        // Scaled so that on a uniform grid this is c[i-1] - 2c[i] + c[i+1].
        const double fly = (right - left) * 0.5 * (s.strikes[i + 1] - s.strikes[i - 1]);
        std::vector<double> ks{s.strikes[i - 1], s.strikes[i], s.strikes[i + 1]};
        if (fly < -tol)
            rep.add({condition::kConvexity, t, std::move(ks), -fly});
        else if (fly <= tol)
            rep.add({condition::kZeroButterfly, t, std::move(ks), std::abs(fly) + tol});
    }
    return rep;
}

// Calendar condition at strikes common to consecutive maturities.
inline ValidationReport check_calendar(const CallQuoteSet& q, double tol = kArbitrageTol) {
    ValidationReport rep;
    const auto& sl = q.slices();
    for (std::size_t a = 0; a + 1 < sl.size(); ++a) {
        for (std::size_t b = a + 1; b < sl.size(); ++b) {
            for (std::size_t i = 0; i < sl[a].size(); ++i) {
                const auto& kb = sl[b].strikes;
                auto it = std::find(kb.begin(), kb.end(), sl[a].strikes[i]);
                if (it == kb.end()) continue;
                const double diff = sl[a].prices[i] - sl[b].prices[static_cast<std::size_t>(it - kb.begin())];
                if (diff > tol) rep.add({condition::kCalendar, sl[a].maturity, {sl[a].strikes[i]}, diff});
            }
        }
    }
    return rep;
}

inline ValidationReport validate_quotes(const CallQuoteSet& q, double tol = kArbitrageTol) {
    if (q.size() == 0) throw DomainError("no quotes");
    ValidationReport rep;
    for (const auto& s : q.slices()) {
        rep.merge(validate_slice(s, tol));
        rep.g_min.emplace_back(std::nullopt);
    }
    rep.merge(check_calendar(q, tol));
    return rep;
}

// ---------------------------------------------------------------------------
// Convex order between two maturities
// ---------------------------------------------------------------------------

struct ConvexOrderEntry {
    double strike;
    double earlier_price;
    double later_price;
    bool violated;
    double magnitude;  // earlier - later when violated, else 0
};

// `earlier(K)` and `later(K)` evaluate the call surfaces at the two maturities.
template <class EarlierFn, class LaterFn>
std::vector<ConvexOrderEntry> convex_order_check(EarlierFn&& earlier, LaterFn&& later,
                                                 const std::vector<double>& strikes,
                                                 double tol = kArbitrageTol) {
    std::vector<ConvexOrderEntry> out;
    for (double K : strikes) {
        const double c1 = earlier(K);
        const double c2 = later(K);
        const bool bad = c1 - c2 > tol;
        out.push_back({K, c1, c2, bad, bad ? c1 - c2 : 0.0});
    }
    return out;
}

// Quote-set form: compares each pair of consecutive maturities at the given
// strikes, which must be quoted at both maturities.
inline std::vector<ConvexOrderEntry> convex_order_check(const CallQuoteSet& q, const std::vector<double>& strikes,
                                                        double tol = kArbitrageTol) {
    if (q.num_maturities() < 2) throw DomainError("convex order check needs at least two maturities");
    std::vector<ConvexOrderEntry> out;
    for (std::size_t a = 0; a + 1 < q.num_maturities(); ++a) {
        auto lookup = [](const MaturitySlice& s) {
            return [&s](double K) {
                auto it = std::find(s.strikes.begin(), s.strikes.end(), K);
                if (it == s.strikes.end())
                    throw DomainError("strike " + std::to_string(K) + " not quoted at maturity " +
                                      std::to_string(s.maturity));
                return s.prices[static_cast<std::size_t>(it - s.strikes.begin())];
            };
        };
        auto part = convex_order_check(lookup(q.slice(a)), lookup(q.slice(a + 1)), strikes, tol);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Butterfly function g(k) and linear wings
// ---------------------------------------------------------------------------

// g = (1 - k w'/(2w))^2 - (w')^2/4 (1/w + 1/4) + w''/2
inline double g_function(double w, double wk, double wkk, double k) {
    if (!(w > 0.0)) throw DomainError("g_function requires w > 0");
    const double a = 1.0 - k * wk / (2.0 * w);
    return a * a - 0.25 * wk * wk * (1.0 / w + 0.25) + 0.5 * wkk;
}

enum class Side { Left, Right };

inline const char* to_string(Side s) { return s == Side::Left ? "left" : "right"; }

enum class WingVerdict { AdmissibleEverywhere, AdmissibleBeyond, Inadmissible };

struct WingAdmissibility {
    double a1 = 0.0;
    double a0 = 0.0;
    Side side = Side::Right;
    WingVerdict verdict = WingVerdict::AdmissibleEverywhere;
    // Threshold log-moneyness for AdmissibleBeyond: g >= 0 on [k_star, inf) for the
    // right wing, on (-inf, k_star] for the left wing.
    std::optional<double> k_star;
};

// Admissibility of w(k) = a1 |k| + a0 on one side. The left wing mirrors the
// right one under k -> -k.
inline WingAdmissibility wing_admissibility(double a0, double a1, Side side) {
    if (!(a0 >= 0.0) || !(a1 >= 0.0)) throw DomainError("wing coefficients must be non-negative");
    WingAdmissibility out{a1, a0, side, WingVerdict::AdmissibleEverywhere, std::nullopt};
    const double mirror = side == Side::Right ? 1.0 : -1.0;
    if (a1 > 2.0) {
        out.verdict = WingVerdict::Inadmissible;
        return out;
    }
    if (a1 == 0.0) return out;
    if (a1 == 2.0) {
        if (a0 >= 2.0) return out;  // numerator of g is positive for every x > 0
        out.verdict = WingVerdict::AdmissibleBeyond;
        out.k_star = mirror * a0 * (8.0 - 6.0 * a0) / (8.0 * (a0 - 2.0));
        return out;
    }
    const double root4 = std::sqrt(4.0 - a1 * a1);
    if (a0 >= 2.0 - root4) return out;
    const double disc = std::max(a0 * a0 - 4.0 * a0 + a1 * a1, 0.0);
    const double k_plus = (a1 * (a0 + 2.0) - 8.0 * a0 / a1 + 2.0 * std::sqrt(disc)) / (4.0 - a1 * a1);
    out.verdict = WingVerdict::AdmissibleBeyond;
    out.k_star = mirror * k_plus;
    return out;
}

// ---------------------------------------------------------------------------
// Implied distribution and feasible extrapolation region
// ---------------------------------------------------------------------------

struct CdfValue {
    double value;      // clamped to [0, 1]
    double raw;        // 1 + right chord slope, unclamped
    bool clamped;
};

// mu([0, K]) = 1 + right derivative of the call price at K, using the chord to
// the next strike on the grid.
inline CdfValue breeden_litzenberger_cdf(const std::vector<double>& strikes, const std::vector<double>& prices,
                                         double K) {
    if (strikes.size() != prices.size() || strikes.size() < 2)
        throw DomainError("cdf needs at least two strikes with prices");
    if (K < strikes.front() || K >= strikes.back())
        throw DomainError("strike " + std::to_string(K) + " outside the grid (extrapolation required)");
    auto it = std::upper_bound(strikes.begin(), strikes.end(), K);
    const std::size_t hi = static_cast<std::size_t>(it - strikes.begin());
    const std::size_t lo = hi - 1;
    const double slope = (prices[hi] - prices[lo]) / (strikes[hi] - strikes[lo]);
    const double raw = 1.0 + slope;
    const double clamped = std::clamp(raw, 0.0, 1.0);
    return {clamped, raw, clamped != raw};
}

struct Line {
    double slope;
    double intercept;
    [[nodiscard]] double operator()(double x) const { return slope * x + intercept; }
};

struct FeasibleRegion {
    double maturity = 0.0;
    double K_square = 0.0;  // left extrapolation meets intrinsic value (1-K)+
    double K_circle = 0.0;  // right extrapolation meets zero
    Line left_line{};
    Line right_line{};
};

inline Line line_through(double x0, double y0, double x1, double y1) {
    if (x1 == x0) throw DomainError("degenerate region: coincident strikes");
    const double slope = (y1 - y0) / (x1 - x0);
    return {slope, y0 - slope * x0};
}

inline FeasibleRegion feasible_extrapolation_region(const MaturitySlice& s) {
    if (s.size() < 2) throw DomainError("feasible region needs at least two quotes");
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double c = s.prices[i];
        if (!(c > std::max(1.0 - s.strikes[i], 0.0)) || !(c < 1.0))
            throw DomainError("feasible region needs strictly interior prices");
    }
    FeasibleRegion r;
    r.maturity = s.maturity;
    r.left_line = line_through(s.strikes[0], s.prices[0], s.strikes[1], s.prices[1]);
    const std::size_t n = s.size();
    r.right_line = line_through(s.strikes[n - 2], s.prices[n - 2], s.strikes[n - 1], s.prices[n - 1]);

    // slope*K + b = 1 - K  =>  K = (1 - b) / (slope + 1)
    if (std::abs(r.left_line.slope + 1.0) < 1e-15)
        throw DomainError("degenerate region: left extrapolation parallel to intrinsic value");
    r.K_square = (1.0 - r.left_line.intercept) / (r.left_line.slope + 1.0);
    if (r.K_square > 1.0) {
        // Meets the zero branch of (1-K)+ instead.
        if (r.left_line.slope == 0.0) throw DomainError("degenerate region: flat left extrapolation");
        r.K_square = -r.left_line.intercept / r.left_line.slope;
    }
    if (r.right_line.slope == 0.0) throw DomainError("degenerate region: flat right extrapolation");
    r.K_circle = -r.right_line.intercept / r.right_line.slope;
    return r;
}

}  // namespace rhb
