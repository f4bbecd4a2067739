#pragma once

// Normalised call quotes (s0 = 1, zero rates) and the Black-Scholes analytics
// every other module prices against.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "rhb/errors.hpp"

namespace rhb {

// ---------------------------------------------------------------------------
// Quotes
// ---------------------------------------------------------------------------

struct CallQuote {
    double maturity;   // year fraction, > 0
    double moneyness;  // forward moneyness K, > 0
    double price;      // normalised call price

    [[nodiscard]] double log_moneyness() const { return std::log(moneyness); }
};

// Quotes for one maturity, strikes strictly increasing.
struct MaturitySlice {
    double maturity = 0.0;
    std::vector<double> strikes;
    std::vector<double> prices;

    [[nodiscard]] std::size_t size() const { return strikes.size(); }
    [[nodiscard]] double log_strike(std::size_t i) const { return std::log(strikes[i]); }
};

class CallQuoteSet {
public:
    CallQuoteSet() = default;

    // Groups by maturity and sorts by strike. Throws DomainError on non-positive
    // maturity/moneyness and ValidationError on duplicate (t, K) pairs.
    static CallQuoteSet from_quotes(std::vector<CallQuote> quotes) {
        if (quotes.empty()) throw ValidationError("no quotes");
        std::map<double, std::vector<std::pair<double, double>>> grouped;
        for (const auto& q : quotes) {
            if (!(q.maturity > 0.0) || !std::isfinite(q.maturity))
                throw DomainError("maturity must be positive");
            if (!(q.moneyness > 0.0) || !std::isfinite(q.moneyness))
                throw DomainError("moneyness must be positive");
            if (!std::isfinite(q.price)) throw DomainError("price must be finite");
            grouped[q.maturity].emplace_back(q.moneyness, q.price);
        }
        CallQuoteSet set;
        for (auto& [t, rows] : grouped) {
            std::sort(rows.begin(), rows.end());
            MaturitySlice slice;
            slice.maturity = t;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (i > 0 && rows[i].first == rows[i - 1].first)
                    throw ValidationError("duplicate strike " + std::to_string(rows[i].first) +
                                          " at maturity " + std::to_string(t));
                slice.strikes.push_back(rows[i].first);
                slice.prices.push_back(rows[i].second);
            }
            set.slices_.push_back(std::move(slice));
        }
        return set;
    }

    static CallQuoteSet from_slices(std::vector<MaturitySlice> slices) {
        std::vector<CallQuote> quotes;
        for (const auto& s : slices) {
            if (s.strikes.size() != s.prices.size())
                throw DomainError("slice strike/price length mismatch");
            for (std::size_t i = 0; i < s.size(); ++i)
                quotes.push_back({s.maturity, s.strikes[i], s.prices[i]});
        }
        return from_quotes(std::move(quotes));
    }

    [[nodiscard]] const std::vector<MaturitySlice>& slices() const { return slices_; }
    [[nodiscard]] const MaturitySlice& slice(std::size_t i) const { return slices_.at(i); }
    [[nodiscard]] std::size_t num_maturities() const { return slices_.size(); }

    [[nodiscard]] std::vector<double> maturities() const {
        std::vector<double> out;
        for (const auto& s : slices_) out.push_back(s.maturity);
        return out;
    }

    // Total number of quotes.
    [[nodiscard]] std::size_t size() const {
        std::size_t n = 0;
        for (const auto& s : slices_) n += s.size();
        return n;
    }

    // Prices ordered maturity-major, strike-minor.
    [[nodiscard]] std::vector<double> price_vector() const {
        std::vector<double> out;
        for (const auto& s : slices_) out.insert(out.end(), s.prices.begin(), s.prices.end());
        return out;
    }

    [[nodiscard]] std::vector<CallQuote> quotes() const {
        std::vector<CallQuote> out;
        for (const auto& s : slices_)
            for (std::size_t i = 0; i < s.size(); ++i) out.push_back({s.maturity, s.strikes[i], s.prices[i]});
        return out;
    }

    // Same strikes and maturities, new prices (maturity-major order).
    [[nodiscard]] CallQuoteSet with_prices(const std::vector<double>& prices) const {
        if (prices.size() != size()) throw DomainError("price vector length mismatch");
        CallQuoteSet out = *this;
        std::size_t idx = 0;
        for (auto& s : out.slices_)
            for (auto& p : s.prices) p = prices[idx++];
        return out;
    }

private:
    std::vector<MaturitySlice> slices_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view field, std::size_t line, const char* name) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (field.empty() || ec != std::errc{} || ptr != end)
        throw ParseError(std::string("invalid ") + name + " '" + std::string(field) + "'", line);
    return value;
}

}  // namespace detail

// Reads the `maturity,moneyness,price` CSV format (LF or CRLF line endings).
inline CallQuoteSet load_quotes(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<CallQuote> quotes;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = detail::trim(line);
        if (line_no == 1 && view.size() >= 3 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
        if (view.empty()) continue;
        if (!header_seen) {
            if (view != "maturity,moneyness,price")
                throw ParseError("expected header 'maturity,moneyness,price'", line_no);
            header_seen = true;
            continue;
        }
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            auto comma = view.find(',', start);
            fields.push_back(view.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 3) throw ParseError("expected 3 fields, got " + std::to_string(fields.size()), line_no);
        CallQuote q{detail::parse_double(fields[0], line_no, "maturity"),
                    detail::parse_double(fields[1], line_no, "moneyness"),
                    detail::parse_double(fields[2], line_no, "price")};
        if (!(q.maturity > 0.0)) throw ParseError("maturity must be positive", line_no);
        if (!(q.moneyness > 0.0)) throw ParseError("moneyness must be positive", line_no);
        quotes.push_back(q);
    }
    if (quotes.empty()) throw ValidationError("no quotes");
    return CallQuoteSet::from_quotes(std::move(quotes));
}

// ---------------------------------------------------------------------------
// Black-Scholes analytics
// ---------------------------------------------------------------------------

// Standard normal CDF. erfc keeps full relative accuracy in the lower tail.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

struct BSParams {
    double sigma;  // annualised volatility, > 0

    void validate() const {
        if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    }
};

inline double intrinsic_value(double k) { return std::max(-std::expm1(k), 0.0); }

// c_BS(k, v) = N(d) - e^k N(d - v), d = -k/v + v/2, with v = sigma*sqrt(t).
// In the money the time value is taken from the put, (1 - e^k) + e^k N(v - d) - N(-d).
inline double bs_call_price(double k, double total_vol) {
    if (k == -std::numeric_limits<double>::infinity()) return 1.0;
    if (!(total_vol > 0.0)) return intrinsic_value(k);
    const double d = -k / total_vol + 0.5 * total_vol;
    if (k < 0.0) return -std::expm1(k) + std::max(std::exp(k) * norm_cdf(total_vol - d) - norm_cdf(-d), 0.0);
    return norm_cdf(d) - std::exp(k) * norm_cdf(d - total_vol);
}

// Vega per unit of annualised volatility: n(d) * sqrt(t).
inline double bs_vega(double k, double sigma, double t) {
    if (!(sigma > 0.0)) throw DomainError("vega requires sigma > 0");
    if (!(t > 0.0)) throw DomainError("vega requires t > 0");
    const double v = sigma * std::sqrt(t);
    const double d = -k / v + 0.5 * v;
    return norm_pdf(d) * std::sqrt(t);
}

// Inverts bs_call_price in total volatility. Bisection bracket refined by
// safeguarded Newton steps.
inline double implied_total_vol(double k, double price) {
    const double lower = intrinsic_value(k);
    if (!(price > lower) || !(price < 1.0))
        throw DomainError("no implied volatility: price " + std::to_string(price) +
                          " outside open bounds (" + std::to_string(lower) + ", 1)");
    double lo = 1e-8;
    double hi = 10.0;
    if (bs_call_price(k, lo) > price) lo = 0.0;
    while (bs_call_price(k, hi) < price && hi < 80.0) hi *= 2.0;

    constexpr double kPriceTol = 1e-14;
    double x = 0.5 * (lo + hi);
    // Start Newton from the point of maximal vega, v = sqrt(2|k|), when inside the bracket.
    const double inflection = std::sqrt(2.0 * std::abs(k));
    if (inflection > lo && inflection < hi) x = std::max(inflection, 1e-4);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = bs_call_price(k, x) - price;
        if (std::abs(f) <= kPriceTol) return x;
        if (f > 0.0) hi = x; else lo = x;
        const double d = -k / x + 0.5 * x;
        const double vega = norm_pdf(d);  // derivative in total vol
        double next = vega > 0.0 ? x - f / vega : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-16 * std::max(1.0, x)) return next;
        x = next;
    }
    if (std::abs(bs_call_price(k, x) - price) <= 1e-10) return x;
    throw NumericalError("implied volatility did not converge");
}

inline double total_variance(double k, double t, double price) {
    if (!(t > 0.0)) throw DomainError("maturity must be positive");
    const double v = implied_total_vol(k, price);
    return v * v;
}

}  // namespace rhb
