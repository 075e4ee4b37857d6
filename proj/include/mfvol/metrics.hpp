#pragma once

// Report statistics for an equity curve: total return, annualized Sharpe
// (zero risk-free rate), CAPM alpha/beta against a benchmark, drawdown.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "date.hpp"
#include "errors.hpp"

namespace mfvol {

enum class Periodicity { daily, monthly };

inline double periods_per_year(Periodicity p) { return p == Periodicity::daily ? 252.0 : 12.0; }
inline std::string to_string(Periodicity p) { return p == Periodicity::daily ? "daily" : "monthly"; }

struct MetricsReport {
    double total_return = 0.0;
    double sharpe = 0.0;
    double alpha = 0.0;  // annualized fraction
    double beta = 0.0;
    double max_drawdown = 0.0;
    std::size_t n_periods = 0;
    Periodicity periodicity = Periodicity::daily;
};

namespace detail {

inline void require_positive(std::span<const double> nav, const char* what) {
    for (double v : nav) {
        if (!(v > 0.0)) throw Error(Errc::data, "performance_metrics", std::string(what) + " contains a nonpositive NAV");
    }
}

}  // namespace detail

inline std::vector<double> period_returns(std::span<const double> nav) {
    detail::require_positive(nav, "NAV series");
    std::vector<double> r;
    for (std::size_t i = 1; i < nav.size(); ++i) r.push_back(nav[i] / nav[i - 1] - 1.0);
    return r;
}

/// NAV sampled at the last date of each calendar month (and the first date,
/// as the opening mark).
inline std::vector<double> monthly_samples(std::span<const Date> dates, std::span<const double> nav) {
    if (dates.size() != nav.size()) throw Error(Errc::misalignment, "performance_metrics", "dates and NAV differ in length");
    std::vector<double> out;
    if (nav.empty()) return out;
    out.push_back(nav[0]);
    for (std::size_t i = 1; i < nav.size(); ++i) {
        if (i + 1 == nav.size() || !same_month(dates[i], dates[i + 1])) out.push_back(nav[i]);
    }
    return out;
}

inline double total_return(std::span<const double> nav) {
    if (nav.size() < 2) throw Error(Errc::insufficient_history, "performance_metrics", "need at least two NAV points");
    detail::require_positive(nav, "NAV series");
    return nav.back() / nav.front() - 1.0;
}

/// mean / sample stdev of period returns times sqrt(periods per year).
/// Moments are accumulated in one pass (Welford).
inline double sharpe(std::span<const double> nav, Periodicity periodicity) {
    const std::vector<double> r = period_returns(nav);
    if (r.size() < 3) throw Error(Errc::insufficient_history, "performance_metrics", "Sharpe needs at least three periods");
    double mean = 0.0, m2 = 0.0;
    std::size_t n = 0;
    for (double x : r) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }
    const double sd = std::sqrt(m2 / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw Error(Errc::undefined_metric, "performance_metrics", "Sharpe undefined: zero return variance");
    return mean / sd * std::sqrt(periods_per_year(periodicity));
}

struct AlphaBeta {
    double alpha = 0.0;  // annualized intercept
    double beta = 0.0;
};

/// OLS of portfolio period returns on benchmark period returns.
inline AlphaBeta capm_alpha_beta(std::span<const double> portfolio, std::span<const double> benchmark, Periodicity periodicity) {
    if (portfolio.size() != benchmark.size()) {
        throw Error(Errc::misalignment, "performance_metrics", "portfolio and benchmark NAV series differ in length");
    }
    const std::vector<double> rp = period_returns(portfolio);
    const std::vector<double> rb = period_returns(benchmark);
    if (rp.size() < 3) throw Error(Errc::insufficient_history, "performance_metrics", "CAPM regression needs at least three periods");
    const double n = static_cast<double>(rp.size());
    double mp = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < rp.size(); ++i) {
        mp += rp[i];
        mb += rb[i];
    }
    mp /= n;
    mb /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < rp.size(); ++i) {
        sxy += (rb[i] - mb) * (rp[i] - mp);
        sxx += (rb[i] - mb) * (rb[i] - mb);
    }
    if (!(sxx > 0.0)) throw Error(Errc::undefined_metric, "performance_metrics", "beta undefined: benchmark returns have zero variance");
    AlphaBeta ab;
    ab.beta = sxy / sxx;
    ab.alpha = (mp - ab.beta * mb) * periods_per_year(periodicity);
    return ab;
}

inline double max_drawdown(std::span<const double> nav) {
    detail::require_positive(nav, "NAV series");
    double peak = 0.0, worst = 0.0;
    for (double v : nav) {
        peak = std::max(peak, v);
        worst = std::max(worst, 1.0 - v / peak);
    }
    return worst;
}

/// Full report for a portfolio against a benchmark, both daily NAV series
/// on `dates`; monthly periodicity samples month-end marks.
inline MetricsReport compute_metrics(std::span<const Date> dates, std::span<const double> nav,
                                     std::span<const double> benchmark, Periodicity periodicity) {
    std::vector<double> p(nav.begin(), nav.end()), b(benchmark.begin(), benchmark.end());
    if (periodicity == Periodicity::monthly) {
        p = monthly_samples(dates, nav);
        b = monthly_samples(dates, benchmark);
    }
    MetricsReport m;
    m.periodicity = periodicity;
    m.n_periods = p.size() - 1;
    m.total_return = total_return(nav);
    m.sharpe = sharpe(p, periodicity);
    const AlphaBeta ab = capm_alpha_beta(p, b, periodicity);
    m.alpha = ab.alpha;
    m.beta = ab.beta;
    m.max_drawdown = max_drawdown(nav);
    return m;
}

}  // namespace mfvol
