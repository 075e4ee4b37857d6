#pragma once

// Per-asset volatility estimators on demeaned log returns. Every estimator is
// causal: sigma(t) only looks at y(t-1), y(t-2), ...

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "date.hpp"
#include "errors.hpp"
#include "filter_design.hpp"
#include "state_space.hpp"

namespace mfvol {

inline constexpr double kSigmaFloor = 1e-8;

struct ReturnSeries {
    std::vector<Date> dates;
    std::vector<double> y;

    std::size_t size() const { return y.size(); }
};

struct VolSeries {
    std::vector<Date> dates;
    std::vector<double> sigma;  // NaN before valid_from
    std::size_t valid_from = 0;

    std::size_t size() const { return sigma.size(); }
    bool defined(std::size_t t) const { return t >= valid_from && t < sigma.size(); }
};

enum class DemeanMode { full_sample, expanding };

/// y(t) = log(p_t / p_{t-1}) minus the mean log return. In full-sample mode
/// the mean is taken over the whole series; in expanding mode over returns
/// up to and including t only (no look-ahead, but the series no longer sums
/// to zero).
inline ReturnSeries demean_log_returns(std::span<const Date> dates, std::span<const double> prices,
                                       const std::string& ticker = {},
                                       DemeanMode mode = DemeanMode::full_sample) {
    if (dates.size() != prices.size()) {
        throw Error(Errc::misalignment, "vol_estimators", "price and date lengths differ");
    }
    if (prices.size() < 2) {
        throw Error(Errc::insufficient_history, "vol_estimators", "need at least two prices");
    }
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0)) {
            throw Error(Errc::data, "vol_estimators",
                        "nonpositive price " + std::to_string(prices[i]) + " for ticker '" + ticker +
                            "' on " + dates[i].iso());
        }
    }
    ReturnSeries r;
    r.dates.assign(dates.begin() + 1, dates.end());
    r.y.resize(prices.size() - 1);
    for (std::size_t i = 1; i < prices.size(); ++i) r.y[i - 1] = std::log(prices[i] / prices[i - 1]);

    if (mode == DemeanMode::full_sample) {
        const double mean = std::accumulate(r.y.begin(), r.y.end(), 0.0) / static_cast<double>(r.y.size());
        for (double& v : r.y) v -= mean;
    } else {
        double running = 0.0;
        for (std::size_t t = 0; t < r.y.size(); ++t) {
            running += r.y[t];
            r.y[t] -= running / static_cast<double>(t + 1);
        }
    }
    return r;
}

/// sigma^2(t) = sum_{k=1..min(L,t)} h_k y^2(t-k), zero history before t = 0.
inline std::vector<double> variance_by_convolution(std::span<const double> y, std::span<const double> h) {
    std::vector<double> var(y.size(), 0.0);
    for (std::size_t t = 0; t < y.size(); ++t) {
        double acc = 0.0;
        const std::size_t depth = std::min(h.size(), t);
        for (std::size_t k = 1; k <= depth; ++k) acc += h[k - 1] * y[t - k] * y[t - k];
        var[t] = acc;
    }
    return var;
}

/// Runs Z(t+1) = A Z(t) + B y^2(t), sigma^2(t) = C Z(t) from Z(0) = 0.
inline std::vector<double> variance_by_state_recursion(std::span<const double> y, const StateSpaceModel& ss) {
    std::vector<double> var(y.size(), 0.0);
    if (ss.dim() == 0) return var;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(ss.dim());
    for (std::size_t t = 0; t < y.size(); ++t) {
        var[t] = ss.C.dot(z);
        z = ss.A * z + ss.B * (y[t] * y[t]);
    }
    return var;
}

namespace detail {

inline VolSeries vol_from_variance(const ReturnSeries& r, const std::vector<double>& var, std::size_t valid_from) {
    VolSeries v;
    v.dates = r.dates;
    v.valid_from = valid_from;
    v.sigma.assign(r.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t t = valid_from; t < r.size(); ++t) v.sigma[t] = std::max(std::sqrt(var[t]), kSigmaFloor);
    return v;
}

inline void require_history(const ReturnSeries& r, std::size_t needed, const char* what) {
    if (r.size() <= needed) {
        throw Error(Errc::insufficient_history, "vol_estimators",
                    std::string(what) + " needs more than " + std::to_string(needed) +
                        " observations, got " + std::to_string(r.size()));
    }
}

}  // namespace detail

/// Lag-weighted variance estimate; defined once a full weight window of
/// history is available.
inline VolSeries weighted_vol(const ReturnSeries& r, std::span<const double> h) {
    detail::require_history(r, h.size(), "weighted volatility");
    return detail::vol_from_variance(r, variance_by_convolution(r.y, h), h.size());
}

inline VolSeries maxflat_vol(const ReturnSeries& r, const LagWeights& weights) {
    return weighted_vol(r, weights.h);
}

/// Design the filter, realize it, and return validated lag weights.
/// truncation == 0 selects default_truncation().
inline LagWeights maxflat_weights(const FilterSpec& spec, WeightMode mode, std::size_t truncation = 0) {
    const StateSpaceModel ss = to_controller_canonical(discretize(spec));
    const std::size_t length = truncation == 0 ? default_truncation(ss) : truncation;
    return validate_weights(impulse_weights(ss, length), mode);
}

/// EWMA variance path from an explicit seed: var[seed_index] = seed and
/// var[t] = lambda var[t-1] + (1 - lambda) y^2(t-1) afterwards. Entries
/// before seed_index are NaN.
inline std::vector<double> ewma_variance(std::span<const double> y, double lambda, double seed,
                                         std::size_t seed_index) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw Error(Errc::parameter, "vol_estimators", "EWMA lambda must lie in (0, 1)");
    }
    std::vector<double> var(y.size(), std::numeric_limits<double>::quiet_NaN());
    if (seed_index >= y.size()) return var;
    var[seed_index] = seed;
    for (std::size_t t = seed_index + 1; t < y.size(); ++t) {
        var[t] = lambda * var[t - 1] + (1.0 - lambda) * y[t - 1] * y[t - 1];
    }
    return var;
}

inline constexpr std::size_t kEwmaSeedWindow = 30;

/// RiskMetrics-style variance recursion seeded with the sample variance of
/// the first 30 observations.
inline VolSeries ewma_vol(const ReturnSeries& r, double lambda, std::size_t seed_window = kEwmaSeedWindow) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw Error(Errc::parameter, "vol_estimators", "EWMA lambda must lie in (0, 1)");
    }
    if (seed_window < 2) throw Error(Errc::parameter, "vol_estimators", "EWMA seed window must be >= 2");
    detail::require_history(r, seed_window, "EWMA");
    double mean = 0.0;
    for (std::size_t i = 0; i < seed_window; ++i) mean += r.y[i];
    mean /= static_cast<double>(seed_window);
    double ss = 0.0;
    for (std::size_t i = 0; i < seed_window; ++i) ss += (r.y[i] - mean) * (r.y[i] - mean);
    const double seed = ss / static_cast<double>(seed_window - 1);
    return detail::vol_from_variance(r, ewma_variance(r.y, lambda, seed, seed_window), seed_window);
}

/// w_k proportional to k^(-alpha), k = 1..length, normalized to sum one.
inline std::vector<double> pwma_weights(double alpha, std::size_t length) {
    if (!(alpha > 0.0)) throw Error(Errc::parameter, "vol_estimators", "PWMA alpha must be positive");
    if (length == 0) throw Error(Errc::parameter, "vol_estimators", "PWMA length must be positive");
    std::vector<double> w(length);
    double total = 0.0;
    for (std::size_t k = 1; k <= length; ++k) {
        w[k - 1] = std::pow(static_cast<double>(k), -alpha);
        total += w[k - 1];
    }
    for (double& x : w) x /= total;
    return w;
}

inline VolSeries pwma_vol(const ReturnSeries& r, double alpha, std::size_t length) {
    return weighted_vol(r, pwma_weights(alpha, length));
}

/// Trailing mean square over the previous `window` returns.
inline VolSeries rolling_vol(const ReturnSeries& r, std::size_t window) {
    if (window < 2) throw Error(Errc::parameter, "vol_estimators", "rolling window must be >= 2");
    detail::require_history(r, window, "rolling volatility");
    std::vector<double> var(r.size(), 0.0);
    for (std::size_t t = window; t < r.size(); ++t) {
        double acc = 0.0;
        for (std::size_t k = 1; k <= window; ++k) acc += r.y[t - k] * r.y[t - k];
        var[t] = acc / static_cast<double>(window);
    }
    return detail::vol_from_variance(r, var, window);
}

/// Whitened returns x(t) = y(t) / sigma(t); NaN where sigma is undefined.
inline std::vector<double> residuals(const ReturnSeries& r, const VolSeries& v) {
    if (r.dates != v.dates || r.size() != v.size()) {
        throw Error(Errc::misalignment, "vol_estimators", "return and volatility series are not aligned");
    }
    std::vector<double> x(r.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t t = v.valid_from; t < r.size(); ++t) x[t] = r.y[t] / v.sigma[t];
    return x;
}

}  // namespace mfvol
