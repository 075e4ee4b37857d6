#pragma once

// Panel driver tying the estimators to the factor pipeline: per-ticker
// volatility panels and the month-end stream of volatility-adjusted scores.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "backtest.hpp"
#include "factor_pipeline.hpp"
#include "market_data.hpp"
#include "vol_estimators.hpp"

namespace mfvol {

enum class VolMethod { maxflat, ewma, pwma, rolling250, rolling500, none };

inline constexpr VolMethod kAllVolMethods[] = {VolMethod::ewma, VolMethod::rolling250, VolMethod::rolling500,
                                               VolMethod::pwma, VolMethod::none, VolMethod::maxflat};

inline std::string to_string(VolMethod m) {
    switch (m) {
        case VolMethod::maxflat: return "maxflat";
        case VolMethod::ewma: return "ewma";
        case VolMethod::pwma: return "pwma";
        case VolMethod::rolling250: return "rolling250";
        case VolMethod::rolling500: return "rolling500";
        case VolMethod::none: return "none";
    }
    return "?";
}

/// Row labels used in comparison reports.
inline std::string display_name(VolMethod m) {
    switch (m) {
        case VolMethod::maxflat: return "MAXFLAT";
        case VolMethod::ewma: return "EWMA";
        case VolMethod::pwma: return "PWMA";
        case VolMethod::rolling250: return "250VOL";
        case VolMethod::rolling500: return "500VOL";
        case VolMethod::none: return "NoVOL";
    }
    return "?";
}

inline VolMethod parse_vol_method(const std::string& s) {
    for (VolMethod m : kAllVolMethods) {
        if (to_string(m) == s) return m;
    }
    throw Error(Errc::config, "cli_app", "unknown volatility method '" + s + "'");
}

struct VolParams {
    FilterSpec filter;
    WeightMode weight_mode = WeightMode::clip;
    std::size_t truncation = 0;  // 0: automatic
    std::size_t truncation_cap = 750;
    double ewma_lambda = 0.94;
    double pwma_alpha = 1.2;
    std::size_t pwma_length = 750;
    std::size_t burn_in = 250;
    DemeanMode demean = DemeanMode::full_sample;
};

/// One configured estimator with its weights designed up front.
class VolEstimator {
public:
    VolEstimator(VolMethod method, const VolParams& params) : method_(method), params_(params) {
        if (method == VolMethod::maxflat) {
            const StateSpaceModel ss = to_controller_canonical(discretize(params.filter));
            const std::size_t length = params.truncation ? params.truncation : default_truncation(ss, params.truncation_cap);
            weights_ = validate_weights(impulse_weights(ss, length), params.weight_mode);
        } else if (method == VolMethod::pwma) {
            weights_.h = pwma_weights(params.pwma_alpha, params.pwma_length);
            weights_.truncation_length = params.pwma_length;
            weights_.raw_sum = 1.0;
        } else if (method == VolMethod::ewma) {
            if (!(params.ewma_lambda > 0.0 && params.ewma_lambda < 1.0)) {
                throw Error(Errc::parameter, "vol_estimators", "EWMA lambda must lie in (0, 1)");
            }
        }
    }

    VolMethod method() const { return method_; }
    const LagWeights& weights() const { return weights_; }
    const VolParams& params() const { return params_; }

    /// Observations consumed before the estimator's own first value.
    std::size_t effective_length() const {
        switch (method_) {
            case VolMethod::maxflat:
            case VolMethod::pwma: return weights_.h.size();
            case VolMethod::rolling250: return 250;
            case VolMethod::rolling500: return 500;
            case VolMethod::ewma: return kEwmaSeedWindow;
            case VolMethod::none: return 0;
        }
        return 0;
    }

    /// First return index at which scores may use this estimator.
    std::size_t valid_from() const { return std::max(effective_length(), params_.burn_in); }

    VolSeries estimate(const ReturnSeries& r) const {
        switch (method_) {
            case VolMethod::maxflat: return maxflat_vol(r, weights_);
            case VolMethod::pwma: return weighted_vol(r, weights_.h);
            case VolMethod::rolling250: return rolling_vol(r, 250);
            case VolMethod::rolling500: return rolling_vol(r, 500);
            case VolMethod::ewma: return ewma_vol(r, params_.ewma_lambda);
            case VolMethod::none: break;
        }
        throw Error(Errc::parameter, "vol_estimators", "the no-adjustment baseline has no volatility series");
    }

private:
    VolMethod method_;
    VolParams params_;
    LagWeights weights_;
};

/// ticker -> volatility series over that ticker's price history.
using VolPanel = std::map<std::string, VolSeries>;

/// Estimates every ticker with enough history; values before the burn-in
/// point are blanked so downstream consumers never see them.
inline VolPanel compute_vol_panel(const MarketPanel& panel, const VolEstimator& est) {
    VolPanel out;
    if (est.method() == VolMethod::none || panel.size() == 0) return out;
    const std::size_t start = est.valid_from();
    for (const auto& ticker : panel.tickers()) {
        auto [dates, prices] = panel.price_history(ticker, panel.size() - 1);
        if (prices.size() < 2 || prices.size() - 1 <= start) continue;
        const ReturnSeries r = demean_log_returns(dates, prices, ticker, est.params().demean);
        VolSeries v = est.estimate(r);
        for (std::size_t t = v.valid_from; t < std::min(start, v.size()); ++t) {
            v.sigma[t] = std::numeric_limits<double>::quiet_NaN();
        }
        v.valid_from = std::max(v.valid_from, start);
        out.emplace(ticker, std::move(v));
    }
    return out;
}

/// Sigma of every ticker on `date`, where defined.
inline std::map<std::string, double> vol_cross_section(const VolPanel& vols, Date date) {
    std::map<std::string, double> out;
    for (const auto& [ticker, v] : vols) {
        auto it = std::lower_bound(v.dates.begin(), v.dates.end(), date);
        if (it == v.dates.end() || *it != date) continue;
        const auto t = static_cast<std::size_t>(it - v.dates.begin());
        if (v.defined(t)) out.emplace(ticker, v.sigma[t]);
    }
    return out;
}

struct ScoreOptions {
    CompositeOptions composite;
    std::string method_label;
};

/// For each month end D (after the first panel date) scores are stamped on
/// the previous trading day s: composites from the latest factor slice at or
/// before s over the index members on s, divided by sigma(s), which itself
/// only uses returns before s. `vols == nullptr` is the no-adjustment
/// baseline. Dates where no ticker gets an adjusted score are left out.
inline ScoreStream build_score_stream(const MarketPanel& panel, const FactorPanel& factors, const VolPanel* vols,
                                      const ScoreOptions& options = {}) {
    ScoreStream stream;
    const auto& dates = panel.dates();
    for (std::size_t idx : month_end_indices(dates)) {
        if (idx == 0) continue;
        const Date stamp = dates[idx - 1];
        if (!factors.as_of(stamp)) continue;
        const std::set<std::string>& members = panel.members(idx - 1);
        if (members.empty()) continue;
        ScoreVector sv;
        try {
            sv = composite_score(factors, stamp, members, options.composite);
        } catch (const Error& e) {
            if (e.code() == Errc::empty_score) continue;
            throw;
        }
        std::map<std::string, double> sigmas;
        if (vols) sigmas = vol_cross_section(*vols, stamp);
        sv = vol_adjust(std::move(sv), vols ? &sigmas : nullptr);
        sv.method = options.method_label;
        const bool any = std::any_of(sv.entries.begin(), sv.entries.end(), [](const ScoreEntry& e) { return e.adjusted.has_value(); });
        if (any) stream.emplace(dates[idx], std::move(sv));
    }
    return stream;
}

}  // namespace mfvol
