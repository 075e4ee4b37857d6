#pragma once

// Seeded synthetic market: lognormal prices with a two-state (low/high)
// variance regime per stock, a common market factor, and factor values that
// carry a chosen information coefficient about the next holding-period
// return.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "date.hpp"
#include "errors.hpp"
#include "factor_pipeline.hpp"
#include "market_data.hpp"

namespace mfvol {

struct SynthSpec {
    std::uint64_t seed = 1;
    int n_tickers = 50;
    int n_dates = 1000;
    Date start{2015, 1, 5};

    double market_vol = 0.010;   // daily
    double base_vol = 0.015;     // daily idiosyncratic vol in the calm regime
    double regime_ratio = 4.0;   // high / low idiosyncratic variance
    double regime_stay = 0.98;   // daily probability of keeping the regime
    double drift = 0.0002;       // daily log drift
    double beta_lo = 0.8;
    double beta_hi = 1.2;

    double ic = 0.0;             // correlation of factors with forward returns
    int n_factors = 3;

    // Optional low-beta leaders: the first `leaders` tickers get beta
    // `leader_beta` and a static bonus `leader_tilt` on every factor.
    int leaders = 0;
    double leader_beta = 0.4;
    double leader_tilt = 3.0;

    double suspend_prob = 0.0;   // per stock-day
};

struct SynthData {
    MarketPanel panel;
    FactorPanel factors;
    std::vector<std::vector<int>> regime;  // [ticker][date] 0 = calm, 1 = turbulent
    std::vector<double> betas;
};

inline std::string synth_ticker(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "S%04d", i);
    return buf;
}

inline std::vector<Date> weekday_calendar(Date start, int n) {
    std::vector<Date> dates;
    Date d = start;
    while (static_cast<int>(dates.size()) < n) {
        if (d.is_weekday()) dates.push_back(d);
        d = d.plus_days(1);
    }
    return dates;
}

inline SynthData synth_panel(const SynthSpec& spec) {
    if (spec.n_tickers <= 0 || spec.n_dates <= 1) {
        throw Error(Errc::parameter, "market_data", "synthetic panel needs tickers and at least two dates");
    }
    if (!(spec.ic >= -1.0 && spec.ic <= 1.0)) throw Error(Errc::parameter, "market_data", "ic must lie in [-1, 1]");
    if (spec.regime_ratio <= 0.0 || spec.base_vol < 0.0) {
        throw Error(Errc::parameter, "market_data", "invalid volatility regime parameters");
    }

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    const auto n_t = static_cast<std::size_t>(spec.n_tickers);
    const auto n_d = static_cast<std::size_t>(spec.n_dates);
    const std::vector<Date> dates = weekday_calendar(spec.start, spec.n_dates);

    SynthData out;
    out.regime.assign(n_t, std::vector<int>(n_d, 0));
    out.betas.resize(n_t);
    std::vector<double> start_price(n_t), turnover(n_t);
    for (std::size_t i = 0; i < n_t; ++i) {
        const bool leader = static_cast<int>(i) < spec.leaders;
        out.betas[i] = leader ? spec.leader_beta : spec.beta_lo + (spec.beta_hi - spec.beta_lo) * uniform(rng);
        start_price[i] = 5.0 + 45.0 * uniform(rng);
        turnover[i] = 5e7 + 1.5e8 * uniform(rng);
        out.regime[i][0] = uniform(rng) < 0.5 ? 0 : 1;
    }

    const double high_vol = spec.base_vol * std::sqrt(spec.regime_ratio);
    std::vector<std::vector<double>> price(n_t, std::vector<double>(n_d));
    std::vector<std::vector<bool>> suspended(n_t, std::vector<bool>(n_d, false));
    for (std::size_t i = 0; i < n_t; ++i) price[i][0] = start_price[i];
    for (std::size_t t = 1; t < n_d; ++t) {
        const double market = spec.market_vol * normal(rng);
        for (std::size_t i = 0; i < n_t; ++i) {
            int state = out.regime[i][t - 1];
            if (uniform(rng) >= spec.regime_stay) state = 1 - state;
            out.regime[i][t] = state;
            const double idio = (state == 0 ? spec.base_vol : high_vol) * normal(rng);
            price[i][t] = price[i][t - 1] * std::exp(spec.drift + out.betas[i] * market + idio);
            if (spec.suspend_prob > 0.0 && uniform(rng) < spec.suspend_prob) suspended[i][t] = true;
        }
    }

    std::vector<PriceRecord> records;
    std::vector<std::pair<Date, std::string>> membership;
    records.reserve(n_t * n_d);
    const Date list_date = spec.start.plus_days(-1000);
    for (std::size_t t = 0; t < n_d; ++t) {
        for (std::size_t i = 0; i < n_t; ++i) {
            PriceRow row;
            row.close = price[i][t];
            row.turnover = turnover[i];
            row.suspended = suspended[i][t];
            row.list_date = list_date;
            records.push_back({dates[t], synth_ticker(static_cast<int>(i)), row});
            membership.emplace_back(dates[t], synth_ticker(static_cast<int>(i)));
        }
    }

    // Equal-weight index rebalanced at each month end.
    const std::vector<std::size_t> month_ends = month_end_indices(dates);
    std::vector<std::pair<Date, double>> bench;
    double anchor_level = 1000.0;
    std::size_t anchor = 0;
    auto next_anchor = month_ends.begin();
    for (std::size_t t = 0; t < n_d; ++t) {
        double rel = 0.0;
        for (std::size_t i = 0; i < n_t; ++i) rel += price[i][t] / price[i][anchor];
        const double level = anchor_level * rel / static_cast<double>(n_t);
        bench.emplace_back(dates[t], level);
        if (next_anchor != month_ends.end() && *next_anchor == t) {
            anchor = t;
            anchor_level = level;
            ++next_anchor;
        }
    }

    // Factors stamped the trading day before each month end, informative
    // about the return from that month end to the next.
    for (int f = 0; f < spec.n_factors; ++f) out.factors.declare("SYN" + std::to_string(f + 1), FactorInfo{});
    const double noise_w = std::sqrt(std::max(0.0, 1.0 - spec.ic * spec.ic));
    for (std::size_t m = 0; m < month_ends.size(); ++m) {
        const std::size_t d = month_ends[m];
        if (d == 0) continue;
        std::vector<double> z(n_t, 0.0);
        if (m + 1 < month_ends.size()) {
            const std::size_t next = month_ends[m + 1];
            double mean = 0.0, sq = 0.0;
            for (std::size_t i = 0; i < n_t; ++i) {
                z[i] = std::log(price[i][next] / price[i][d]);
                mean += z[i];
            }
            mean /= static_cast<double>(n_t);
            for (double v : z) sq += (v - mean) * (v - mean);
            const double sd = n_t > 1 ? std::sqrt(sq / static_cast<double>(n_t - 1)) : 0.0;
            for (double& v : z) v = sd > 0.0 ? (v - mean) / sd : 0.0;
        }
        for (int f = 0; f < spec.n_factors; ++f) {
            for (std::size_t i = 0; i < n_t; ++i) {
                double value = spec.ic * z[i] + noise_w * normal(rng);
                if (static_cast<int>(i) < spec.leaders) value += spec.leader_tilt;
                out.factors.set(dates[d - 1], synth_ticker(static_cast<int>(i)), "SYN" + std::to_string(f + 1), value);
            }
        }
    }

    out.panel = MarketPanel::from_records(records, membership, bench);
    return out;
}

}  // namespace mfvol
