#pragma once

// Cross-sectional factor processing: robust winsorization, midrank
// normalization, equal-weight composite scores and the volatility adjustment
// of the composite.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "date.hpp"
#include "errors.hpp"

namespace mfvol {

using Cross = std::vector<std::optional<double>>;

enum class FactorCategory { Value, Quality, Growth, Tech, Other };

struct FactorInfo {
    int direction = +1;  // +1: higher is better, -1: lower is better
    FactorCategory category = FactorCategory::Other;
};

/// Base style factors with their default categories and directions. Only
/// VOL20 and DebtsAssetRatio are scored low-is-better by default.
inline std::map<std::string, FactorInfo> default_factor_catalog() {
    using enum FactorCategory;
    return {
        {"EP", {+1, Value}},
        {"EB", {+1, Value}},
        {"CFP", {+1, Value}},
        {"CTOP", {+1, Value}},
        {"CFO2EV", {+1, Quality}},
        {"ROE", {+1, Quality}},
        {"ROA", {+1, Quality}},
        {"GrossIncomeRatio", {+1, Quality}},
        {"ARTRate", {+1, Quality}},
        {"DebtsAssetRatio", {-1, Quality}},
        {"OperatingRevenueGrowRate", {+1, Growth}},
        {"NetProfitGrowRate", {+1, Growth}},
        {"SUE", {+1, Growth}},
        {"FEARNG", {+1, Growth}},
        {"FSALESG", {+1, Growth}},
        {"REVS20", {+1, Tech}},
        {"VOL20", {-1, Tech}},
        {"ILLIQUIDITY", {+1, Tech}},
    };
}

/// Long-form raw factor values keyed by (date, ticker, factor). A missing
/// key is a missing value.
class FactorPanel {
public:
    using Row = std::map<std::string, double>;             // factor -> value
    using Slice = std::map<std::string, Row>;              // ticker -> row

    void declare(const std::string& factor, FactorInfo info) { factors_[factor] = info; }

    void set(Date date, const std::string& ticker, const std::string& factor, double value) {
        if (!factors_.contains(factor)) factors_[factor] = FactorInfo{};
        values_[date][ticker][factor] = value;
    }

    const std::map<std::string, FactorInfo>& factors() const { return factors_; }
    std::map<std::string, FactorInfo>& factors() { return factors_; }
    const std::map<Date, Slice>& by_date() const { return values_; }

    /// Latest slice dated at or before `date`.
    const Slice* as_of(Date date, Date* slice_date = nullptr) const {
        auto it = values_.upper_bound(date);
        if (it == values_.begin()) return nullptr;
        --it;
        if (slice_date) *slice_date = it->first;
        return &it->second;
    }

private:
    std::map<std::string, FactorInfo> factors_;
    std::map<Date, Slice> values_;
};

namespace detail {

inline std::vector<double> observed(const Cross& values) {
    std::vector<double> out;
    for (const auto& v : values) {
        if (v) out.push_back(*v);
    }
    return out;
}

inline double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    std::sort(v.begin(), v.end());
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

inline constexpr double kMadScale = 1.4826;

/// Clamp to median +/- k * 1.4826 * median(|v - median|). A zero MAD leaves
/// the cross-section untouched.
inline Cross winsorize(const Cross& values, double k = 3.0) {
    const std::vector<double> obs = detail::observed(values);
    if (obs.empty()) throw Error(Errc::empty_cross_section, "factor_pipeline", "no observed values to winsorize");
    const double med = detail::median_of(obs);
    std::vector<double> dev(obs.size());
    std::transform(obs.begin(), obs.end(), dev.begin(), [med](double x) { return std::abs(x - med); });
    const double mad = kMadScale * detail::median_of(std::move(dev));
    if (mad == 0.0) return values;
    const double lo = med - k * mad;
    const double hi = med + k * mad;
    Cross out = values;
    for (auto& v : out) {
        if (v) v = std::clamp(*v, lo, hi);
    }
    return out;
}

/// Midranks divided by the number of observed values; direction -1 ranks
/// the negated values. Missing entries stay missing.
inline Cross rank_normalize(const Cross& values, int direction = +1) {
    std::vector<std::pair<double, std::size_t>> keyed;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i]) keyed.emplace_back(direction < 0 ? -*values[i] : *values[i], i);
    }
    if (keyed.empty()) throw Error(Errc::empty_cross_section, "factor_pipeline", "no observed values to rank");
    std::sort(keyed.begin(), keyed.end());
    const double m = static_cast<double>(keyed.size());
    Cross out(values.size());
    for (std::size_t i = 0; i < keyed.size();) {
        std::size_t j = i;
        while (j + 1 < keyed.size() && keyed[j + 1].first == keyed[i].first) ++j;
        const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t r = i; r <= j; ++r) out[keyed[r].second] = midrank / m;
        i = j + 1;
    }
    return out;
}

struct ScoreEntry {
    std::string ticker;
    double composite = 0.0;
    std::optional<double> adjusted;
};

/// Scores for one stamp date, sorted by ticker.
struct ScoreVector {
    Date date;
    std::string method;
    std::vector<ScoreEntry> entries;

    const ScoreEntry* find(const std::string& ticker) const {
        auto it = std::lower_bound(entries.begin(), entries.end(), ticker,
                                   [](const ScoreEntry& e, const std::string& t) { return e.ticker < t; });
        return it != entries.end() && it->ticker == ticker ? &*it : nullptr;
    }
};

struct CompositeOptions {
    bool winsorize = true;
    double winsor_k = 3.0;
};

/// Available-case mean of normalized factor ranks per ticker. `tickers`
/// restricts the cross-section (empty = every ticker in the slice).
inline ScoreVector composite_score(const FactorPanel& panel, Date date,
                                   const std::set<std::string>& tickers = {},
                                   const CompositeOptions& options = {}) {
    Date slice_date;
    const FactorPanel::Slice* slice = panel.as_of(date, &slice_date);
    if (!slice) throw Error(Errc::empty_score, "factor_pipeline", "no factor data on or before " + date.iso());

    std::vector<std::string> names;
    for (const auto& [ticker, row] : *slice) {
        if (tickers.empty() || tickers.contains(ticker)) names.push_back(ticker);
    }
    std::vector<double> rank_sum(names.size(), 0.0);
    std::vector<int> rank_count(names.size(), 0);

    for (const auto& [factor, info] : panel.factors()) {
        Cross cross(names.size());
        bool any = false;
        for (std::size_t i = 0; i < names.size(); ++i) {
            const auto& row = slice->at(names[i]);
            if (auto it = row.find(factor); it != row.end() && std::isfinite(it->second)) {
                cross[i] = it->second;
                any = true;
            }
        }
        if (!any) continue;
        if (options.winsorize) cross = winsorize(cross, options.winsor_k);
        const Cross ranks = rank_normalize(cross, info.direction);
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (ranks[i]) {
                rank_sum[i] += *ranks[i];
                ++rank_count[i];
            }
        }
    }

    ScoreVector out;
    out.date = date;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (rank_count[i] > 0) out.entries.push_back({names[i], rank_sum[i] / rank_count[i], std::nullopt});
    }
    if (out.entries.empty()) {
        throw Error(Errc::empty_score, "factor_pipeline", "no factor coverage as of " + date.iso());
    }
    return out;
}

/// adjusted = composite / sigma. Tickers without a sigma are dropped from the
/// adjusted part. With `sigmas == nullptr` (no-adjustment baseline) the
/// adjusted score equals the composite.
inline ScoreVector vol_adjust(ScoreVector scores, const std::map<std::string, double>* sigmas) {
    for (auto& e : scores.entries) {
        if (!sigmas) {
            e.adjusted = e.composite;
            continue;
        }
        auto it = sigmas->find(e.ticker);
        if (it != sigmas->end() && std::isfinite(it->second) && it->second > 0.0) {
            e.adjusted = e.composite / it->second;
        } else {
            e.adjusted.reset();
        }
    }
    return scores;
}

}  // namespace mfvol
