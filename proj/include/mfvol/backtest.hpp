#pragma once

// Long-only monthly-rebalance simulation: top-N or rank-bucket selection,
// lot-rounded equal or rank-proportional targets, commissions plus per-share
// slippage, and daily marking at adjusted close.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "date.hpp"
#include "errors.hpp"
#include "factor_pipeline.hpp"
#include "market_data.hpp"

namespace mfvol {

struct CostModel {
    double buy_commission_bps = 5.0;
    double sell_commission_bps = 1.5;
    double slippage_per_share = 0.01;  // yuan, each side

    static CostModel zero() { return {0.0, 0.0, 0.0}; }
};

enum class Weighting { equal, rank_proportional };

struct PortfolioSpec {
    std::size_t top_n = 50;
    /// When set, hold the [first, second) slice of the ranked list instead of
    /// the top N.
    std::optional<std::pair<std::size_t, std::size_t>> bucket;
    Weighting weighting = Weighting::equal;
    CostModel costs;
    long long lot_size = 100;
    double initial_capital = 10'000'000.0;
};

using Holdings = std::map<std::string, long long>;

struct Trade {
    Date date;
    std::string ticker;
    long long shares = 0;  // signed: positive buys
    double price = 0.0;    // execution price including slippage
    double commission = 0.0;
    double slippage = 0.0;  // |shares| * per-share slippage

    friend bool operator==(const Trade&, const Trade&) = default;
};

struct Quote {
    double price = 0.0;  // adjusted close, or last mark when untradeable
    bool tradeable = false;
};

// ---------------------------------------------------------------------------
// Selection

/// Eligible tickers with an adjusted score, best first; ties by ticker.
inline std::vector<std::string> ranked_eligible(const ScoreVector& scores, const std::set<std::string>& eligible) {
    std::vector<const ScoreEntry*> pool;
    for (const auto& e : scores.entries) {
        if (e.adjusted && eligible.contains(e.ticker)) pool.push_back(&e);
    }
    std::sort(pool.begin(), pool.end(), [](const ScoreEntry* x, const ScoreEntry* y) {
        if (*x->adjusted != *y->adjusted) return *x->adjusted > *y->adjusted;
        return x->ticker < y->ticker;
    });
    std::vector<std::string> out;
    out.reserve(pool.size());
    for (const auto* e : pool) out.push_back(e->ticker);
    return out;
}

inline std::vector<std::string> select_topn(const ScoreVector& scores, const std::set<std::string>& eligible, std::size_t n,
                                            std::vector<std::string>* warnings = nullptr) {
    if (n == 0) throw Error(Errc::parameter, "backtest_engine", "top-N requires N >= 1");
    std::vector<std::string> ranked = ranked_eligible(scores, eligible);
    if (warnings) {
        if (ranked.empty()) {
            warnings->push_back(scores.date.iso() + ": empty selection, portfolio moves to cash");
        } else if (ranked.size() < n) {
            warnings->push_back(scores.date.iso() + ": shortfall, " + std::to_string(ranked.size()) + " of " +
                                std::to_string(n) + " names available");
        }
    }
    if (ranked.size() > n) ranked.resize(n);
    return ranked;
}

/// Slices the ranked eligible list at the given rank cuts. A cut past the end
/// of the cross-section truncates (or empties) the trailing buckets.
inline std::vector<std::vector<std::string>> quantile_buckets(const ScoreVector& scores, const std::set<std::string>& eligible,
                                                              const std::vector<std::size_t>& cuts,
                                                              std::vector<std::string>* warnings = nullptr) {
    if (cuts.size() < 2 || cuts.front() != 0) {
        throw Error(Errc::parameter, "backtest_engine", "bucket cuts must start at 0 and hold at least two entries");
    }
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        if (cuts[i] <= cuts[i - 1]) throw Error(Errc::parameter, "backtest_engine", "bucket cuts must be strictly increasing");
    }
    const std::vector<std::string> ranked = ranked_eligible(scores, eligible);
    if (warnings && cuts.back() > ranked.size()) {
        warnings->push_back(scores.date.iso() + ": last cut " + std::to_string(cuts.back()) + " exceeds cross-section of " +
                            std::to_string(ranked.size()));
    }
    std::vector<std::vector<std::string>> buckets;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const std::size_t lo = std::min(cuts[i], ranked.size());
        const std::size_t hi = std::min(cuts[i + 1], ranked.size());
        buckets.emplace_back(ranked.begin() + static_cast<std::ptrdiff_t>(lo), ranked.begin() + static_cast<std::ptrdiff_t>(hi));
    }
    return buckets;
}

inline std::vector<double> target_weights(std::size_t n, Weighting weighting) {
    std::vector<double> w(n, n ? 1.0 / static_cast<double>(n) : 0.0);
    if (weighting == Weighting::rank_proportional && n > 0) {
        const double total = static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;
        for (std::size_t i = 0; i < n; ++i) w[i] = static_cast<double>(n - i) / total;
    }
    return w;
}

// ---------------------------------------------------------------------------
// Rebalance

struct RebalanceResult {
    std::vector<Trade> trades;
    Holdings holdings;
    double cash = 0.0;
    double traded_notional = 0.0;
};

inline double buy_cash_out(long long shares, double price, const CostModel& c) {
    const double notional = static_cast<double>(shares) * (price + c.slippage_per_share);
    return notional + notional * c.buy_commission_bps / 1e4;
}

inline double sell_cash_in(long long shares, double price, const CostModel& c) {
    const double proceeds = static_cast<double>(shares) * std::max(price - c.slippage_per_share, 0.0);
    return proceeds - proceeds * c.sell_commission_bps / 1e4;
}

/// Moves `holdings` toward `targets` (best first) at the quoted prices.
///
/// Target share counts are floor(value / (price * lot)) * lot with value
/// drawn from NAV minus any untradeable (suspended) position, which is kept
/// as is. Sells run first. If buys would overdraw cash, every buy is scaled
/// by the same factor and rounded down to whole lots.
inline RebalanceResult rebalance(const Holdings& holdings, double cash, const std::vector<std::string>& targets,
                                 const PortfolioSpec& spec, const std::map<std::string, Quote>& quotes, Date date) {
    auto quote = [&](const std::string& t) -> const Quote& {
        auto it = quotes.find(t);
        if (it == quotes.end()) throw Error(Errc::data, "backtest_engine", "no quote for " + t + " on " + date.iso());
        return it->second;
    };
    const CostModel& c = spec.costs;
    const auto lot = spec.lot_size;

    double nav = cash;
    double frozen = 0.0;
    for (const auto& [t, q] : holdings) {
        const Quote& qt = quote(t);
        nav += static_cast<double>(q) * qt.price;
        if (!qt.tradeable) frozen += static_cast<double>(q) * qt.price;
    }

    std::vector<std::string> live;
    for (const auto& t : targets) {
        if (quote(t).tradeable && quote(t).price > 0.0) live.push_back(t);
    }
    const std::vector<double> w = target_weights(live.size(), spec.weighting);
    const double investable = std::max(nav - frozen, 0.0);

    Holdings target;
    for (const auto& [t, q] : holdings) {
        if (!quote(t).tradeable) target[t] = q;
    }
    for (std::size_t i = 0; i < live.size(); ++i) {
        const double price = quote(live[i]).price;
        const auto lots = static_cast<long long>(std::floor(investable * w[i] / (price * static_cast<double>(lot))));
        target[live[i]] = lots * lot;
    }

    RebalanceResult out;
    out.holdings = holdings;
    out.cash = cash;

    std::set<std::string> names;
    for (const auto& [t, q] : holdings) names.insert(t);
    for (const auto& [t, q] : target) names.insert(t);

    for (const auto& t : names) {
        const long long have = holdings.contains(t) ? holdings.at(t) : 0;
        const long long want = target.contains(t) ? target.at(t) : 0;
        if (want >= have || !quote(t).tradeable) continue;
        const long long q = have - want;
        const double exec = std::max(quote(t).price - c.slippage_per_share, 0.0);
        const double proceeds = static_cast<double>(q) * exec;
        const double commission = proceeds * c.sell_commission_bps / 1e4;
        out.cash += proceeds - commission;
        out.traded_notional += proceeds;
        out.trades.push_back({date, t, -q, exec, commission, static_cast<double>(q) * c.slippage_per_share});
        if (want == 0) {
            out.holdings.erase(t);
        } else {
            out.holdings[t] = want;
        }
    }

    std::vector<std::pair<std::string, long long>> buys;
    double needed = 0.0;
    for (const auto& t : names) {
        const long long have = holdings.contains(t) ? holdings.at(t) : 0;
        const long long want = target.contains(t) ? target.at(t) : 0;
        if (want <= have || !quote(t).tradeable) continue;
        buys.emplace_back(t, want - have);
        needed += buy_cash_out(want - have, quote(t).price, c);
    }
    if (needed > out.cash) {
        const double scale = out.cash / needed;
        for (auto& [t, q] : buys) {
            q = static_cast<long long>(std::floor(static_cast<double>(q) * scale / static_cast<double>(lot))) * lot;
        }
    }
    for (const auto& [t, q] : buys) {
        if (q <= 0) continue;
        const double exec = quote(t).price + c.slippage_per_share;
        const double notional = static_cast<double>(q) * exec;
        const double commission = notional * c.buy_commission_bps / 1e4;
        out.cash -= notional + commission;
        out.traded_notional += notional;
        out.trades.push_back({date, t, q, exec, commission, static_cast<double>(q) * c.slippage_per_share});
        out.holdings[t] += q;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Simulation

/// Score vectors keyed by the rebalance date they drive. Each vector's own
/// date is its data stamp and must precede the rebalance date.
using ScoreStream = std::map<Date, ScoreVector>;

struct Snapshot {
    Date date;
    Holdings holdings;  // after trading
    double cash = 0.0;  // after trading
    double nav_before = 0.0;
    double turnover = 0.0;  // traded notional / NAV before trading
    std::vector<std::string> targets;
};

struct BacktestOptions {
    std::optional<Date> start;
    std::optional<Date> end;
    EligibilityRules rules;
};

struct BacktestResult {
    std::vector<Date> dates;
    std::vector<double> nav;
    std::vector<double> cash;
    std::vector<double> benchmark_nav;  // NaN when no benchmark level is known
    std::vector<Snapshot> snapshots;
    std::vector<Trade> trades;
    double total_commission = 0.0;
    double total_slippage = 0.0;
    std::vector<std::string> warnings;
};

/// Rejects any score vector stamped on or after the trading day before its
/// rebalance date.
inline void check_no_look_ahead(const MarketPanel& panel, const ScoreStream& scores) {
    for (const auto& [rebalance_date, sv] : scores) {
        const auto idx = panel.index_of(rebalance_date);
        if (!idx) continue;
        if (*idx == 0 || sv.date > panel.dates()[*idx - 1]) {
            throw Error(Errc::look_ahead, "backtest_engine",
                        "scores stamped " + sv.date.iso() + " drive the rebalance on " + rebalance_date.iso() +
                            "; signals must come from the previous trading day or earlier");
        }
    }
}

inline BacktestResult run_backtest(const MarketPanel& panel, const ScoreStream& scores, const PortfolioSpec& spec,
                                   const BacktestOptions& options = {}) {
    if (panel.size() == 0) throw Error(Errc::data, "backtest_engine", "empty panel");
    check_no_look_ahead(panel, scores);
    if (!spec.bucket && spec.top_n == 0) throw Error(Errc::parameter, "backtest_engine", "top-N requires N >= 1");
    if (spec.lot_size <= 0) throw Error(Errc::parameter, "backtest_engine", "lot size must be positive");

    const auto& dates = panel.dates();
    std::size_t first = 0, last = dates.size() - 1;
    if (options.start) {
        first = static_cast<std::size_t>(std::lower_bound(dates.begin(), dates.end(), *options.start) - dates.begin());
    }
    if (options.end) {
        auto idx = panel.index_at_or_before(*options.end);
        if (!idx) throw Error(Errc::data, "backtest_engine", "end date precedes the panel");
        last = *idx;
    }
    if (first > last || first >= dates.size()) throw Error(Errc::data, "backtest_engine", "empty backtest date range");

    const std::vector<std::size_t> month_ends = month_end_indices(dates);
    const std::set<std::size_t> rebalance_days(month_ends.begin(), month_ends.end());

    BacktestResult res;
    Holdings holdings;
    double cash = spec.initial_capital;

    std::optional<double> bench_base;
    double bench_last = std::numeric_limits<double>::quiet_NaN();

    for (std::size_t idx = first; idx <= last; ++idx) {
        const Date date = dates[idx];
        if (rebalance_days.contains(idx)) {
            if (auto it = scores.find(date); it != scores.end()) {
                const EligibilityReport report = eligibility_filter(panel, date, options.rules);
                std::vector<std::string> targets;
                if (spec.bucket) {
                    const auto [lo, hi] = *spec.bucket;
                    const std::vector<std::size_t> cuts = lo == 0 ? std::vector<std::size_t>{0, hi}
                                                                  : std::vector<std::size_t>{0, lo, hi};
                    targets = quantile_buckets(it->second, report.eligible, cuts, &res.warnings).back();
                } else {
                    targets = select_topn(it->second, report.eligible, spec.top_n, &res.warnings);
                }
                std::map<std::string, Quote> quotes;
                auto add_quote = [&](const std::string& t) {
                    const PriceRow* row = panel.row(t, idx);
                    Quote q;
                    q.tradeable = row && row->tradeable();
                    q.price = q.tradeable ? row->adjusted() : panel.mark_price(t, idx).value_or(0.0);
                    quotes[t] = q;
                };
                for (const auto& [t, q] : holdings) add_quote(t);
                for (const auto& t : targets) add_quote(t);

                double nav_before = cash;
                for (const auto& [t, q] : holdings) nav_before += static_cast<double>(q) * quotes.at(t).price;

                RebalanceResult rb = rebalance(holdings, cash, targets, spec, quotes, date);
                for (const auto& tr : rb.trades) {
                    res.total_commission += tr.commission;
                    res.total_slippage += tr.slippage;
                    res.trades.push_back(tr);
                }
                holdings = std::move(rb.holdings);
                cash = rb.cash;
                res.snapshots.push_back({date, holdings, cash, nav_before,
                                         nav_before > 0.0 ? rb.traded_notional / nav_before : 0.0, targets});
            }
        }

        double nav = cash;
        for (const auto& [t, q] : holdings) nav += static_cast<double>(q) * panel.mark_price(t, idx).value_or(0.0);
        res.dates.push_back(date);
        res.nav.push_back(nav);
        res.cash.push_back(cash);

        if (auto level = panel.benchmark(idx)) {
            if (!bench_base) bench_base = *level;
            bench_last = spec.initial_capital * *level / *bench_base;
        }
        res.benchmark_nav.push_back(bench_last);
    }
    return res;
}

}  // namespace mfvol
