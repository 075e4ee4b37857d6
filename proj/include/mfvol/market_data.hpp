#pragma once

// Point-in-time market panel: per-date, per-ticker prices and status flags,
// index membership and benchmark levels, plus the trading eligibility
// screens applied at each rebalance.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "csv.hpp"
#include "date.hpp"
#include "errors.hpp"
#include "factor_pipeline.hpp"

namespace mfvol {

struct PriceRow {
    double close = 0.0;       // yuan
    double adj_factor = 1.0;  // cumulative adjustment factor
    double turnover = 0.0;    // yuan per day
    bool suspended = false;
    bool st = false;
    Date list_date;

    double adjusted() const { return close * adj_factor; }
    bool tradeable() const { return !suspended && close > 0.0; }

    friend bool operator==(const PriceRow&, const PriceRow&) = default;
};

struct PriceRecord {
    Date date;
    std::string ticker;
    PriceRow row;
};

class MarketPanel {
public:
    MarketPanel() = default;

    /// Builds and validates a panel. `row_labels`, when given, names the
    /// source row of each price record for error messages.
    static MarketPanel from_records(const std::vector<PriceRecord>& prices,
                                    const std::vector<std::pair<Date, std::string>>& membership,
                                    const std::vector<std::pair<Date, double>>& benchmark,
                                    const std::vector<std::string>& row_labels = {}) {
        auto label = [&](std::size_t i) {
            return i < row_labels.size() ? row_labels[i] : "price record " + std::to_string(i + 1);
        };
        MarketPanel p;
        std::set<Date> dates;
        std::set<std::string> tickers;
        for (const auto& r : prices) {
            dates.insert(r.date);
            tickers.insert(r.ticker);
        }
        p.dates_.assign(dates.begin(), dates.end());
        p.tickers_.assign(tickers.begin(), tickers.end());
        for (const auto& t : p.tickers_) p.rows_[t].resize(p.dates_.size());
        p.members_.resize(p.dates_.size());
        p.benchmark_.resize(p.dates_.size());

        for (std::size_t i = 0; i < prices.size(); ++i) {
            const auto& r = prices[i];
            auto& cell = p.rows_[r.ticker][*p.index_of(r.date)];
            if (cell) throw Error(Errc::load, "market_data", label(i) + ": duplicate (date, ticker) " + r.date.iso() + "," + r.ticker);
            if (!r.row.suspended && !(r.row.close > 0.0)) {
                throw Error(Errc::data, "market_data", label(i) + ": nonpositive close on a trading row");
            }
            if (!(r.row.adj_factor > 0.0)) throw Error(Errc::data, "market_data", label(i) + ": nonpositive adjustment factor");
            cell = r.row;
        }
        for (const auto& [date, ticker] : membership) {
            auto idx = p.index_of(date);
            if (!idx) throw Error(Errc::load, "market_data", "membership date " + date.iso() + " has no price rows");
            if (!p.members_[*idx].insert(ticker).second) {
                throw Error(Errc::load, "market_data", "duplicate membership row " + date.iso() + "," + ticker);
            }
        }
        for (const auto& [date, level] : benchmark) {
            auto idx = p.index_of(date);
            if (!idx) continue;  // benchmark may cover non-panel days
            if (p.benchmark_[*idx]) throw Error(Errc::load, "market_data", "duplicate benchmark date " + date.iso());
            if (!(level > 0.0)) throw Error(Errc::data, "market_data", "nonpositive benchmark level on " + date.iso());
            p.benchmark_[*idx] = level;
        }
        return p;
    }

    const std::vector<Date>& dates() const { return dates_; }
    const std::vector<std::string>& tickers() const { return tickers_; }
    std::size_t size() const { return dates_.size(); }

    std::optional<std::size_t> index_of(Date d) const {
        auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
        if (it == dates_.end() || *it != d) return std::nullopt;
        return static_cast<std::size_t>(it - dates_.begin());
    }

    /// Index of the last panel date at or before d.
    std::optional<std::size_t> index_at_or_before(Date d) const {
        auto it = std::upper_bound(dates_.begin(), dates_.end(), d);
        if (it == dates_.begin()) return std::nullopt;
        return static_cast<std::size_t>(it - dates_.begin()) - 1;
    }

    const PriceRow* row(const std::string& ticker, std::size_t idx) const {
        auto it = rows_.find(ticker);
        if (it == rows_.end() || idx >= it->second.size() || !it->second[idx]) return nullptr;
        return &*it->second[idx];
    }

    /// Last valid adjusted close at or before idx (suspended days carry the
    /// previous price forward).
    std::optional<double> mark_price(const std::string& ticker, std::size_t idx) const {
        auto it = rows_.find(ticker);
        if (it == rows_.end()) return std::nullopt;
        for (std::size_t i = std::min(idx + 1, it->second.size()); i-- > 0;) {
            const auto& cell = it->second[i];
            if (cell && cell->close > 0.0) return cell->adjusted();
        }
        return std::nullopt;
    }

    /// Adjusted close history through idx, starting at the ticker's first
    /// valid price; gaps and suspended days carry forward.
    std::pair<std::vector<Date>, std::vector<double>> price_history(const std::string& ticker, std::size_t idx) const {
        std::pair<std::vector<Date>, std::vector<double>> out;
        auto it = rows_.find(ticker);
        if (it == rows_.end()) return out;
        std::optional<double> last;
        for (std::size_t i = 0; i <= idx && i < dates_.size(); ++i) {
            const auto& cell = it->second[i];
            if (cell && cell->close > 0.0) last = cell->adjusted();
            if (!last) continue;
            out.first.push_back(dates_[i]);
            out.second.push_back(*last);
        }
        return out;
    }

    bool in_universe(const std::string& ticker, std::size_t idx) const { return members_[idx].contains(ticker); }
    const std::set<std::string>& members(std::size_t idx) const { return members_[idx]; }
    std::optional<double> benchmark(std::size_t idx) const { return benchmark_[idx]; }

    /// Copy restricted to dates <= last.
    MarketPanel truncated(Date last) const {
        MarketPanel p;
        const std::size_t n = static_cast<std::size_t>(
            std::upper_bound(dates_.begin(), dates_.end(), last) - dates_.begin());
        p.dates_.assign(dates_.begin(), dates_.begin() + static_cast<std::ptrdiff_t>(n));
        p.tickers_ = tickers_;
        for (const auto& [t, cells] : rows_) p.rows_[t].assign(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(n));
        p.members_.assign(members_.begin(), members_.begin() + static_cast<std::ptrdiff_t>(n));
        p.benchmark_.assign(benchmark_.begin(), benchmark_.begin() + static_cast<std::ptrdiff_t>(n));
        return p;
    }

    friend bool operator==(const MarketPanel&, const MarketPanel&) = default;

private:
    std::vector<Date> dates_;
    std::vector<std::string> tickers_;
    std::map<std::string, std::vector<std::optional<PriceRow>>> rows_;
    std::vector<std::set<std::string>> members_;
    std::vector<std::optional<double>> benchmark_;
};

struct PanelFiles {
    std::string prices;
    std::string universe;
    std::string benchmark;
};

inline MarketPanel load_panel(const PanelFiles& files) {
    const csv::Table pt = csv::read(files.prices);
    const std::size_t c_date = pt.column("date"), c_ticker = pt.column("ticker"), c_close = pt.column("close"),
                      c_adj = pt.column("adj_factor"), c_turn = pt.column("turnover_cny"),
                      c_susp = pt.column("suspended"), c_st = pt.column("is_st"), c_list = pt.column("list_date");
    std::vector<PriceRecord> prices;
    std::vector<std::string> labels;
    prices.reserve(pt.rows.size());
    for (std::size_t i = 0; i < pt.rows.size(); ++i) {
        const auto& f = pt.rows[i];
        PriceRecord r;
        r.date = csv::to_date(pt, i, f[c_date]);
        r.ticker = f[c_ticker];
        if (r.ticker.empty()) throw Error(Errc::load, "market_data", csv::where(pt, i) + ": empty ticker");
        r.row.close = csv::to_double(pt, i, f[c_close]);
        r.row.adj_factor = csv::to_double(pt, i, f[c_adj]);
        r.row.turnover = csv::to_double(pt, i, f[c_turn]);
        r.row.suspended = csv::to_flag(pt, i, f[c_susp]);
        r.row.st = csv::to_flag(pt, i, f[c_st]);
        r.row.list_date = csv::to_date(pt, i, f[c_list]);
        prices.push_back(std::move(r));
        labels.push_back(csv::where(pt, i));
    }

    std::vector<std::pair<Date, std::string>> membership;
    if (!files.universe.empty()) {
        const csv::Table ut = csv::read(files.universe);
        const std::size_t u_date = ut.column("date"), u_ticker = ut.column("ticker");
        for (std::size_t i = 0; i < ut.rows.size(); ++i) {
            membership.emplace_back(csv::to_date(ut, i, ut.rows[i][u_date]), ut.rows[i][u_ticker]);
        }
    }
    std::vector<std::pair<Date, double>> bench;
    if (!files.benchmark.empty()) {
        const csv::Table bt = csv::read(files.benchmark);
        const std::size_t b_date = bt.column("date"), b_level = bt.column("level");
        for (std::size_t i = 0; i < bt.rows.size(); ++i) {
            bench.emplace_back(csv::to_date(bt, i, bt.rows[i][b_date]), csv::to_double(bt, i, bt.rows[i][b_level]));
        }
    }
    return MarketPanel::from_records(prices, membership, bench, labels);
}

inline FactorPanel load_factors(const std::string& path, const std::map<std::string, FactorInfo>& catalog = {}) {
    const csv::Table t = csv::read(path);
    const std::size_t c_date = t.column("date"), c_ticker = t.column("ticker"), c_factor = t.column("factor"),
                      c_value = t.column("value");
    FactorPanel panel;
    std::set<std::tuple<Date, std::string, std::string>> seen;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& f = t.rows[i];
        const Date date = csv::to_date(t, i, f[c_date]);
        if (!seen.emplace(date, f[c_ticker], f[c_factor]).second) {
            throw Error(Errc::load, "market_data", csv::where(t, i) + ": duplicate (date, ticker, factor)");
        }
        if (f[c_value].empty()) continue;  // explicit missing value
        if (!panel.factors().contains(f[c_factor])) {
            auto it = catalog.find(f[c_factor]);
            panel.declare(f[c_factor], it != catalog.end() ? it->second : FactorInfo{});
        }
        panel.set(date, f[c_ticker], f[c_factor], csv::to_double(t, i, f[c_value]));
    }
    return panel;
}

/// Writes prices.csv, universe.csv and benchmark.csv into `dir`.
inline PanelFiles write_panel(const MarketPanel& panel, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    PanelFiles files{(dir / "prices.csv").string(), (dir / "universe.csv").string(), (dir / "benchmark.csv").string()};
    {
        csv::Writer w(files.prices, {"date", "ticker", "close", "adj_factor", "turnover_cny", "suspended", "is_st", "list_date"});
        for (std::size_t i = 0; i < panel.size(); ++i) {
            for (const auto& t : panel.tickers()) {
                if (const PriceRow* r = panel.row(t, i)) {
                    w.row({panel.dates()[i].iso(), t, csv::format(r->close), csv::format(r->adj_factor),
                           csv::format(r->turnover), r->suspended ? "1" : "0", r->st ? "1" : "0", r->list_date.iso()});
                }
            }
        }
    }
    {
        csv::Writer w(files.universe, {"date", "ticker"});
        for (std::size_t i = 0; i < panel.size(); ++i) {
            for (const auto& t : panel.members(i)) w.row({panel.dates()[i].iso(), t});
        }
    }
    {
        csv::Writer w(files.benchmark, {"date", "level"});
        for (std::size_t i = 0; i < panel.size(); ++i) {
            if (auto level = panel.benchmark(i)) w.row({panel.dates()[i].iso(), csv::format(*level)});
        }
    }
    return files;
}

inline void write_factors(const FactorPanel& factors, const std::string& path) {
    csv::Writer w(path, {"date", "ticker", "factor", "value"});
    for (const auto& [date, slice] : factors.by_date()) {
        for (const auto& [ticker, row] : slice) {
            for (const auto& [factor, value] : row) w.row({date.iso(), ticker, factor, csv::format(value)});
        }
    }
}

// ---------------------------------------------------------------------------
// Eligibility

struct EligibilityRules {
    double min_turnover = 10'000'000.0;  // yuan/day, trailing mean
    int turnover_window = 20;            // trading days
    int listing_age_days = 91;           // calendar days
};

namespace reason {
inline constexpr const char* universe = "universe";
inline constexpr const char* st = "st";
inline constexpr const char* suspended = "suspended";
inline constexpr const char* listing_age = "listing-age";
inline constexpr const char* liquidity = "liquidity";
}  // namespace reason

struct EligibilityReport {
    Date date;
    std::map<std::string, std::string> excluded;  // ticker -> first failing rule
    std::set<std::string> eligible;
};

/// Applies, in order: universe membership, ST flag, tradeability on the
/// date, listing age, trailing turnover. Only data up to `date` is read.
inline EligibilityReport eligibility_filter(const MarketPanel& panel, Date date, const EligibilityRules& rules = {}) {
    EligibilityReport report;
    report.date = date;
    const auto idx = panel.index_of(date);
    if (!idx) throw Error(Errc::data, "market_data", "date " + date.iso() + " is not a panel date");

    for (const auto& ticker : panel.tickers()) {
        const PriceRow* row = panel.row(ticker, *idx);
        const char* failed = nullptr;
        if (!panel.in_universe(ticker, *idx)) {
            failed = reason::universe;
        } else if (row && row->st) {
            failed = reason::st;
        } else if (!row || !row->tradeable()) {
            failed = reason::suspended;
        } else if (days_between(row->list_date, date) < rules.listing_age_days) {
            failed = reason::listing_age;
        } else {
            const auto window = static_cast<std::size_t>(rules.turnover_window);
            if (*idx + 1 < window) {
                failed = reason::liquidity;
            } else {
                double total = 0.0;
                for (std::size_t i = *idx + 1 - window; i <= *idx; ++i) {
                    if (const PriceRow* r = panel.row(ticker, i)) total += r->turnover;
                }
                if (total / static_cast<double>(window) < rules.min_turnover) failed = reason::liquidity;
            }
        }
        if (failed) {
            report.excluded.emplace(ticker, failed);
        } else {
            report.eligible.insert(ticker);
        }
    }
    return report;
}

}  // namespace mfvol
