#include <gtest/gtest.h>

#include "support.hpp"

using namespace mfvol;
using testing_support::fixtures;
using testing_support::scratch;
using testing_support::slurp;
using testing_support::spit;

namespace {

PanelFiles minimal_files() {
    const auto dir = fixtures() / "minimal";
    return {(dir / "prices.csv").string(), (dir / "universe.csv").string(), (dir / "benchmark.csv").string()};
}

const char* kHeader = "date,ticker,close,adj_factor,turnover_cny,suspended,is_st,list_date\n";

Errc load_error(const std::string& prices_text, std::string* message = nullptr) {
    const auto dir = scratch("bad_prices");
    spit(dir / "prices.csv", prices_text);
    try {
        load_panel({(dir / "prices.csv").string(), "", ""});
    } catch (const Error& e) {
        if (message) *message = e.what();
        return e.code();
    }
    return Errc::io;
}

// One ticker per spec; turnover constant unless overridden.
struct Stock {
    std::string ticker;
    double turnover = 2e7;
    Date list_date{2010, 1, 4};
    bool st = false;
    bool member = true;
};

MarketPanel panel_of(const std::vector<Stock>& stocks, int n_dates) {
    const auto dates = weekday_calendar(Date{2020, 1, 6}, n_dates);
    std::vector<PriceRecord> recs;
    std::vector<std::pair<Date, std::string>> members;
    for (const auto& d : dates) {
        for (const auto& s : stocks) {
            PriceRow row;
            row.close = 10.0;
            row.turnover = s.turnover;
            row.st = s.st;
            row.list_date = s.list_date;
            recs.push_back({d, s.ticker, row});
            if (s.member) members.emplace_back(d, s.ticker);
        }
    }
    return MarketPanel::from_records(recs, members, {});
}

}  // namespace

TEST(LoadPanel, MinimalFixture) {
    const MarketPanel p = load_panel(minimal_files());
    EXPECT_EQ(p.size(), 3u);
    EXPECT_EQ(p.tickers(), (std::vector<std::string>{"000001.SZ", "600519.SH"}));
    int cells = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (const auto& t : p.tickers()) cells += p.row(t, i) != nullptr;
    }
    EXPECT_EQ(cells, 6);
    EXPECT_EQ(p.row("600519.SH", 1)->close, 2062.5);
    EXPECT_EQ(*p.benchmark(2), 5224.04);
    EXPECT_TRUE(p.in_universe("000001.SZ", 0));
}

TEST(LoadPanel, DuplicateRowNamesTheRow) {
    std::string msg;
    const Errc code = load_error(std::string(kHeader) +
                                     "2021-01-04,A,10,1,1e7,0,0,2010-01-01\n"
                                     "2021-01-05,A,10,1,1e7,0,0,2010-01-01\n"
                                     "2021-01-04,A,11,1,1e7,0,0,2010-01-01\n",
                                 &msg);
    EXPECT_EQ(code, Errc::load);
    EXPECT_NE(msg.find("row 4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("duplicate"), std::string::npos) << msg;
}

TEST(LoadPanel, SchemaErrors) {
    std::string msg;
    EXPECT_EQ(load_error("date,ticker,close\n2021-01-04,A,10\n", &msg), Errc::load);
    EXPECT_NE(msg.find("adj_factor"), std::string::npos) << msg;

    EXPECT_EQ(load_error(std::string(kHeader) + "2021-13-04,A,10,1,1e7,0,0,2010-01-01\n", &msg), Errc::load);
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;

    EXPECT_EQ(load_error(std::string(kHeader) + "2021-01-04,A,ten,1,1e7,0,0,2010-01-01\n"), Errc::load);
    EXPECT_EQ(load_error(std::string(kHeader) + "2021-01-04,A,10,1,1e7,2,0,2010-01-01\n"), Errc::load);
    EXPECT_EQ(load_error(std::string(kHeader) + "2021-01-04,A,10,1\n"), Errc::load);
}

TEST(LoadPanel, NonpositiveTradingPriceIsDataError) {
    std::string msg;
    EXPECT_EQ(load_error(std::string(kHeader) + "2021-01-04,A,0,1,1e7,0,0,2010-01-01\n", &msg), Errc::data);
    EXPECT_NE(msg.find("row 2"), std::string::npos);
    // A suspended row may carry no price.
    EXPECT_EQ(load_error(std::string(kHeader) + "2021-01-04,A,0,1,0,1,0,2010-01-01\n"), Errc::io);
}

TEST(LoadPanel, SplitAdjustedReturnIsEconomicReturn) {
    const auto files = PanelFiles{(fixtures() / "split" / "prices.csv").string(), "", ""};
    const MarketPanel p = load_panel(files);
    auto [dates, prices] = p.price_history("SPLT", p.size() - 1);
    // 42.00 -> 21.50 after a 2:1 split is a gain of 43/42.
    EXPECT_NEAR(std::log(prices[2] / prices[1]), std::log(43.0 / 42.0), 1e-15);
    EXPECT_NEAR(prices[3] / prices[2], 21.0 / 21.5, 1e-15);
}

TEST(LoadPanel, SplitInvariance) {
    const SynthData data = synth_panel({.seed = 3, .n_tickers = 2, .n_dates = 60});
    std::vector<PriceRecord> recs;
    std::vector<PriceRecord> split;
    for (std::size_t i = 0; i < data.panel.size(); ++i) {
        for (const auto& t : data.panel.tickers()) {
            PriceRecord r{data.panel.dates()[i], t, *data.panel.row(t, i)};
            recs.push_back(r);
            if (i >= 30) {
                r.row.close /= 3.0;
                r.row.adj_factor *= 3.0;
            }
            split.push_back(r);
        }
    }
    const auto a = MarketPanel::from_records(recs, {}, {});
    const auto b = MarketPanel::from_records(split, {}, {});
    const auto ha = a.price_history("S0001", a.size() - 1).second;
    const auto hb = b.price_history("S0001", b.size() - 1).second;
    for (std::size_t i = 1; i < ha.size(); ++i) EXPECT_NEAR(std::log(ha[i] / ha[i - 1]), std::log(hb[i] / hb[i - 1]), 1e-14);
}

TEST(LoadPanel, RoundTrip) {
    const MarketPanel p = load_panel(minimal_files());
    const auto dir = scratch("round_trip");
    const PanelFiles files = write_panel(p, dir);
    EXPECT_EQ(load_panel(files), p);

    const SynthData data = synth_panel({.seed = 5, .n_tickers = 4, .n_dates = 45, .suspend_prob = 0.1});
    EXPECT_EQ(load_panel(write_panel(data.panel, dir / "synth")), data.panel);
}

TEST(LoadFactors, EmptyValueIsMissingAndDuplicatesFail) {
    const FactorPanel f = load_factors((fixtures() / "minimal" / "factors.csv").string(), default_factor_catalog());
    const auto* slice = f.as_of(Date{2021, 6, 30});
    ASSERT_NE(slice, nullptr);
    EXPECT_EQ(slice->at("000001.SZ").size(), 2u);
    EXPECT_EQ(slice->at("600519.SH").size(), 1u);
    EXPECT_EQ(f.factors().at("EP").category, FactorCategory::Value);

    const auto dir = scratch("dup_factors");
    spit(dir / "f.csv", "date,ticker,factor,value\n2021-01-04,A,EP,1\n2021-01-04,A,EP,2\n");
    try {
        load_factors((dir / "f.csv").string());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::load);
        EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
    }
}

TEST(Eligibility, RulesAndReasons) {
    const auto dates = weekday_calendar(Date{2020, 1, 6}, 30);
    const Date on = dates.back();
    std::vector<Stock> stocks = {
        {"OK"},
        {"YOUNG", 2e7, on.plus_days(-30)},
        {"EDGE_AGE", 2e7, on.plus_days(-91)},
        {"THIN", 9'999'999.0},
        {"EXACT", 10'000'000.0},
        {"ST", 2e7, Date{2010, 1, 4}, true},
        {"OUT", 2e7, Date{2010, 1, 4}, false, false},
    };
    const MarketPanel p = panel_of(stocks, 30);
    const EligibilityReport r = eligibility_filter(p, on);
    EXPECT_EQ(r.eligible, (std::set<std::string>{"EDGE_AGE", "EXACT", "OK"}));
    EXPECT_EQ(r.excluded.at("YOUNG"), reason::listing_age);
    EXPECT_EQ(r.excluded.at("THIN"), reason::liquidity);
    EXPECT_EQ(r.excluded.at("ST"), reason::st);
    EXPECT_EQ(r.excluded.at("OUT"), reason::universe);
    EXPECT_EQ(r.excluded.size() + r.eligible.size(), stocks.size());
}

TEST(Eligibility, SuspendedAndShortHistory) {
    const auto dates = weekday_calendar(Date{2020, 1, 6}, 25);
    std::vector<PriceRecord> recs;
    std::vector<std::pair<Date, std::string>> members;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        PriceRow row;
        row.close = 10.0;
        row.turnover = 5e7;
        row.list_date = Date{2010, 1, 4};
        row.suspended = i == 24;
        recs.push_back({dates[i], "HALT", row});
        members.emplace_back(dates[i], "HALT");
    }
    const MarketPanel p = MarketPanel::from_records(recs, members, {});
    EXPECT_EQ(eligibility_filter(p, dates[24]).excluded.at("HALT"), reason::suspended);
    EXPECT_TRUE(eligibility_filter(p, dates[23]).eligible.contains("HALT"));
    EXPECT_EQ(eligibility_filter(p, dates[18]).excluded.at("HALT"), reason::liquidity);
}

TEST(Eligibility, TrailingMeanCountsMissingDaysAsZero) {
    const auto dates = weekday_calendar(Date{2020, 1, 6}, 21);
    std::vector<PriceRecord> recs;
    std::vector<std::pair<Date, std::string>> members;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        PriceRow row;
        row.close = 10.0;
        row.turnover = 1.05e7;
        row.list_date = Date{2010, 1, 4};
        recs.push_back({dates[i], "A", row});
        if (i != 10) recs.push_back({dates[i], "GAP", row});
        members.emplace_back(dates[i], "A");
        members.emplace_back(dates[i], "GAP");
    }
    const MarketPanel p = MarketPanel::from_records(recs, members, {});
    const auto r = eligibility_filter(p, dates[20]);
    EXPECT_TRUE(r.eligible.contains("A"));
    EXPECT_EQ(r.excluded.at("GAP"), reason::liquidity);
}

TEST(Eligibility, PointInTimeUnderAppendedDates) {
    const SynthData data = synth_panel({.seed = 9, .n_tickers = 20, .n_dates = 120, .suspend_prob = 0.05});
    const MarketPanel early = data.panel.truncated(data.panel.dates()[80]);
    for (std::size_t i = 20; i <= 80; i += 7) {
        const Date d = data.panel.dates()[i];
        const auto a = eligibility_filter(early, d);
        const auto b = eligibility_filter(data.panel, d);
        EXPECT_EQ(a.eligible, b.eligible);
        EXPECT_EQ(a.excluded, b.excluded);
        EXPECT_EQ(early.members(i), data.panel.members(i));
    }
}

TEST(Synth, DeterministicPerSeed) {
    const SynthSpec spec{.seed = 42, .n_tickers = 15, .n_dates = 200, .ic = 0.3};
    const SynthData a = synth_panel(spec), b = synth_panel(spec);
    EXPECT_EQ(a.panel, b.panel);
    EXPECT_EQ(a.factors.by_date(), b.factors.by_date());
    SynthSpec other = spec;
    other.seed = 43;
    EXPECT_FALSE(synth_panel(other).panel == a.panel);
}

TEST(Synth, PerfectIcFactorRanksMatchForwardReturnRanks) {
    const SynthData data = synth_panel({.seed = 1, .n_tickers = 40, .n_dates = 150, .ic = 1.0});
    const auto& dates = data.panel.dates();
    const auto ends = month_end_indices(dates);
    ASSERT_GE(ends.size(), 3u);
    for (std::size_t m = 0; m + 1 < ends.size(); ++m) {
        const std::size_t d = ends[m], next = ends[m + 1];
        const auto* slice = data.factors.as_of(dates[d - 1]);
        ASSERT_NE(slice, nullptr);
        Cross factor, fwd;
        for (const auto& t : data.panel.tickers()) {
            factor.push_back(slice->at(t).at("SYN1"));
            fwd.push_back(std::log(*data.panel.mark_price(t, next) / *data.panel.mark_price(t, d)));
        }
        EXPECT_EQ(rank_normalize(factor), rank_normalize(fwd)) << "month " << m;
    }
}

TEST(Synth, RegimeVarianceRatio) {
    const SynthData data = synth_panel({.seed = 77, .n_tickers = 60, .n_dates = 1500, .market_vol = 0.0, .drift = 0.0});
    double s[2] = {0, 0};
    double n[2] = {0, 0};
    for (std::size_t i = 0; i < data.panel.tickers().size(); ++i) {
        const auto& t = data.panel.tickers()[i];
        for (std::size_t d = 1; d < data.panel.size(); ++d) {
            const double y = std::log(data.panel.row(t, d)->close / data.panel.row(t, d - 1)->close);
            const int regime = data.regime[i][d];
            s[regime] += y * y;
            n[regime] += 1;
        }
    }
    EXPECT_NEAR((s[1] / n[1]) / (s[0] / n[0]), 4.0, 0.1);
}

TEST(Synth, DegenerateParameters) {
    EXPECT_THROW(synth_panel({.n_tickers = 0}), Error);
    EXPECT_THROW(synth_panel({.n_dates = 1}), Error);
}
