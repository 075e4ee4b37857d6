#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "support.hpp"

using namespace mfvol;

namespace {

std::vector<double> nav_from_returns(const std::vector<double>& r, double start = 100.0) {
    std::vector<double> nav = {start};
    for (double x : r) nav.push_back(nav.back() * (1.0 + x));
    return nav;
}

std::vector<double> lognormal_nav(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0004, 0.012);
    std::vector<double> nav = {1.0};
    for (std::size_t i = 0; i < n; ++i) nav.push_back(nav.back() * std::exp(z(rng)));
    return nav;
}

}  // namespace

TEST(TotalReturn, NavRatioExample) {
    // MAXFLAT total return of 242.86% in the CSI 300 comparison table.
    const std::vector<double> nav = {100.0, 342.86};
    EXPECT_NEAR(total_return(nav), 2.4286, 1e-12);
}

TEST(TotalReturn, Examples) {
    EXPECT_EQ(total_return(std::vector<double>{5.0, 5.0, 5.0}), 0.0);
    EXPECT_EQ(total_return(std::vector<double>{100.0, 50.0}), -0.5);
    EXPECT_EQ(total_return(std::vector<double>{100.0, 3.0, 400.0, 150.0}), total_return(std::vector<double>{100.0, 150.0}));
    try {
        total_return(std::vector<double>{100.0, 0.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::data);
    }
}

TEST(Sharpe, MatchesTwoPassOracle) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto nav = lognormal_nav(2000, seed);
        EXPECT_NEAR(sharpe(nav, Periodicity::daily), oracles::two_pass_sharpe(nav, 252.0), 1e-12);
        EXPECT_NEAR(sharpe(nav, Periodicity::monthly), oracles::two_pass_sharpe(nav, 12.0), 1e-12);
    }
}

TEST(Sharpe, AlternatingReturnsNearZero) {
    std::vector<double> r;
    for (int i = 0; i < 200; ++i) r.push_back(i % 2 ? -0.01 : 0.01);
    EXPECT_NEAR(sharpe(nav_from_returns(r), Periodicity::daily), 0.0, 0.05);
}

TEST(Sharpe, ConstantReturnIsUndefined) {
    const auto nav = nav_from_returns(std::vector<double>(20, 0.0));
    try {
        sharpe(nav, Periodicity::daily);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::undefined_metric);
    }
}

TEST(Sharpe, SignFollowsMeanReturn) {
    for (std::uint64_t seed = 20; seed < 30; ++seed) {
        const auto nav = lognormal_nav(60, seed);
        double mean = 0.0;
        for (double r : period_returns(nav)) mean += r;
        EXPECT_EQ(sharpe(nav, Periodicity::daily) > 0.0, mean > 0.0) << seed;
    }
}

TEST(Capm, SelfRegression) {
    const auto nav = lognormal_nav(300, 4);
    const auto ab = capm_alpha_beta(nav, nav, Periodicity::daily);
    EXPECT_NEAR(ab.alpha, 0.0, 1e-10);
    EXPECT_NEAR(ab.beta, 1.0, 1e-10);
}

TEST(Capm, NoiselessLinearFixture) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> z(0.0, 0.01);
    std::vector<double> rb, rp;
    for (int i = 0; i < 250; ++i) {
        rb.push_back(z(rng));
        rp.push_back(0.01 + 1.5 * rb.back());
    }
    for (auto p : {Periodicity::daily, Periodicity::monthly}) {
        const auto ab = capm_alpha_beta(nav_from_returns(rp), nav_from_returns(rb), p);
        EXPECT_NEAR(ab.beta, 1.5, 1e-10);
        EXPECT_NEAR(ab.alpha, 0.01 * periods_per_year(p), 1e-10);
    }
}

TEST(Capm, CashAgainstMovingBenchmark) {
    const auto bench = lognormal_nav(100, 9);
    const std::vector<double> cash(bench.size(), 1e6);
    const auto ab = capm_alpha_beta(cash, bench, Periodicity::daily);
    EXPECT_EQ(ab.beta, 0.0);
    EXPECT_EQ(ab.alpha, 0.0);
}

TEST(Capm, Errors) {
    const auto nav = lognormal_nav(50, 1);
    const std::vector<double> flat(nav.size(), 2.0);
    try {
        capm_alpha_beta(nav, flat, Periodicity::daily);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::undefined_metric);
    }
    try {
        capm_alpha_beta(nav, std::vector<double>(nav.begin(), nav.end() - 1), Periodicity::daily);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::misalignment);
    }
}

TEST(MaxDrawdown, Examples) {
    EXPECT_EQ(max_drawdown(std::vector<double>{1, 2, 3, 4}), 0.0);
    EXPECT_EQ(max_drawdown(std::vector<double>{100, 50, 75}), 0.5);
    EXPECT_EQ(max_drawdown(std::vector<double>{100, 100}), 0.0);
}

TEST(Metrics, ScaleInvariance) {
    const auto p = lognormal_nav(400, 12), b = lognormal_nav(400, 13);
    const auto dates = weekday_calendar(Date{2019, 1, 2}, static_cast<int>(p.size()));
    std::vector<double> p2, b2;
    for (double v : p) p2.push_back(v * 7.25);
    for (double v : b) b2.push_back(v * 0.125);
    for (auto per : {Periodicity::daily, Periodicity::monthly}) {
        const auto m1 = compute_metrics(dates, p, b, per);
        const auto m2 = compute_metrics(dates, p2, b2, per);
        EXPECT_NEAR(m1.total_return, m2.total_return, 1e-12);
        EXPECT_NEAR(m1.sharpe, m2.sharpe, 1e-9);
        EXPECT_NEAR(m1.alpha, m2.alpha, 1e-9);
        EXPECT_NEAR(m1.beta, m2.beta, 1e-9);
        EXPECT_NEAR(m1.max_drawdown, m2.max_drawdown, 1e-12);
    }
}

TEST(Metrics, MonthlySamplingUsesMonthEnds) {
    const auto dates = weekday_calendar(Date{2019, 1, 2}, 300);
    const auto nav = lognormal_nav(299, 3);
    const auto m = compute_metrics(dates, nav, lognormal_nav(299, 4), Periodicity::monthly);
    EXPECT_EQ(m.periodicity, Periodicity::monthly);
    // Jan 2019 .. mid Feb 2020: 14 calendar months, 14 returns from 15 marks.
    EXPECT_EQ(m.n_periods, 14u);
}
