#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace mfvol;

TEST(ButterworthPoles, UnitCircleLeftHalfPlaneConjugateClosed) {
    for (int n = 1; n <= 8; ++n) {
        const auto poles = butterworth_poles(n);
        ASSERT_EQ(poles.size(), static_cast<std::size_t>(n));
        for (const auto& p : poles) {
            EXPECT_NEAR(std::abs(p), 1.0, 1e-12) << "n=" << n;
            EXPECT_LT(p.real(), -1e-12) << "n=" << n;
            bool has_conj = false;
            for (const auto& q : poles) has_conj |= std::abs(q - std::conj(p)) < 1e-12;
            EXPECT_TRUE(has_conj) << "n=" << n;
        }
    }
}

TEST(AnalogDenominator, ClassicalPolynomials) {
    const std::vector<std::vector<double>> expected = {{1, 1}, {1, std::numbers::sqrt2, 1}, {1, 2, 2, 1}};
    for (int n = 1; n <= 3; ++n) {
        const auto den = analog_denominator(butterworth_poles(n));
        ASSERT_EQ(den.size(), expected[n - 1].size());
        for (std::size_t i = 0; i < den.size(); ++i) EXPECT_NEAR(den[i], expected[n - 1][i], 1e-10);
    }
}

TEST(AnalogDenominator, RejectsUnpairedComplexPole) {
    const std::vector<Complex> poles = {{-0.5, 0.8}};
    try {
        analog_denominator(poles);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::asymmetry);
    }
}

TEST(MagnitudeResponse, Examples) {
    EXPECT_DOUBLE_EQ(magnitude_response(3, 0.0), 1.0);
    for (int n = 1; n <= 12; ++n) EXPECT_NEAR(magnitude_response(n, 1.0), 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(magnitude_response(2, 2.0), 1.0 / std::sqrt(17.0), 1e-15);
}

TEST(MagnitudeResponse, StrictlyDecreasing) {
    for (int n = 1; n <= 8; ++n) {
        double prev = magnitude_response(n, 0.0);
        for (int i = 1; i <= 1000; ++i) {
            const double w = 10.0 * i / 1000.0;
            const double cur = magnitude_response(n, w);
            // below ~0.2 the high-order drop is under one ulp of 1.0
            if (w >= 0.2) EXPECT_LT(cur, prev) << "n=" << n << " i=" << i;
            else EXPECT_LE(cur, prev) << "n=" << n << " i=" << i;
            prev = cur;
        }
    }
}

TEST(Discretize, FirstOrderQuarterCutoffIsExact) {
    const DiscreteFilter f = discretize({1, 0.25});
    EXPECT_EQ(f.b, (std::vector<double>{0.5, 0.5}));
    EXPECT_EQ(f.a, (std::vector<double>{1.0, 0.0}));
    EXPECT_FALSE(std::signbit(f.a[1]));
    EXPECT_NEAR(discrete_magnitude(f, 0.25), 1.0 / std::sqrt(2.0), 1e-6);
}

// Oracle: substitute s = (1/W)(1 - z^-1)/(1 + z^-1), W = tan(pi fc), into
// 1/(s^2 + sqrt2 s + 1) and clear denominators by hand.
TEST(Discretize, SecondOrderMatchesSymbolicBilinearSubstitution) {
    const double fc = 0.1;
    const double K = 1.0 / std::tan(std::numbers::pi * fc);
    const double r2 = std::numbers::sqrt2;
    const double d0 = K * K + r2 * K + 1.0;
    const double d1 = 2.0 - 2.0 * K * K;
    const double d2 = K * K - r2 * K + 1.0;
    const std::vector<double> b = {1.0 / d0, 2.0 / d0, 1.0 / d0};
    const std::vector<double> a = {1.0, d1 / d0, d2 / d0};

    const DiscreteFilter f = discretize({2, fc});
    ASSERT_EQ(f.b.size(), 3u);
    ASSERT_EQ(f.a.size(), 3u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(f.b[i], b[i], 1e-9);
        EXPECT_NEAR(f.a[i], a[i], 1e-9);
    }
}

// Frozen reference coefficients from an external filter-design package
// (butter(2, 0.2) and butter(2, 0.004), normalized-to-Nyquist convention).
TEST(Discretize, MatchesFrozenReferenceDesigns) {
    struct Case {
        FilterSpec spec;
        std::vector<double> b, a;
    };
    const Case cases[] = {
        {{2, 0.1},
         {0.0674552738890719, 0.1349105477781438, 0.0674552738890719},
         {1.0, -1.1429805025399011, 0.41280159809618877}},
        {{2, 1.0 / 500.0},
         {3.913020539914434e-05, 7.826041079828868e-05, 3.913020539914434e-05},
         {1.0, -1.9822289297925284, 0.9823854506141251}},
    };
    for (const auto& c : cases) {
        const DiscreteFilter f = discretize(c.spec);
        for (std::size_t i = 0; i < 3; ++i) {
            EXPECT_NEAR(f.b[i], c.b[i], 1e-12 + 1e-9 * std::abs(c.b[i]));
            EXPECT_NEAR(f.a[i], c.a[i], 1e-9);
        }
    }
}

TEST(Discretize, HalfPowerAtCutoffAndUnityDcGain) {
    for (int n = 1; n <= 6; ++n) {
        for (double fc : {0.02, 0.05, 0.1, 0.2, 0.3, 0.45}) {
            const DiscreteFilter f = discretize({n, fc});
            EXPECT_NEAR(discrete_magnitude(f, fc), 1.0 / std::sqrt(2.0), 1e-6) << n << " " << fc;
            EXPECT_NEAR(f.dc_gain(), 1.0, 1e-10);
            EXPECT_NEAR(discrete_magnitude(f, 0.0), 1.0, 1e-10);
            EXPECT_LT(discrete_magnitude(f, 0.5), discrete_magnitude(f, fc));
            EXPECT_EQ(f.a[0], 1.0);
        }
    }
}

TEST(Discretize, DiscreteMagnitudeIsMonotone) {
    for (int n : {1, 2, 4}) {
        const DiscreteFilter f = discretize({n, 0.05});
        double prev = discrete_magnitude(f, 0.0);
        for (int i = 1; i <= 500; ++i) {
            const double cur = discrete_magnitude(f, 0.5 * i / 500.0);
            EXPECT_LE(cur, prev + 1e-9);
            prev = cur;
        }
    }
}

TEST(Discretize, Deterministic) {
    const DiscreteFilter x = discretize({5, 0.07});
    const DiscreteFilter y = discretize({5, 0.07});
    EXPECT_EQ(x.b, y.b);
    EXPECT_EQ(x.a, y.a);
}

TEST(Discretize, ValidationErrors) {
    auto code = [](FilterSpec s) {
        try {
            discretize(s);
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::io;
    };
    EXPECT_EQ(code({2, 0.0}), Errc::invalid_cutoff);
    EXPECT_EQ(code({2, 0.5}), Errc::invalid_cutoff);
    EXPECT_EQ(code({2, -0.1}), Errc::invalid_cutoff);
    EXPECT_EQ(code({0, 0.1}), Errc::invalid_order);
    EXPECT_EQ(code({13, 0.1}), Errc::invalid_order);
}

TEST(Discretize, HighOrderLowCutoffIsRejectedAsUnstable) {
    try {
        discretize({8, 1.0 / 500.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::instability);
    }
    EXPECT_NO_THROW(discretize({8, 0.01}));
}
