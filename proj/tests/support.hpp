#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "mfvol/mfvol.hpp"

namespace testing_support {

inline std::filesystem::path fixtures() { return MFVOL_FIXTURES; }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("mfvol_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

/// Gaussian series with piecewise volatility, for estimator tests.
inline mfvol::ReturnSeries clustered_returns(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    mfvol::ReturnSeries r;
    r.dates = mfvol::weekday_calendar(mfvol::Date{2010, 1, 4}, static_cast<int>(n));
    for (std::size_t t = 0; t < n; ++t) r.y.push_back((t / 200 % 2 ? 0.03 : 0.01) * z(rng));
    return r;
}

}  // namespace testing_support
