#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "apax/errors.hpp"
#include "apax/spectrum.hpp"

using namespace apax;
using namespace apax::spectrum;

TEST(Welch, SinePeakMatchesDirectDft) {
    const std::size_t seg = 4096, k = 300;
    std::vector<double> x(seg * 8);
    for (std::size_t n = 0; n < x.size(); ++n) {
        x[n] = std::sin(2.0 * std::numbers::pi * static_cast<double>(k * n % seg) / seg);
    }
    const auto s = welch_spectrum(x, seg);
    EXPECT_EQ(s.peak_bin, k);
    EXPECT_GE(s.peak_db - s.floor_db, 40.0);
    EXPECT_EQ(s.segments, 15u);
    EXPECT_EQ(s.bins_db.size(), seg / 2 + 1);

    // Every segment holds whole periods, so each periodogram equals the first.
    std::complex<double> acc = 0.0;
    double wsum = 0.0;
    for (std::size_t n = 0; n < seg; ++n) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / seg);
        wsum += w * w;
        acc += w * x[n] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * n % seg) / seg);
    }
    EXPECT_NEAR(s.bins_db[k], 10.0 * std::log10(std::norm(acc) / wsum + kPowerEpsilon), 1e-9);
}

TEST(Welch, WhiteNoiseIsFlat) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> x(63 * 2048 + 4096);
    for (auto& v : x) v = g(rng);
    const auto s = welch_spectrum(x);
    EXPECT_EQ(s.segments, 64u);
    EXPECT_LE(s.peak_db - s.floor_db, 15.0);
    EXPECT_GT(spectral_flatness(s), 0.9);
}

TEST(Welch, DcPeaksAtBinZero) {
    const auto s = welch_spectrum(std::vector<double>(10000, 2.5));
    EXPECT_EQ(s.peak_bin, 0u);
}

TEST(Welch, StatsInvariants) {
    std::mt19937_64 rng(2);
    std::vector<double> x(5000);
    for (auto& v : x) v = static_cast<double>(rng() % 1000);
    const auto s = welch_spectrum(x);
    double mx = -INFINITY, sum = 0;
    for (auto b : s.bins_db) {
        mx = std::max(mx, b);
        sum += b;
    }
    EXPECT_EQ(s.peak_db, mx);
    EXPECT_LE(s.floor_db, s.peak_db);
    EXPECT_NEAR(s.mean_db, sum / static_cast<double>(s.bins_db.size()), 1e-9);
    EXPECT_DOUBLE_EQ(s.dynamic_range_db, s.peak_db - s.floor_db);
}

TEST(Welch, ShortInputUsesOnePowerOfTwoSegment) {
    const auto s = welch_spectrum(std::vector<double>(3000, 1.0));
    EXPECT_EQ(s.segment_length, 2048u);
    EXPECT_EQ(s.segments, 1u);
    EXPECT_THROW(welch_spectrum(std::vector<double>{}), InvalidConfig);
    EXPECT_THROW(welch_spectrum(std::vector<double>(100, 1.0), 100), InvalidConfig);
}

TEST(Welch, FullScaleSineHasMoreRangeThanNoise) {
    std::vector<double> sine(1 << 16), noise(1 << 16);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(2.0));
    for (std::size_t n = 0; n < sine.size(); ++n) {
        sine[n] = std::sin(2.0 * std::numbers::pi * 0.1 * static_cast<double>(n));
        noise[n] = g(rng);
    }
    EXPECT_GT(welch_spectrum(sine).dynamic_range_db, welch_spectrum(noise).dynamic_range_db + 30.0);
}
