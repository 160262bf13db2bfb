#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dbcl/spectral.hpp"

using namespace dbcl;

namespace {

std::vector<double> tone(int n, double rate, double hz, double amplitude = 1.0, double phase = 0.0) {
    std::vector<double> s(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) s[i] = amplitude * std::sin(2 * std::numbers::pi * hz * i / rate + phase);
    return s;
}

TimeSeriesDataset one_column(const std::vector<double>& s) {
    TimeSeriesDataset d;
    d.variables = {"c"};
    d.trajectories.push_back({"0", Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()))});
    return d;
}

}  // namespace

TEST_CASE("window geometry at 256 Hz and half-second windows") {
    CHECK(window_length(256, 0.5) == 128);
    CHECK(nearest_bin(256, 128, 10) == 5);
    CHECK(nearest_bin(256, 128, 10.9) == 5);
    CHECK(nearest_bin(256, 128, 11.1) == 6);
    CHECK_THROWS_AS(window_length(256, 0.001), Error);
    CHECK_THROWS_AS(window_length(100, 0.333), Error);
    CHECK_THROWS_AS(nearest_bin(256, 128, 200), Error);
}

TEST_CASE("a pure tone concentrates its power in its bin") {
    auto p = power_spectrum(tone(128, 256, 10));
    REQUIRE(p.size() == 128);
    const double peak = p[5];
    for (std::size_t k = 0; k < 64; ++k) {
        if (k == 5) continue;
        CHECK(p[k] <= peak);
        if (k < 4 || k > 6) CHECK(peak >= 100 * p[k]);
    }
}

TEST_CASE("a unit tone at an exact bin has one quarter of its power in that bin") {
    auto p = power_spectrum(tone(128, 256, 10));
    CHECK(p[5] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p[128 - 5] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("power is invariant to phase at an exact bin") {
    const double ref = power_spectrum(tone(128, 256, 10))[5];
    for (double phase : {0.3, 1.0, 2.5, 4.0})
        CHECK(power_spectrum(tone(128, 256, 10, 1.0, phase))[5] == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("scaling by c scales power by c squared") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    std::vector<double> s(128);
    for (auto& v : s) v = n01(rng);
    auto p = power_spectrum(s);
    for (double c : {-2.0, 0.5, 7.0}) {
        std::vector<double> scaled = s;
        for (auto& v : scaled) v *= c;
        auto q = power_spectrum(scaled);
        for (std::size_t k = 0; k < p.size(); ++k) CHECK(q[k] == doctest::Approx(c * c * p[k]).epsilon(1e-12));
    }
}

TEST_CASE("Parseval: bins sum to energy over window length") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    for (int n : {2, 7, 64, 128, 257}) {
        std::vector<double> s(static_cast<std::size_t>(n));
        for (auto& v : s) v = n01(rng) * 3 + 1;
        double energy = 0;
        for (double v : s) energy += v * v;
        double sum = 0;
        for (double v : power_spectrum(s)) sum += v;
        CHECK(std::abs(sum - energy / n) / (energy / n) <= 1e-9);
    }
}

TEST_CASE("zero input gives zero power") {
    auto d = one_column(std::vector<double>(1024, 0.0));
    auto out = band_power_series(d, 256, 0.5, 10);
    CHECK(out.trajectories[0].values.rows() == 8);
    CHECK(out.trajectories[0].values.isZero(0));
}

TEST_CASE("band power output geometry") {
    auto d = one_column(tone(200000, 256, 10));
    auto out = band_power_series(d, 256, 0.5, 10);
    CHECK(out.trajectories[0].values.rows() == 1562);
    CHECK(out.sampling_interval == doctest::Approx(0.5));
    CHECK(out.variables == d.variables);
    CHECK(out.trajectories[0].values(0, 0) == doctest::Approx(0.25));
    CHECK(out.trajectories[0].values(1561, 0) == doctest::Approx(0.25));
}

TEST_CASE("trajectory count is preserved") {
    auto d = one_column(tone(512, 256, 10));
    d.trajectories.push_back({"1", Eigen::VectorXd::Ones(300)});
    auto out = band_power_series(d, 256, 0.5, 10);
    REQUIRE(out.trajectories.size() == 2);
    CHECK(out.trajectories[0].values.rows() == 4);
    CHECK(out.trajectories[1].values.rows() == 2);
    CHECK(out.trajectories[1].id == "1");
}

TEST_CASE("band power errors") {
    auto d = one_column(tone(100, 256, 10));
    CHECK_THROWS_AS(band_power_series(d, 256, 0.5, 10), Error);
    auto ok = one_column(tone(1000, 256, 10));
    CHECK_THROWS_AS(band_power_series(ok, 256, 0.5, 200), Error);
    CHECK_THROWS_AS(band_power_series(ok, 256, 0.001, 10), Error);
}
