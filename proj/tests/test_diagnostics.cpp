#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "regimevol/diagnostics.hpp"
#include "regimevol/error.hpp"
#include "regimevol/rng.hpp"
#include "regimevol/simulation.hpp"

using namespace regimevol;

TEST_CASE("adf: random walk is rarely rejected, white noise almost always") {
    int rw_rejections = 0;
    int wn_rejections = 0;
    for (int rep = 0; rep < 100; ++rep) {
        auto rw = simulate_random_walk(500, 1000 + static_cast<std::uint64_t>(rep));
        if (adf_test(rw, DeterministicTerms::Constant).reject_at_5pct) ++rw_rejections;
        auto wn = simulate_white_noise(500, 2000 + static_cast<std::uint64_t>(rep));
        if (adf_test(wn, DeterministicTerms::Constant).reject_at_5pct) ++wn_rejections;
    }
    CHECK(rw_rejections <= 10);   // non-rejection in >= 90/100
    CHECK(wn_rejections >= 99);
}

TEST_CASE("adf: constant series is singular") {
    std::vector<double> y(200, 3.5);
    try {
        adf_test(y, DeterministicTerms::Constant);
        FAIL("expected SingularRegression");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularRegression);
    }
}

TEST_CASE("adf: statistic invariant to adding a constant when a constant is included") {
    auto y = simulate_white_noise(300, 77);
    UnitRootResult base = adf_test(y, DeterministicTerms::Constant);
    for (double& v : y) v += 42.0;
    UnitRootResult shifted = adf_test(y, DeterministicTerms::Constant);
    CHECK(shifted.statistic == doctest::Approx(base.statistic).epsilon(1e-8));
}

TEST_CASE("adf: too short raises") {
    std::vector<double> y(20, 0.0);
    CHECK_THROWS_AS(adf_test(y, DeterministicTerms::Constant, 15), Error);
}

TEST_CASE("pp: size and power") {
    int rw_rejections = 0;
    int wn_rejections = 0;
    for (int rep = 0; rep < 100; ++rep) {
        auto rw = simulate_random_walk(500, 5000 + static_cast<std::uint64_t>(rep));
        if (pp_test(rw, DeterministicTerms::Constant).reject_at_5pct) ++rw_rejections;
        auto wn = simulate_white_noise(500, 6000 + static_cast<std::uint64_t>(rep));
        if (pp_test(wn, DeterministicTerms::Constant).reject_at_5pct) ++wn_rejections;
    }
    CHECK(rw_rejections <= 10);
    CHECK(wn_rejections >= 99);
}

TEST_CASE("pp: tiny sample raises TooShort") {
    std::vector<double> y = {1.0, 2.0, 3.0, 4.0, 5.0};
    try {
        pp_test(y, DeterministicTerms::Constant);
        FAIL("expected TooShort");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooShort);
    }
}

TEST_CASE("break-augmented adf restores rejection on broken-mean data") {
    // stationary noise around a shifted mean looks persistent to the
    // plain test; dummying the break recovers the stationary verdict
    int plain_rejections = 0;
    int augmented_rejections = 0;
    for (int rep = 0; rep < 20; ++rep) {
        auto y = simulate_mean_shift(300, {149}, 6.0, 7700 + static_cast<std::uint64_t>(rep));
        if (adf_test(y, DeterministicTerms::Constant).reject_at_5pct) ++plain_rejections;
        std::vector<std::size_t> breaks = {149};
        if (adf_test(y, DeterministicTerms::Constant, -1, breaks).reject_at_5pct) {
            ++augmented_rejections;
        }
    }
    CHECK(augmented_rejections >= 18);
    CHECK(augmented_rejections > plain_rejections);
}

TEST_CASE("trend case: both tests reject for trend-stationary data") {
    int adf_rejections = 0;
    int pp_rejections = 0;
    for (int rep = 0; rep < 20; ++rep) {
        Philox4x32 rng(8800 + static_cast<std::uint64_t>(rep), 0);
        std::vector<double> y(400);
        for (int t = 0; t < 400; ++t) y[static_cast<std::size_t>(t)] = 0.02 * t + rng.normal();
        if (adf_test(y, DeterministicTerms::ConstantTrend).reject_at_5pct) ++adf_rejections;
        if (pp_test(y, DeterministicTerms::ConstantTrend).reject_at_5pct) ++pp_rejections;
    }
    CHECK(adf_rejections >= 15);
    CHECK(pp_rejections >= 15);
}

TEST_CASE("critical values ordered and close to published large-sample points") {
    CriticalValues cv = dickey_fuller_critical_values(DeterministicTerms::Constant, 100000);
    CHECK(cv.pct1 < cv.pct5);
    CHECK(cv.pct5 < cv.pct10);
    CHECK(cv.pct5 == doctest::Approx(-2.86).epsilon(5e-3));
    CriticalValues trend = dickey_fuller_critical_values(DeterministicTerms::ConstantTrend, 100000);
    CHECK(trend.pct5 == doctest::Approx(-3.41).epsilon(5e-3));
}

TEST_CASE("bai-perron: single mean shift recovered") {
    // mean 0 for t=1..200 then mean 5, sigma=1
    auto y = simulate_mean_shift(400, {199}, 5.0, 31);
    BreakTestResult result = bai_perron(y, nullptr, 3, 0.15);
    REQUIRE(result.num_breaks == 1);
    CHECK(std::llabs(static_cast<long long>(result.break_indices[0]) - 199) <= 5);
}

TEST_CASE("bai-perron: white noise selects zero breaks almost always") {
    int spurious = 0;
    for (int rep = 0; rep < 100; ++rep) {
        auto y = simulate_white_noise(400, 9000 + static_cast<std::uint64_t>(rep));
        if (bai_perron(y, nullptr, 3, 0.15).num_breaks != 0) ++spurious;
    }
    CHECK(spurious <= 10);
}

TEST_CASE("bai-perron: two shifts recovered within tolerance") {
    auto y = simulate_mean_shift(450, {149, 299}, 5.0, 47);
    BreakTestResult result = bai_perron(y, nullptr, 4, 0.15);
    REQUIRE(result.num_breaks == 2);
    CHECK(std::llabs(static_cast<long long>(result.break_indices[0]) - 149) <= 5);
    CHECK(std::llabs(static_cast<long long>(result.break_indices[1]) - 299) <= 5);
}

TEST_CASE("bai-perron: segments respect the trimming floor") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        auto y = simulate_mean_shift(300, {120}, 3.0, seed);
        double trim = 0.15;
        BreakTestResult result = bai_perron(y, nullptr, 3, trim);
        std::size_t floor_len = static_cast<std::size_t>(std::ceil(trim * 300));
        std::size_t prev = 0;
        for (std::size_t b : result.break_indices) {
            CHECK(b + 1 - prev >= floor_len);
            prev = b + 1;
        }
        CHECK(300 - prev >= floor_len);
    }
}

TEST_CASE("bai-perron: invalid trim and too-short input") {
    auto y = simulate_white_noise(100, 5);
    CHECK_THROWS_AS(bai_perron(y, nullptr, 2, 0.30), Error);
    auto tiny = simulate_white_noise(30, 5);
    try {
        bai_perron(tiny, nullptr, 8, 0.15);
        FAIL("expected TooShort");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooShort);
    }
}

TEST_CASE("bai-perron: sequential sup-F agrees on an obvious break") {
    auto y = simulate_mean_shift(400, {199}, 5.0, 99);
    BreakTestResult result = bai_perron(y, nullptr, 3, 0.15, BreakSelection::SequentialSupF);
    CHECK(result.num_breaks == 1);
}

TEST_CASE("arch-lm: size roughly nominal on iid noise") {
    int rejections = 0;
    for (int rep = 0; rep < 100; ++rep) {
        auto e = simulate_white_noise(1000, 300 + static_cast<std::uint64_t>(rep));
        if (arch_lm(e, 5).p_value < 0.05) ++rejections;
    }
    CHECK(rejections >= 1);
    CHECK(rejections <= 9);  // 5 +/- 4 per the calibration target
}

TEST_CASE("arch-lm: strong power on garch data") {
    int rejections = 0;
    for (int rep = 0; rep < 100; ++rep) {
        auto e = simulate_garch11(1000, 0.1, 0.85, 700 + static_cast<std::uint64_t>(rep));
        if (arch_lm(e, 5).p_value < 0.05) ++rejections;
    }
    CHECK(rejections >= 95);
}

TEST_CASE("arch-lm: degenerate and invariance cases") {
    std::vector<double> zeros(200, 0.0);
    ArchLmResult z = arch_lm(zeros, 5);
    CHECK(z.lm_statistic == doctest::Approx(0.0));
    CHECK(z.p_value == doctest::Approx(1.0));

    auto e = simulate_garch11(500, 0.1, 0.8, 17);
    ArchLmResult base = arch_lm(e, 4);
    for (double& v : e) v *= 3.7;
    ArchLmResult scaled = arch_lm(e, 4);
    CHECK(scaled.lm_statistic == doctest::Approx(base.lm_statistic).epsilon(1e-8));

    std::vector<double> shorty(12, 1.0);
    CHECK_THROWS_AS(arch_lm(shorty, 5), Error);
}

TEST_CASE("vif: orthogonal columns give exactly one") {
    // +/-1 patterns with zero mean and zero cross moment
    Eigen::MatrixXd X(8, 2);
    for (int i = 0; i < 8; ++i) {
        X(i, 0) = (i % 2 == 0) ? 1.0 : -1.0;
        X(i, 1) = (i / 2 % 2 == 0) ? 1.0 : -1.0;
    }
    std::vector<std::string> names = {"a", "b"};
    auto result = vif(X, names);
    CHECK(result[0].second == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(result[1].second == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("vif: duplicated column flags infinity") {
    Philox4x32 rng(4, 0);
    Eigen::MatrixXd X(50, 3);
    for (int i = 0; i < 50; ++i) {
        X(i, 0) = rng.normal();
        X(i, 1) = X(i, 0);
        X(i, 2) = rng.normal();
    }
    std::vector<std::string> names = {"a", "a_copy", "b"};
    auto result = vif(X, names);
    CHECK(std::isinf(result[0].second));
    CHECK(std::isinf(result[1].second));
}

TEST_CASE("vif: correlated pair matches the analytic limit") {
    Philox4x32 rng(123, 0);
    const int n = 10000;
    Eigen::MatrixXd X(n, 2);
    for (int i = 0; i < n; ++i) {
        double u = rng.normal();
        double v = rng.normal();
        X(i, 0) = u;
        X(i, 1) = 0.8 * u + std::sqrt(1.0 - 0.64) * v;
    }
    std::vector<std::string> names = {"x1", "x2"};
    auto result = vif(X, names);
    CHECK(result[0].second == doctest::Approx(1.0 / (1.0 - 0.64)).epsilon(0.15 / 2.78));
    CHECK(result[1].second == doctest::Approx(1.0 / (1.0 - 0.64)).epsilon(0.15 / 2.78));
}

TEST_CASE("vif: at least one, invariant to positive rescaling") {
    Philox4x32 rng(9, 0);
    Eigen::MatrixXd X(200, 3);
    for (int i = 0; i < 200; ++i) {
        double base = rng.normal();
        X(i, 0) = base + 0.3 * rng.normal();
        X(i, 1) = base + 0.5 * rng.normal();
        X(i, 2) = rng.normal();
    }
    std::vector<std::string> names = {"a", "b", "c"};
    auto before = vif(X, names);
    for (const auto& [name, value] : before) CHECK(value >= 1.0 - 1e-12);
    X.col(1) *= 250.0;
    auto after = vif(X, names);
    for (std::size_t j = 0; j < names.size(); ++j) {
        CHECK(after[j].second == doctest::Approx(before[j].second).epsilon(1e-9));
    }
}

TEST_CASE("vif: constant column raises") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(30, 2);
    Philox4x32 rng(2, 0);
    for (int i = 0; i < 30; ++i) X(i, 0) = rng.normal();
    std::vector<std::string> names = {"x", "ones"};
    try {
        vif(X, names);
        FAIL("expected ConstantColumn");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConstantColumn);
    }
}
