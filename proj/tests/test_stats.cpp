#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "delottery/rng.hpp"
#include "delottery/stats.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace delottery;

TEST_CASE("chi-square examples") {
    const std::vector<std::uint64_t> even{25, 25, 25, 25};
    const auto a = chi_square_uniform(even);
    CHECK(a.statistic == 0.0);
    CHECK(a.pass);
    CHECK(a.df == 3);

    const std::vector<std::uint64_t> lopsided{100, 0, 0, 0};
    const auto b = chi_square_uniform(lopsided);
    CHECK(b.statistic == doctest::Approx(300.0));
    CHECK_FALSE(b.pass);

    CHECK(chi_square_critical_001(9) == doctest::Approx(21.666).epsilon(1e-4));
}

TEST_CASE("critical table agrees with the incomplete-gamma oracle") {
    for (unsigned df = 1; df <= 64; ++df) {
        const auto want = static_cast<double>(oracle::chi_square_critical(df, 0.01L));
        CHECK(chi_square_critical_001(df) == doctest::Approx(want).epsilon(1e-6));
    }
    CHECK_THROWS(chi_square_critical_001(0));
    CHECK_THROWS(chi_square_critical_001(65));
}

TEST_CASE("oracle sanity: known chi-square tail values") {
    // P(X > 3.841459) = 0.05 at df 1; P(X > 2) = e^-1 at df 2.
    CHECK(static_cast<double>(oracle::chi_square_upper_tail(1, 3.841458820694124L)) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(static_cast<double>(oracle::chi_square_upper_tail(2, 2.0L)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("statistic matches the Pearson oracle on random counts") {
    CounterRng rng(21, 0, Purpose::Test);
    for (int i = 0; i < 200; ++i) {
        std::vector<std::uint64_t> counts(2 + rng.below(30));
        for (auto& c : counts) c = rng.below(500);
        counts[0] += 1;
        const auto r = chi_square_uniform(counts);
        const auto want = static_cast<double>(oracle::pearson_uniform(counts));
        CHECK(r.statistic == doctest::Approx(want).epsilon(1e-12));
        CHECK(r.pass == (r.statistic < chi_square_critical_001(counts.size() - 1)));
    }
}

TEST_CASE("degenerate inputs are rejected") {
    CHECK_THROWS(chi_square_uniform(std::vector<std::uint64_t>{}));
    CHECK_THROWS(chi_square_uniform(std::vector<std::uint64_t>{5}));
    CHECK_THROWS(chi_square_uniform(std::vector<std::uint64_t>{0, 0, 0}));
}

TEST_CASE("rate estimates and pooled error") {
    const auto a = estimate_rate(137, 1000);
    CHECK(a.rate == doctest::Approx(0.137));
    CHECK(a.standard_error == doctest::Approx(std::sqrt(0.137 * 0.863 / 1000)));
    const auto b = estimate_rate(100, 1000);
    CHECK(pooled_standard_error(a, b) == doctest::Approx(std::hypot(a.standard_error, b.standard_error)));
    CHECK(estimate_rate(0, 0).standard_error == 0.0);
    CHECK_THROWS(estimate_rate(2, 1));
}

TEST_CASE("uniform counter draws pass the test at the expected rate") {
    int passes = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        CounterRng rng(seed, 0, Purpose::Test);
        std::vector<std::uint64_t> counts(10, 0);
        for (int i = 0; i < 2000; ++i) ++counts[rng.below(10)];
        passes += chi_square_uniform(counts).pass;
    }
    CHECK(passes >= 190);
}
