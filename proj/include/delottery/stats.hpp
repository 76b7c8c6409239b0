#pragma once

#include <cstdint>
#include <span>

namespace delottery {

struct ChiSquareResult {
    double statistic = 0.0;
    bool pass = false;
    std::uint64_t df = 0;

    friend bool operator==(const ChiSquareResult&, const ChiSquareResult&) = default;
};

// Upper-tail critical value at alpha = 0.01 for df in [1, 64].
double chi_square_critical_001(std::uint64_t df);

// Pearson statistic of counts against a uniform expectation. Passes when
// the statistic is below the alpha = 0.01 critical value.
ChiSquareResult chi_square_uniform(std::span<const std::uint64_t> counts);

struct RateEstimate {
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
    double rate = 0.0;
    double standard_error = 0.0;  // sqrt(p(1-p)/n)
};

RateEstimate estimate_rate(std::uint64_t successes, std::uint64_t trials);

// sqrt(se_a^2 + se_b^2) for the difference of two independent rates.
double pooled_standard_error(const RateEstimate& a, const RateEstimate& b);

}  // namespace delottery
