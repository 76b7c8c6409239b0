#pragma once

// Reference computations used by the tests. None of these call into the
// library code they check.

#include <cstdint>
#include <string>
#include <vector>

namespace oracle {

// floor(max(s * 10^(ln(num/den)), f * den / num)) at 512-bit precision,
// returned as a decimal string.
std::string deposit(const std::string& s, std::uint64_t num, std::uint64_t den, const std::string& f);

// Upper tail P(X > x) for X ~ chi-square(df), via the regularized
// incomplete gamma function (series and continued fraction).
long double chi_square_upper_tail(unsigned df, long double x);

// x such that the upper tail equals alpha, by bisection.
long double chi_square_critical(unsigned df, long double alpha);

// Pearson statistic against a uniform expectation, summed in long double.
long double pearson_uniform(const std::vector<std::uint64_t>& counts);

// Win probability of a withholding proposer, by explicit enumeration of
// every proposer/outcome path up to `depth` retries. p: fair chance per
// draw; q: attacker proposal chance.
long double retry_win_probability_enumerated(long double p, long double q, unsigned depth);

// Brute-force pro-rata payouts: share-by-share distribution of `pool`.
std::vector<std::uint64_t> pro_rata(std::uint64_t pool, const std::vector<std::uint64_t>& winning_shares);

}  // namespace oracle
