#include "delottery/stats.hpp"

#include "delottery/error.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace delottery {

namespace {

// chi2.ppf(0.99, df) for df = 1..64; regenerate with tools/gen_chi2_table.py.
constexpr std::array<double, 64> kCritical001 = {
    6.634897, 9.210340, 11.344867, 13.276704,
    15.086272, 16.811894, 18.475307, 20.090235,
    21.665994, 23.209251, 24.724970, 26.216967,
    27.688250, 29.141238, 30.577914, 31.999927,
    33.408664, 34.805306, 36.190869, 37.566235,
    38.932173, 40.289360, 41.638398, 42.979820,
    44.314105, 45.641683, 46.962942, 48.278236,
    49.587884, 50.892181, 52.191395, 53.485772,
    54.775540, 56.060909, 57.342073, 58.619215,
    59.892500, 61.162087, 62.428121, 63.690740,
    64.950071, 66.206236, 67.459348, 68.709513,
    69.956832, 71.201400, 72.443307, 73.682639,
    74.919474, 76.153891, 77.385962, 78.615756,
    79.843338, 81.068772, 82.292117, 83.513430,
    84.732766, 85.950176, 87.165711, 88.379419,
    89.591344, 90.801532, 92.010024, 93.216860,
};

}  // namespace

double chi_square_critical_001(std::uint64_t df) {
    if (df < 1 || df > kCritical001.size()) {
        throw ProtocolError(Reason::InvalidArgument, "chi-square df outside [1, 64]: " + std::to_string(df));
    }
    return kCritical001[df - 1];
}

ChiSquareResult chi_square_uniform(std::span<const std::uint64_t> counts) {
    if (counts.size() < 2) throw ProtocolError(Reason::InvalidArgument, "chi-square needs at least 2 categories");
    const auto total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    if (total == 0) throw ProtocolError(Reason::InvalidArgument, "chi-square needs a positive total");

    const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
    ChiSquareResult r;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - expected;
        r.statistic += d * d / expected;
    }
    r.df = counts.size() - 1;
    r.pass = r.statistic < chi_square_critical_001(r.df);
    return r;
}

RateEstimate estimate_rate(std::uint64_t successes, std::uint64_t trials) {
    if (successes > trials) throw std::invalid_argument("more successes than trials");
    RateEstimate e;
    e.successes = successes;
    e.trials = trials;
    if (trials > 0) {
        e.rate = static_cast<double>(successes) / static_cast<double>(trials);
        e.standard_error = std::sqrt(e.rate * (1.0 - e.rate) / static_cast<double>(trials));
    }
    return e;
}

double pooled_standard_error(const RateEstimate& a, const RateEstimate& b) {
    return std::sqrt(a.standard_error * a.standard_error + b.standard_error * b.standard_error);
}

}  // namespace delottery
