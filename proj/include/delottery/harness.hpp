#pragma once

#include "delottery/report.hpp"
#include "delottery/scenario.hpp"

#include <string>

namespace delottery {

struct RunOptions {
    // Fault-injection hook for tests: added to the reported residual.
    SignedMoney inject_residual = 0;
};

// Newline-delimited exports collected during a run.
struct RunArtifacts {
    std::string chain_dump;
    std::string round_transcripts;
    std::string settlement_reports;
};

// Runs `scenario.rounds` consecutive lottery events on one ledger.
// Protocol rejections are recorded in the report and never abort the run.
RunReport run_once(const Scenario& scenario, std::uint64_t seed, const RunOptions& options = {},
                   RunArtifacts* artifacts = nullptr);

// Seeds base_seed .. base_seed + n_seeds - 1, run on up to `workers`
// threads (0 = hardware concurrency) and folded in seed order.
AggregateReport run_many(const Scenario& scenario, std::uint64_t n_seeds, const RunOptions& options = {},
                         unsigned workers = 0);

AggregateReport aggregate_runs(const Scenario& scenario, std::vector<RunReport> runs);

// Probability that a holder of `distinct_guesses` distinct values hits a
// uniformly drawn W of `draws` values out of `guess_space`.
double fair_win_probability(double distinct_guesses, std::uint64_t guess_space, std::uint64_t draws);

}  // namespace delottery
