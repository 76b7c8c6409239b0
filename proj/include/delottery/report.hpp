#pragma once

#include "delottery/money.hpp"
#include "delottery/stats.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace delottery {

struct Rejection {
    std::uint64_t round = 0;
    std::string op;
    std::string player;  // seed material, or address hex for unnamed identities
    std::string reason;

    friend bool operator==(const Rejection&, const Rejection&) = default;
};

struct RoundRecord {
    std::uint64_t round = 0;
    std::uint64_t lottery_id = 0;
    std::string host;
    std::vector<std::uint64_t> winners;
    std::vector<std::string> winning_players;
    Money pool = 0;
    std::uint64_t winning_shares = 0;
    Money phi = 0;
    bool aborted = false;
    std::uint64_t withheld = 0;
    std::uint64_t draw_height = 0;
    SignedMoney residual = 0;

    friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct PlayerResult {
    std::string seed;
    std::string address;
    Money initial_balance = 0;
    Money final_balance = 0;
    std::uint64_t wins = 0;
    Money total_payout = 0;
    Money total_forfeited = 0;

    friend bool operator==(const PlayerResult&, const PlayerResult&) = default;
};

struct AttackMetrics {
    std::string mode;
    double mining_share = 0.0;
    std::uint64_t attacker_wins = 0;
    std::uint64_t total_rounds = 0;
    std::uint64_t withhold_count = 0;
    std::uint64_t commit_rejections = 0;
    double fair_rate = 0.0;

    friend bool operator==(const AttackMetrics&, const AttackMetrics&) = default;
};

struct SybilAudit {
    std::uint64_t round = 0;
    std::string address;
    std::string controller;
    std::uint64_t salt = 0;

    friend bool operator==(const SybilAudit&, const SybilAudit&) = default;
};

struct SybilMetrics {
    std::uint64_t sybil_admitted = 0;
    Money sybil_spend = 0;
    std::uint64_t attempted = 0;
    std::uint64_t hash_attempts = 0;
    std::vector<SybilAudit> audit;

    friend bool operator==(const SybilMetrics&, const SybilMetrics&) = default;
};

struct Conservation {
    Money minted = 0;
    Money final_total = 0;
    Money fee_sink = 0;
    Money escrow_total = 0;
    SignedMoney residual = 0;

    friend bool operator==(const Conservation&, const Conservation&) = default;
};

struct RunReport {
    std::string scenario_name;
    std::uint64_t seed = 0;
    std::string rng_mode;
    std::string pool_mode;
    std::uint64_t rounds = 0;
    std::vector<PlayerResult> players;
    std::vector<RoundRecord> round_records;
    std::vector<Rejection> rejections;
    Conservation conservation;
    std::optional<ChiSquareResult> chi_square;
    std::optional<AttackMetrics> attack;
    std::optional<SybilMetrics> sybil;
    std::vector<std::string> notes;
    std::uint64_t chain_height = 0;
    std::string chain_tip;
    bool chain_valid = false;
    double elapsed_seconds = 0.0;  // never compared, emitted only on request

    SignedMoney conservation_residual() const { return conservation.residual; }
    std::vector<std::uint64_t> winner_histogram() const;
    bool operator==(const RunReport& other) const;
};

struct PlayerAggregate {
    std::string seed;
    std::string address;
    std::uint64_t wins = 0;
    Money final_balance_sum = 0;

    friend bool operator==(const PlayerAggregate&, const PlayerAggregate&) = default;
};

struct AttackAggregate {
    std::string mode;
    double mining_share = 0.0;
    std::uint64_t attacker_wins = 0;
    std::uint64_t total_rounds = 0;
    std::uint64_t withhold_count = 0;
    double rate = 0.0;
    double standard_error = 0.0;
    double fair_rate = 0.0;
    double amplification = 0.0;  // rate / fair_rate

    friend bool operator==(const AttackAggregate&, const AttackAggregate&) = default;
};

struct AggregateReport {
    std::string scenario_name;
    std::uint64_t base_seed = 0;
    std::uint64_t n_seeds = 0;
    std::vector<RunReport> runs;
    std::vector<PlayerAggregate> players;
    bool conservation_ok = false;
    bool chain_ok = false;
    bool pass = false;
    std::optional<ChiSquareResult> chi_square;
    std::uint64_t chi_square_passing_runs = 0;
    std::optional<AttackAggregate> attack;
    std::uint64_t sybil_admitted = 0;
    Money sybil_spend = 0;

    friend bool operator==(const AggregateReport&, const AggregateReport&) = default;
};

enum class ReportFormat { Json, Csv };

ReportFormat parse_report_format(std::string_view text);

std::string report_to_json(const RunReport& report, bool include_timing = false);
std::string report_to_json(const AggregateReport& report, bool include_timing = false);
RunReport run_report_from_json(std::string_view json);
AggregateReport aggregate_report_from_json(std::string_view json);

// One header line plus one row per player.
std::string report_to_csv(const RunReport& report);
std::string report_to_csv(const AggregateReport& report);

// Writes the report; throws std::runtime_error naming the path on failure.
void emit_report(const RunReport& report, const std::filesystem::path& out, ReportFormat format,
                 bool include_timing = false);
void emit_report(const AggregateReport& report, const std::filesystem::path& out, ReportFormat format,
                 bool include_timing = false);

struct VerifyResult {
    bool ok = true;
    std::vector<std::string> failures;
};

// Re-checks a JSON aggregate report: schema, zero residuals, totals that
// add up, recomputed chi-square statistics and chain validity flags.
VerifyResult verify_report_json(std::string_view json);

}  // namespace delottery
