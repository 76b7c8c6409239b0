#pragma once

#include "delottery/chain.hpp"
#include "delottery/randao.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace delottery {

enum class Phase { Deployed, Enrolling, KeyUpload, Betting, Buffer, Drawn, Settled };
enum class PoolMode { Literal, ConservationConsistent };
enum class RngMode { NaiveBlockHash, CommitReveal };

// Which certifier leaves A when it is full. LatestJoined is the rule as
// written for player admission; Fifo retires the oldest instead.
enum class EvictionPolicy { LatestJoined, Fifo };

std::string_view phase_name(Phase phase);

inline constexpr Money kFeeRatioDenominator = 1'000'000'000'000;

struct LotteryConfig {
    Money share_price = 10'000'000'000'000;
    Rational security_factor{3, 2};
    std::uint64_t cert_cap = 5;
    std::uint64_t bet_duration = 2;
    std::uint64_t buffer_duration = 2;
    std::uint64_t guess_space_size = 10;
    std::uint64_t winning_draws = 1;
    PoolMode pool_mode = PoolMode::ConservationConsistent;
    Target pow_difficulty = Target::pow2(252);
    EvictionPolicy eviction = EvictionPolicy::LatestJoined;
    RngMode rng_mode = RngMode::CommitReveal;

    // Throws ProtocolError(InvalidConfig) naming the offending field.
    void validate() const;
};

// floor(max(s * 10^(ln k), f / k)) with 1 < k < 2 enforced.
Money compute_deposit(Money share_price, const Rational& security_factor, Money player_balance);

// Same formula without the bound on k (k > 0 only).
Money deposit_formula(Money share_price, const Rational& security_factor, Money player_balance);

// Per-share fee paid to the chain: share_price / 10^12, floored.
constexpr Money tx_fee(Money share_price) { return share_price / kFeeRatioDenominator; }

// Distinct values in [0, guess_space) from H(seed ‖ counter) mod guess_space,
// counter = 0, 1, ..., skipping repeats until `draws` values are collected.
std::set<std::uint64_t> derive_winners(const Hash256& seed, std::uint64_t guess_space,
                                       std::uint64_t draws);

// The PoW challenge a candidate must solve to join a given lottery.
Hash256 join_challenge(const Address& candidate, std::uint64_t lottery_id);

struct PlayerRecord {
    Address address;
    std::vector<std::uint64_t> guesses;
    Money deposit = 0;
    Money stake_paid = 0;
    bool auth = false;
    std::uint64_t joined_at = 0;
    std::uint64_t join_seq = 0;
    bool banned = false;
    bool key_uploaded = false;
    bool revealed = false;
    bool deposit_forfeited = false;
    Money deposit_refunded = 0;
    std::uint64_t winning_shares = 0;
    Money payout = 0;
};

struct SettlementLine {
    Address address;
    std::uint64_t shares = 0;
    std::uint64_t winning_shares = 0;
    Money payout = 0;
    Money deposit_refunded = 0;
    Money final_balance = 0;
};

struct SettlementSummary {
    Money pool = 0;
    std::uint64_t winning_share_count = 0;  // N_w
    Money paid_out = 0;
    Money remainder_to_fees = 0;
    Money stakes_refunded = 0;
    Money to_fees = 0;
    bool aborted = false;  // no entropy
};

// One lottery event. Every operation after deploy takes the caller's
// address like any other player; the deploying host is kept for audit only.
class Lottery {
public:
    static Lottery deploy(Ledger& ledger, const Address& host, LotteryConfig config,
                          std::uint64_t now);

    void add_player(Ledger& ledger, const Address& candidate, const PowProof& pow,
                    const std::set<Address>& cert_votes, std::uint64_t now);
    void begin_key_upload(Ledger& ledger, std::uint64_t now);
    void upload_key(Ledger& ledger, const Address& player, std::int64_t key, std::uint64_t now);
    void open_betting(std::uint64_t now);
    void buy_shares(Ledger& ledger, const Address& player, std::span<const std::uint64_t> guesses,
                    std::uint64_t now);
    void enter_buffer(std::uint64_t now);

    // A BindingViolation bans the sender before the error propagates.
    void reveal_key(const Address& player, std::int64_t key, std::uint64_t now);

    void draw(Ledger& ledger, std::uint64_t now);
    void draw_from_block_hash(const Hash256& block_hash, std::uint64_t now);
    Money prize_pool() const;
    SettlementSummary settle(Ledger& ledger);

    Phase phase() const { return phase_; }
    const std::vector<Phase>& phase_history() const { return history_; }
    const LotteryConfig& config() const { return config_; }
    const Address& host() const { return host_; }
    std::uint64_t lottery_id() const { return lottery_id_; }
    std::uint64_t deployed_at() const { return deployed_at_; }
    Ledger::EscrowId escrow() const { return escrow_; }

    const std::map<Address, PlayerRecord>& players() const { return players_; }
    const PlayerRecord* player(const Address& address) const;
    std::vector<Address> certifiers() const;
    const std::set<Address>& banned() const { return banned_; }
    bool is_certifier(const Address& address) const;
    Money phi() const { return phi_; }
    Money stake_pool() const { return stake_pool_; }
    Money consumed_deposits() const { return consumed_deposits_; }
    const std::optional<RngRound>& round() const { return round_; }
    const std::optional<std::set<std::uint64_t>>& winners() const { return winners_; }
    const std::optional<FinalizeResult>& finalize_result() const { return finalize_result_; }
    std::uint64_t betting_close() const;
    std::uint64_t reveal_deadline() const;
    const std::optional<SettlementSummary>& settlement() const { return settlement_; }

    // address_hex,shares,winning_shares,payout,deposit_refunded,final_balance per player.
    std::vector<SettlementLine> settlement_lines(const Ledger& ledger) const;
    std::string settlement_report(const Ledger& ledger) const;

private:
    Lottery() = default;

    void require_phase(Phase expected, std::string_view op) const;
    void transition(Phase next);
    PlayerRecord& live_player(const Address& address, std::string_view op);
    void ban(const Address& address);
    void score_winners();
    void refund_all(Ledger& ledger, SettlementSummary& summary);

    LotteryConfig config_;
    Phase phase_ = Phase::Deployed;
    std::vector<Phase> history_;
    Address host_;
    std::uint64_t lottery_id_ = 0;
    std::uint64_t deployed_at_ = 0;
    std::uint64_t next_join_seq_ = 0;
    Ledger::EscrowId escrow_ = 0;

    std::map<Address, PlayerRecord> players_;
    std::set<Address> certifiers_;
    std::set<Address> banned_;
    Money phi_ = 0;
    Money stake_pool_ = 0;
    Money consumed_deposits_ = 0;

    std::optional<RngRound> round_;
    std::optional<FinalizeResult> finalize_result_;
    std::optional<std::set<std::uint64_t>> winners_;
    std::optional<SettlementSummary> settlement_;
};

}  // namespace delottery
