#pragma once

#include "delottery/chain.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace delottery {

struct Commitment {
    Address committer;
    Hash256 commit_hash{};
    Money deposit = 0;
    std::uint64_t committed_at = 0;
};

struct Reveal {
    Address committer;
    std::int64_t value = 0;
};

enum class RoundState { Committing, Revealing, Finalized };

// H of the 8-byte little-endian two's complement encoding of value.
Hash256 commit_hash_of(std::int64_t value);

// H(xor of encoded values ‖ round_id). Order of values is irrelevant.
Hash256 combine_reveals(std::uint64_t round_id, std::span<const std::int64_t> values);

enum class FinalizeStatus { Finalized, NoEntropy };

struct FinalizeOptions {
    // Committers whose reveals are ignored and whose deposits are forfeited.
    std::set<Address> excluded;
    // Destination of forfeited deposits; the fee sink when absent.
    std::optional<Ledger::EscrowId> forfeit_to;
    // Where honest revealers' deposits go; back to the revealer when absent.
    std::optional<Ledger::EscrowId> refund_to;
};

struct FinalizeResult {
    FinalizeStatus status = FinalizeStatus::Finalized;
    std::optional<Hash256> output;
    std::map<Address, Money> refunds;
    std::map<Address, Money> forfeits;
    Money forfeited = 0;
};

// One commit-reveal randomness round. Deposits are held in a ledger escrow
// owned by the round from commit until finalize.
class RngRound {
public:
    static RngRound open(Ledger& ledger, std::uint64_t now, std::uint64_t commit_window,
                         std::uint64_t reveal_window);

    void commit(Ledger& ledger, const Address& player, const Hash256& commit_hash, Money deposit,
                std::uint64_t now);
    void reveal(const Address& player, std::int64_t value, std::uint64_t now);
    FinalizeResult finalize(Ledger& ledger, std::uint64_t now, const FinalizeOptions& options = {});

    RoundState state(std::uint64_t now) const;
    std::uint64_t round_id() const { return round_id_; }
    std::uint64_t commit_deadline() const { return commit_deadline_; }
    std::uint64_t reveal_deadline() const { return reveal_deadline_; }
    Ledger::EscrowId escrow() const { return escrow_; }
    bool finalized() const { return finalized_; }

    const std::map<Address, Commitment>& commitments() const { return commitments_; }
    const std::map<Address, Reveal>& reveals() const { return reveals_; }
    const std::optional<Hash256>& output() const { return output_; }
    Money forfeited() const { return forfeited_; }
    Money escrowed() const;

    // round_id,committer_hex,commit_hash_hex,revealed,value_or_dash,deposit per line.
    std::string transcript() const;

private:
    RngRound() = default;

    std::uint64_t round_id_ = 0;
    std::uint64_t commit_deadline_ = 0;
    std::uint64_t reveal_deadline_ = 0;
    Ledger::EscrowId escrow_ = 0;
    std::map<Address, Commitment> commitments_;
    std::map<Address, Reveal> reveals_;
    std::optional<Hash256> output_;
    Money forfeited_ = 0;
    bool finalized_ = false;
};

}  // namespace delottery
