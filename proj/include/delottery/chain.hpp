#pragma once

#include "delottery/error.hpp"
#include "delottery/hash.hpp"
#include "delottery/money.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace delottery {

struct Address {
    Hash256 bytes{};

    std::string hex() const { return to_hex(bytes); }
    friend auto operator<=>(const Address&, const Address&) = default;
};

struct Account {
    Address address;
    Hash256 secret{};
    Money balance = 0;
    bool is_transaction_node = false;
};

// Secret = H(seed_material); address = H(secret).
Hash256 derive_secret(std::string_view seed_material);
Address address_of(const Hash256& secret);

// PoW / block difficulty: a 257-bit target, so that 2^256 (accept every
// hash) is representable. A hash meets the target when its big-endian
// value is strictly below it.
class Target {
public:
    static Target max() { return pow2(256); }
    static Target pow2(unsigned bits);
    static Target from_hex(std::string_view hex);

    Target divided_by(std::uint64_t divisor) const;
    bool met_by(const Hash256& hash) const;
    bool is_zero() const;

    // 2^256 / target, i.e. mean attempts of a geometric search.
    double expected_attempts() const;
    std::string hex() const;

    friend auto operator<=>(const Target&, const Target&) = default;

private:
    std::array<std::uint8_t, 33> be_{};
};

enum class EventKind : std::uint8_t {
    Transfer = 0,
    Commit = 1,
    Reveal = 2,
    BuyShares = 3,
    JoinRequest = 4,
    Certify = 5,
    Draw = 6,
};

std::string_view event_kind_name(EventKind kind);

struct Event {
    EventKind kind = EventKind::Transfer;
    Bytes payload;
    Address sender;
    Hash256 auth_tag{};
    std::uint64_t timestamp = 0;

    // kind ‖ sender ‖ timestamp ‖ len(payload) ‖ payload
    Bytes canonical_bytes() const;
};

Bytes transfer_payload(const Address& to, Money amount);

struct Block {
    std::uint64_t height = 0;
    Hash256 prev_hash{};
    std::vector<Event> events;
    std::uint64_t nonce = 0;
    Address miner;
    Target target = Target::max();
    Hash256 hash{};
    std::uint64_t tick = 0;
};

// H(prev_hash ‖ event bytes ‖ nonce ‖ miner)
Hash256 block_hash(const Block& block);

struct PowProof {
    Hash256 challenge{};
    std::uint64_t nonce = 0;
    Target target = Target::max();
};

struct PowResult {
    PowProof proof;
    std::uint64_t attempts = 0;
};

// Iterates nonces upward from start_nonce until H(challenge ‖ nonce) < target.
PowResult solve_pow(const Hash256& challenge, const Target& target, std::uint64_t start_nonce = 0);
bool verify_pow(const PowProof& proof);

bool verify_chain(std::span<const Block> chain);

// Ledger of accounts, protocol escrows, fees and the block chain. The only
// way money enters is create_account; every other mutation moves it.
class Ledger {
public:
    using EscrowId = std::uint64_t;

    Ledger();

    const Account& create_account(std::string_view seed_material, Money initial_balance,
                                  bool transaction_node = false);
    const Account& account(const Address& address) const;
    const Account* find(const Address& address) const;
    bool contains(const Address& address) const { return find(address) != nullptr; }
    Money balance(const Address& address) const { return account(address).balance; }
    const std::map<Address, Account>& accounts() const { return accounts_; }

    void transfer(const Address& from, const Address& to, Money amount);

    EscrowId open_escrow();
    Money escrow_balance(EscrowId id) const;
    void deposit_to_escrow(const Address& from, EscrowId id, Money amount);
    void pay_from_escrow(EscrowId id, const Address& to, Money amount);
    void move_escrow(EscrowId from, EscrowId to, Money amount);
    void escrow_to_fees(EscrowId id, Money amount);
    void charge_fee(const Address& from, Money amount);

    Money fee_sink() const { return fee_sink_; }
    Money escrow_total() const;
    Money total_money() const;
    Money minted() const { return minted_; }
    SignedMoney conservation_residual() const;

    std::uint64_t now() const { return clock_; }
    void advance(std::uint64_t ticks = 1) { clock_ += ticks; }
    std::uint64_t next_serial() { return ++serial_; }

    Event sign(const Address& sender, EventKind kind, Bytes payload) const;
    bool verify(const Event& event) const;

    // Builds and solves the next block without touching the ledger. Throws
    // if the miner is not a transaction node, any tag fails, any transfer
    // would overdraw, or a block was already mined this tick.
    Block prepare_block(const Address& miner, std::span<const Event> pending,
                        const Target& target) const;
    const Block& append_block(Block block);
    const Block& mine_block(const Address& miner, std::span<const Event> pending,
                            const Target& target) {
        return append_block(prepare_block(miner, pending, target));
    }

    const std::vector<Block>& chain() const { return chain_; }
    std::uint64_t pow_attempts() const { return pow_attempts_; }

    // height,prev_hash_hex,hash_hex,miner_hex,event_count per line.
    std::string dump_chain() const;

private:
    Account& mutable_account(const Address& address);
    Money& escrow_ref(EscrowId id);
    void validate_events(std::span<const Event> pending) const;

    std::map<Address, Account> accounts_;
    std::map<EscrowId, Money> escrows_;
    std::vector<Block> chain_;
    Money fee_sink_ = 0;
    Money minted_ = 0;
    std::uint64_t clock_ = 0;
    std::uint64_t serial_ = 0;
    EscrowId next_escrow_ = 0;
    mutable std::uint64_t pow_attempts_ = 0;
};

}  // namespace delottery
