#include "delottery/chain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace delottery {

Hash256 derive_secret(std::string_view seed_material) { return sha3(seed_material); }

Address address_of(const Hash256& secret) { return Address{sha3(secret)}; }

// ---------------------------------------------------------------- Target

Target Target::pow2(unsigned bits) {
    if (bits > 256) throw std::invalid_argument("target exponent above 256");
    Target t;
    t.be_[32 - bits / 8] = static_cast<std::uint8_t>(1u << (bits % 8));
    return t;
}

Target Target::from_hex(std::string_view hex) {
    if (hex.empty() || hex.size() > 66) throw std::invalid_argument("target hex must be 1..66 digits");
    std::string padded(66 - hex.size(), '0');
    padded.append(hex);
    Target t;
    for (std::size_t i = 0; i < t.be_.size(); ++i) {
        auto byte = std::stoul(padded.substr(2 * i, 2), nullptr, 16);
        t.be_[i] = static_cast<std::uint8_t>(byte);
    }
    if (t.be_[0] > 1 || (t.be_[0] == 1 && std::any_of(t.be_.begin() + 1, t.be_.end(),
                                                       [](auto b) { return b != 0; }))) {
        throw std::invalid_argument("target above 2^256");
    }
    return t;
}

Target Target::divided_by(std::uint64_t divisor) const {
    if (divisor == 0) throw std::invalid_argument("target divisor is zero");
    Target out;
    unsigned __int128 rem = 0;
    for (std::size_t i = 0; i < be_.size(); ++i) {
        rem = (rem << 8) | be_[i];
        out.be_[i] = static_cast<std::uint8_t>(rem / divisor);
        rem %= divisor;
    }
    return out;
}

bool Target::met_by(const Hash256& hash) const {
    if (be_[0] != 0) return true;
    return std::lexicographical_compare(hash.begin(), hash.end(), be_.begin() + 1, be_.end());
}

bool Target::is_zero() const {
    return std::all_of(be_.begin(), be_.end(), [](auto b) { return b == 0; });
}

double Target::expected_attempts() const {
    long double value = 0;
    for (auto b : be_) value = value * 256.0L + b;
    if (value == 0) return INFINITY;
    return static_cast<double>(std::ldexp(1.0L, 256) / value);
}

std::string Target::hex() const { return to_hex(be_); }

// ---------------------------------------------------------------- Events

std::string_view event_kind_name(EventKind kind) {
    switch (kind) {
        case EventKind::Transfer: return "transfer";
        case EventKind::Commit: return "commit";
        case EventKind::Reveal: return "reveal";
        case EventKind::BuyShares: return "buy_shares";
        case EventKind::JoinRequest: return "join_request";
        case EventKind::Certify: return "certify";
        case EventKind::Draw: return "draw";
    }
    return "unknown";
}

Bytes Event::canonical_bytes() const {
    Bytes out;
    out.reserve(1 + 32 + 8 + 8 + payload.size());
    out.push_back(static_cast<std::uint8_t>(kind));
    put_bytes(out, sender.bytes);
    put_u64(out, timestamp);
    put_u64(out, payload.size());
    put_bytes(out, payload);
    return out;
}

Bytes transfer_payload(const Address& to, Money amount) {
    Bytes out;
    put_bytes(out, to.bytes);
    put_u128(out, amount);
    return out;
}

namespace {

struct DecodedTransfer {
    Address to;
    Money amount = 0;
};

std::optional<DecodedTransfer> decode_transfer(const Bytes& payload) {
    if (payload.size() != 48) return std::nullopt;
    DecodedTransfer t;
    std::copy_n(payload.begin(), 32, t.to.bytes.begin());
    for (int i = 15; i >= 0; --i) t.amount = (t.amount << 8) | payload[32 + i];
    return t;
}

Hasher block_prefix(const Block& block) {
    Hasher h;
    h.update(block.prev_hash);
    for (const auto& e : block.events) {
        h.update(e.canonical_bytes());
        h.update(e.auth_tag);
    }
    return h;
}

}  // namespace

Hash256 block_hash(const Block& block) {
    auto h = block_prefix(block);
    h.update_u64(block.nonce);
    h.update(block.miner.bytes);
    return h.finish();
}

// ---------------------------------------------------------------- PoW

namespace {

Hash256 pow_hash(const Hash256& challenge, std::uint64_t nonce) {
    Hasher h;
    h.update(challenge);
    h.update_u64(nonce);
    return h.finish();
}

}  // namespace

PowResult solve_pow(const Hash256& challenge, const Target& target, std::uint64_t start_nonce) {
    if (target.is_zero()) throw std::invalid_argument("solve_pow: zero target");
    PowResult result;
    result.proof.challenge = challenge;
    result.proof.target = target;
    Hasher prefix;
    prefix.update(challenge);
    for (std::uint64_t nonce = start_nonce;; ++nonce) {
        ++result.attempts;
        Hasher h(prefix);
        h.update_u64(nonce);
        if (target.met_by(h.finish())) {
            result.proof.nonce = nonce;
            return result;
        }
    }
}

bool verify_pow(const PowProof& proof) {
    return proof.target.met_by(pow_hash(proof.challenge, proof.nonce));
}

bool verify_chain(std::span<const Block> chain) {
    for (std::size_t i = 0; i < chain.size(); ++i) {
        const auto& b = chain[i];
        if (b.height != i) return false;
        if (block_hash(b) != b.hash) return false;
        if (!b.target.met_by(b.hash)) return false;
        if (i > 0 && b.prev_hash != chain[i - 1].hash) return false;
        if (i == 0 && b.prev_hash != Hash256{}) return false;
    }
    return true;
}

// ---------------------------------------------------------------- Ledger

Ledger::Ledger() {
    Block genesis;
    genesis.hash = block_hash(genesis);
    chain_.push_back(std::move(genesis));
}

const Account& Ledger::create_account(std::string_view seed_material, Money initial_balance,
                                      bool transaction_node) {
    if (seed_material.empty()) {
        throw ProtocolError(Reason::InvalidArgument, "empty seed material");
    }
    Account acct;
    acct.secret = derive_secret(seed_material);
    acct.address = address_of(acct.secret);
    acct.balance = initial_balance;
    acct.is_transaction_node = transaction_node;
    auto [it, inserted] = accounts_.emplace(acct.address, acct);
    if (!inserted) {
        throw ProtocolError(Reason::DuplicateAccount, "address " + acct.address.hex());
    }
    minted_ += initial_balance;
    return it->second;
}

const Account* Ledger::find(const Address& address) const {
    auto it = accounts_.find(address);
    return it == accounts_.end() ? nullptr : &it->second;
}

const Account& Ledger::account(const Address& address) const {
    if (const auto* a = find(address)) return *a;
    throw ProtocolError(Reason::UnknownAccount, address.hex());
}

Account& Ledger::mutable_account(const Address& address) {
    auto it = accounts_.find(address);
    if (it == accounts_.end()) throw ProtocolError(Reason::UnknownAccount, address.hex());
    return it->second;
}

void Ledger::transfer(const Address& from, const Address& to, Money amount) {
    auto& src = mutable_account(from);
    auto& dst = mutable_account(to);
    if (src.balance < amount) {
        throw ProtocolError(Reason::InsufficientBalance,
                            "transfer of " + money_to_string(amount) + " from " + from.hex());
    }
    src.balance -= amount;
    dst.balance += amount;
}

Ledger::EscrowId Ledger::open_escrow() {
    auto id = ++next_escrow_;
    escrows_.emplace(id, 0);
    return id;
}

Money& Ledger::escrow_ref(EscrowId id) {
    auto it = escrows_.find(id);
    if (it == escrows_.end()) {
        throw ProtocolError(Reason::InvalidArgument, "unknown escrow " + std::to_string(id));
    }
    return it->second;
}

Money Ledger::escrow_balance(EscrowId id) const {
    auto it = escrows_.find(id);
    if (it == escrows_.end()) {
        throw ProtocolError(Reason::InvalidArgument, "unknown escrow " + std::to_string(id));
    }
    return it->second;
}

void Ledger::deposit_to_escrow(const Address& from, EscrowId id, Money amount) {
    auto& src = mutable_account(from);
    auto& dst = escrow_ref(id);
    if (src.balance < amount) {
        throw ProtocolError(Reason::InsufficientBalance,
                            "escrow deposit of " + money_to_string(amount) + " from " + from.hex());
    }
    src.balance -= amount;
    dst += amount;
}

void Ledger::pay_from_escrow(EscrowId id, const Address& to, Money amount) {
    auto& src = escrow_ref(id);
    auto& dst = mutable_account(to);
    if (src < amount) {
        throw ProtocolError(Reason::InsufficientBalance, "escrow " + std::to_string(id) + " underfunded");
    }
    src -= amount;
    dst.balance += amount;
}

void Ledger::move_escrow(EscrowId from, EscrowId to, Money amount) {
    auto& src = escrow_ref(from);
    auto& dst = escrow_ref(to);
    if (src < amount) {
        throw ProtocolError(Reason::InsufficientBalance, "escrow " + std::to_string(from) + " underfunded");
    }
    src -= amount;
    dst += amount;
}

void Ledger::escrow_to_fees(EscrowId id, Money amount) {
    auto& src = escrow_ref(id);
    if (src < amount) {
        throw ProtocolError(Reason::InsufficientBalance, "escrow " + std::to_string(id) + " underfunded");
    }
    src -= amount;
    fee_sink_ += amount;
}

void Ledger::charge_fee(const Address& from, Money amount) {
    auto& src = mutable_account(from);
    if (src.balance < amount) {
        throw ProtocolError(Reason::InsufficientBalance, "fee from " + from.hex());
    }
    src.balance -= amount;
    fee_sink_ += amount;
}

Money Ledger::escrow_total() const {
    Money total = 0;
    for (const auto& [id, amount] : escrows_) total += amount;
    return total;
}

Money Ledger::total_money() const {
    Money total = fee_sink_ + escrow_total();
    for (const auto& [addr, acct] : accounts_) total += acct.balance;
    return total;
}

SignedMoney Ledger::conservation_residual() const {
    return static_cast<SignedMoney>(total_money()) - static_cast<SignedMoney>(minted_);
}

Event Ledger::sign(const Address& sender, EventKind kind, Bytes payload) const {
    const auto& acct = account(sender);
    Event e;
    e.kind = kind;
    e.payload = std::move(payload);
    e.sender = sender;
    e.timestamp = clock_;
    Hasher h;
    h.update(acct.secret);
    h.update(e.canonical_bytes());
    e.auth_tag = h.finish();
    return e;
}

bool Ledger::verify(const Event& event) const {
    const auto* acct = find(event.sender);
    if (acct == nullptr) return false;
    Hasher h;
    h.update(acct->secret);
    h.update(event.canonical_bytes());
    return h.finish() == event.auth_tag;
}

void Ledger::validate_events(std::span<const Event> pending) const {
    std::map<Address, Money> scratch;
    auto balance_of = [&](const Address& a) -> Money& {
        auto it = scratch.find(a);
        if (it == scratch.end()) it = scratch.emplace(a, account(a).balance).first;
        return it->second;
    };
    for (const auto& e : pending) {
        if (!verify(e)) {
            throw ProtocolError(Reason::BadAuthTag,
                                std::string(event_kind_name(e.kind)) + " from " + e.sender.hex());
        }
        if (e.kind != EventKind::Transfer) continue;
        auto t = decode_transfer(e.payload);
        if (!t) throw ProtocolError(Reason::InvalidArgument, "malformed transfer payload");
        auto& src = balance_of(e.sender);
        auto& dst = balance_of(t->to);
        if (src < t->amount) {
            throw ProtocolError(Reason::InsufficientBalance, "pending transfer from " + e.sender.hex());
        }
        src -= t->amount;
        dst += t->amount;
    }
}

Block Ledger::prepare_block(const Address& miner, std::span<const Event> pending,
                            const Target& target) const {
    const auto& m = account(miner);
    if (!m.is_transaction_node) throw ProtocolError(Reason::NotTransactionNode, miner.hex());
    if (target.is_zero()) throw ProtocolError(Reason::InvalidArgument, "zero block target");
    const auto& tip = chain_.back();
    if (clock_ <= tip.tick) {
        throw ProtocolError(Reason::ClockOrder, "block already mined at tick " + std::to_string(tip.tick));
    }
    validate_events(pending);

    Block b;
    b.height = tip.height + 1;
    b.prev_hash = tip.hash;
    b.events.assign(pending.begin(), pending.end());
    b.miner = miner;
    b.target = target;
    b.tick = clock_;

    auto prefix = block_prefix(b);
    for (std::uint64_t nonce = 0;; ++nonce) {
        ++pow_attempts_;
        Hasher h(prefix);
        h.update_u64(nonce);
        h.update(miner.bytes);
        auto hash = h.finish();
        if (target.met_by(hash)) {
            b.nonce = nonce;
            b.hash = hash;
            return b;
        }
    }
}

const Block& Ledger::append_block(Block block) {
    const auto& tip = chain_.back();
    if (block.height != tip.height + 1 || block.prev_hash != tip.hash) {
        throw ProtocolError(Reason::BrokenLink, "block does not extend the tip");
    }
    if (block.tick <= tip.tick || block.tick > clock_) {
        throw ProtocolError(Reason::ClockOrder, "block tick " + std::to_string(block.tick));
    }
    if (block_hash(block) != block.hash || !block.target.met_by(block.hash)) {
        throw ProtocolError(Reason::PowFailure, "block hash does not meet target");
    }
    if (!account(block.miner).is_transaction_node) {
        throw ProtocolError(Reason::NotTransactionNode, block.miner.hex());
    }
    validate_events(block.events);
    for (const auto& e : block.events) {
        if (e.kind != EventKind::Transfer) continue;
        auto t = decode_transfer(e.payload);
        transfer(e.sender, t->to, t->amount);
    }
    chain_.push_back(std::move(block));
    return chain_.back();
}

std::string Ledger::dump_chain() const {
    std::ostringstream out;
    for (const auto& b : chain_) {
        out << b.height << ',' << to_hex(b.prev_hash) << ',' << to_hex(b.hash) << ','
            << b.miner.hex() << ',' << b.events.size() << '\n';
    }
    return out.str();
}

}  // namespace delottery
