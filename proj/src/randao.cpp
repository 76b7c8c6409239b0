#include "delottery/randao.hpp"

#include <sstream>

namespace delottery {

Hash256 commit_hash_of(std::int64_t value) { return sha3(encode_i64(value)); }

Hash256 combine_reveals(std::uint64_t round_id, std::span<const std::int64_t> values) {
    std::uint64_t folded = 0;
    for (auto v : values) folded ^= static_cast<std::uint64_t>(v);
    Hasher h;
    h.update_u64(folded);
    h.update_u64(round_id);
    return h.finish();
}

RngRound RngRound::open(Ledger& ledger, std::uint64_t now, std::uint64_t commit_window,
                        std::uint64_t reveal_window) {
    if (commit_window == 0 || reveal_window == 0) {
        throw ProtocolError(Reason::InvalidArgument, "round windows must be at least one tick");
    }
    RngRound round;
    round.round_id_ = ledger.next_serial();
    round.commit_deadline_ = now + commit_window;
    round.reveal_deadline_ = round.commit_deadline_ + reveal_window;
    round.escrow_ = ledger.open_escrow();
    return round;
}

RoundState RngRound::state(std::uint64_t now) const {
    if (finalized_) return RoundState::Finalized;
    return now <= commit_deadline_ ? RoundState::Committing : RoundState::Revealing;
}

void RngRound::commit(Ledger& ledger, const Address& player, const Hash256& commit_hash,
                      Money deposit, std::uint64_t now) {
    if (finalized_) throw ProtocolError(Reason::AlreadyFinalized, "round " + std::to_string(round_id_));
    if (now > commit_deadline_) {
        throw ProtocolError(Reason::WindowClosed, "commit after deadline " + std::to_string(commit_deadline_));
    }
    const auto& acct = ledger.account(player);
    if (acct.is_transaction_node) {
        throw ProtocolError(Reason::TransactionNodeForbidden, player.hex());
    }
    if (deposit == 0) throw ProtocolError(Reason::InvalidArgument, "zero deposit");
    if (commitments_.contains(player)) throw ProtocolError(Reason::Duplicate, "commit from " + player.hex());
    if (acct.balance < deposit) {
        throw ProtocolError(Reason::InsufficientBalance, "deposit " + money_to_string(deposit));
    }
    ledger.deposit_to_escrow(player, escrow_, deposit);
    commitments_.emplace(player, Commitment{player, commit_hash, deposit, now});
}

void RngRound::reveal(const Address& player, std::int64_t value, std::uint64_t now) {
    if (finalized_) throw ProtocolError(Reason::AlreadyFinalized, "round " + std::to_string(round_id_));
    if (now <= commit_deadline_) {
        throw ProtocolError(Reason::WindowNotOpen, "reveal before commit deadline " +
                                                       std::to_string(commit_deadline_));
    }
    if (now > reveal_deadline_) {
        throw ProtocolError(Reason::WindowClosed, "reveal after deadline " + std::to_string(reveal_deadline_));
    }
    auto it = commitments_.find(player);
    if (it == commitments_.end()) throw ProtocolError(Reason::NoCommitment, player.hex());
    if (commit_hash_of(value) != it->second.commit_hash) {
        throw ProtocolError(Reason::BindingViolation, "reveal does not match commitment of " + player.hex());
    }
    if (reveals_.contains(player)) throw ProtocolError(Reason::Duplicate, "reveal from " + player.hex());
    reveals_.emplace(player, Reveal{player, value});
}

FinalizeResult RngRound::finalize(Ledger& ledger, std::uint64_t now, const FinalizeOptions& options) {
    if (finalized_) throw ProtocolError(Reason::AlreadyFinalized, "round " + std::to_string(round_id_));
    if (now <= reveal_deadline_) {
        throw ProtocolError(Reason::WindowNotOpen, "finalize before reveal deadline " +
                                                       std::to_string(reveal_deadline_));
    }

    std::vector<std::int64_t> values;
    for (const auto& [addr, r] : reveals_) {
        if (!options.excluded.contains(addr)) values.push_back(r.value);
    }

    FinalizeResult result;
    if (values.empty()) {
        result.status = FinalizeStatus::NoEntropy;
        for (const auto& [addr, c] : commitments_) {
            ledger.pay_from_escrow(escrow_, addr, c.deposit);
            result.refunds.emplace(addr, c.deposit);
        }
        finalized_ = true;
        return result;
    }

    for (const auto& [addr, c] : commitments_) {
        bool honest = reveals_.contains(addr) && !options.excluded.contains(addr);
        if (honest) {
            if (options.refund_to) {
                ledger.move_escrow(escrow_, *options.refund_to, c.deposit);
            } else {
                ledger.pay_from_escrow(escrow_, addr, c.deposit);
            }
            result.refunds.emplace(addr, c.deposit);
        } else {
            if (options.forfeit_to) {
                ledger.move_escrow(escrow_, *options.forfeit_to, c.deposit);
            } else {
                ledger.escrow_to_fees(escrow_, c.deposit);
            }
            result.forfeits.emplace(addr, c.deposit);
            result.forfeited += c.deposit;
        }
    }
    output_ = combine_reveals(round_id_, values);
    forfeited_ = result.forfeited;
    result.output = output_;
    finalized_ = true;
    return result;
}

Money RngRound::escrowed() const {
    if (finalized_) return 0;
    Money total = 0;
    for (const auto& [addr, c] : commitments_) total += c.deposit;
    return total;
}

std::string RngRound::transcript() const {
    std::ostringstream out;
    for (const auto& [addr, c] : commitments_) {
        auto r = reveals_.find(addr);
        out << round_id_ << ',' << addr.hex() << ',' << to_hex(c.commit_hash) << ','
            << (r != reveals_.end() ? 1 : 0) << ','
            << (r != reveals_.end() ? std::to_string(r->second.value) : std::string("-")) << ','
            << money_to_string(c.deposit) << '\n';
    }
    return out.str();
}

}  // namespace delottery
