#include "delottery/lottery.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace delottery {

std::string_view phase_name(Phase phase) {
    switch (phase) {
        case Phase::Deployed: return "Deployed";
        case Phase::Enrolling: return "Enrolling";
        case Phase::KeyUpload: return "KeyUpload";
        case Phase::Betting: return "Betting";
        case Phase::Buffer: return "Buffer";
        case Phase::Drawn: return "Drawn";
        case Phase::Settled: return "Settled";
    }
    return "Unknown";
}

void LotteryConfig::validate() const {
    auto bad = [](const std::string& field, const std::string& why) {
        return ProtocolError(Reason::InvalidConfig, field + " " + why);
    };
    const auto& k = security_factor;
    if (k.den == 0 || !(k.num > k.den) || !(k.num < 2 * k.den)) {
        throw bad("security_factor", "must lie in the open interval (1, 2), got " + k.to_string());
    }
    if (cert_cap < 1) throw bad("cert_cap", "must be at least 1");
    if (guess_space_size < 1) throw bad("guess_space_size", "must be at least 1");
    if (winning_draws < 1 || winning_draws > guess_space_size) {
        throw bad("winning_draws", "must lie in [1, guess_space_size]");
    }
    if (bet_duration < 1) throw bad("bet_duration", "must be at least 1 tick");
    if (buffer_duration < 1) throw bad("buffer_duration", "must be at least 1 tick");
    if (pow_difficulty.is_zero()) throw bad("pow_difficulty", "must be positive");
}

Money deposit_formula(Money share_price, const Rational& k, Money player_balance) {
    if (k.num == 0 || k.den == 0) throw ProtocolError(Reason::InvalidArgument, "security factor must be positive");
    const long double ln_k = std::log(static_cast<long double>(k.num)) -
                             std::log(static_cast<long double>(k.den));
    const long double scaled = static_cast<long double>(share_price) * std::pow(10.0L, ln_k);
    const auto price_term = static_cast<Money>(std::floor(scaled));

    // floor(f * den / num) without overflowing the product.
    const Money num = k.num;
    const Money den = k.den;
    const Money balance_term = (player_balance / num) * den + (player_balance % num) * den / num;
    return std::max(price_term, balance_term);
}

Money compute_deposit(Money share_price, const Rational& k, Money player_balance) {
    if (!(k.num > k.den) || !(k.num < 2 * k.den)) {
        throw ProtocolError(Reason::InvalidArgument, "security factor outside (1, 2): " + k.to_string());
    }
    return deposit_formula(share_price, k, player_balance);
}

std::set<std::uint64_t> derive_winners(const Hash256& seed, std::uint64_t guess_space,
                                       std::uint64_t draws) {
    if (guess_space == 0 || draws == 0 || draws > guess_space) {
        throw ProtocolError(Reason::InvalidArgument, "winning draws must lie in [1, guess space]");
    }
    std::set<std::uint64_t> winners;
    Hasher prefix;
    prefix.update(seed);
    for (std::uint64_t counter = 0; winners.size() < draws; ++counter) {
        Hasher h(prefix);
        h.update_u64(counter);
        winners.insert(mod_be(h.finish(), guess_space));
    }
    return winners;
}

Hash256 join_challenge(const Address& candidate, std::uint64_t lottery_id) {
    Hasher h;
    h.update("delottery/join");
    h.update(candidate.bytes);
    h.update_u64(lottery_id);
    return h.finish();
}

Lottery Lottery::deploy(Ledger& ledger, const Address& host, LotteryConfig config,
                        std::uint64_t now) {
    config.validate();
    ledger.account(host);
    Lottery lot;
    lot.config_ = std::move(config);
    lot.history_.push_back(Phase::Deployed);
    lot.host_ = host;
    lot.lottery_id_ = ledger.next_serial();
    lot.deployed_at_ = now;
    lot.escrow_ = ledger.open_escrow();

    PlayerRecord rec;
    rec.address = host;
    rec.auth = true;
    rec.joined_at = now;
    rec.join_seq = lot.next_join_seq_++;
    lot.players_.emplace(host, rec);
    lot.certifiers_.insert(host);
    lot.transition(Phase::Enrolling);
    return lot;
}

void Lottery::require_phase(Phase expected, std::string_view op) const {
    if (phase_ != expected) {
        throw ProtocolError(Reason::WrongPhase, std::string(op) + " requires " +
                                                    std::string(phase_name(expected)) + ", lottery is " +
                                                    std::string(phase_name(phase_)));
    }
}

void Lottery::transition(Phase next) {
    phase_ = next;
    history_.push_back(next);
}

const PlayerRecord* Lottery::player(const Address& address) const {
    auto it = players_.find(address);
    return it == players_.end() ? nullptr : &it->second;
}

PlayerRecord& Lottery::live_player(const Address& address, std::string_view op) {
    auto it = players_.find(address);
    if (it == players_.end()) throw ProtocolError(Reason::NotPlayer, std::string(op) + " by " + address.hex());
    if (it->second.banned) throw ProtocolError(Reason::Banned, std::string(op) + " by " + address.hex());
    return it->second;
}

bool Lottery::is_certifier(const Address& address) const { return certifiers_.contains(address); }

std::vector<Address> Lottery::certifiers() const {
    std::vector<Address> out(certifiers_.begin(), certifiers_.end());
    std::sort(out.begin(), out.end(), [&](const Address& a, const Address& b) {
        return players_.at(a).join_seq < players_.at(b).join_seq;
    });
    return out;
}

void Lottery::add_player(Ledger& ledger, const Address& candidate, const PowProof& pow,
                         const std::set<Address>& cert_votes, std::uint64_t now) {
    require_phase(Phase::Enrolling, "add_player");
    if (players_.contains(candidate)) throw ProtocolError(Reason::Duplicate, "join by " + candidate.hex());
    ledger.account(candidate);

    // The proof must be bound to this candidate and at least as hard as configured.
    if (pow.challenge != join_challenge(candidate, lottery_id_) || pow.target > config_.pow_difficulty ||
        !verify_pow(pow)) {
        throw ProtocolError(Reason::PowFailure, "candidate " + candidate.hex());
    }
    for (const auto& c : certifiers_) {
        if (!cert_votes.contains(c)) {
            throw ProtocolError(Reason::CertificationFailed, "certifier " + c.hex() + " did not approve");
        }
    }

    if (certifiers_.size() >= config_.cert_cap) {
        auto key = [&](const Address& a) {
            const auto& p = players_.at(a);
            return std::pair{p.joined_at, p.join_seq};
        };
        auto evict = *certifiers_.begin();
        for (const auto& c : certifiers_) {
            bool later = key(c) > key(evict);
            if (config_.eviction == EvictionPolicy::LatestJoined ? later : key(c) < key(evict)) evict = c;
        }
        certifiers_.erase(evict);
        players_.at(evict).auth = false;
    }

    PlayerRecord rec;
    rec.address = candidate;
    rec.auth = true;
    rec.joined_at = now;
    rec.join_seq = next_join_seq_++;
    players_.emplace(candidate, rec);
    certifiers_.insert(candidate);
}

void Lottery::begin_key_upload(Ledger& ledger, std::uint64_t now) {
    require_phase(Phase::Enrolling, "begin_key_upload");
    // The reveal window spans Betting and Buffer; reveals are gated to Buffer.
    round_ = RngRound::open(ledger, now, config_.bet_duration,
                            config_.bet_duration + config_.buffer_duration);
    transition(Phase::KeyUpload);
}

void Lottery::upload_key(Ledger& ledger, const Address& player, std::int64_t key, std::uint64_t now) {
    require_phase(Phase::KeyUpload, "upload_key");
    if (config_.rng_mode != RngMode::CommitReveal) {
        throw ProtocolError(Reason::WrongMode, "key upload needs commit-reveal mode");
    }
    auto& rec = live_player(player, "upload_key");
    const auto deposit = compute_deposit(config_.share_price, config_.security_factor, ledger.balance(player));
    round_->commit(ledger, player, commit_hash_of(key), deposit, now);
    rec.deposit = deposit;
    rec.key_uploaded = true;
}

std::uint64_t Lottery::betting_close() const {
    if (!round_) throw ProtocolError(Reason::WrongPhase, "no round opened");
    return round_->commit_deadline() + config_.bet_duration;
}

std::uint64_t Lottery::reveal_deadline() const {
    if (!round_) throw ProtocolError(Reason::WrongPhase, "no round opened");
    return round_->reveal_deadline();
}

void Lottery::open_betting(std::uint64_t now) {
    require_phase(Phase::KeyUpload, "open_betting");
    if (now <= round_->commit_deadline()) {
        throw ProtocolError(Reason::WindowNotOpen, "key upload open until " +
                                                       std::to_string(round_->commit_deadline()));
    }
    transition(Phase::Betting);
}

void Lottery::buy_shares(Ledger& ledger, const Address& player, std::span<const std::uint64_t> guesses,
                         std::uint64_t now) {
    require_phase(Phase::Betting, "buy_shares");
    if (now > betting_close()) {
        throw ProtocolError(Reason::WindowClosed, "betting closed at " + std::to_string(betting_close()));
    }
    auto& rec = live_player(player, "buy_shares");
    for (auto g : guesses) {
        if (g >= config_.guess_space_size) {
            throw ProtocolError(Reason::GuessOutOfRange, std::to_string(g));
        }
    }
    if (guesses.empty()) return;

    const Money m = guesses.size();
    const Money fee = m * tx_fee(config_.share_price);
    const Money stake = m * config_.share_price;
    if (ledger.balance(player) < fee + stake) {
        throw ProtocolError(Reason::InsufficientBalance, "buying " + money_to_string(m) + " shares");
    }
    ledger.charge_fee(player, fee);
    ledger.deposit_to_escrow(player, escrow_, stake);
    stake_pool_ += stake;
    rec.stake_paid += stake;
    rec.guesses.insert(rec.guesses.end(), guesses.begin(), guesses.end());
}

void Lottery::enter_buffer(std::uint64_t now) {
    require_phase(Phase::Betting, "enter_buffer");
    if (now < betting_close()) {
        throw ProtocolError(Reason::WindowNotOpen, "betting open until " + std::to_string(betting_close()));
    }
    transition(Phase::Buffer);
}

void Lottery::ban(const Address& address) {
    auto& rec = players_.at(address);
    if (rec.banned) return;
    rec.banned = true;
    rec.auth = false;
    rec.guesses.clear();
    stake_pool_ -= rec.stake_paid;
    phi_ += rec.stake_paid;
    banned_.insert(address);
    certifiers_.erase(address);
}

void Lottery::reveal_key(const Address& player, std::int64_t key, std::uint64_t now) {
    require_phase(Phase::Buffer, "reveal_key");
    auto& rec = live_player(player, "reveal_key");
    try {
        round_->reveal(player, key, now);
    } catch (const ProtocolError& e) {
        if (e.reason() == Reason::BindingViolation) ban(player);
        throw;
    }
    rec.revealed = true;
}

void Lottery::score_winners() {
    for (auto& [addr, rec] : players_) {
        rec.winning_shares = 0;
        if (rec.banned) continue;
        for (auto g : rec.guesses) {
            if (winners_->contains(g)) ++rec.winning_shares;
        }
    }
}

void Lottery::refund_all(Ledger& ledger, SettlementSummary& summary) {
    for (auto& [addr, rec] : players_) {
        if (rec.banned || rec.stake_paid == 0) continue;
        ledger.pay_from_escrow(escrow_, addr, rec.stake_paid);
        summary.stakes_refunded += rec.stake_paid;
        stake_pool_ -= rec.stake_paid;
    }
    ledger.escrow_to_fees(escrow_, phi_);
    summary.to_fees += phi_;
}

void Lottery::draw(Ledger& ledger, std::uint64_t now) {
    require_phase(Phase::Buffer, "draw");
    if (config_.rng_mode != RngMode::CommitReveal) {
        throw ProtocolError(Reason::WrongMode, "draw from keys needs commit-reveal mode");
    }
    if (now <= round_->reveal_deadline()) {
        throw ProtocolError(Reason::WindowNotOpen, "reveals open until " + std::to_string(round_->reveal_deadline()));
    }

    FinalizeOptions opts;
    opts.excluded = banned_;
    opts.forfeit_to = escrow_;
    if (config_.pool_mode == PoolMode::Literal) opts.refund_to = escrow_;
    auto result = round_->finalize(ledger, now, opts);

    if (result.status == FinalizeStatus::NoEntropy) {
        for (const auto& [addr, amount] : result.refunds) {
            if (auto it = players_.find(addr); it != players_.end()) it->second.deposit_refunded = amount;
        }
        finalize_result_ = std::move(result);
        SettlementSummary summary;
        summary.aborted = true;
        refund_all(ledger, summary);
        phi_ = 0;
        settlement_ = summary;
        // Pass through Drawn (with no W) so the phase order has no skips.
        transition(Phase::Drawn);
        transition(Phase::Settled);
        return;
    }

    for (const auto& [addr, amount] : result.forfeits) {
        players_.at(addr).deposit_forfeited = true;
        phi_ += amount;
    }
    for (const auto& [addr, amount] : result.refunds) {
        if (config_.pool_mode == PoolMode::Literal) {
            consumed_deposits_ += amount;
        } else {
            players_.at(addr).deposit_refunded = amount;
        }
    }
    winners_ = derive_winners(*result.output, config_.guess_space_size, config_.winning_draws);
    finalize_result_ = std::move(result);
    score_winners();
    transition(Phase::Drawn);
}

void Lottery::draw_from_block_hash(const Hash256& block_hash, std::uint64_t now) {
    require_phase(Phase::Buffer, "draw_from_block_hash");
    if (config_.rng_mode != RngMode::NaiveBlockHash) {
        throw ProtocolError(Reason::WrongMode, "block-hash draw needs naive mode");
    }
    if (now <= round_->reveal_deadline()) {
        throw ProtocolError(Reason::WindowNotOpen, "buffer open until " + std::to_string(round_->reveal_deadline()));
    }
    winners_ = derive_winners(block_hash, config_.guess_space_size, config_.winning_draws);
    score_winners();
    transition(Phase::Drawn);
}

Money Lottery::prize_pool() const {
    if (phase_ != Phase::Drawn && phase_ != Phase::Settled) {
        throw ProtocolError(Reason::WrongPhase, "prize pool is fixed at the draw");
    }
    if (config_.pool_mode == PoolMode::Literal) return phi_ + consumed_deposits_;
    return phi_ + stake_pool_;
}

SettlementSummary Lottery::settle(Ledger& ledger) {
    require_phase(Phase::Drawn, "settle");
    SettlementSummary summary;
    summary.pool = prize_pool();
    for (const auto& [addr, rec] : players_) summary.winning_share_count += rec.winning_shares;
    const bool literal = config_.pool_mode == PoolMode::Literal;

    if (summary.winning_share_count > 0) {
        const Money nw = summary.winning_share_count;
        for (auto& [addr, rec] : players_) {
            if (rec.winning_shares == 0) continue;
            rec.payout = static_cast<Money>(rec.winning_shares) * summary.pool / nw;
            ledger.pay_from_escrow(escrow_, addr, rec.payout);
            summary.paid_out += rec.payout;
        }
        summary.remainder_to_fees = summary.pool - summary.paid_out;
        ledger.escrow_to_fees(escrow_, summary.remainder_to_fees);
        summary.to_fees += summary.remainder_to_fees;
        if (literal) {
            ledger.escrow_to_fees(escrow_, stake_pool_);
            summary.to_fees += stake_pool_;
        }
    } else if (literal) {
        const Money everything = summary.pool + stake_pool_;
        ledger.escrow_to_fees(escrow_, everything);
        summary.to_fees += everything;
    } else {
        refund_all(ledger, summary);
    }

    phi_ = 0;
    consumed_deposits_ = 0;
    stake_pool_ = 0;
    settlement_ = summary;
    transition(Phase::Settled);
    return summary;
}

std::vector<SettlementLine> Lottery::settlement_lines(const Ledger& ledger) const {
    std::vector<SettlementLine> lines;
    for (const auto& [addr, rec] : players_) {
        SettlementLine l;
        l.address = addr;
        l.shares = rec.guesses.size();
        l.winning_shares = rec.winning_shares;
        l.payout = rec.payout;
        l.deposit_refunded = rec.deposit_refunded;
        l.final_balance = ledger.balance(addr);
        lines.push_back(l);
    }
    return lines;
}

std::string Lottery::settlement_report(const Ledger& ledger) const {
    std::ostringstream out;
    for (const auto& l : settlement_lines(ledger)) {
        out << l.address.hex() << ',' << l.shares << ',' << l.winning_shares << ','
            << money_to_string(l.payout) << ',' << money_to_string(l.deposit_refunded) << ','
            << money_to_string(l.final_balance) << '\n';
    }
    return out.str();
}

}  // namespace delottery
