#include "delottery/adversary.hpp"

#include <algorithm>
#include <cmath>

namespace delottery {

bool attack_predicate(std::span<const std::uint64_t> guesses, const std::set<std::uint64_t>& winners,
                      AttackPredicate predicate) {
    if (predicate == AttackPredicate::Subset) {
        return std::all_of(guesses.begin(), guesses.end(), [&](auto g) { return winners.contains(g); });
    }
    return std::any_of(guesses.begin(), guesses.end(), [&](auto g) { return winners.contains(g); });
}

std::vector<Event> node_attack_filter(std::vector<Event> pow_events, const Event& lottery_event,
                                      std::span<const std::uint64_t> attacker_guesses,
                                      const std::set<std::uint64_t>& winners_if_included,
                                      AttackPredicate predicate) {
    if (attack_predicate(attacker_guesses, winners_if_included, predicate)) {
        pow_events.push_back(lottery_event);
    }
    return pow_events;
}

namespace {

Bytes draw_payload(const Lottery& lottery) {
    Bytes out;
    put_u64(out, lottery.lottery_id());
    return out;
}

std::vector<std::uint64_t> colluder_guesses(const Lottery& lottery, const Address& colluder) {
    const auto* rec = lottery.player(colluder);
    return rec != nullptr ? rec->guesses : std::vector<std::uint64_t>{};
}

// Shared withholding loop. `winners_for` maps a candidate block hash to
// the W that including the draw in that block would produce; `commit`
// applies the draw once a block carrying it is appended.
template <typename WinnersFor, typename Commit>
DrawOutcome mine_draw(Ledger& ledger, Lottery& lottery, const NodeAttacker& attacker,
                      const DrawContext& ctx, WinnersFor winners_for, Commit commit) {
    if (ctx.honest_nodes.empty()) throw ProtocolError(Reason::InvalidArgument, "no honest transaction nodes");
    const auto guesses = colluder_guesses(lottery, attacker.colluder);
    CounterRng rng(ctx.seed, ctx.round_index, Purpose::Proposer);

    DrawOutcome out;
    for (;;) {
        ++out.attempts;
        const bool attacker_proposes =
            out.attempts <= ctx.max_attempts && rng.uniform() < attacker.mining_share;
        const Address proposer =
            attacker_proposes ? attacker.address : ctx.honest_nodes[rng.below(ctx.honest_nodes.size())];

        const Event draw_event = ledger.sign(ctx.caller, EventKind::Draw, draw_payload(lottery));
        std::vector<Event> with_draw{draw_event};
        Block candidate = ledger.prepare_block(proposer, with_draw, ctx.block_target);

        if (attacker_proposes) {
            auto w = winners_for(candidate.hash);
            auto chosen = node_attack_filter({}, draw_event, guesses, w, attacker.predicate);
            if (chosen.empty()) {
                ++out.withheld;
                ledger.mine_block(proposer, {}, ctx.block_target);
                ledger.advance();
                continue;
            }
        }
        const auto& block = ledger.append_block(std::move(candidate));
        out.draw_height = block.height;
        commit(block.hash);
        break;
    }
    if (lottery.winners()) out.winners = *lottery.winners();
    if (const auto* rec = lottery.player(attacker.colluder)) out.attacker_won = rec->winning_shares > 0;
    return out;
}

}  // namespace

DrawOutcome run_naive_mode_round(Ledger& ledger, Lottery& lottery, const NodeAttacker& attacker,
                                 const DrawContext& ctx) {
    if (lottery.config().rng_mode != RngMode::NaiveBlockHash) {
        throw ProtocolError(Reason::WrongMode, "naive round on a commit-reveal lottery");
    }
    const auto& cfg = lottery.config();
    return mine_draw(
        ledger, lottery, attacker, ctx,
        [&](const Hash256& h) { return derive_winners(h, cfg.guess_space_size, cfg.winning_draws); },
        [&](const Hash256& h) { lottery.draw_from_block_hash(h, ledger.now()); });
}

std::set<std::uint64_t> predict_commit_reveal_winners(const Lottery& lottery) {
    const auto& round = lottery.round();
    if (!round) throw ProtocolError(Reason::WrongPhase, "no round opened");
    std::vector<std::int64_t> values;
    for (const auto& [addr, r] : round->reveals()) {
        if (!lottery.banned().contains(addr)) values.push_back(r.value);
    }
    if (values.empty()) return {};
    const auto& cfg = lottery.config();
    return derive_winners(combine_reveals(round->round_id(), values), cfg.guess_space_size, cfg.winning_draws);
}

DrawOutcome run_commit_reveal_mode_round(Ledger& ledger, Lottery& lottery, const NodeAttacker& attacker,
                                         const DrawContext& ctx) {
    if (lottery.config().rng_mode != RngMode::CommitReveal) {
        throw ProtocolError(Reason::WrongMode, "commit-reveal round on a naive lottery");
    }
    const auto predicted = predict_commit_reveal_winners(lottery);
    return mine_draw(
        ledger, lottery, attacker, ctx, [&](const Hash256&) { return predicted; },
        [&](const Hash256&) { lottery.draw(ledger, ledger.now()); });
}

std::vector<SybilIdentity> sybil_spawn(const SybilAttacker& attacker, std::uint64_t n,
                                       std::uint64_t first_salt) {
    if (n > attacker.fake_count) {
        throw ProtocolError(Reason::InvalidArgument, "spawn beyond fake_count");
    }
    std::vector<SybilIdentity> out;
    out.reserve(n);
    const auto base = to_hex(attacker.controller_secret) + "/sybil/";
    for (std::uint64_t i = 0; i < n; ++i) {
        SybilIdentity id;
        id.salt = first_salt + i;
        id.seed_material = base + std::to_string(id.salt);
        id.address = address_of(derive_secret(id.seed_material));
        id.controller = attacker.controller;
        out.push_back(std::move(id));
    }
    return out;
}

Money pow_work_price(const Target& target) {
    return static_cast<Money>(std::ceil(target.expected_attempts()));
}

SybilTrialResult sybil_admission_trial(Ledger& ledger, Lottery& lottery,
                                       std::span<const SybilIdentity> fakes, CertifierPolicy policy,
                                       Money pow_budget, std::uint64_t now) {
    SybilTrialResult result;
    const auto price = pow_work_price(lottery.config().pow_difficulty);
    for (const auto& fake : fakes) {
        if (pow_budget < price) break;
        pow_budget -= price;
        result.spent += price;
        ++result.attempted;

        if (!ledger.contains(fake.address)) ledger.create_account(fake.seed_material, 0);
        auto pow = solve_pow(join_challenge(fake.address, lottery.lottery_id()), lottery.config().pow_difficulty);
        result.hash_attempts += pow.attempts;

        std::set<Address> votes;
        if (policy == CertifierPolicy::Rubberstamp) {
            for (const auto& c : lottery.certifiers()) votes.insert(c);
        }
        try {
            lottery.add_player(ledger, fake.address, pow.proof, votes, now);
            ++result.admitted;
            result.admitted_identities.push_back(fake);
        } catch (const ProtocolError&) {
            // Refused by the certifiers; the work is spent either way.
        }
    }
    return result;
}

}  // namespace delottery
