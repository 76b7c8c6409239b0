#pragma once

#include "delottery/chain.hpp"
#include "delottery/lottery.hpp"
#include "delottery/rng.hpp"

#include <set>
#include <span>
#include <string>
#include <vector>

namespace delottery {

// How a withholding node decides whether a draw is worth publishing.
// Intersection: any attacker guess wins. Subset: every guess wins.
enum class AttackPredicate { Intersection, Subset };

bool attack_predicate(std::span<const std::uint64_t> guesses, const std::set<std::uint64_t>& winners,
                      AttackPredicate predicate = AttackPredicate::Intersection);

// The block-withholding move: include the lottery event only when the
// outcome it fixes pays the attacker.
std::vector<Event> node_attack_filter(std::vector<Event> pow_events, const Event& lottery_event,
                                      std::span<const std::uint64_t> attacker_guesses,
                                      const std::set<std::uint64_t>& winners_if_included,
                                      AttackPredicate predicate = AttackPredicate::Intersection);

struct NodeAttacker {
    Address address;  // transaction node
    Address colluder; // regular player betting on the attacker's behalf
    double mining_share = 0.0;
    AttackPredicate predicate = AttackPredicate::Intersection;
};

struct DrawContext {
    std::span<const Address> honest_nodes;
    Address caller;  // player that submits the draw event
    Target block_target = Target::pow2(252);
    std::uint64_t seed = 0;
    std::uint64_t round_index = 0;
    // Give up withholding after this many ticks; the next block is honest.
    std::uint64_t max_attempts = 10'000;
};

struct DrawOutcome {
    std::set<std::uint64_t> winners;
    bool attacker_won = false;
    std::uint64_t withheld = 0;
    std::uint64_t attempts = 0;
    std::uint64_t draw_height = 0;
};

// Naive mode: W comes from the hash of the block that carries the draw
// event. Each tick the attacker proposes with probability mining_share and
// withholds unfavourable draws; an honest proposer always includes it.
// The lottery must be in Buffer with its reveal deadline passed.
DrawOutcome run_naive_mode_round(Ledger& ledger, Lottery& lottery, const NodeAttacker& attacker,
                                 const DrawContext& ctx);

// Commit-reveal mode: the attacker may still withhold the draw block, but
// W is fixed by the finalized round, so withholding only costs ticks.
DrawOutcome run_commit_reveal_mode_round(Ledger& ledger, Lottery& lottery, const NodeAttacker& attacker,
                                         const DrawContext& ctx);

// W as anyone can predict it from the public reveals before the draw.
std::set<std::uint64_t> predict_commit_reveal_winners(const Lottery& lottery);

struct SybilAttacker {
    Address controller;
    Hash256 controller_secret{};
    std::uint64_t fake_count = 0;
    Money budget = 0;
};

struct SybilIdentity {
    std::string seed_material;
    Address address;
    Address controller;
    std::uint64_t salt = 0;
};

// Seed material of fake i is hex(controller_secret) + "/sybil/" + salt.
std::vector<SybilIdentity> sybil_spawn(const SybilAttacker& attacker, std::uint64_t n,
                                       std::uint64_t first_salt = 0);

enum class CertifierPolicy { HonestRefuse, Rubberstamp };

struct SybilTrialResult {
    std::uint64_t attempted = 0;
    std::uint64_t admitted = 0;
    Money spent = 0;                 // priced at expected attempts per admission
    std::uint64_t hash_attempts = 0; // actually performed
    std::vector<SybilIdentity> admitted_identities;
};

// Per-attempt work price: ceil(2^256 / target), one unit per expected hash.
Money pow_work_price(const Target& target);

// Registers each fake (zero balance) if needed, pays the work price from
// pow_budget, solves the join PoW and asks the certifiers. HonestRefuse
// certifiers never vote for a fake; Rubberstamp certifiers all do.
SybilTrialResult sybil_admission_trial(Ledger& ledger, Lottery& lottery,
                                       std::span<const SybilIdentity> fakes, CertifierPolicy policy,
                                       Money pow_budget, std::uint64_t now);

}  // namespace delottery
