#pragma once

#include "delottery/adversary.hpp"
#include "delottery/lottery.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace delottery {

enum class GuessStrategy { Uniform, Fixed };

// honest: reveals its key. silent: never reveals (deposit forfeited).
// conflicting: reveals, then sends a second, mismatching reveal (banned).
enum class RevealBehavior { Honest, Silent, Conflicting };

struct PlayerSpec {
    std::string seed_material;
    Money initial_balance = 0;
    std::uint64_t shares_to_buy = 1;
    GuessStrategy guess_strategy = GuessStrategy::Uniform;
    std::vector<std::uint64_t> fixed_guesses;
    RevealBehavior reveal = RevealBehavior::Honest;

    bool reveals_honestly() const { return reveal != RevealBehavior::Silent; }
    friend bool operator==(const PlayerSpec&, const PlayerSpec&) = default;
};

enum class AttackerKind { None, Node, Sybil };

struct AttackerSpec {
    AttackerKind kind = AttackerKind::None;
    std::string seed_material = "attacker";
    Money initial_balance = 0;
    // node attack
    double mining_share = 0.0;
    std::string colluder_seed;
    AttackPredicate predicate = AttackPredicate::Intersection;
    // sybil attack
    std::uint64_t fake_count = 0;
    Money budget = 0;  // per lottery event
    CertifierPolicy certifier_policy = CertifierPolicy::HonestRefuse;
};

struct Scenario {
    std::string name;
    LotteryConfig config;
    std::vector<PlayerSpec> players;
    AttackerSpec attacker;
    std::uint64_t rounds = 1;
    std::uint64_t base_seed = 0;
    std::uint64_t transaction_nodes = 3;
    Target block_target = Target::pow2(252);

    // Throws ScenarioError naming the violated field.
    void validate() const;
};

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

std::string_view rng_mode_name(RngMode mode);
std::string_view pool_mode_name(PoolMode mode);
RngMode parse_rng_mode(std::string_view text);
PoolMode parse_pool_mode(std::string_view text);

}  // namespace delottery
