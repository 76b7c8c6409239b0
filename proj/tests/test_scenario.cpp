#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "delottery/scenario.hpp"

#include <filesystem>

using namespace delottery;

namespace {

std::string load_error(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ScenarioError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("minimal file fills defaults") {
    const auto sc = parse_scenario("[player]\nseed = solo\n");
    CHECK(sc.name == "unnamed");
    CHECK(sc.rounds == 1);
    CHECK(sc.players.size() == 1);
    CHECK(sc.players[0].seed_material == "solo");
    CHECK(sc.players[0].shares_to_buy == 1);
    CHECK(sc.players[0].guess_strategy == GuessStrategy::Uniform);
    CHECK(sc.config.security_factor == Rational{3, 2});
    CHECK(sc.config.pool_mode == PoolMode::ConservationConsistent);
    CHECK(sc.config.rng_mode == RngMode::CommitReveal);
    CHECK(sc.attacker.kind == AttackerKind::None);
}

TEST_CASE("load errors name the problem") {
    CHECK(load_error("security_factor = 2.5\n[player]\nseed = a\n").find("security_factor") != std::string::npos);
    CHECK(load_error("name = x\n").find("players") != std::string::npos);
    CHECK(load_error("name = x\nbogus = 1\n").find("line 2") != std::string::npos);
    CHECK(load_error("[player]\nseed = a\nshares = many\n").find("line 3") != std::string::npos);
    CHECK(load_error("[player]\nseed = a\n[player]\nseed = a\n").find("duplicate") != std::string::npos);
    CHECK(load_error("guess_space = 4\n[player]\nseed = a\nguesses = 1,9\n").find("guess space") != std::string::npos);
    CHECK(load_error("[player]\nseed = a\n[attacker]\nkind = node\ncolluder = nobody\n").find("colluder") !=
          std::string::npos);
    CHECK(load_error("rounds = 0\n[player]\nseed = a\n").find("rounds") != std::string::npos);
    CHECK(load_error("[player]\nbalance = 5\n").find("seed") != std::string::npos);
    CHECK(load_error("[nonsense]\n").find("line 1") != std::string::npos);
    CHECK(load_error("rounds\n").find("key = value") != std::string::npos);
    CHECK_THROWS_AS(load_scenario("/nonexistent/file.scn"), ScenarioError);
}

TEST_CASE("full grammar") {
    const auto sc = parse_scenario(R"(# comment
name = demo
rounds = 3   # trailing comment
base_seed = 9
rng_mode = naive
pool_mode = literal
share_price = 1_000
security_factor = 7/5
cert_cap = 4
eviction = fifo
bet_duration = 3
buffer_duration = 1
guess_space = 20
winning_draws = 2
pow_target_bits = 250
pow_target_divisor = 3
block_target_bits = 251
transaction_nodes = 2

[player]
seed = crowd
count = 3
balance = 500
shares = 2

[player]
seed = picky
guesses = 1, 2, 19
reveal = conflicting

[player]
seed = shy
reveals_honestly = false

[attacker]
kind = node
seed = rogue
mining_share = 0.25
colluder = picky
predicate = subset
)");
    CHECK(sc.name == "demo");
    CHECK(sc.rounds == 3);
    CHECK(sc.base_seed == 9);
    CHECK(sc.config.rng_mode == RngMode::NaiveBlockHash);
    CHECK(sc.config.pool_mode == PoolMode::Literal);
    CHECK(sc.config.share_price == 1000);
    CHECK(sc.config.security_factor == Rational{7, 5});
    CHECK(sc.config.eviction == EvictionPolicy::Fifo);
    CHECK(sc.config.pow_difficulty == Target::pow2(250).divided_by(3));
    CHECK(sc.block_target == Target::pow2(251));
    CHECK(sc.transaction_nodes == 2);
    REQUIRE(sc.players.size() == 5);
    CHECK(sc.players[0].seed_material == "crowd-0");
    CHECK(sc.players[2].seed_material == "crowd-2");
    CHECK(sc.players[2].initial_balance == 500);
    CHECK(sc.players[3].fixed_guesses == std::vector<std::uint64_t>{1, 2, 19});
    CHECK(sc.players[3].shares_to_buy == 3);
    CHECK(sc.players[3].reveal == RevealBehavior::Conflicting);
    CHECK(sc.players[4].reveal == RevealBehavior::Silent);
    CHECK(sc.attacker.kind == AttackerKind::Node);
    CHECK(sc.attacker.mining_share == 0.25);
    CHECK(sc.attacker.predicate == AttackPredicate::Subset);
}

TEST_CASE("every shipped scenario loads") {
    int loaded = 0;
    for (const auto& entry : std::filesystem::directory_iterator(DELOTTERY_SOURCE_DIR "/scenarios")) {
        if (entry.path().extension() != ".scn") continue;
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(load_scenario(entry.path()));
        ++loaded;
    }
    CHECK(loaded >= 7);
}

TEST_CASE("mode names round trip") {
    for (auto m : {RngMode::NaiveBlockHash, RngMode::CommitReveal}) CHECK(parse_rng_mode(rng_mode_name(m)) == m);
    for (auto m : {PoolMode::Literal, PoolMode::ConservationConsistent}) CHECK(parse_pool_mode(pool_mode_name(m)) == m);
    CHECK_THROWS_AS(parse_rng_mode("fast"), ScenarioError);
}
