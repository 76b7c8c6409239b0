#include "delottery/scenario.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace delottery {

std::string_view rng_mode_name(RngMode mode) {
    return mode == RngMode::NaiveBlockHash ? "naive" : "commit-reveal";
}

std::string_view pool_mode_name(PoolMode mode) {
    return mode == PoolMode::Literal ? "literal" : "consistent";
}

RngMode parse_rng_mode(std::string_view text) {
    if (text == "naive") return RngMode::NaiveBlockHash;
    if (text == "commit-reveal") return RngMode::CommitReveal;
    throw ScenarioError("rng_mode must be naive or commit-reveal, got '" + std::string(text) + "'");
}

PoolMode parse_pool_mode(std::string_view text) {
    if (text == "literal") return PoolMode::Literal;
    if (text == "consistent") return PoolMode::ConservationConsistent;
    throw ScenarioError("pool_mode must be literal or consistent, got '" + std::string(text) + "'");
}

namespace {

std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::uint64_t to_u64(std::string_view v) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw std::invalid_argument("expected an unsigned integer, got '" + std::string(v) + "'");
    }
    return out;
}

double to_double(std::string_view v) {
    std::size_t used = 0;
    std::string s(v);
    double out = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("expected a number, got '" + s + "'");
    return out;
}

bool to_bool(std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("expected true or false, got '" + std::string(v) + "'");
}

std::vector<std::uint64_t> to_list(std::string_view v) {
    std::vector<std::uint64_t> out;
    while (!v.empty()) {
        auto comma = v.find(',');
        out.push_back(to_u64(trim(v.substr(0, comma))));
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    return out;
}

struct PlayerDraft {
    PlayerSpec spec;
    std::uint64_t count = 1;
    bool shares_set = false;
    std::size_t line = 0;
};

}  // namespace

Scenario parse_scenario(std::string_view text) {
    Scenario sc;
    std::vector<PlayerDraft> drafts;
    enum class Section { Top, Player, Attacker } section = Section::Top;
    bool attacker_seen = false;
    unsigned pow_bits = 252;
    std::uint64_t pow_divisor = 1;
    std::set<std::string> top_keys;

    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        auto line = trim(raw);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
        if (line.empty()) continue;
        auto fail = [&](const std::string& msg) {
            return ScenarioError("line " + std::to_string(line_no) + ": " + msg);
        };

        if (line.front() == '[') {
            if (line == "[player]") {
                section = Section::Player;
                drafts.push_back(PlayerDraft{});
                drafts.back().line = line_no;
            } else if (line == "[attacker]") {
                if (attacker_seen) throw fail("only one [attacker] section is allowed");
                attacker_seen = true;
                section = Section::Attacker;
            } else {
                throw fail("unknown section " + std::string(line));
            }
            continue;
        }

        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw fail("expected 'key = value'");
        const auto key = std::string(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw fail("missing key");
        if (value.empty()) throw fail("missing value for '" + key + "'");

        try {
            if (section == Section::Top) {
                if (!top_keys.insert(key).second) throw fail("duplicate key '" + key + "'");
                auto& cfg = sc.config;
                if (key == "name") sc.name = value;
                else if (key == "rounds") sc.rounds = to_u64(value);
                else if (key == "base_seed") sc.base_seed = to_u64(value);
                else if (key == "rng_mode") cfg.rng_mode = parse_rng_mode(value);
                else if (key == "pool_mode") cfg.pool_mode = parse_pool_mode(value);
                else if (key == "share_price") cfg.share_price = parse_money(value);
                else if (key == "security_factor") cfg.security_factor = Rational::parse(value);
                else if (key == "cert_cap") cfg.cert_cap = to_u64(value);
                else if (key == "eviction") {
                    if (value == "latest") cfg.eviction = EvictionPolicy::LatestJoined;
                    else if (value == "fifo") cfg.eviction = EvictionPolicy::Fifo;
                    else throw fail("eviction must be latest or fifo");
                }
                else if (key == "bet_duration") cfg.bet_duration = to_u64(value);
                else if (key == "buffer_duration") cfg.buffer_duration = to_u64(value);
                else if (key == "guess_space") cfg.guess_space_size = to_u64(value);
                else if (key == "winning_draws") cfg.winning_draws = to_u64(value);
                else if (key == "pow_target_bits") pow_bits = static_cast<unsigned>(to_u64(value));
                else if (key == "pow_target_divisor") pow_divisor = to_u64(value);
                else if (key == "block_target_bits") sc.block_target = Target::pow2(static_cast<unsigned>(to_u64(value)));
                else if (key == "transaction_nodes") sc.transaction_nodes = to_u64(value);
                else throw fail("unknown key '" + key + "'");
            } else if (section == Section::Player) {
                auto& d = drafts.back();
                auto& p = d.spec;
                if (key == "seed") p.seed_material = value;
                else if (key == "balance") p.initial_balance = parse_money(value);
                else if (key == "shares") {
                    p.shares_to_buy = to_u64(value);
                    d.shares_set = true;
                }
                else if (key == "guesses") {
                    if (value == "uniform") {
                        p.guess_strategy = GuessStrategy::Uniform;
                    } else {
                        p.guess_strategy = GuessStrategy::Fixed;
                        p.fixed_guesses = to_list(value);
                    }
                }
                else if (key == "reveal") {
                    if (value == "honest") p.reveal = RevealBehavior::Honest;
                    else if (value == "silent") p.reveal = RevealBehavior::Silent;
                    else if (value == "conflicting") p.reveal = RevealBehavior::Conflicting;
                    else throw fail("reveal must be honest, silent or conflicting");
                }
                else if (key == "reveals_honestly") p.reveal = to_bool(value) ? RevealBehavior::Honest : RevealBehavior::Silent;
                else if (key == "count") d.count = to_u64(value);
                else throw fail("unknown player key '" + key + "'");
            } else {
                auto& a = sc.attacker;
                if (key == "kind") {
                    if (value == "node") a.kind = AttackerKind::Node;
                    else if (value == "sybil") a.kind = AttackerKind::Sybil;
                    else if (value == "none") a.kind = AttackerKind::None;
                    else throw fail("attacker kind must be node, sybil or none");
                }
                else if (key == "seed") a.seed_material = value;
                else if (key == "balance") a.initial_balance = parse_money(value);
                else if (key == "mining_share") a.mining_share = to_double(value);
                else if (key == "colluder") a.colluder_seed = value;
                else if (key == "predicate") {
                    if (value == "intersection") a.predicate = AttackPredicate::Intersection;
                    else if (value == "subset") a.predicate = AttackPredicate::Subset;
                    else throw fail("predicate must be intersection or subset");
                }
                else if (key == "fake_count") a.fake_count = to_u64(value);
                else if (key == "budget") a.budget = parse_money(value);
                else if (key == "certifier_policy") {
                    if (value == "honest-refuse") a.certifier_policy = CertifierPolicy::HonestRefuse;
                    else if (value == "rubberstamp") a.certifier_policy = CertifierPolicy::Rubberstamp;
                    else throw fail("certifier_policy must be honest-refuse or rubberstamp");
                }
                else throw fail("unknown attacker key '" + key + "'");
            }
        } catch (const ScenarioError&) {
            throw;
        } catch (const std::exception& e) {
            throw fail(key + ": " + e.what());
        }
    }

    if (pow_bits > 256) throw ScenarioError("pow_target_bits: must be at most 256");
    if (pow_divisor == 0) throw ScenarioError("pow_target_divisor: must be positive");
    sc.config.pow_difficulty = Target::pow2(pow_bits).divided_by(pow_divisor);

    for (auto& d : drafts) {
        if (d.spec.seed_material.empty()) {
            throw ScenarioError("line " + std::to_string(d.line) + ": [player] needs a seed");
        }
        if (d.spec.guess_strategy == GuessStrategy::Fixed && !d.shares_set) {
            d.spec.shares_to_buy = d.spec.fixed_guesses.size();
        }
        if (d.count == 1) {
            sc.players.push_back(d.spec);
            continue;
        }
        for (std::uint64_t i = 0; i < d.count; ++i) {
            auto copy = d.spec;
            copy.seed_material += "-" + std::to_string(i);
            sc.players.push_back(std::move(copy));
        }
    }
    if (sc.name.empty()) sc.name = "unnamed";
    sc.validate();
    return sc;
}

void Scenario::validate() const {
    try {
        config.validate();
    } catch (const ProtocolError& e) {
        throw ScenarioError(e.what());
    }
    if (rounds < 1) throw ScenarioError("rounds: must be at least 1");
    if (players.empty()) throw ScenarioError("players: at least one [player] section is required");
    if (transaction_nodes < 1) throw ScenarioError("transaction_nodes: must be at least 1");
    if (block_target.is_zero()) throw ScenarioError("block_target_bits: must be positive");

    std::set<std::string> seeds;
    for (const auto& p : players) {
        if (!seeds.insert(p.seed_material).second) {
            throw ScenarioError("players: duplicate seed '" + p.seed_material + "'");
        }
        if (p.guess_strategy == GuessStrategy::Fixed) {
            if (p.fixed_guesses.empty() && p.shares_to_buy > 0) {
                throw ScenarioError("guesses: fixed list for '" + p.seed_material + "' is empty");
            }
            for (auto g : p.fixed_guesses) {
                if (g >= config.guess_space_size) {
                    throw ScenarioError("guesses: " + std::to_string(g) + " outside the guess space for '" +
                                        p.seed_material + "'");
                }
            }
        }
    }
    if (attacker.kind == AttackerKind::Node) {
        if (!(attacker.mining_share >= 0.0 && attacker.mining_share <= 1.0)) {
            throw ScenarioError("mining_share: must lie in [0, 1]");
        }
        if (!seeds.contains(attacker.colluder_seed)) {
            throw ScenarioError("colluder: '" + attacker.colluder_seed + "' is not a player seed");
        }
    }
    if (attacker.kind != AttackerKind::None && seeds.contains(attacker.seed_material)) {
        throw ScenarioError("seed: attacker seed collides with a player seed");
    }
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("cannot open scenario " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario(buf.str());
    } catch (const ScenarioError& e) {
        throw ScenarioError(path.string() + ": " + e.what());
    }
}

}  // namespace delottery
