#include "delottery/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <set>
#include <thread>

namespace delottery {

double fair_win_probability(double distinct_guesses, std::uint64_t guess_space, std::uint64_t draws) {
    // 1 - P(every draw misses): product over draws without replacement.
    double miss = 1.0;
    const auto c = static_cast<double>(guess_space);
    for (std::uint64_t i = 0; i < draws; ++i) {
        const auto d = static_cast<double>(i);
        miss *= std::max(0.0, (c - distinct_guesses - d) / (c - d));
    }
    return 1.0 - miss;
}

namespace {

struct PlayerSlot {
    const PlayerSpec* spec = nullptr;
    Address address;
    std::int64_t key = 0;
    PlayerResult result;
};

Bytes lottery_payload(const Lottery& lot) {
    Bytes out;
    put_u64(out, lot.lottery_id());
    return out;
}

double expected_distinct(const PlayerSpec& spec, std::uint64_t guess_space) {
    if (spec.guess_strategy == GuessStrategy::Fixed) {
        std::set<std::uint64_t> distinct(spec.fixed_guesses.begin(), spec.fixed_guesses.end());
        if (spec.shares_to_buy < spec.fixed_guesses.size()) {
            distinct = {spec.fixed_guesses.begin(), spec.fixed_guesses.begin() + static_cast<std::ptrdiff_t>(spec.shares_to_buy)};
        }
        return static_cast<double>(distinct.size());
    }
    const auto c = static_cast<double>(guess_space);
    return c * (1.0 - std::pow(1.0 - 1.0 / c, static_cast<double>(spec.shares_to_buy)));
}

class Runner {
public:
    Runner(const Scenario& sc, std::uint64_t seed, RunArtifacts* artifacts)
        : sc_(sc), seed_(seed), artifacts_(artifacts) {}

    RunReport run() {
        const auto started = std::chrono::steady_clock::now();
        setup();
        for (std::uint64_t r = 0; r < sc_.rounds; ++r) play_round(r);
        finish();
        report_.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        return std::move(report_);
    }

private:
    void setup() {
        report_.scenario_name = sc_.name;
        report_.seed = seed_;
        report_.rng_mode = std::string(rng_mode_name(sc_.config.rng_mode));
        report_.pool_mode = std::string(pool_mode_name(sc_.config.pool_mode));
        report_.rounds = sc_.rounds;

        for (std::uint64_t i = 0; i < sc_.transaction_nodes; ++i) {
            nodes_.push_back(ledger_.create_account("node-" + std::to_string(i), 0, true).address);
        }
        for (const auto& spec : sc_.players) {
            PlayerSlot slot;
            slot.spec = &spec;
            slot.address = ledger_.create_account(spec.seed_material, spec.initial_balance).address;
            slot.result.seed = spec.seed_material;
            slot.result.address = slot.address.hex();
            slot.result.initial_balance = spec.initial_balance;
            players_.push_back(std::move(slot));
        }

        const auto& atk = sc_.attacker;
        if (atk.kind == AttackerKind::Node) {
            node_attacker_ = NodeAttacker{};
            node_attacker_->address = ledger_.create_account(atk.seed_material, atk.initial_balance, true).address;
            node_attacker_->colluder = address_of(derive_secret(atk.colluder_seed));
            node_attacker_->mining_share = atk.mining_share;
            node_attacker_->predicate = atk.predicate;

            AttackMetrics m;
            m.mode = report_.rng_mode;
            m.mining_share = atk.mining_share;
            const auto* colluder = std::find_if(players_.begin(), players_.end(), [&](const PlayerSlot& p) {
                                       return p.spec->seed_material == atk.colluder_seed;
                                   })->spec;
            m.fair_rate = fair_win_probability(expected_distinct(*colluder, sc_.config.guess_space_size),
                                               sc_.config.guess_space_size, sc_.config.winning_draws);
            report_.attack = m;
        } else if (atk.kind == AttackerKind::Sybil) {
            const auto& acct = ledger_.create_account(atk.seed_material, atk.initial_balance);
            sybil_ = SybilAttacker{acct.address, acct.secret, atk.fake_count, atk.budget};
            report_.sybil = SybilMetrics{};
        }
    }

    void reject(std::uint64_t round, std::string op, std::string who, const ProtocolError& e) {
        report_.rejections.push_back(Rejection{round, std::move(op), std::move(who), std::string(reason_name(e.reason()))});
    }

    bool attempt(std::uint64_t round, const char* op, const std::string& who, const std::function<void()>& fn) {
        try {
            fn();
            return true;
        } catch (const ProtocolError& e) {
            reject(round, op, who, e);
            return false;
        }
    }

    void record(const Address& sender, EventKind kind, Bytes payload) {
        pending_.push_back(ledger_.sign(sender, kind, std::move(payload)));
    }

    // Mines whatever was submitted this tick.
    void flush() {
        if (pending_.empty()) return;
        // Keyed by tick so proposers differ between blocks of one round.
        CounterRng rng(seed_, ledger_.now(), Purpose::Block);
        const auto proposer = nodes_[rng.below(nodes_.size())];
        ledger_.mine_block(proposer, pending_, sc_.block_target);
        pending_.clear();
    }

    void advance_to(std::uint64_t tick) {
        flush();
        while (ledger_.now() < tick) ledger_.advance();
    }

    void play_round(std::uint64_t r) {
        const auto& cfg = sc_.config;
        advance_to(ledger_.now() + 1);

        // Enrolment: an arbitrary player deploys, everyone else joins.
        const auto host_index = CounterRng(seed_, r, Purpose::Host).below(players_.size());
        auto& host = players_[host_index];
        Lottery lot = Lottery::deploy(ledger_, host.address, cfg, ledger_.now());
        const auto id = lot.lottery_id();

        auto join = [&](const Address& who, const std::string& name) {
            auto pow = solve_pow(join_challenge(who, id), cfg.pow_difficulty);
            std::set<Address> votes;
            for (const auto& c : lot.certifiers()) votes.insert(c);
            if (attempt(r, "add_player", name, [&] { lot.add_player(ledger_, who, pow.proof, votes, ledger_.now()); })) {
                auto payload = lottery_payload(lot);
                put_u64(payload, pow.proof.nonce);
                record(who, EventKind::JoinRequest, std::move(payload));
            }
        };
        for (std::size_t i = 0; i < players_.size(); ++i) {
            if (i != host_index) join(players_[i].address, players_[i].spec->seed_material);
        }
        if (node_attacker_) join(node_attacker_->address, sc_.attacker.seed_material);

        if (sybil_) {
            const auto fakes = sybil_spawn(*sybil_, sybil_->fake_count, r * sybil_->fake_count);
            auto trial = sybil_admission_trial(ledger_, lot, fakes, sc_.attacker.certifier_policy,
                                               sybil_->budget, ledger_.now());
            auto& m = *report_.sybil;
            m.sybil_admitted += trial.admitted;
            m.sybil_spend += trial.spent;
            m.attempted += trial.attempted;
            m.hash_attempts += trial.hash_attempts;
            for (const auto& f : trial.admitted_identities) {
                m.audit.push_back(SybilAudit{r, f.address.hex(), f.controller.hex(), f.salt});
            }
        }

        // Key upload.
        advance_to(ledger_.now() + 1);
        lot.begin_key_upload(ledger_, ledger_.now());
        if (cfg.rng_mode == RngMode::CommitReveal) {
            CounterRng keys(seed_, r, Purpose::Key);
            for (auto& p : players_) {
                p.key = static_cast<std::int64_t>(keys.next());
                if (attempt(r, "upload_key", p.spec->seed_material,
                            [&] { lot.upload_key(ledger_, p.address, p.key, ledger_.now()); })) {
                    auto payload = lottery_payload(lot);
                    put_bytes(payload, commit_hash_of(p.key));
                    record(p.address, EventKind::Commit, std::move(payload));
                }
            }
            if (node_attacker_) {
                const bool accepted = attempt(r, "upload_key", sc_.attacker.seed_material, [&] {
                    lot.upload_key(ledger_, node_attacker_->address, 0, ledger_.now());
                });
                if (!accepted) ++report_.attack->commit_rejections;
            }
        }

        // Betting.
        advance_to(lot.round()->commit_deadline() + 1);
        lot.open_betting(ledger_.now());
        CounterRng guess_rng(seed_, r, Purpose::Guess);
        for (auto& p : players_) {
            std::vector<std::uint64_t> guesses;
            for (std::uint64_t s = 0; s < p.spec->shares_to_buy; ++s) {
                if (p.spec->guess_strategy == GuessStrategy::Uniform) {
                    guesses.push_back(guess_rng.below(cfg.guess_space_size));
                } else {
                    guesses.push_back(p.spec->fixed_guesses[s % p.spec->fixed_guesses.size()]);
                }
            }
            if (attempt(r, "buy_shares", p.spec->seed_material,
                        [&] { lot.buy_shares(ledger_, p.address, guesses, ledger_.now()); }) &&
                !guesses.empty()) {
                auto payload = lottery_payload(lot);
                for (auto g : guesses) put_u64(payload, g);
                record(p.address, EventKind::BuyShares, std::move(payload));
            }
        }

        // Buffer: reveals.
        advance_to(std::max(ledger_.now(), lot.betting_close()));
        lot.enter_buffer(ledger_.now());
        if (cfg.rng_mode == RngMode::CommitReveal) {
            for (auto& p : players_) {
                const auto* rec = lot.player(p.address);
                if (rec == nullptr || !rec->key_uploaded || p.spec->reveal == RevealBehavior::Silent) continue;
                auto reveal = [&](std::int64_t value) {
                    if (attempt(r, "reveal_key", p.spec->seed_material,
                                [&] { lot.reveal_key(p.address, value, ledger_.now()); })) {
                        auto payload = lottery_payload(lot);
                        put_bytes(payload, encode_i64(value));
                        record(p.address, EventKind::Reveal, std::move(payload));
                    }
                };
                reveal(p.key);
                if (p.spec->reveal == RevealBehavior::Conflicting) reveal(p.key ^ 1);
            }
        }

        // Draw, possibly under a withholding attacker.
        advance_to(lot.reveal_deadline() + 1);
        DrawContext ctx;
        ctx.honest_nodes = nodes_;
        ctx.caller = players_[CounterRng(seed_, r, Purpose::Honest).below(players_.size())].address;
        ctx.block_target = sc_.block_target;
        ctx.seed = seed_;
        ctx.round_index = r;
        const NodeAttacker attacker = node_attacker_.value_or(NodeAttacker{nodes_.front(), {}, 0.0});
        DrawOutcome outcome = cfg.rng_mode == RngMode::NaiveBlockHash
                                  ? run_naive_mode_round(ledger_, lot, attacker, ctx)
                                  : run_commit_reveal_mode_round(ledger_, lot, attacker, ctx);

        RoundRecord rec;
        rec.round = r;
        rec.lottery_id = id;
        rec.host = host.spec->seed_material;
        rec.withheld = outcome.withheld;
        rec.draw_height = outcome.draw_height;
        rec.phi = lot.phi();
        if (lot.phase() == Phase::Drawn) {
            rec.pool = lot.prize_pool();
            lot.settle(ledger_);
        }
        rec.aborted = lot.settlement() && lot.settlement()->aborted;
        if (lot.winners()) rec.winners.assign(lot.winners()->begin(), lot.winners()->end());
        if (lot.settlement()) rec.winning_shares = lot.settlement()->winning_share_count;

        for (auto& p : players_) {
            const auto* pr = lot.player(p.address);
            if (pr == nullptr) continue;
            if (pr->winning_shares > 0) {
                ++p.result.wins;
                rec.winning_players.push_back(p.spec->seed_material);
            }
            p.result.total_payout += pr->payout;
            if (pr->deposit_forfeited) {
                p.result.total_forfeited += pr->deposit;
                if (p.spec->reveal == RevealBehavior::Silent) silent_forfeit_ = true;
            }
        }
        if (report_.attack) {
            report_.attack->total_rounds += 1;
            report_.attack->withhold_count += outcome.withheld;
            if (outcome.attacker_won) report_.attack->attacker_wins += 1;
        }
        rec.residual = ledger_.conservation_residual();
        report_.round_records.push_back(std::move(rec));

        if (artifacts_ != nullptr) {
            artifacts_->round_transcripts += lot.round()->transcript();
            artifacts_->settlement_reports += lot.settlement_report(ledger_);
        }
    }

    void finish() {
        flush();
        for (auto& p : players_) {
            p.result.final_balance = ledger_.balance(p.address);
            report_.players.push_back(p.result);
        }
        auto& c = report_.conservation;
        c.minted = ledger_.minted();
        c.final_total = ledger_.total_money();
        c.fee_sink = ledger_.fee_sink();
        c.escrow_total = ledger_.escrow_total();
        c.residual = ledger_.conservation_residual();

        const auto counts = report_.winner_histogram();
        std::uint64_t total = 0;
        for (auto w : counts) total += w;
        if (counts.size() >= 2 && counts.size() <= 65 && total > 0) report_.chi_square = chi_square_uniform(counts);

        if (silent_forfeit_) {
            report_.notes.push_back(
                "non-revealing players forfeit their deposit into phi, but their guesses are still scored and paid at settlement");
        }
        if (sc_.config.pool_mode == PoolMode::Literal) {
            report_.notes.push_back(
                "literal pool mode: honest deposits are consumed into the prize pool and share stakes stay frozen (routed to the fee sink)");
        }
        report_.chain_height = ledger_.chain().back().height;
        report_.chain_tip = to_hex(ledger_.chain().back().hash);
        report_.chain_valid = verify_chain(ledger_.chain());
        if (artifacts_ != nullptr) artifacts_->chain_dump = ledger_.dump_chain();
    }

    const Scenario& sc_;
    std::uint64_t seed_;
    RunArtifacts* artifacts_;
    Ledger ledger_;
    std::vector<Address> nodes_;
    std::vector<PlayerSlot> players_;
    std::optional<NodeAttacker> node_attacker_;
    std::optional<SybilAttacker> sybil_;
    std::vector<Event> pending_;
    bool silent_forfeit_ = false;
    RunReport report_;
};

}  // namespace

RunReport run_once(const Scenario& scenario, std::uint64_t seed, const RunOptions& options,
                   RunArtifacts* artifacts) {
    scenario.validate();
    auto report = Runner(scenario, seed, artifacts).run();
    report.conservation.residual += options.inject_residual;
    return report;
}

AggregateReport aggregate_runs(const Scenario& scenario, std::vector<RunReport> runs) {
    AggregateReport agg;
    agg.scenario_name = scenario.name;
    agg.base_seed = runs.empty() ? scenario.base_seed : runs.front().seed;
    agg.n_seeds = runs.size();
    agg.conservation_ok = true;
    agg.chain_ok = true;

    for (const auto& p : scenario.players) {
        PlayerAggregate pa;
        pa.seed = p.seed_material;
        pa.address = address_of(derive_secret(p.seed_material)).hex();
        agg.players.push_back(pa);
    }

    std::uint64_t wins = 0, rounds = 0, withheld = 0;
    double fair = 0.0, share = 0.0;
    std::string mode;
    for (const auto& r : runs) {
        if (r.conservation.residual != 0) agg.conservation_ok = false;
        if (!r.chain_valid) agg.chain_ok = false;
        if (r.chi_square && r.chi_square->pass) ++agg.chi_square_passing_runs;
        for (std::size_t i = 0; i < r.players.size() && i < agg.players.size(); ++i) {
            agg.players[i].wins += r.players[i].wins;
            agg.players[i].final_balance_sum += r.players[i].final_balance;
        }
        if (r.attack) {
            wins += r.attack->attacker_wins;
            rounds += r.attack->total_rounds;
            withheld += r.attack->withhold_count;
            fair = r.attack->fair_rate;
            share = r.attack->mining_share;
            mode = r.attack->mode;
        }
        if (r.sybil) {
            agg.sybil_admitted += r.sybil->sybil_admitted;
            agg.sybil_spend += r.sybil->sybil_spend;
        }
    }
    if (rounds > 0) {
        const auto est = estimate_rate(wins, rounds);
        AttackAggregate a;
        a.mode = mode;
        a.mining_share = share;
        a.attacker_wins = wins;
        a.total_rounds = rounds;
        a.withhold_count = withheld;
        a.rate = est.rate;
        a.standard_error = est.standard_error;
        a.fair_rate = fair;
        a.amplification = fair > 0.0 ? est.rate / fair : 0.0;
        agg.attack = a;
    }

    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;
    for (const auto& p : agg.players) {
        counts.push_back(p.wins);
        total += p.wins;
    }
    if (counts.size() >= 2 && counts.size() <= 65 && total > 0) agg.chi_square = chi_square_uniform(counts);

    agg.pass = agg.conservation_ok && agg.chain_ok && !runs.empty();
    agg.runs = std::move(runs);
    return agg;
}

AggregateReport run_many(const Scenario& scenario, std::uint64_t n_seeds, const RunOptions& options,
                         unsigned workers) {
    if (n_seeds < 1) throw std::invalid_argument("run_many needs at least one seed");
    scenario.validate();
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, n_seeds));

    std::vector<RunReport> runs(n_seeds);
    std::vector<std::exception_ptr> errors(n_seeds);
    std::atomic<std::uint64_t> next{0};
    auto work = [&] {
        for (auto i = next.fetch_add(1); i < n_seeds; i = next.fetch_add(1)) {
            try {
                runs[i] = run_once(scenario, scenario.base_seed + i, options);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return aggregate_runs(scenario, std::move(runs));
}

}  // namespace delottery
