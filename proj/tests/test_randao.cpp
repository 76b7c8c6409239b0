#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "delottery/randao.hpp"
#include "delottery/rng.hpp"
#include "delottery/stats.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace delottery;
using test::reason_of;

namespace {

// H(xor of LE8 values ‖ LE8 round_id), written out byte by byte.
Hash256 combiner_oracle(std::uint64_t round_id, const std::vector<std::int64_t>& values) {
    std::uint64_t x = 0;
    for (auto v : values) x ^= static_cast<std::uint64_t>(v);
    std::vector<std::uint8_t> buf;
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(round_id >> (8 * i)));
    return sha3(buf);
}

struct Fixture {
    Ledger ledger;
    std::vector<Address> players;
    Address node;

    explicit Fixture(int n, Money balance = 1000) {
        for (int i = 0; i < n; ++i) players.push_back(ledger.create_account("p" + std::to_string(i), balance).address);
        node = ledger.create_account("node", 1000, true).address;
    }
};

}  // namespace

TEST_CASE("open_round") {
    Ledger ledger;
    auto r = RngRound::open(ledger, 0, 5, 5);
    CHECK(r.commit_deadline() == 5);
    CHECK(r.reveal_deadline() == 10);
    CHECK(r.state(0) == RoundState::Committing);
    CHECK(r.state(5) == RoundState::Committing);
    CHECK(r.state(6) == RoundState::Revealing);
    CHECK(reason_of([&] { RngRound::open(ledger, 0, 0, 5); }) == Reason::InvalidArgument);
    CHECK(reason_of([&] { RngRound::open(ledger, 0, 5, 0); }) == Reason::InvalidArgument);
    CHECK(RngRound::open(ledger, 0, 1, 1).round_id() != RngRound::open(ledger, 0, 1, 1).round_id());
}

TEST_CASE("commit windows and restrictions") {
    Fixture f(2);
    auto r = RngRound::open(f.ledger, 0, 5, 5);
    const auto h = commit_hash_of(42);
    r.commit(f.ledger, f.players[0], h, 100, 5);  // inclusive deadline
    CHECK(f.ledger.balance(f.players[0]) == 900);
    CHECK(r.escrowed() == 100);
    CHECK(reason_of([&] { r.commit(f.ledger, f.players[1], h, 100, 6); }) == Reason::WindowClosed);
    CHECK(reason_of([&] { r.commit(f.ledger, f.node, h, 100, 1); }) == Reason::TransactionNodeForbidden);
    CHECK(reason_of([&] { r.commit(f.ledger, f.players[0], h, 100, 1); }) == Reason::Duplicate);
    CHECK(reason_of([&] { r.commit(f.ledger, f.players[1], h, 5000, 1); }) == Reason::InsufficientBalance);
    CHECK(reason_of([&] { r.commit(f.ledger, f.players[1], h, 0, 1); }) == Reason::InvalidArgument);
    CHECK(f.ledger.balance(f.players[1]) == 1000);
    CHECK(f.ledger.conservation_residual() == 0);
}

TEST_CASE("reveal") {
    Fixture f(3);
    auto r = RngRound::open(f.ledger, 0, 5, 5);
    r.commit(f.ledger, f.players[0], commit_hash_of(42), 10, 0);
    r.commit(f.ledger, f.players[1], commit_hash_of(42), 10, 0);
    CHECK(reason_of([&] { r.reveal(f.players[0], 42, 5); }) == Reason::WindowNotOpen);
    r.reveal(f.players[0], 42, 6);
    CHECK(r.reveals().size() == 1);
    CHECK(reason_of([&] { r.reveal(f.players[1], 43, 7); }) == Reason::BindingViolation);
    CHECK_FALSE(r.reveals().contains(f.players[1]));
    CHECK(reason_of([&] { r.reveal(f.players[2], 1, 7); }) == Reason::NoCommitment);
    CHECK(reason_of([&] { r.reveal(f.players[0], 42, 8); }) == Reason::Duplicate);
    CHECK(reason_of([&] { r.reveal(f.players[1], 42, 11); }) == Reason::WindowClosed);

    // The unrevealed deposit is forfeited at finalize.
    const auto res = r.finalize(f.ledger, 11);
    CHECK(res.forfeited == 10);
    CHECK(res.forfeits.at(f.players[1]) == 10);
    CHECK(res.refunds.at(f.players[0]) == 10);
}

TEST_CASE("binding: random mismatches rejected, matches accepted") {
    Fixture f(1, Money{1} << 80);
    CounterRng rng(1, 0, Purpose::Test);
    int rejected = 0, accepted = 0;
    for (int i = 0; i < 10'000; ++i) {
        auto r = RngRound::open(f.ledger, 0, 1, 1);
        const auto s = static_cast<std::int64_t>(rng.next());
        auto s2 = static_cast<std::int64_t>(rng.next());
        if (s2 == s) s2 ^= 1;
        r.commit(f.ledger, f.players[0], commit_hash_of(s), 1, 0);
        if (reason_of([&] { r.reveal(f.players[0], s2, 2); }) == Reason::BindingViolation) ++rejected;
        if (!reason_of([&] { r.reveal(f.players[0], s, 2); })) ++accepted;
        r.finalize(f.ledger, 3);
    }
    CHECK(rejected == 10'000);
    CHECK(accepted == 10'000);
    CHECK(f.ledger.conservation_residual() == 0);
}

TEST_CASE("finalize examples") {
    SUBCASE("single revealer with s = 0") {
        Fixture f(1);
        auto r = RngRound::open(f.ledger, 0, 1, 1);
        r.commit(f.ledger, f.players[0], commit_hash_of(0), 10, 0);
        r.reveal(f.players[0], 0, 2);
        const auto res = r.finalize(f.ledger, 3);
        REQUIRE(res.output);
        CHECK(*res.output == combiner_oracle(r.round_id(), {0}));
        CHECK(r.state(3) == RoundState::Finalized);
        CHECK(reason_of([&] { r.finalize(f.ledger, 4); }) == Reason::AlreadyFinalized);
    }
    SUBCASE("equal values cancel") {
        CHECK(combine_reveals(9, std::vector<std::int64_t>{5, 5}) == combine_reveals(9, std::vector<std::int64_t>{0}));
        CHECK(combine_reveals(9, std::vector<std::int64_t>{5, 5}) == combiner_oracle(9, {0}));
        CHECK(combine_reveals(9, std::vector<std::int64_t>{1, -7, 3}) == combiner_oracle(9, {3, 1, -7}));
    }
    SUBCASE("three committers, two reveal") {
        Fixture f(3);
        auto r = RngRound::open(f.ledger, 0, 1, 1);
        for (int i = 0; i < 3; ++i) r.commit(f.ledger, f.players[i], commit_hash_of(i), 10 + i, 0);
        r.reveal(f.players[0], 0, 2);
        r.reveal(f.players[1], 1, 2);
        const auto res = r.finalize(f.ledger, 3);
        CHECK(res.forfeited == 12);
        CHECK(res.refunds.size() == 2);
        CHECK(f.ledger.balance(f.players[0]) == 1000);
        CHECK(f.ledger.balance(f.players[1]) == 1000);
        CHECK(f.ledger.balance(f.players[2]) == 988);
        CHECK(f.ledger.fee_sink() == 12);
        CHECK(*res.output == combiner_oracle(r.round_id(), {0, 1}));
    }
    SUBCASE("no reveals aborts with full refunds") {
        Fixture f(2);
        auto r = RngRound::open(f.ledger, 0, 1, 1);
        r.commit(f.ledger, f.players[0], commit_hash_of(3), 10, 0);
        r.commit(f.ledger, f.players[1], commit_hash_of(4), 20, 0);
        CHECK(reason_of([&] { r.finalize(f.ledger, 2); }) == Reason::WindowNotOpen);
        const auto res = r.finalize(f.ledger, 3);
        CHECK(res.status == FinalizeStatus::NoEntropy);
        CHECK_FALSE(res.output);
        CHECK(res.forfeited == 0);
        CHECK(f.ledger.balance(f.players[0]) == 1000);
        CHECK(f.ledger.balance(f.players[1]) == 1000);
    }
    SUBCASE("excluded reveals are ignored and forfeited") {
        Fixture f(2);
        auto r = RngRound::open(f.ledger, 0, 1, 1);
        r.commit(f.ledger, f.players[0], commit_hash_of(3), 10, 0);
        r.commit(f.ledger, f.players[1], commit_hash_of(4), 20, 0);
        r.reveal(f.players[0], 3, 2);
        r.reveal(f.players[1], 4, 2);
        FinalizeOptions opts;
        opts.excluded = {f.players[1]};
        const auto res = r.finalize(f.ledger, 3, opts);
        CHECK(*res.output == combiner_oracle(r.round_id(), {3}));
        CHECK(res.forfeited == 20);
    }
}

TEST_CASE("escrow conservation across random rounds") {
    Fixture f(6, 1'000'000);
    CounterRng rng(2, 0, Purpose::Test);
    for (int round = 0; round < 300; ++round) {
        auto r = RngRound::open(f.ledger, 0, 1, 1);
        Money deposits = 0;
        for (std::size_t i = 0; i < f.players.size(); ++i) {
            if (rng.below(4) == 0) continue;
            const Money d = 1 + rng.below(50);
            r.commit(f.ledger, f.players[i], commit_hash_of(static_cast<std::int64_t>(i)), d, 0);
            deposits += d;
            if (rng.below(3) != 0) r.reveal(f.players[i], static_cast<std::int64_t>(i), 2);
        }
        if (deposits == 0) continue;
        const auto res = r.finalize(f.ledger, 3);
        Money refunds = 0;
        for (const auto& [_, m] : res.refunds) refunds += m;
        CHECK(refunds + res.forfeited == deposits);
        CHECK(r.escrowed() == 0);
        CHECK(f.ledger.conservation_residual() == 0);
    }
}

TEST_CASE("last-revealer sensitivity") {
    CounterRng rng(3, 0, Purpose::Test);
    for (std::uint64_t round = 1; round <= 1000; ++round) {
        std::vector<std::int64_t> values;
        for (int i = 0; i < 4; ++i) values.push_back(static_cast<std::int64_t>(rng.next()));
        const auto base = combine_reveals(round, values);
        auto flipped = values;
        const auto idx = rng.below(values.size());
        flipped[idx] = static_cast<std::int64_t>(static_cast<std::uint64_t>(flipped[idx]) ^ (1ULL << rng.below(64)));
        CHECK(combine_reveals(round, flipped) != base);
    }
}

TEST_CASE("output uniformity mod 16") {
    CounterRng rng(4, 0, Purpose::Test);
    std::vector<std::uint64_t> counts(16, 0);
    for (std::uint64_t round = 1; round <= 10'000; ++round) {
        std::vector<std::int64_t> values;
        for (int i = 0; i < 3; ++i) values.push_back(static_cast<std::int64_t>(rng.next()));
        ++counts[mod_be(combine_reveals(round, values), 16)];
    }
    const auto chi = chi_square_uniform(counts);
    CHECK(chi.statistic == doctest::Approx(static_cast<double>(oracle::pearson_uniform(counts))));
    CHECK(chi.df == 15);
    CHECK(chi.pass);
}

TEST_CASE("determinism and transcript") {
    auto build = [] {
        Fixture f(3);
        auto r = RngRound::open(f.ledger, 0, 1, 1);
        for (int i = 0; i < 3; ++i) r.commit(f.ledger, f.players[i], commit_hash_of(i * 11), 7, 0);
        r.reveal(f.players[2], 22, 2);
        r.reveal(f.players[0], 0, 2);
        r.finalize(f.ledger, 3);
        return std::make_pair(*r.output(), r.transcript());
    };
    const auto [o1, t1] = build();
    const auto [o2, t2] = build();
    CHECK(o1 == o2);
    CHECK(t1 == t2);

    // One line per committer, revealed flag and value or dash.
    int lines = 0, dashes = 0;
    std::size_t pos = 0;
    while ((pos = t1.find('\n', pos)) != std::string::npos) {
        ++lines;
        ++pos;
    }
    for (std::size_t p = t1.find(",0,-,"); p != std::string::npos; p = t1.find(",0,-,", p + 1)) ++dashes;
    CHECK(lines == 3);
    CHECK(dashes == 1);
    CHECK(t1.find(",1,22,7\n") != std::string::npos);
}
