#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "delottery/chain.hpp"
#include "delottery/rng.hpp"
#include "support.hpp"

#include <set>

using namespace delottery;
using test::reason_of;

TEST_CASE("sha3-256 known answers") {
    CHECK(to_hex(sha3(std::string_view{})) == "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a");
    CHECK(to_hex(sha3("abc")) == "3a985da74fe225b2045c172d6bd390bd855f086e3e9d525b46bfe24511431532");

    Hasher h;
    h.update("a").update("bc");
    CHECK(to_hex(h.finish()) == to_hex(sha3("abc")));

    Hasher prefix;
    prefix.update("ab");
    Hasher fork(prefix);
    fork.update("c");
    CHECK(fork.finish() == sha3("abc"));
}

TEST_CASE("hex and integer encodings") {
    const auto h = sha3("x");
    CHECK(hash_from_hex(to_hex(h)) == h);
    CHECK_THROWS(hash_from_hex("zz"));

    Bytes out;
    put_u64(out, 0x0102030405060708ULL);
    CHECK(out == Bytes{8, 7, 6, 5, 4, 3, 2, 1});
    const auto minus_one = encode_i64(-1);
    for (auto b : minus_one) CHECK(b == 0xff);

    Hash256 v{};
    v[31] = 13;
    CHECK(mod_be(v, 10) == 3);
    v[30] = 1;  // 256 + 13
    CHECK(mod_be(v, 10) == 9);
}

TEST_CASE("money text round trip") {
    const Money big = (Money{1} << 100) + 7;
    CHECK(parse_money(money_to_string(big)) == big);
    CHECK(parse_money("1_000") == 1000);
    CHECK(money_to_string(0) == "0");
    CHECK(signed_money_to_string(-5) == "-5");
    CHECK(parse_signed_money("-12") == -12);
    CHECK_THROWS(parse_money(""));
    CHECK_THROWS(parse_money("12a"));

    CHECK(Rational::parse("1.5") == Rational{3, 2});
    CHECK(Rational::parse("3/2") == Rational{3, 2});
    CHECK(Rational::parse("6/4") == Rational{3, 2});
    CHECK(Rational::parse("2") == Rational{2, 1});
    CHECK_THROWS(Rational::parse("1/0"));
}

TEST_CASE("counter rng is addressable and purpose separated") {
    CounterRng a(7, 3, Purpose::Guess), b(7, 3, Purpose::Guess), c(7, 3, Purpose::Key);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.at(static_cast<std::uint64_t>(i)));
    CHECK(b.at(0) != c.at(0));
    CHECK(CounterRng(7, 4, Purpose::Guess).at(0) != b.at(0));

    // SplitMix64 reference: the first output of a stream whose state
    // starts at 0 is mix64(gamma).
    CHECK(mix64(kGoldenGamma) == 0xe220a8397b1dcdafULL);

    CounterRng r(1, 1, Purpose::Test);
    for (int i = 0; i < 1000; ++i) {
        CHECK(r.below(7) < 7);
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("create_account") {
    Ledger ledger;
    const auto& p1 = ledger.create_account("p1", 0);
    CHECK(p1.balance == 0);
    CHECK(p1.address == address_of(derive_secret("p1")));
    CHECK(p1.address.bytes == sha3(sha3("p1")));
    CHECK(reason_of([&] { ledger.create_account("p1", 5); }) == Reason::DuplicateAccount);
    CHECK(ledger.create_account("p2", 0).address != ledger.account(address_of(derive_secret("p1"))).address);
    CHECK(reason_of([&] { ledger.create_account("", 1); }) == Reason::InvalidArgument);

    std::set<Address> seen;
    for (int i = 0; i < 1000; ++i) seen.insert(address_of(derive_secret("s" + std::to_string(i))));
    CHECK(seen.size() == 1000);
}

TEST_CASE("transfer") {
    Ledger ledger;
    const auto a = ledger.create_account("a", 10).address;
    const auto b = ledger.create_account("b", 0).address;
    ledger.transfer(a, b, 0);
    CHECK(ledger.balance(a) == 10);
    ledger.transfer(a, b, 7);
    CHECK(ledger.balance(a) == 3);
    CHECK(ledger.balance(b) == 7);

    const auto before = ledger.dump_chain();
    CHECK(reason_of([&] { ledger.transfer(a, b, 11); }) == Reason::InsufficientBalance);
    CHECK(ledger.balance(a) == 3);
    CHECK(ledger.balance(b) == 7);
    CHECK(ledger.dump_chain() == before);
    CHECK(reason_of([&] { ledger.transfer(a, address_of(derive_secret("ghost")), 1); }) ==
          Reason::UnknownAccount);
    CHECK(ledger.conservation_residual() == 0);
}

TEST_CASE("escrow and fee paths conserve money") {
    Ledger ledger;
    const auto a = ledger.create_account("a", 1000).address;
    const auto e1 = ledger.open_escrow();
    const auto e2 = ledger.open_escrow();
    ledger.deposit_to_escrow(a, e1, 600);
    ledger.move_escrow(e1, e2, 100);
    ledger.pay_from_escrow(e1, a, 200);
    ledger.escrow_to_fees(e2, 40);
    ledger.charge_fee(a, 5);
    CHECK(ledger.escrow_balance(e1) == 300);
    CHECK(ledger.escrow_balance(e2) == 60);
    CHECK(ledger.fee_sink() == 45);
    CHECK(ledger.total_money() == 1000);
    CHECK(ledger.conservation_residual() == 0);
    CHECK(reason_of([&] { ledger.pay_from_escrow(e2, a, 61); }) == Reason::InsufficientBalance);
    CHECK(reason_of([&] { ledger.deposit_to_escrow(a, e1, 10'000); }) == Reason::InsufficientBalance);
}

TEST_CASE("solve_pow") {
    const auto challenge = sha3("challenge");
    const auto vacuous = solve_pow(challenge, Target::max());
    CHECK(vacuous.proof.nonce == 0);
    CHECK(vacuous.attempts == 1);

    const auto t = Target::pow2(248);
    CHECK(t.expected_attempts() == doctest::Approx(256.0));
    const auto r = solve_pow(challenge, t);
    CHECK(verify_pow(r.proof));
    CHECK(r.attempts == r.proof.nonce + 1);

    // Independent check: every earlier nonce fails the target.
    for (std::uint64_t n = 0; n <= r.proof.nonce; ++n) {
        Bytes buf(challenge.begin(), challenge.end());
        put_u64(buf, n);
        CHECK(t.met_by(sha3(buf)) == (n == r.proof.nonce));
    }

    auto bumped = r.proof;
    bumped.nonce += 1;
    const bool next_also_valid = [&] {
        Bytes buf(challenge.begin(), challenge.end());
        put_u64(buf, bumped.nonce);
        return t.met_by(sha3(buf));
    }();
    CHECK(verify_pow(bumped) == next_also_valid);
    CHECK_FALSE(next_also_valid);

    // Mean attempts over many challenges sits near 2^256 / target.
    double total = 0;
    for (int i = 0; i < 400; ++i) total += static_cast<double>(solve_pow(sha3("c" + std::to_string(i)), t).attempts);
    CHECK(total / 400 == doctest::Approx(256.0).epsilon(0.15));
}

TEST_CASE("target arithmetic") {
    CHECK(Target::pow2(256) == Target::max());
    CHECK(Target::pow2(10).divided_by(2) == Target::pow2(9));
    CHECK(Target::pow2(248).divided_by(3).expected_attempts() == doctest::Approx(768.0));
    CHECK(Target::from_hex(Target::pow2(200).hex()) == Target::pow2(200));
    Hash256 zero{};
    CHECK(Target::pow2(0).met_by(zero));
    Hash256 one{};
    one[31] = 1;
    CHECK_FALSE(Target::pow2(0).met_by(one));
    CHECK(Target::pow2(256).divided_by(1) == Target::max());
}

TEST_CASE("mine_block") {
    Ledger ledger;
    const auto node = ledger.create_account("node", 0, true).address;
    const auto a = ledger.create_account("a", 10).address;
    const auto b = ledger.create_account("b", 0).address;
    const auto target = Target::pow2(252);

    ledger.advance();
    const auto& empty = ledger.mine_block(node, {}, target);
    CHECK(empty.height == 1);
    CHECK(empty.events.empty());
    CHECK(verify_chain(ledger.chain()));

    // Second block in the same tick is refused.
    CHECK(reason_of([&] { ledger.mine_block(node, {}, target); }) == Reason::ClockOrder);

    ledger.advance();
    const auto ev = ledger.sign(a, EventKind::Transfer, transfer_payload(b, 4));
    CHECK(ledger.verify(ev));
    const std::vector<Event> pending{ev};
    ledger.mine_block(node, pending, target);
    CHECK(ledger.chain().size() == 3);
    CHECK(ledger.balance(a) == 6);
    CHECK(ledger.balance(b) == 4);

    ledger.advance();
    auto tampered = ledger.sign(a, EventKind::Transfer, transfer_payload(b, 1));
    tampered.payload[40] ^= 1;
    const auto dump = ledger.dump_chain();
    CHECK(reason_of([&] { ledger.mine_block(node, std::vector<Event>{tampered}, target); }) == Reason::BadAuthTag);
    CHECK(ledger.dump_chain() == dump);
    CHECK(ledger.balance(a) == 6);

    CHECK(reason_of([&] { ledger.mine_block(a, {}, target); }) == Reason::NotTransactionNode);

    // Overdraft inside a block rejects the whole block.
    const auto over = ledger.sign(a, EventKind::Transfer, transfer_payload(b, 7));
    CHECK(reason_of([&] { ledger.mine_block(node, std::vector<Event>{over}, target); }) ==
          Reason::InsufficientBalance);
    CHECK(ledger.dump_chain() == dump);
    CHECK(ledger.conservation_residual() == 0);
}

TEST_CASE("auth tags fail on every single-byte flip") {
    Ledger ledger;
    const auto a = ledger.create_account("a", 10).address;
    const auto ev = ledger.sign(a, EventKind::Commit, Bytes{1, 2, 3, 4, 5, 6, 7, 8});
    CHECK(ledger.verify(ev));
    for (std::size_t i = 0; i < ev.payload.size(); ++i) {
        for (int bit = 0; bit < 8; ++bit) {
            auto copy = ev;
            copy.payload[i] ^= static_cast<std::uint8_t>(1u << bit);
            CHECK_FALSE(ledger.verify(copy));
        }
    }
    auto shifted = ev;
    shifted.timestamp += 1;
    CHECK_FALSE(ledger.verify(shifted));
    auto rekind = ev;
    rekind.kind = EventKind::Reveal;
    CHECK_FALSE(ledger.verify(rekind));
}

TEST_CASE("verify_chain") {
    Ledger ledger;
    const auto node = ledger.create_account("node", 0, true).address;
    CHECK(verify_chain(ledger.chain()));
    for (int i = 0; i < 4; ++i) {
        ledger.advance();
        ledger.mine_block(node, {}, Target::pow2(250));
    }
    CHECK(verify_chain(ledger.chain()));

    auto mutated = ledger.chain();
    mutated[2].nonce += 1;
    CHECK_FALSE(verify_chain(mutated));

    auto swapped = ledger.chain();
    std::swap(swapped[1], swapped[2]);
    CHECK_FALSE(verify_chain(swapped));

    auto relinked = ledger.chain();
    relinked[3].prev_hash[0] ^= 1;
    CHECK_FALSE(verify_chain(relinked));
}

TEST_CASE("chain dump records") {
    Ledger ledger;
    const auto node = ledger.create_account("node", 0, true).address;
    ledger.advance();
    ledger.mine_block(node, {}, Target::pow2(252));
    const auto dump = ledger.dump_chain();
    const auto first_nl = dump.find('\n');
    const auto second = dump.substr(first_nl + 1);
    const auto& b = ledger.chain()[1];
    CHECK(second == "1," + to_hex(b.prev_hash) + "," + to_hex(b.hash) + "," + node.hex() + ",0\n");
    CHECK(dump.substr(0, 2) == "0,");
}

TEST_CASE("ledgers built from the same inputs are identical") {
    auto build = [] {
        Ledger ledger;
        const auto node = ledger.create_account("n", 0, true).address;
        const auto a = ledger.create_account("a", 100).address;
        const auto b = ledger.create_account("b", 0).address;
        for (int i = 1; i <= 5; ++i) {
            ledger.advance();
            const std::vector<Event> ev{ledger.sign(a, EventKind::Transfer, transfer_payload(b, static_cast<Money>(i)))};
            ledger.mine_block(node, ev, Target::pow2(251));
        }
        return ledger.dump_chain();
    };
    CHECK(build() == build());
}
