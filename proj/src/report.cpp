#include "delottery/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace delottery {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kRunSchema = "delottery-run-report/1";
constexpr const char* kAggregateSchema = "delottery-aggregate-report/1";

// ---------------------------------------------------------------- writer

void write_string(std::string& out, const std::string& s) { out += json(s).dump(); }

void write_double(std::string& out, double v) {
    if (!std::isfinite(v)) {
        out += "null";
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
    // Keep the value a JSON float even when it happens to be integral.
    if (std::strpbrk(buf, ".eE") == nullptr) out += ".0";
}

void write_value(std::string& out, const json& v, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (v.type()) {
        case json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [key, item] : v.items()) {
                if (!first) out += ",\n";
                first = false;
                out += inner;
                write_string(out, key);
                out += ": ";
                write_value(out, item, indent + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            const bool scalars = std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_primitive(); });
            if (scalars) {
                out += "[";
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i) out += ", ";
                    write_value(out, v[i], indent + 1);
                }
                out += "]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ",\n";
                out += inner;
                write_value(out, v[i], indent + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case json::value_t::number_float:
            write_double(out, v.get<double>());
            return;
        default:
            out += v.dump();
            return;
    }
}

std::string dump(const json& v) {
    std::string out;
    write_value(out, v, 0);
    out += "\n";
    return out;
}

// ---------------------------------------------------------------- to json

json money(Money m) { return money_to_string(m); }
json smoney(SignedMoney m) { return signed_money_to_string(m); }

json chi_json(const std::optional<ChiSquareResult>& c) {
    if (!c) return nullptr;
    return json{{"statistic", c->statistic}, {"df", c->df}, {"pass", c->pass}};
}

json run_json(const RunReport& r, bool include_timing) {
    json j;
    j["schema"] = kRunSchema;
    j["scenario"] = r.scenario_name;
    j["seed"] = r.seed;
    j["rng_mode"] = r.rng_mode;
    j["pool_mode"] = r.pool_mode;
    j["rounds"] = r.rounds;

    json players = json::array();
    json histogram = json::object();
    for (const auto& p : r.players) {
        players.push_back(json{{"seed", p.seed},
                               {"address", p.address},
                               {"initial_balance", money(p.initial_balance)},
                               {"final_balance", money(p.final_balance)},
                               {"wins", p.wins},
                               {"total_payout", money(p.total_payout)},
                               {"total_forfeited", money(p.total_forfeited)}});
        histogram[p.seed] = p.wins;
    }
    j["players"] = players;
    j["winner_histogram"] = histogram;

    j["conservation"] = json{{"minted", money(r.conservation.minted)},
                             {"final_total", money(r.conservation.final_total)},
                             {"fee_sink", money(r.conservation.fee_sink)},
                             {"escrow_total", money(r.conservation.escrow_total)},
                             {"residual", smoney(r.conservation.residual)}};
    j["conservation_residual"] = smoney(r.conservation.residual);
    j["chi_square"] = chi_json(r.chi_square);

    if (r.attack) {
        const auto& a = *r.attack;
        j["attack"] = json{{"mode", a.mode},
                           {"mining_share", a.mining_share},
                           {"attacker_wins", a.attacker_wins},
                           {"total_rounds", a.total_rounds},
                           {"withhold_count", a.withhold_count},
                           {"commit_rejections", a.commit_rejections},
                           {"fair_rate", a.fair_rate}};
    } else {
        j["attack"] = nullptr;
    }
    if (r.sybil) {
        const auto& s = *r.sybil;
        json audit = json::array();
        for (const auto& a : s.audit) {
            audit.push_back(json{{"round", a.round}, {"address", a.address}, {"controller", a.controller}, {"salt", a.salt}});
        }
        j["sybil"] = json{{"sybil_admitted", s.sybil_admitted},
                          {"sybil_spend", money(s.sybil_spend)},
                          {"attempted", s.attempted},
                          {"hash_attempts", s.hash_attempts},
                          {"audit", audit}};
    } else {
        j["sybil"] = nullptr;
    }

    j["chain"] = json{{"height", r.chain_height}, {"tip", r.chain_tip}, {"valid", r.chain_valid}};
    j["notes"] = r.notes;

    json rejections = json::array();
    for (const auto& x : r.rejections) {
        rejections.push_back(json{{"round", x.round}, {"op", x.op}, {"player", x.player}, {"reason", x.reason}});
    }
    j["rejections"] = rejections;

    json rounds = json::array();
    for (const auto& rr : r.round_records) {
        rounds.push_back(json{{"round", rr.round},
                              {"lottery_id", rr.lottery_id},
                              {"host", rr.host},
                              {"winners", rr.winners},
                              {"winning_players", rr.winning_players},
                              {"pool", money(rr.pool)},
                              {"winning_shares", rr.winning_shares},
                              {"phi", money(rr.phi)},
                              {"aborted", rr.aborted},
                              {"withheld", rr.withheld},
                              {"draw_height", rr.draw_height},
                              {"residual", smoney(rr.residual)}});
    }
    j["round_records"] = rounds;
    if (include_timing) j["elapsed_seconds"] = r.elapsed_seconds;
    return j;
}

json aggregate_json(const AggregateReport& a, bool include_timing) {
    json j;
    j["schema"] = kAggregateSchema;
    j["scenario"] = a.scenario_name;
    j["base_seed"] = a.base_seed;
    j["n_seeds"] = a.n_seeds;
    j["pass"] = a.pass;
    j["conservation_ok"] = a.conservation_ok;
    j["chain_ok"] = a.chain_ok;
    j["chi_square"] = chi_json(a.chi_square);
    j["chi_square_passing_runs"] = a.chi_square_passing_runs;
    json players = json::array();
    for (const auto& p : a.players) {
        players.push_back(json{{"seed", p.seed},
                               {"address", p.address},
                               {"wins", p.wins},
                               {"final_balance_sum", money(p.final_balance_sum)}});
    }
    j["players"] = players;
    if (a.attack) {
        const auto& t = *a.attack;
        j["attack"] = json{{"mode", t.mode},
                           {"mining_share", t.mining_share},
                           {"attacker_wins", t.attacker_wins},
                           {"total_rounds", t.total_rounds},
                           {"withhold_count", t.withhold_count},
                           {"rate", t.rate},
                           {"standard_error", t.standard_error},
                           {"fair_rate", t.fair_rate},
                           {"amplification", t.amplification}};
    } else {
        j["attack"] = nullptr;
    }
    j["sybil_admitted"] = a.sybil_admitted;
    j["sybil_spend"] = money(a.sybil_spend);
    json runs = json::array();
    for (const auto& r : a.runs) runs.push_back(run_json(r, include_timing));
    j["runs"] = runs;
    return j;
}

// ---------------------------------------------------------------- from json

Money get_money(const json& j, const char* key) { return parse_money(j.at(key).get<std::string>()); }
SignedMoney get_smoney(const json& j, const char* key) { return parse_signed_money(j.at(key).get<std::string>()); }

std::optional<ChiSquareResult> chi_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    ChiSquareResult c;
    c.statistic = j.at("statistic").get<double>();
    c.df = j.at("df").get<std::uint64_t>();
    c.pass = j.at("pass").get<bool>();
    return c;
}

RunReport run_from(const json& j) {
    if (j.at("schema").get<std::string>() != kRunSchema) throw std::runtime_error("unexpected run schema");
    RunReport r;
    r.scenario_name = j.at("scenario").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.rng_mode = j.at("rng_mode").get<std::string>();
    r.pool_mode = j.at("pool_mode").get<std::string>();
    r.rounds = j.at("rounds").get<std::uint64_t>();
    for (const auto& p : j.at("players")) {
        PlayerResult pr;
        pr.seed = p.at("seed").get<std::string>();
        pr.address = p.at("address").get<std::string>();
        pr.initial_balance = get_money(p, "initial_balance");
        pr.final_balance = get_money(p, "final_balance");
        pr.wins = p.at("wins").get<std::uint64_t>();
        pr.total_payout = get_money(p, "total_payout");
        pr.total_forfeited = get_money(p, "total_forfeited");
        r.players.push_back(pr);
    }
    const auto& c = j.at("conservation");
    r.conservation.minted = get_money(c, "minted");
    r.conservation.final_total = get_money(c, "final_total");
    r.conservation.fee_sink = get_money(c, "fee_sink");
    r.conservation.escrow_total = get_money(c, "escrow_total");
    r.conservation.residual = get_smoney(c, "residual");
    r.chi_square = chi_from(j.at("chi_square"));
    if (const auto& a = j.at("attack"); !a.is_null()) {
        AttackMetrics m;
        m.mode = a.at("mode").get<std::string>();
        m.mining_share = a.at("mining_share").get<double>();
        m.attacker_wins = a.at("attacker_wins").get<std::uint64_t>();
        m.total_rounds = a.at("total_rounds").get<std::uint64_t>();
        m.withhold_count = a.at("withhold_count").get<std::uint64_t>();
        m.commit_rejections = a.at("commit_rejections").get<std::uint64_t>();
        m.fair_rate = a.at("fair_rate").get<double>();
        r.attack = m;
    }
    if (const auto& s = j.at("sybil"); !s.is_null()) {
        SybilMetrics m;
        m.sybil_admitted = s.at("sybil_admitted").get<std::uint64_t>();
        m.sybil_spend = get_money(s, "sybil_spend");
        m.attempted = s.at("attempted").get<std::uint64_t>();
        m.hash_attempts = s.at("hash_attempts").get<std::uint64_t>();
        for (const auto& a : s.at("audit")) {
            m.audit.push_back(SybilAudit{a.at("round").get<std::uint64_t>(), a.at("address").get<std::string>(),
                                         a.at("controller").get<std::string>(), a.at("salt").get<std::uint64_t>()});
        }
        r.sybil = m;
    }
    const auto& chain = j.at("chain");
    r.chain_height = chain.at("height").get<std::uint64_t>();
    r.chain_tip = chain.at("tip").get<std::string>();
    r.chain_valid = chain.at("valid").get<bool>();
    r.notes = j.at("notes").get<std::vector<std::string>>();
    for (const auto& x : j.at("rejections")) {
        r.rejections.push_back(Rejection{x.at("round").get<std::uint64_t>(), x.at("op").get<std::string>(),
                                         x.at("player").get<std::string>(), x.at("reason").get<std::string>()});
    }
    for (const auto& rr : j.at("round_records")) {
        RoundRecord rec;
        rec.round = rr.at("round").get<std::uint64_t>();
        rec.lottery_id = rr.at("lottery_id").get<std::uint64_t>();
        rec.host = rr.at("host").get<std::string>();
        rec.winners = rr.at("winners").get<std::vector<std::uint64_t>>();
        rec.winning_players = rr.at("winning_players").get<std::vector<std::string>>();
        rec.pool = get_money(rr, "pool");
        rec.winning_shares = rr.at("winning_shares").get<std::uint64_t>();
        rec.phi = get_money(rr, "phi");
        rec.aborted = rr.at("aborted").get<bool>();
        rec.withheld = rr.at("withheld").get<std::uint64_t>();
        rec.draw_height = rr.at("draw_height").get<std::uint64_t>();
        rec.residual = get_smoney(rr, "residual");
        r.round_records.push_back(std::move(rec));
    }
    if (j.contains("elapsed_seconds")) r.elapsed_seconds = j.at("elapsed_seconds").get<double>();
    return r;
}

AggregateReport aggregate_from(const json& j) {
    if (j.at("schema").get<std::string>() != kAggregateSchema) {
        throw std::runtime_error("unexpected aggregate schema");
    }
    AggregateReport a;
    a.scenario_name = j.at("scenario").get<std::string>();
    a.base_seed = j.at("base_seed").get<std::uint64_t>();
    a.n_seeds = j.at("n_seeds").get<std::uint64_t>();
    a.pass = j.at("pass").get<bool>();
    a.conservation_ok = j.at("conservation_ok").get<bool>();
    a.chain_ok = j.at("chain_ok").get<bool>();
    a.chi_square = chi_from(j.at("chi_square"));
    a.chi_square_passing_runs = j.at("chi_square_passing_runs").get<std::uint64_t>();
    for (const auto& p : j.at("players")) {
        a.players.push_back(PlayerAggregate{p.at("seed").get<std::string>(), p.at("address").get<std::string>(),
                                            p.at("wins").get<std::uint64_t>(), get_money(p, "final_balance_sum")});
    }
    if (const auto& t = j.at("attack"); !t.is_null()) {
        AttackAggregate m;
        m.mode = t.at("mode").get<std::string>();
        m.mining_share = t.at("mining_share").get<double>();
        m.attacker_wins = t.at("attacker_wins").get<std::uint64_t>();
        m.total_rounds = t.at("total_rounds").get<std::uint64_t>();
        m.withhold_count = t.at("withhold_count").get<std::uint64_t>();
        m.rate = t.at("rate").get<double>();
        m.standard_error = t.at("standard_error").get<double>();
        m.fair_rate = t.at("fair_rate").get<double>();
        m.amplification = t.at("amplification").get<double>();
        a.attack = m;
    }
    a.sybil_admitted = j.at("sybil_admitted").get<std::uint64_t>();
    a.sybil_spend = get_money(j, "sybil_spend");
    for (const auto& r : j.at("runs")) a.runs.push_back(run_from(r));
    return a;
}

void write_file(const std::filesystem::path& out, const std::string& content) {
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + out.string() + " for writing: " + std::strerror(errno));
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write to " + out.string() + " failed: " + std::strerror(errno));
}

}  // namespace

std::vector<std::uint64_t> RunReport::winner_histogram() const {
    std::vector<std::uint64_t> out;
    out.reserve(players.size());
    for (const auto& p : players) out.push_back(p.wins);
    return out;
}

bool RunReport::operator==(const RunReport& o) const {
    return scenario_name == o.scenario_name && seed == o.seed && rng_mode == o.rng_mode &&
           pool_mode == o.pool_mode && rounds == o.rounds && players == o.players &&
           round_records == o.round_records && rejections == o.rejections && conservation == o.conservation &&
           chi_square == o.chi_square && attack == o.attack && sybil == o.sybil && notes == o.notes &&
           chain_height == o.chain_height && chain_tip == o.chain_tip && chain_valid == o.chain_valid;
}

ReportFormat parse_report_format(std::string_view text) {
    if (text == "json") return ReportFormat::Json;
    if (text == "csv") return ReportFormat::Csv;
    throw std::invalid_argument("format must be json or csv, got '" + std::string(text) + "'");
}

std::string report_to_json(const RunReport& report, bool include_timing) {
    return dump(run_json(report, include_timing));
}

std::string report_to_json(const AggregateReport& report, bool include_timing) {
    return dump(aggregate_json(report, include_timing));
}

RunReport run_report_from_json(std::string_view text) { return run_from(json::parse(text)); }

AggregateReport aggregate_report_from_json(std::string_view text) { return aggregate_from(json::parse(text)); }

std::string report_to_csv(const RunReport& report) {
    std::ostringstream out;
    out << "player,address_hex,wins,final_balance\n";
    for (const auto& p : report.players) {
        out << p.seed << ',' << p.address << ',' << p.wins << ',' << money_to_string(p.final_balance) << '\n';
    }
    return out.str();
}

std::string report_to_csv(const AggregateReport& report) {
    std::ostringstream out;
    out << "player,address_hex,wins,final_balance_sum\n";
    for (const auto& p : report.players) {
        out << p.seed << ',' << p.address << ',' << p.wins << ',' << money_to_string(p.final_balance_sum) << '\n';
    }
    return out.str();
}

void emit_report(const RunReport& report, const std::filesystem::path& out, ReportFormat format,
                 bool include_timing) {
    write_file(out, format == ReportFormat::Json ? report_to_json(report, include_timing) : report_to_csv(report));
}

void emit_report(const AggregateReport& report, const std::filesystem::path& out, ReportFormat format,
                 bool include_timing) {
    write_file(out, format == ReportFormat::Json ? report_to_json(report, include_timing) : report_to_csv(report));
}

VerifyResult verify_report_json(std::string_view text) {
    VerifyResult v;
    auto fail = [&](std::string msg) {
        v.ok = false;
        v.failures.push_back(std::move(msg));
    };

    AggregateReport agg;
    try {
        agg = aggregate_report_from_json(text);
    } catch (const std::exception& e) {
        fail(std::string("schema: ") + e.what());
        return v;
    }
    if (agg.runs.size() != agg.n_seeds) fail("n_seeds does not match the number of runs");

    for (const auto& r : agg.runs) {
        const auto tag = "seed " + std::to_string(r.seed) + ": ";
        const auto& c = r.conservation;
        if (c.residual != 0) fail(tag + "conservation residual " + signed_money_to_string(c.residual));
        const auto recomputed = static_cast<SignedMoney>(c.final_total) - static_cast<SignedMoney>(c.minted);
        if (recomputed != c.residual) fail(tag + "residual does not equal final_total - minted");
        Money balances = 0;
        Money minted = 0;
        for (const auto& p : r.players) {
            balances += p.final_balance;
            minted += p.initial_balance;
        }
        if (balances + c.fee_sink + c.escrow_total > c.final_total) {
            fail(tag + "player balances exceed the recorded total");
        }
        if (minted > c.minted) fail(tag + "player initial balances exceed minted supply");
        for (const auto& rr : r.round_records) {
            if (rr.residual != 0) fail(tag + "round " + std::to_string(rr.round) + " residual nonzero");
        }
        if (!r.chain_valid) fail(tag + "chain flagged invalid");
        if (r.round_records.size() != r.rounds) fail(tag + "round record count mismatch");
        if (r.chi_square) {
            auto counts = r.winner_histogram();
            try {
                auto re = chi_square_uniform(counts);
                if (re.df != r.chi_square->df || re.pass != r.chi_square->pass ||
                    std::abs(re.statistic - r.chi_square->statistic) > 1e-9 * std::max(1.0, re.statistic)) {
                    fail(tag + "chi-square does not match the winner histogram");
                }
            } catch (const std::exception& e) {
                fail(tag + "chi-square recomputation failed: " + e.what());
            }
        }
    }
    bool all_zero = std::all_of(agg.runs.begin(), agg.runs.end(),
                                [](const RunReport& r) { return r.conservation.residual == 0; });
    if (agg.conservation_ok != all_zero) fail("conservation_ok flag disagrees with the runs");
    if (!agg.pass) fail("aggregate flagged failing");
    return v;
}

}  // namespace delottery
