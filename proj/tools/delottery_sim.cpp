#include "delottery/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace delottery;

namespace {

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << body;
}

std::string attack_records(const AggregateReport& agg) {
    std::ostringstream out;
    if (agg.attack) {
        const auto& a = *agg.attack;
        char share[32];
        std::snprintf(share, sizeof share, "%.17g", a.mining_share);
        out << a.mode << ',' << share << ',' << a.attacker_wins << ',' << a.total_rounds << ','
            << a.withhold_count << '\n';
    }
    return out.str();
}

std::string sybil_records(const AggregateReport& agg) {
    return std::to_string(agg.sybil_admitted) + "," + money_to_string(agg.sybil_spend) + "\n";
}

int run_command(const std::string& scenario_path, std::uint64_t seeds, std::optional<std::uint64_t> base_seed,
                const std::string& mode, const std::string& pool_mode, const std::string& out,
                const std::string& format, bool timing, const std::string& dump_dir, unsigned workers) {
    auto sc = load_scenario(scenario_path);
    if (base_seed) sc.base_seed = *base_seed;
    if (!mode.empty()) sc.config.rng_mode = parse_rng_mode(mode);
    if (!pool_mode.empty()) sc.config.pool_mode = parse_pool_mode(pool_mode);
    sc.validate();

    const auto agg = run_many(sc, seeds, {}, workers);
    emit_report(agg, out, parse_report_format(format), timing);

    if (!dump_dir.empty()) {
        std::filesystem::create_directories(dump_dir);
        RunArtifacts artifacts;
        run_once(sc, sc.base_seed, {}, &artifacts);
        const std::filesystem::path dir(dump_dir);
        write_file(dir / "chain.csv", artifacts.chain_dump);
        write_file(dir / "rounds.csv", artifacts.round_transcripts);
        write_file(dir / "settlement.csv", artifacts.settlement_reports);
        write_file(dir / "attack.csv", attack_records(agg));
        write_file(dir / "sybil.csv", sybil_records(agg));
    }

    std::cerr << sc.name << ": " << agg.n_seeds << " seed(s), conservation "
              << (agg.conservation_ok ? "ok" : "FAILED") << ", chain " << (agg.chain_ok ? "ok" : "FAILED")
              << '\n';
    return agg.pass ? 0 : 1;
}

int verify_command(const std::string& report_path) {
    std::ifstream in(report_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open report " + report_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const auto result = verify_report_json(buf.str());
    for (const auto& f : result.failures) std::cout << "FAIL " << f << '\n';
    std::cout << (result.ok ? "report ok" : "report failed") << '\n';
    return result.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic DeLottery protocol simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a scenario over a range of seeds");
    std::string scenario, mode, pool_mode, out, format = "json", dump_dir;
    std::uint64_t seeds = 1;
    std::optional<std::uint64_t> base_seed;
    bool timing = false;
    unsigned workers = 0;
    run->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--seeds", seeds, "Number of seeds")->check(CLI::PositiveNumber);
    run->add_option("--base-seed", base_seed, "First seed (defaults to the scenario's base_seed)");
    run->add_option("--mode", mode, "RNG mode override")->check(CLI::IsMember({"naive", "commit-reveal"}));
    run->add_option("--pool-mode", pool_mode, "Prize pool mode override")
        ->check(CLI::IsMember({"literal", "consistent"}));
    run->add_option("--out", out, "Report path")->required();
    run->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    run->add_flag("--timing", timing, "Include wall-clock timings in the report");
    run->add_option("--dump-dir", dump_dir, "Write chain, round, settlement and attack records for the first seed");
    run->add_option("--workers", workers, "Worker threads (0 = all cores)");

    auto* verify = app.add_subcommand("verify", "Re-check the invariants of a JSON report");
    std::string report;
    verify->add_option("--report", report, "Report path")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            return run_command(scenario, seeds, base_seed, mode, pool_mode, out, format, timing, dump_dir,
                               workers);
        }
        return verify_command(report);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
