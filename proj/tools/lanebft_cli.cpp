// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/net.hpp>
#include <lanebft/scenario.hpp>
#include <lanebft/wal.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace lanebft;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitViolation = 2;

std::string lane_tips_json(const JournalEntry& entry) {
    std::ostringstream out;
    out << "[";
    for (size_t lane = 0; lane < entry.lane_tips.size(); ++lane) {
        if (lane)
            out << ",";
        const auto& [has, pos] = entry.lane_tips[lane];
        if (has)
            out << pos;
        else
            out << "null";
    }
    out << "]";
    return out.str();
}

void write_outputs(const std::filesystem::path& out_dir, Simulation& sim, const SimResult& result,
                   bool with_trace) {
    std::filesystem::create_directories(out_dir);

    std::ofstream mjson(out_dir / "metrics.json");
    mjson << metrics_json(result.metrics) << "\n";
    std::ofstream mtable(out_dir / "metrics.txt");
    mtable << metrics_table(result.metrics);

    // Committed-cut journal (replica 0's view), one JSON record per line:
    // {"slot":..,"view":..,"cut":"hex","lane_tips":[pos|null,...],"commit_signers":bitmap}
    std::ofstream journal(out_dir / "journal.jsonl");
    for (const auto& entry : sim.replica(0).journal()) {
        journal << "{\"slot\":" << entry.slot << ",\"view\":" << entry.view << ",\"cut\":\""
                << entry.cut.hex() << "\",\"lane_tips\":" << lane_tips_json(entry)
                << ",\"commit_signers\":" << entry.commit_signer_bitmap << "}\n";
    }

    if (with_trace) {
        std::ofstream trace(out_dir / "trace.log");
        for (const auto& event : sim.trace())
            trace << trace_line(event) << "\n";
    }
}

int run_one(SimConfig config, const std::filesystem::path& out_dir, bool with_trace, bool quiet) {
    Simulation sim(std::move(config));
    SimResult result = sim.run();
    if (!out_dir.empty())
        write_outputs(out_dir, sim, result, with_trace);
    if (result.violation) {
        std::cerr << "invariant violation: " << result.violation_message
                  << " (reproduction seed " << result.seed << ")\n";
        return kExitViolation;
    }
    if (!quiet) {
        std::cout << metrics_table(result.metrics);
        std::cout << "trace digest            " << trace_digest(sim.trace()).hex() << "\n";
    } else {
        std::cout << "seed " << result.seed << ": cuts " << result.metrics.committed_cuts
                  << ", latency " << result.metrics.mean_commit_latency_rt << " rt, view changes "
                  << result.metrics.view_changes << ", halted "
                  << (result.metrics.halted ? "true" : "false") << "\n";
    }
    return kExitOk;
}

int cmd_tx_decode(const std::string& hex) {
    Bytes payload;
    try {
        payload = from_hex(hex);
    } catch (const std::invalid_argument& e) {
        std::cerr << "bad hex: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        Transaction tx = decode_transaction(ByteView(payload.data(), payload.size()));
        std::cout << transaction_to_json(tx) << "\n";
        return kExitOk;
    } catch (const DecodeError& e) {
        std::cerr << "decode error at offset " << e.offset() << ": " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_tx_encode(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "cannot open field file: " << path << "\n";
        return kExitConfig;
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        Transaction tx = transaction_from_json(text);
        std::cout << to_hex(encode_transaction(tx)) << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_wal_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "cannot open WAL file: " << path << "\n";
        return kExitConfig;
    }
    Bytes log((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        WalScan scan = scan_wal(ByteView(log.data(), log.size()));
        for (const auto& record : scan.records) {
            std::cout << "seq=" << record.seq << " height=" << record.height;
            if (record.kind == WalRecordKind::kHeightMarker) {
                std::cout << " height-marker\n";
                continue;
            }
            std::cout << " key=" << to_hex(record.key.encode());
            std::cout << " old=";
            if (record.old_value)
                std::cout << to_hex(ByteView(record.old_value->bytes.data(), 32));
            else
                std::cout << "-";
            std::cout << " new=";
            if (record.new_value)
                std::cout << to_hex(ByteView(record.new_value->bytes.data(), 32));
            else
                std::cout << "-";
            std::cout << "\n";
        }
        if (scan.torn_tail)
            std::cout << "torn-tail at offset " << scan.torn_offset << "\n";
        return kExitOk;
    } catch (const WalCorruptionError& e) {
        std::cerr << "corruption at offset " << e.offset() << ": " << e.what() << "\n";
        return kExitConfig;
    }
}

uint64_t env_seed_override(uint64_t seed) {
    if (const char* env = std::getenv("LANEBFT_SEED"))
        return std::strtoull(env, nullptr, 10);
    return seed;
}

std::string env_out_override(std::string out) {
    if (const char* env = std::getenv("LANEBFT_OUT"))
        return env;
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-lane BFT ledger simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "execute a scenario");
    std::string scenario_path;
    uint64_t seed = 0;
    std::string out_dir;
    bool with_trace = false;
    run->add_option("--scenario", scenario_path, "scenario file")->required();
    CLI::Option* seed_opt = run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--out", out_dir, "output directory for metrics/journal/trace");
    run->add_flag("--trace", with_trace, "also write the full trace file");

    auto* sweep = app.add_subcommand("sweep", "run a scenario across many seeds");
    std::string sweep_scenario;
    uint32_t sweep_count = 10;
    uint64_t base_seed = 1;
    sweep->add_option("--scenario", sweep_scenario, "scenario file")->required();
    sweep->add_option("--seeds", sweep_count, "number of seeds to run");
    sweep->add_option("--base-seed", base_seed, "first seed of the sweep");

    auto* tx = app.add_subcommand("tx", "transaction codec utilities");
    tx->require_subcommand(1);
    auto* tx_decode = tx->add_subcommand("decode", "decode a hex payload to fields");
    std::string tx_hex;
    tx_decode->add_option("hex", tx_hex, "hex-encoded transaction")->required();
    auto* tx_encode = tx->add_subcommand("encode", "encode a field file (JSON) to hex");
    std::string tx_file;
    tx_encode->add_option("file", tx_file, "transaction field file")->required();

    auto* wal = app.add_subcommand("wal-dump", "print WAL records as text");
    std::string wal_path;
    wal->add_option("file", wal_path, "WAL file")->required();

    auto* genesis = app.add_subcommand("genesis", "write a genesis file for the workload accounts");
    uint32_t gen_n = 4;
    uint32_t gen_accounts = 8;
    std::string gen_balance = "1000000";
    std::string gen_out = "genesis.json";
    genesis->add_option("--n", gen_n, "replica count");
    genesis->add_option("--accounts-per-lane", gen_accounts, "accounts funded per lane");
    genesis->add_option("--balance", gen_balance, "initial balance per account");
    genesis->add_option("--out", gen_out, "output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            SimConfig config = load_scenario(scenario_path);
            if (seed_opt->count() > 0)
                config.net.seed = seed;
            config.net.seed = env_seed_override(config.net.seed);
            return run_one(std::move(config), env_out_override(out_dir), with_trace, false);
        }
        if (sweep->parsed()) {
            SimConfig base = load_scenario(sweep_scenario);
            int worst = kExitOk;
            for (uint32_t i = 0; i < sweep_count; ++i) {
                SimConfig config = base;
                config.net.seed = base_seed + i;
                int code = run_one(std::move(config), "", false, true);
                worst = std::max(worst, code);
            }
            return worst;
        }
        if (tx_decode->parsed())
            return cmd_tx_decode(tx_hex);
        if (tx_encode->parsed())
            return cmd_tx_encode(tx_file);
        if (wal->parsed())
            return cmd_wal_dump(wal_path);
        if (genesis->parsed()) {
            NetConfig net;
            net.n = gen_n;
            net.f = (gen_n - 1) / 3;
            WorkloadConfig workload;
            workload.accounts_per_lane = gen_accounts;
            u256 balance = 0;
            for (char c : gen_balance) {
                if (c < '0' || c > '9')
                    throw ScenarioError("--balance must be a decimal amount");
                balance = balance * 10 + (c - '0');
            }
            workload.initial_balance = balance;
            write_genesis_file(gen_out, workload_genesis(net, workload));
            std::cout << "wrote " << gen_out << "\n";
            return kExitOk;
        }
    } catch (const ScenarioError& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
