// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/scenario.hpp>

#include <json.hpp>

#include <fstream>

namespace lanebft {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (key == k)
                ok = true;
        if (!ok)
            throw ScenarioError(std::string(where) + ": unknown key '" + key + "'");
    }
}

u256 u256_from_json(const json& v, const char* where) {
    if (v.is_number_unsigned())
        return u256(v.get<uint64_t>());
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        u256 out = 0;
        if (s.rfind("0x", 0) == 0) {
            for (size_t i = 2; i < s.size(); ++i) {
                int nibble = s[i] >= '0' && s[i] <= '9'   ? s[i] - '0'
                             : s[i] >= 'a' && s[i] <= 'f' ? s[i] - 'a' + 10
                             : s[i] >= 'A' && s[i] <= 'F' ? s[i] - 'A' + 10
                                                          : -1;
                if (nibble < 0)
                    throw ScenarioError(std::string(where) + ": bad hex amount");
                out = out * 16 + nibble;
            }
            return out;
        }
        for (char c : s) {
            if (c < '0' || c > '9')
                throw ScenarioError(std::string(where) + ": bad decimal amount");
            out = out * 10 + (c - '0');
        }
        return out;
    }
    throw ScenarioError(std::string(where) + ": amount must be unsigned or string");
}

Address address_from_hex(const std::string& hex, const char* where) {
    Bytes raw;
    try {
        raw = from_hex(hex);
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(std::string(where) + ": " + e.what());
    }
    if (raw.size() != 20)
        throw ScenarioError(std::string(where) + ": address must be 20 bytes");
    Address a;
    std::copy(raw.begin(), raw.end(), a.bytes.begin());
    return a;
}

DelayModel delay_from_json(const json& v, const char* where) {
    check_keys(v, where, {"dist", "min_ms", "max_ms"});
    DelayModel model;
    std::string dist = v.value("dist", "fixed");
    if (dist == "fixed")
        model.dist = DelayModel::Dist::kFixed;
    else if (dist == "uniform")
        model.dist = DelayModel::Dist::kUniform;
    else
        throw ScenarioError(std::string(where) + ": dist must be fixed or uniform");
    model.min_ms = v.value("min_ms", 50ull);
    model.max_ms = v.value("max_ms", model.min_ms);
    if (model.max_ms < model.min_ms)
        throw ScenarioError(std::string(where) + ": max_ms below min_ms");
    return model;
}

FaultBehavior behavior_from_string(const std::string& name) {
    if (name == "crash")
        return FaultBehavior::kCrash;
    if (name == "silent_leader")
        return FaultBehavior::kSilentLeader;
    if (name == "equivocate_lane")
        return FaultBehavior::kEquivocateLane;
    if (name == "withhold_batch")
        return FaultBehavior::kWithholdBatch;
    if (name == "wrong_state_root")
        return FaultBehavior::kWrongStateRoot;
    if (name == "omit_certified_tip")
        return FaultBehavior::kOmitCertifiedTip;
    throw ScenarioError("faults: unknown behavior '" + name + "'");
}

}  // namespace

SimConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw ScenarioError("scenario must be a JSON object");
    check_keys(doc, "scenario", {"net", "consensus", "workload", "genesis", "duration_ms"});

    SimConfig config;

    if (doc.contains("net")) {
        const json& net = doc.at("net");
        check_keys(net, "net",
                   {"n", "f", "seed", "gst_ms", "pre_gst_delay", "post_gst_delay", "stakes",
                    "faults", "allow_fault_overflow"});
        config.net.n = net.value("n", 4u);
        config.net.f = net.value("f", (config.net.n - 1) / 3);
        config.net.seed = net.value("seed", 1ull);
        config.net.gst_ms = net.value("gst_ms", 0ull);
        if (net.contains("pre_gst_delay"))
            config.net.pre_gst = delay_from_json(net.at("pre_gst_delay"), "pre_gst_delay");
        if (net.contains("post_gst_delay"))
            config.net.post_gst = delay_from_json(net.at("post_gst_delay"), "post_gst_delay");
        else
            config.net.pre_gst = config.net.post_gst = delay_from_json(
                net.value("post_gst_delay", json{{"dist", "fixed"}, {"min_ms", 50}}), "delay");
        if (!net.contains("pre_gst_delay"))
            config.net.pre_gst = config.net.post_gst;
        if (net.contains("stakes")) {
            for (const auto& s : net.at("stakes"))
                config.net.stakes.push_back(s.get<uint64_t>());
        }
        config.net.allow_fault_overflow = net.value("allow_fault_overflow", false);
        if (net.contains("faults")) {
            for (const auto& fj : net.at("faults")) {
                check_keys(fj, "faults", {"replica", "behavior", "from_ms", "to_ms", "param"});
                FaultSpec fault;
                fault.replica = fj.at("replica").get<uint32_t>();
                fault.behavior = behavior_from_string(fj.at("behavior").get<std::string>());
                fault.from_ms = fj.value("from_ms", 0ull);
                fault.to_ms = fj.value("to_ms", UINT64_MAX);
                fault.param = fj.value("param", 1ull);
                config.net.faults.push_back(fault);
            }
        }
    }

    if (doc.contains("consensus")) {
        const json& c = doc.at("consensus");
        check_keys(c, "consensus",
                   {"pipelining", "timeout_ms", "timeout_backoff", "batch_cap", "car_interval_ms",
                    "heartbeat_cars", "exec_workers", "exec_delay_ms", "occ_retry_budget",
                    "fetch_retry_ms", "chain_id", "state_lag_bound"});
        config.replica.pipelining = c.value("pipelining", true);
        config.replica.timeout_ms = c.value("timeout_ms", 2000ull);
        config.replica.timeout_backoff = c.value("timeout_backoff", 1.0);
        config.replica.batch_cap = c.value("batch_cap", 512u);
        config.replica.car_interval_ms = c.value("car_interval_ms", 100ull);
        config.replica.heartbeat_cars = c.value("heartbeat_cars", false);
        config.replica.exec_workers = c.value("exec_workers", 4u);
        config.replica.exec_delay_ms = c.value("exec_delay_ms", 0ull);
        config.replica.occ_retry_budget = c.value("occ_retry_budget", 4u);
        config.replica.fetch_retry_ms = c.value("fetch_retry_ms", 200ull);
        config.replica.chain_id = c.value("chain_id", 7ull);
        config.replica.state_lag_bound = c.value("state_lag_bound", 1000ull);
    }

    if (doc.contains("workload")) {
        const json& w = doc.at("workload");
        check_keys(w, "workload",
                   {"tx_rate_per_lane", "duration_ms", "mix", "hot_slots", "duplicate_fraction",
                    "accounts_per_lane", "initial_balance"});
        config.workload.tx_rate_per_lane = w.value("tx_rate_per_lane", 10.0);
        config.workload.duration_ms = w.value("duration_ms", 10000ull);
        if (w.contains("mix")) {
            const json& mix = w.at("mix");
            check_keys(mix, "mix", {"transfer", "sstore", "sload_add", "overdraft"});
            config.workload.w_transfer = mix.value("transfer", 0.0);
            config.workload.w_sstore = mix.value("sstore", 0.0);
            config.workload.w_sload_add = mix.value("sload_add", 0.0);
            config.workload.w_overdraft = mix.value("overdraft", 0.0);
        }
        config.workload.hot_slots = w.value("hot_slots", 16u);
        config.workload.duplicate_fraction = w.value("duplicate_fraction", 0.0);
        config.workload.accounts_per_lane = w.value("accounts_per_lane", 8u);
        if (w.contains("initial_balance"))
            config.workload.initial_balance = u256_from_json(w.at("initial_balance"), "initial_balance");
    }

    if (doc.contains("genesis")) {
        std::filesystem::path path = doc.at("genesis").get<std::string>();
        if (path.is_relative())
            path = base_dir / path;
        config.genesis = load_genesis_file(path);
    }

    config.duration_ms = doc.value("duration_ms", 15000ull);

    try {
        config.net.validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(e.what());
    }
    return config;
}

SimConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ScenarioError("cannot open scenario file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_scenario(text, path.parent_path());
}

std::vector<std::pair<Address, u256>> load_genesis_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ScenarioError("cannot open genesis file: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("genesis is not valid JSON: ") + e.what());
    }
    check_keys(doc, "genesis", {"accounts"});
    std::vector<std::pair<Address, u256>> accounts;
    for (const auto& entry : doc.at("accounts")) {
        check_keys(entry, "genesis account", {"address", "balance"});
        accounts.emplace_back(address_from_hex(entry.at("address").get<std::string>(), "genesis"),
                              u256_from_json(entry.at("balance"), "genesis"));
    }
    return accounts;
}

void write_genesis_file(const std::filesystem::path& path,
                        const std::vector<std::pair<Address, u256>>& accounts) {
    json doc;
    doc["accounts"] = json::array();
    for (const auto& [addr, balance] : accounts) {
        json entry;
        entry["address"] = "0x" + to_hex(ByteView(addr.bytes.data(), addr.bytes.size()));
        std::ostringstream dec;
        dec << balance;
        entry["balance"] = dec.str();
        doc["accounts"].push_back(entry);
    }
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
}

Transaction transaction_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("tx field file is not valid JSON: ") + e.what());
    }
    check_keys(doc, "tx",
               {"tx_type", "chain_id", "sender", "to", "value", "nonce", "gas_limit", "gas_price",
                "access_list", "signature", "input"});
    Transaction tx;
    tx.tx_type = static_cast<uint8_t>(doc.value("tx_type", 0u));
    tx.chain_id = doc.value("chain_id", 0ull);
    tx.sender = address_from_hex(doc.at("sender").get<std::string>(), "tx.sender");
    if (doc.contains("to") && !doc.at("to").is_null())
        tx.to = address_from_hex(doc.at("to").get<std::string>(), "tx.to");
    if (doc.contains("value"))
        tx.value = u256_from_json(doc.at("value"), "tx.value");
    tx.nonce = doc.value("nonce", 0ull);
    tx.gas_limit = doc.value("gas_limit", 0ull);
    if (doc.contains("gas_price"))
        tx.gas_price = u256_from_json(doc.at("gas_price"), "tx.gas_price");
    if (doc.contains("access_list")) {
        for (const auto& ej : doc.at("access_list")) {
            check_keys(ej, "access_list entry", {"address", "storage_keys"});
            AccessListEntry entry;
            entry.address = address_from_hex(ej.at("address").get<std::string>(), "access_list");
            if (ej.contains("storage_keys")) {
                for (const auto& kj : ej.at("storage_keys")) {
                    Bytes raw = from_hex(kj.get<std::string>());
                    if (raw.size() != 32)
                        throw ScenarioError("access_list: storage key must be 32 bytes");
                    Bytes32 key;
                    std::copy(raw.begin(), raw.end(), key.bytes.begin());
                    entry.storage_keys.push_back(key);
                }
            }
            tx.access_list.push_back(std::move(entry));
        }
    }
    if (doc.contains("signature")) {
        Bytes raw = from_hex(doc.at("signature").get<std::string>());
        if (raw.size() != 65)
            throw ScenarioError("tx.signature must be 65 bytes");
        std::copy(raw.begin(), raw.end(), tx.signature.begin());
    }
    if (doc.contains("input"))
        tx.input = from_hex(doc.at("input").get<std::string>());
    return tx;
}

std::string transaction_to_json(const Transaction& tx) {
    json doc;
    doc["tx_type"] = tx.tx_type;
    doc["chain_id"] = tx.chain_id;
    doc["sender"] = "0x" + to_hex(ByteView(tx.sender.bytes.data(), 20));
    if (tx.to)
        doc["to"] = "0x" + to_hex(ByteView(tx.to->bytes.data(), 20));
    else
        doc["to"] = nullptr;
    std::ostringstream value;
    value << tx.value;
    doc["value"] = value.str();
    doc["nonce"] = tx.nonce;
    doc["gas_limit"] = tx.gas_limit;
    std::ostringstream price;
    price << tx.gas_price;
    doc["gas_price"] = price.str();
    doc["access_list"] = json::array();
    for (const auto& entry : tx.access_list) {
        json ej;
        ej["address"] = "0x" + to_hex(ByteView(entry.address.bytes.data(), 20));
        ej["storage_keys"] = json::array();
        for (const auto& key : entry.storage_keys)
            ej["storage_keys"].push_back("0x" + to_hex(ByteView(key.bytes.data(), 32)));
        doc["access_list"].push_back(ej);
    }
    doc["signature"] = "0x" + to_hex(ByteView(tx.signature.data(), tx.signature.size()));
    doc["input"] = "0x" + to_hex(ByteView(tx.input.data(), tx.input.size()));
    return doc.dump(2);
}

}  // namespace lanebft
