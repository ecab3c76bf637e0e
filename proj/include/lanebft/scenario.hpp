// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <lanebft/net.hpp>

#include <filesystem>

namespace lanebft {

/// Scenario file problems carry a human-readable diagnostic; the CLI turns
/// them into exit code 1.
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses a scenario file (schema in the README). Unknown keys anywhere are
/// rejected. A "genesis" path is resolved relative to the scenario file.
SimConfig load_scenario(const std::filesystem::path& path);
SimConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir);

std::vector<std::pair<Address, u256>> load_genesis_file(const std::filesystem::path& path);
void write_genesis_file(const std::filesystem::path& path,
                        const std::vector<std::pair<Address, u256>>& accounts);

// Transaction field files for `tx encode` and the shipped test vectors.
Transaction transaction_from_json(const std::string& text);
std::string transaction_to_json(const Transaction& tx);

}  // namespace lanebft
