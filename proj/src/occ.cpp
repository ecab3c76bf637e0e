// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/occ.hpp>

#include <atomic>
#include <chrono>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <thread>

namespace lanebft {

std::set<std::pair<uint32_t, uint32_t>> dependency_edges(std::span<const Receipt> receipts) {
    std::set<std::pair<uint32_t, uint32_t>> edges;
    for (uint32_t i = 0; i < receipts.size(); ++i) {
        for (uint32_t j = i + 1; j < receipts.size(); ++j) {
            bool hit = false;
            for (const auto& [loc, value] : receipts[i].writes) {
                if (receipts[j].reads.contains(loc) || receipts[j].writes.contains(loc)) {
                    hit = true;
                    break;
                }
            }
            if (hit)
                edges.emplace(j, i);
        }
    }
    return edges;
}

bool occ_conflict(const Receipt& receipt,
                  std::span<const std::pair<uint32_t, Location>> committed_writes,
                  uint32_t started_at, uint32_t index) {
    for (const auto& [writer, loc] : committed_writes) {
        if (writer < started_at || writer >= index)
            continue;
        if (receipt.reads.contains(loc) || receipt.writes.contains(loc))
            return true;
    }
    return false;
}

namespace {

/// Committed write versions per location, appended strictly in writer-index
/// order because commits happen in index order.
class VersionStore {
public:
    explicit VersionStore(const WorldState& base) : base_(base) {}

    std::optional<Bytes32> read(const Location& loc, uint32_t reader) const {
        {
            std::shared_lock lock(mu_);
            auto it = versions_.find(loc);
            if (it != versions_.end()) {
                const auto& vs = it->second;
                // Latest committed writer below the reader.
                for (auto rit = vs.rbegin(); rit != vs.rend(); ++rit) {
                    if (rit->first < reader)
                        return rit->second;
                }
            }
        }
        return base_.get(loc);
    }

    void commit(uint32_t writer, const std::map<Location, Bytes32>& writes) {
        std::unique_lock lock(mu_);
        for (const auto& [loc, value] : writes)
            versions_[loc].emplace_back(writer, value);
    }

    /// True if any location in `locs` has a committed writer in [from, to).
    template <typename LocSet>
    bool written_in_range(const LocSet& locs, uint32_t from, uint32_t to) const {
        std::shared_lock lock(mu_);
        for (const auto& loc : locs) {
            auto it = versions_.find(loc);
            if (it == versions_.end())
                continue;
            for (const auto& [writer, value] : it->second) {
                if (writer >= from && writer < to)
                    return true;
            }
        }
        return false;
    }

private:
    const WorldState& base_;
    mutable std::shared_mutex mu_;
    std::map<Location, std::vector<std::pair<uint32_t, Bytes32>>> versions_;
};

class VersionedView : public StateView {
public:
    VersionedView(const VersionStore& store, uint32_t reader) : store_(store), reader_(reader) {}

    std::optional<Bytes32> get(const Location& loc) const override {
        return store_.read(loc, reader_);
    }

private:
    const VersionStore& store_;
    uint32_t reader_;
};

struct Slot {
    std::atomic<bool> executed{false};
    uint32_t start = 0;  // committed count when the incarnation began
    Receipt receipt;
};

struct LocPair {
    const Receipt* r;
    struct Iter {
        std::set<Location>::const_iterator rit, rend;
        std::map<Location, Bytes32>::const_iterator wit, wend;
    };
    // Iterate reads then write keys.
    auto begin() const { return Joined{r->reads.begin(), r->reads.end(), r->writes.begin(), r->writes.end()}; }
    auto end() const { return Joined{r->reads.end(), r->reads.end(), r->writes.end(), r->writes.end()}; }

    struct Joined {
        std::set<Location>::const_iterator rit, rend;
        std::map<Location, Bytes32>::const_iterator wit, wend;

        const Location& operator*() const { return rit != rend ? *rit : wit->first; }
        Joined& operator++() {
            if (rit != rend)
                ++rit;
            else
                ++wit;
            return *this;
        }
        bool operator!=(const Joined& o) const { return rit != o.rit || wit != o.wit; }
    };
};

bool conflicts(const VersionStore& store, const Receipt& receipt, uint32_t from, uint32_t to) {
    return store.written_in_range(LocPair{&receipt}, from, to);
}

ParallelResult run_threads(const WorldState& base, std::span<const Transaction> txs,
                           const OccConfig& config) {
    const uint32_t n = static_cast<uint32_t>(txs.size());
    const uint64_t abort_limit = uint64_t(config.retry_budget) * n;

    VersionStore store(base);
    std::vector<Slot> slots(n);
    std::atomic<uint32_t> next_exec{0};
    std::atomic<uint32_t> committed{0};
    std::atomic<uint64_t> executions{0};
    std::atomic<uint64_t> aborts{0};
    std::atomic<bool> fallback{false};
    std::mutex commit_mu;

    ParallelResult result;
    result.state = base;

    auto execute = [&](uint32_t i) {
        slots[i].start = committed.load();
        VersionedView view(store, i);
        slots[i].receipt = exec_transaction(view, txs[i]);
        executions.fetch_add(1);
    };

    auto worker = [&] {
        while (!fallback.load()) {
            // Commit duty: drain every executed slot at the commit frontier,
            // validating each against writes that landed after it began.
            {
                std::unique_lock lock(commit_mu, std::try_to_lock);
                if (lock.owns_lock()) {
                    while (!fallback.load()) {
                        uint32_t i = committed.load();
                        if (i >= n || !slots[i].executed.load())
                            break;
                        if (conflicts(store, slots[i].receipt, slots[i].start, i)) {
                            if (aborts.fetch_add(1) + 1 > abort_limit) {
                                fallback.store(true);
                                break;
                            }
                            // All dependencies are committed, so this
                            // incarnation is final.
                            execute(i);
                        }
                        store.commit(i, slots[i].receipt.writes);
                        apply_receipt(result.state, slots[i].receipt);
                        committed.store(i + 1);
                    }
                }
            }
            uint32_t i = next_exec.load();
            while (i < n && !next_exec.compare_exchange_weak(i, i + 1)) {
            }
            if (i < n) {
                execute(i);
                slots[i].executed.store(true);
            } else if (committed.load() >= n) {
                break;
            } else {
                std::this_thread::yield();
            }
        }
    };

    auto started = std::chrono::steady_clock::now();
    uint32_t count = std::max(1u, config.workers);
    std::vector<std::thread> pool;
    pool.reserve(count);
    for (uint32_t w = 0; w < count; ++w)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();

    result.stats.executions = executions.load();
    result.stats.aborts = aborts.load();
    if (fallback.load()) {
        BlockResult seq = exec_block_sequential(base, txs);
        result.state = std::move(seq.state);
        result.receipts = std::move(seq.receipts);
        result.stats.fallback = true;
        result.stats.executions += n;
    } else {
        result.receipts.reserve(n);
        for (auto& slot : slots)
            result.receipts.push_back(std::move(slot.receipt));
    }
    result.stats.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return result;
}

ParallelResult run_deterministic(const WorldState& base, std::span<const Transaction> txs,
                                 const OccConfig& config) {
    const uint32_t n = static_cast<uint32_t>(txs.size());
    const uint64_t abort_limit = uint64_t(config.retry_budget) * n;

    VersionStore store(base);
    std::vector<Slot> slots(n);
    std::vector<uint32_t> pending;
    for (uint32_t i = 0; i < n; ++i)
        pending.push_back(i);
    std::vector<uint32_t> executed;
    uint32_t committed = 0;
    ExecStats stats;
    std::mt19937_64 rng(config.sched_seed);

    ParallelResult result;
    result.state = base;

    auto started = std::chrono::steady_clock::now();

    auto execute = [&](uint32_t i) {
        slots[i].start = committed;
        VersionedView view(store, i);
        slots[i].receipt = exec_transaction(view, txs[i]);
        ++stats.executions;
    };

    auto pick = [&](std::vector<uint32_t>& from) {
        size_t k = rng() % from.size();
        uint32_t v = from[k];
        from.erase(from.begin() + k);
        return v;
    };

    while (committed < n && !stats.fallback) {
        bool head_ready = false;
        for (uint32_t e : executed)
            if (e == committed)
                head_ready = true;

        enum { kExec, kCommit, kEarlyValidate } action;
        uint32_t roll = rng() % 100;
        if (config.adversarial) {
            if (!pending.empty() && roll < 40)
                action = kExec;
            else if (!executed.empty() && roll >= 70)
                action = kEarlyValidate;
            else if (head_ready)
                action = kCommit;
            else if (!pending.empty())
                action = kExec;
            else
                action = kEarlyValidate;
        } else {
            if (!pending.empty() && (roll < 60 || !head_ready))
                action = kExec;
            else
                action = kCommit;
        }

        switch (action) {
        case kExec: {
            uint32_t i = pick(pending);
            execute(i);
            executed.push_back(i);
            break;
        }
        case kEarlyValidate: {
            size_t k = rng() % executed.size();
            uint32_t i = executed[k];
            if (i > committed && conflicts(store, slots[i].receipt, slots[i].start, i)) {
                ++stats.aborts;
                if (stats.aborts > abort_limit) {
                    stats.fallback = true;
                    break;
                }
                // Re-execute right away; dependencies may still be
                // uncommitted, so this can roll back again.
                execute(i);
            }
            break;
        }
        case kCommit: {
            if (!head_ready)
                break;
            uint32_t i = committed;
            if (conflicts(store, slots[i].receipt, slots[i].start, i)) {
                ++stats.aborts;
                if (stats.aborts > abort_limit) {
                    stats.fallback = true;
                    break;
                }
                execute(i);
            }
            store.commit(i, slots[i].receipt.writes);
            apply_receipt(result.state, slots[i].receipt);
            committed = i + 1;
            std::erase(executed, i);
            break;
        }
        }
    }

    if (stats.fallback) {
        BlockResult seq = exec_block_sequential(base, txs);
        result.state = std::move(seq.state);
        result.receipts = std::move(seq.receipts);
        stats.executions += n;
    } else {
        result.receipts.reserve(n);
        for (auto& slot : slots)
            result.receipts.push_back(std::move(slot.receipt));
    }
    stats.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    result.stats = stats;
    return result;
}

}  // namespace

ParallelResult exec_block_parallel(const WorldState& base, std::span<const Transaction> txs,
                                   const OccConfig& config) {
    if (txs.empty())
        return ParallelResult{base, {}, {}};
    if (config.mode == OccConfig::Mode::kDeterministic || config.workers <= 1)
        return run_deterministic(base, txs, config);
    return run_threads(base, txs, config);
}

}  // namespace lanebft
