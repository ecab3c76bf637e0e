// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/net.hpp>

#include <sstream>
#include <stdexcept>

namespace lanebft {

void NetConfig::validate() const {
    if (n != 3 * f + 1)
        throw std::invalid_argument("net: n must equal 3f+1");
    if (!stakes.empty() && stakes.size() != n)
        throw std::invalid_argument("net: stakes must have one entry per replica");
    std::set<ReplicaId> carriers;
    for (const auto& fault : faults) {
        if (fault.replica >= n)
            throw std::invalid_argument("net: fault names an unknown replica");
        carriers.insert(fault.replica);
    }
    if (!allow_fault_overflow && carriers.size() > f)
        throw std::invalid_argument("net: more than f replicas carry faults");
}

Address sim_account_address(uint32_t index) {
    Address a;
    Digest d = sha256({ByteView(reinterpret_cast<const uint8_t*>("sim-account"), 11),
                       ByteView(reinterpret_cast<const uint8_t*>(&index), 4)});
    std::copy(d.bytes.begin(), d.bytes.begin() + 20, a.bytes.begin());
    return a;
}

Address sim_contract_address() {
    Address a;
    Digest d = sha256(ByteView(reinterpret_cast<const uint8_t*>("sim-contract"), 12));
    std::copy(d.bytes.begin(), d.bytes.begin() + 20, a.bytes.begin());
    return a;
}

std::vector<std::pair<Address, u256>> workload_genesis(const NetConfig& net,
                                                       const WorkloadConfig& workload) {
    std::vector<std::pair<Address, u256>> genesis;
    for (uint32_t i = 0; i < net.n * workload.accounts_per_lane; ++i)
        genesis.emplace_back(sim_account_address(i), workload.initial_balance);
    return genesis;
}

/// Bridges one replica's calls back into the simulation.
class SimContext : public Context {
public:
    SimContext(Simulation& sim, ReplicaId self) : sim_(sim), self_(self) {}

    uint64_t now_ms() const override;
    void send(ReplicaId to, MsgKind kind, Bytes payload) override;
    void set_timer(uint64_t at_ms, uint64_t timer_id) override;
    void trace(TraceKind kind, uint64_t a, uint64_t b, uint64_t c, uint64_t d,
               const Digest& digest) override;
    void violation(const std::string& message) override;

private:
    Simulation& sim_;
    ReplicaId self_;
};

uint64_t SimContext::now_ms() const {
    return sim_.now_ms_;
}

void SimContext::send(ReplicaId to, MsgKind kind, Bytes payload) {
    (void)kind;
    if (to >= sim_.replicas_.size())
        return;
    Simulation::Event event;
    event.type = Simulation::Event::Type::kDeliver;
    event.from = self_;
    event.to = to;
    event.time = sim_.now_ms_ + (to == self_ ? 0 : sim_.sample_delay(sim_.now_ms_));
    event.payload = std::move(payload);
    sim_.push(std::move(event));
}

void SimContext::set_timer(uint64_t at_ms, uint64_t timer_id) {
    Simulation::Event event;
    event.type = Simulation::Event::Type::kTimer;
    event.to = self_;
    event.from = self_;
    event.time = at_ms;
    event.timer_id = timer_id;
    sim_.push(std::move(event));
}

void SimContext::trace(TraceKind kind, uint64_t a, uint64_t b, uint64_t c, uint64_t d,
                       const Digest& digest) {
    sim_.record_trace(static_cast<int32_t>(self_), kind, a, b, c, d, digest);
}

void SimContext::violation(const std::string& message) {
    sim_.record_violation(message);
}

Simulation::Simulation(SimConfig config)
    : config_(std::move(config)),
      keys_(config_.net.seed, config_.net.n),
      rng_(config_.net.seed ^ 0xda7a5eed) {
    config_.net.validate();
    if (config_.net.stakes.empty())
        config_.net.stakes.assign(config_.net.n, 1);

    auto genesis =
        config_.genesis ? *config_.genesis : workload_genesis(config_.net, config_.workload);

    for (ReplicaId r = 0; r < config_.net.n; ++r) {
        ReplicaConfig rc = config_.replica;
        rc.n = config_.net.n;
        rc.f = config_.net.f;
        rc.stakes = config_.net.stakes;
        rc.faults = ReplicaFaults{};
        for (const auto& fault : config_.net.faults) {
            if (fault.replica != r)
                continue;
            faulty_.insert(fault.replica);
            switch (fault.behavior) {
            case FaultBehavior::kCrash:
                crash_at_[r] = fault.from_ms;
                break;
            case FaultBehavior::kSilentLeader:
                rc.faults.silent_leader = true;
                rc.faults.silent_from_ms = fault.from_ms;
                rc.faults.silent_to_ms = fault.to_ms;
                break;
            case FaultBehavior::kEquivocateLane:
                rc.faults.equivocate_lane = true;
                rc.faults.equivocate_from_ms = fault.from_ms;
                rc.faults.equivocate_to_ms = fault.to_ms;
                break;
            case FaultBehavior::kWithholdBatch:
                rc.faults.withhold_batch = true;
                rc.faults.withhold_from_ms = fault.from_ms;
                rc.faults.withhold_to_ms = fault.to_ms;
                break;
            case FaultBehavior::kWrongStateRoot:
                rc.faults.wrong_state_root = true;
                rc.faults.root_bias = static_cast<uint8_t>(fault.param ? fault.param : 1);
                break;
            case FaultBehavior::kOmitCertifiedTip:
                rc.faults.omit_certified_tip = true;
                rc.faults.omit_from_ms = fault.from_ms;
                rc.faults.omit_to_ms = fault.to_ms;
                break;
            }
        }
        replicas_.push_back(std::make_unique<Replica>(r, rc, &keys_, genesis));
    }

    build_workload();
}

Simulation::~Simulation() = default;

void Simulation::push(Event event) {
    event.seq = next_seq_++;
    queue_.push(std::make_shared<Event>(std::move(event)));
}

uint64_t Simulation::sample_delay(uint64_t send_ms) {
    const DelayModel& model = send_ms < config_.net.gst_ms ? config_.net.pre_gst : config_.net.post_gst;
    if (model.dist == DelayModel::Dist::kFixed || model.max_ms <= model.min_ms)
        return model.min_ms;
    return model.min_ms + rng_() % (model.max_ms - model.min_ms + 1);
}

void Simulation::build_workload() {
    const WorkloadConfig& w = config_.workload;
    if (w.tx_rate_per_lane <= 0)
        return;
    uint64_t interval = std::max<uint64_t>(1, static_cast<uint64_t>(1000.0 / w.tx_rate_per_lane));
    double total_weight = w.w_transfer + w.w_sstore + w.w_sload_add + w.w_overdraft;
    if (total_weight <= 0)
        return;

    std::vector<uint64_t> nonces(config_.net.n * w.accounts_per_lane, 0);
    Address contract = sim_contract_address();

    for (ReplicaId lane = 0; lane < config_.net.n; ++lane) {
        for (uint64_t t = interval; t <= w.duration_ms; t += interval) {
            uint32_t account = lane * w.accounts_per_lane + rng_() % w.accounts_per_lane;
            Transaction tx;
            tx.chain_id = config_.replica.chain_id;
            tx.sender = sim_account_address(account);
            tx.nonce = nonces[account]++;

            double roll = std::uniform_real_distribution<double>(0, total_weight)(rng_);
            if (roll < w.w_transfer) {
                tx.to = sim_account_address(rng_() % (config_.net.n * w.accounts_per_lane));
                tx.value = rng_() % 50;
            } else if (roll < w.w_transfer + w.w_sstore) {
                tx.to = contract;
                Bytes32 slot;
                uint64_t idx = rng_() % std::max<uint32_t>(1, w.hot_slots);
                for (int i = 0; i < 8; ++i)
                    slot.bytes[24 + i] = static_cast<uint8_t>(idx >> (56 - 8 * i));
                Bytes32 value;
                uint64_t v = rng_();
                for (int i = 0; i < 8; ++i)
                    value.bytes[24 + i] = static_cast<uint8_t>(v >> (56 - 8 * i));
                tx.input = Bytes{1, kOpSstore};
                tx.input.insert(tx.input.end(), slot.bytes.begin(), slot.bytes.end());
                tx.input.insert(tx.input.end(), value.bytes.begin(), value.bytes.end());
            } else if (roll < w.w_transfer + w.w_sstore + w.w_sload_add) {
                tx.to = contract;
                Bytes32 slot;
                uint64_t idx = rng_() % std::max<uint32_t>(1, w.hot_slots);
                for (int i = 0; i < 8; ++i)
                    slot.bytes[24 + i] = static_cast<uint8_t>(idx >> (56 - 8 * i));
                tx.input = Bytes{1, kOpSloadAdd};
                tx.input.insert(tx.input.end(), slot.bytes.begin(), slot.bytes.end());
            } else {
                tx.to = sim_account_address(rng_() % (config_.net.n * w.accounts_per_lane));
                tx.value = w.initial_balance * 1000 + 1;  // guaranteed overdraft
            }

            Bytes bytes = encode_transaction(tx);
            Event event;
            event.type = Event::Type::kInject;
            event.to = lane;
            event.from = lane;
            event.time = t;
            event.payload = bytes;
            push(std::move(event));

            if (w.duplicate_fraction > 0 &&
                std::uniform_real_distribution<double>(0, 1)(rng_) < w.duplicate_fraction) {
                ReplicaId other = (lane + 1 + rng_() % (config_.net.n - 1)) % config_.net.n;
                Event dup;
                dup.type = Event::Type::kInject;
                dup.to = other;
                dup.from = other;
                dup.time = t;
                dup.payload = bytes;
                dup.duplicate = true;
                push(std::move(dup));
            }
        }
    }
}

bool Simulation::crashed(ReplicaId r, uint64_t at_ms) const {
    auto it = crash_at_.find(r);
    return it != crash_at_.end() && at_ms >= it->second;
}

void Simulation::record_trace(int32_t replica, TraceKind kind, uint64_t a, uint64_t b, uint64_t c,
                              uint64_t d, const Digest& digest) {
    trace_.push_back(TraceEvent{now_ms_, replica, kind, a, b, c, d, digest});
    if (kind == TraceKind::kCommitted) {
        auto [it, fresh] = committed_digests_.emplace(a, digest);
        if (!fresh && it->second != digest)
            record_violation("two commit-certified cuts in one slot");
    }
}

void Simulation::record_violation(const std::string& message) {
    if (!violation_) {
        violation_ = true;
        violation_message_ = message;
    }
}

SimResult Simulation::run() {
    now_ms_ = 0;
    for (ReplicaId r = 0; r < replicas_.size() && !violation_; ++r) {
        SimContext ctx(*this, r);
        replicas_[r]->init(ctx);
        replicas_[r]->on_batch_end(ctx);
    }

    while (!queue_.empty() && !violation_) {
        auto head = queue_.top();
        if (head->time > config_.duration_ms)
            break;
        now_ms_ = head->time;
        ReplicaId to = head->to;

        SimContext ctx(*this, to);
        bool skip = crashed(to, now_ms_);
        while (!queue_.empty()) {
            auto next = queue_.top();
            if (next->time != now_ms_ || next->to != to)
                break;
            queue_.pop();
            if (skip)
                continue;
            switch (next->type) {
            case Event::Type::kDeliver:
                // A crashed sender cannot emit anything new (its events are
                // skipped), but messages already in flight still arrive.
                replicas_[to]->on_message(ctx, next->from,
                                          ByteView(next->payload.data(), next->payload.size()));
                break;
            case Event::Type::kTimer:
                replicas_[to]->on_timer(ctx, next->timer_id);
                break;
            case Event::Type::kInject: {
                Transaction tx = decode_transaction(ByteView(next->payload.data(), next->payload.size()));
                record_trace(static_cast<int32_t>(to), TraceKind::kClientTx, to,
                             next->duplicate ? 1 : 0, 0, 0, tx_digest(tx));
                replicas_[to]->on_client_tx(ctx, next->payload);
                break;
            }
            }
            if (violation_)
                break;
        }
        if (!skip && !violation_)
            replicas_[to]->on_batch_end(ctx);
    }

    SimResult result;
    result.violation = violation_;
    result.violation_message = violation_message_;
    result.seed = config_.net.seed;
    result.metrics = compute_metrics(trace_, round_trip_ms());
    return result;
}

}  // namespace lanebft
