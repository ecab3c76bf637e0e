// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/metrics.hpp>

#include <algorithm>
#include <map>
#include <sstream>

namespace lanebft {

const char* trace_kind_name(TraceKind kind) {
    switch (kind) {
    case TraceKind::kCarProposed: return "car_proposed";
    case TraceKind::kCarVoteRejected: return "car_vote_rejected";
    case TraceKind::kPoAFormed: return "poa_formed";
    case TraceKind::kCutProposed: return "cut_proposed";
    case TraceKind::kPrepareQcFormed: return "prepare_qc";
    case TraceKind::kViewChange: return "view_change";
    case TraceKind::kCommitted: return "committed";
    case TraceKind::kBlockExecuted: return "block_executed";
    case TraceKind::kExecFallback: return "exec_fallback";
    case TraceKind::kAttested: return "attested";
    case TraceKind::kStateQuorum: return "state_quorum";
    case TraceKind::kHalted: return "halted";
    case TraceKind::kFetchRequested: return "fetch_requested";
    case TraceKind::kFetchServed: return "fetch_served";
    case TraceKind::kFetchCompleted: return "fetch_completed";
    case TraceKind::kEquivocationSeen: return "equivocation_seen";
    case TraceKind::kInclusionFlag: return "inclusion_flag";
    case TraceKind::kClientTx: return "client_tx";
    }
    return "?";
}

std::string trace_line(const TraceEvent& e) {
    std::ostringstream out;
    out << "t=" << e.t_ms << " r=" << e.replica << " ev=" << trace_kind_name(e.kind) << " a=" << e.a
        << " b=" << e.b << " c=" << e.c << " d=" << e.d << " h=" << e.digest.hex();
    return out.str();
}

Digest trace_digest(std::span<const TraceEvent> trace) {
    Hasher h;
    for (const auto& e : trace) {
        std::string line = trace_line(e);
        line.push_back('\n');
        h.update(ByteView(reinterpret_cast<const uint8_t*>(line.data()), line.size()));
    }
    return h.finish();
}

std::vector<TraceEvent> parse_trace(const std::string& text) {
    std::vector<TraceEvent> out;
    std::map<std::string, TraceKind> kinds;
    for (int k = 1; k <= 18; ++k)
        kinds[trace_kind_name(static_cast<TraceKind>(k))] = static_cast<TraceKind>(k);

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        TraceEvent e;
        std::istringstream fields(line);
        std::string field;
        while (fields >> field) {
            auto eq = field.find('=');
            if (eq == std::string::npos)
                continue;
            std::string key = field.substr(0, eq);
            std::string value = field.substr(eq + 1);
            if (key == "t")
                e.t_ms = std::stoull(value);
            else if (key == "r")
                e.replica = static_cast<int32_t>(std::stol(value));
            else if (key == "ev")
                e.kind = kinds.at(value);
            else if (key == "a")
                e.a = std::stoull(value);
            else if (key == "b")
                e.b = std::stoull(value);
            else if (key == "c")
                e.c = std::stoull(value);
            else if (key == "d")
                e.d = std::stoull(value);
            else if (key == "h") {
                Bytes raw = from_hex(value);
                std::copy(raw.begin(), raw.end(), e.digest.bytes.begin());
            }
        }
        out.push_back(e);
    }
    return out;
}

namespace {

double median_of(std::vector<double> values) {
    if (values.empty())
        return 0;
    std::sort(values.begin(), values.end());
    size_t mid = values.size() / 2;
    if (values.size() % 2 == 1)
        return values[mid];
    return (values[mid - 1] + values[mid]) / 2.0;
}

double mean_of(const std::vector<double>& values) {
    if (values.empty())
        return 0;
    double sum = 0;
    for (double v : values)
        sum += v;
    return sum / static_cast<double>(values.size());
}

}  // namespace

Metrics compute_metrics(std::span<const TraceEvent> trace, double round_trip_ms,
                        uint64_t warmup_slots) {
    Metrics m;

    // slot -> committing view (from the first commit event observed)
    std::map<uint64_t, uint64_t> commit_view;
    // slot -> commit times across replicas
    std::map<uint64_t, std::vector<double>> commit_times;
    // (slot, view) -> earliest proposal time (the proposer's send)
    std::map<std::pair<uint64_t, uint64_t>, double> proposal_time;
    std::set<std::pair<uint64_t, uint64_t>> view_changes;
    std::map<uint64_t, uint64_t> state_lag_by_height;

    for (const auto& e : trace) {
        switch (e.kind) {
        case TraceKind::kCutProposed: {
            auto key = std::make_pair(e.a, e.b);
            auto it = proposal_time.find(key);
            if (it == proposal_time.end() || e.t_ms < it->second)
                proposal_time[key] = static_cast<double>(e.t_ms);
            break;
        }
        case TraceKind::kCommitted:
            if (!commit_view.contains(e.a))
                commit_view[e.a] = e.b;
            commit_times[e.a].push_back(static_cast<double>(e.t_ms));
            break;
        case TraceKind::kViewChange:
            view_changes.insert({e.a, e.b});
            break;
        case TraceKind::kFetchRequested:
            ++m.fetches;
            break;
        case TraceKind::kFetchCompleted:
            ++m.fetches_completed;
            break;
        case TraceKind::kBlockExecuted:
            if (e.replica == 0) {
                ++m.blocks_executed;
                m.txs_executed += e.b;
                m.occ_aborts += e.c;
                m.duplicates_skipped += e.d;
            }
            break;
        case TraceKind::kExecFallback:
            if (e.replica == 0)
                ++m.exec_fallbacks;
            break;
        case TraceKind::kStateQuorum:
            if (!state_lag_by_height.contains(e.a))
                state_lag_by_height[e.a] = e.c;
            break;
        case TraceKind::kHalted:
            m.halted = true;
            break;
        case TraceKind::kCarProposed:
            ++m.cars_proposed;
            if (e.c)
                ++m.heartbeat_cars;
            break;
        case TraceKind::kPoAFormed:
            ++m.poas_formed;
            break;
        case TraceKind::kEquivocationSeen:
            ++m.equivocations_seen;
            break;
        case TraceKind::kInclusionFlag:
            ++m.inclusion_flags;
            break;
        case TraceKind::kClientTx:
            ++m.client_txs;
            if (e.b)
                ++m.client_duplicates;
            break;
        default:
            break;
        }
    }

    m.committed_cuts = commit_times.size();
    m.view_changes = view_changes.size();

    std::vector<double> latencies;
    std::vector<double> commit_instants;
    for (const auto& [slot, times] : commit_times) {
        double commit_at = median_of(times);
        commit_instants.push_back(commit_at);
        if (slot < warmup_slots)
            continue;
        auto prop = proposal_time.find({slot, commit_view[slot]});
        if (prop == proposal_time.end())
            continue;
        latencies.push_back(commit_at - prop->second);
    }
    m.mean_commit_latency_ms = mean_of(latencies);
    m.median_commit_latency_ms = median_of(latencies);
    if (round_trip_ms > 0)
        m.mean_commit_latency_rt = m.mean_commit_latency_ms / round_trip_ms;

    std::vector<double> intervals;
    std::sort(commit_instants.begin(), commit_instants.end());
    for (size_t i = warmup_slots + 1; i < commit_instants.size(); ++i)
        intervals.push_back(commit_instants[i] - commit_instants[i - 1]);
    m.mean_commit_interval_ms = mean_of(intervals);
    if (round_trip_ms > 0)
        m.mean_commit_interval_rt = m.mean_commit_interval_ms / round_trip_ms;

    std::vector<double> lags;
    for (const auto& [height, lag] : state_lag_by_height) {
        m.max_state_lag = std::max(m.max_state_lag, lag);
        lags.push_back(static_cast<double>(lag));
    }
    m.state_quorum_heights = state_lag_by_height.size();
    m.mean_state_lag = mean_of(lags);

    return m;
}

std::string metrics_table(const Metrics& m) {
    std::ostringstream out;
    out << "committed cuts          " << m.committed_cuts << "\n"
        << "commit latency mean     " << m.mean_commit_latency_ms << " ms ("
        << m.mean_commit_latency_rt << " rt)\n"
        << "commit latency median   " << m.median_commit_latency_ms << " ms\n"
        << "commit interval mean    " << m.mean_commit_interval_ms << " ms ("
        << m.mean_commit_interval_rt << " rt)\n"
        << "view changes            " << m.view_changes << "\n"
        << "fetches                 " << m.fetches << " (" << m.fetches_completed << " completed)\n"
        << "blocks executed         " << m.blocks_executed << " (" << m.txs_executed << " txs)\n"
        << "occ aborts              " << m.occ_aborts << " (fallbacks " << m.exec_fallbacks << ")\n"
        << "duplicates skipped      " << m.duplicates_skipped << "\n"
        << "state quorum heights    " << m.state_quorum_heights << " (max lag " << m.max_state_lag
        << ", mean " << m.mean_state_lag << ")\n"
        << "halted                  " << (m.halted ? "true" : "false") << "\n"
        << "cars proposed           " << m.cars_proposed << " (heartbeats " << m.heartbeat_cars
        << ")\n"
        << "poas formed             " << m.poas_formed << "\n"
        << "equivocations seen      " << m.equivocations_seen << "\n"
        << "inclusion flags         " << m.inclusion_flags << "\n"
        << "client txs              " << m.client_txs << " (duplicates " << m.client_duplicates
        << ")\n";
    return out.str();
}

std::string metrics_json(const Metrics& m) {
    std::ostringstream out;
    out << "{"
        << "\"committed_cuts\":" << m.committed_cuts
        << ",\"mean_commit_latency_ms\":" << m.mean_commit_latency_ms
        << ",\"median_commit_latency_ms\":" << m.median_commit_latency_ms
        << ",\"mean_commit_latency_rt\":" << m.mean_commit_latency_rt
        << ",\"mean_commit_interval_ms\":" << m.mean_commit_interval_ms
        << ",\"mean_commit_interval_rt\":" << m.mean_commit_interval_rt
        << ",\"view_changes\":" << m.view_changes
        << ",\"fetches\":" << m.fetches
        << ",\"fetches_completed\":" << m.fetches_completed
        << ",\"occ_aborts\":" << m.occ_aborts
        << ",\"exec_fallbacks\":" << m.exec_fallbacks
        << ",\"blocks_executed\":" << m.blocks_executed
        << ",\"txs_executed\":" << m.txs_executed
        << ",\"duplicates_skipped\":" << m.duplicates_skipped
        << ",\"max_state_lag\":" << m.max_state_lag
        << ",\"mean_state_lag\":" << m.mean_state_lag
        << ",\"state_quorum_heights\":" << m.state_quorum_heights
        << ",\"halted\":" << (m.halted ? "true" : "false")
        << ",\"cars_proposed\":" << m.cars_proposed
        << ",\"heartbeat_cars\":" << m.heartbeat_cars
        << ",\"poas_formed\":" << m.poas_formed
        << ",\"equivocations_seen\":" << m.equivocations_seen
        << ",\"inclusion_flags\":" << m.inclusion_flags
        << ",\"client_txs\":" << m.client_txs
        << ",\"client_duplicates\":" << m.client_duplicates
        << "}";
    return out.str();
}

}  // namespace lanebft
