#include "tppdsim/experiment.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

namespace tppd {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

std::string DefenseConfig::describe() const {
    switch (kind) {
    case Kind::None:
        return "none";
    case Kind::Tppd:
        if (thresholds.th_spy == thresholds.th_trojan)
            return "tppd-" + std::to_string(thresholds.th_spy);
        return "tppd(" + std::to_string(thresholds.th_spy) + "," +
               std::to_string(thresholds.th_trojan) + ")";
    case Kind::Nomo:
        return "nomo-" + std::to_string(nomo.reserved_ways);
    }
    return "?";
}

std::uint64_t ExperimentConfig::detector_threshold() const {
    return detector.threshold != 0 ? detector.threshold
                                   : 4 * static_cast<std::uint64_t>(llc.associativity);
}

std::map<Pid, std::size_t> ExperimentConfig::resolved_bindings() const {
    std::vector<Pid> pids;
    if (attack.enabled) {
        pids.push_back(attack.channel.spy_pid);
        pids.push_back(attack.channel.trojan_pid);
    }
    for (const auto& profile : benign)
        pids.push_back(profile.pid);

    if (!bindings.empty()) {
        for (Pid pid : pids)
            if (!bindings.count(pid))
                throw ConfigError("bindings: pid " + std::to_string(pid) + " is not bound");
        return bindings;
    }
    std::map<Pid, std::size_t> out;
    for (std::size_t i = 0; i < pids.size(); ++i)
        out[pids[i]] = i % cores;
    return out;
}

void ExperimentConfig::validate() const {
    if (cores == 0)
        throw ConfigError("cores: must be positive");
    l1.validate("l1");
    llc.validate("llc");
    if (l1.block_size != llc.block_size)
        throw ConfigError("l1.block_bytes: must match llc.block_bytes");

    std::set<Pid> pids;
    if (attack.enabled) {
        attack.channel.validate(llc, l1);
        pids.insert(attack.channel.spy_pid);
        pids.insert(attack.channel.trojan_pid);
    }
    for (const auto& profile : benign) {
        profile.validate(llc);
        if (!pids.insert(profile.pid).second)
            throw ConfigError("workload.benign: duplicate pid " + std::to_string(profile.pid));
    }
    if (!benign.empty() && benign_events == 0)
        throw ConfigError("workload.benign.events_per_process: must be positive");
    if (pids.empty())
        throw ConfigError("workload: neither the attack nor any benign process is enabled");

    switch (defense.kind) {
    case DefenseConfig::Kind::None:
        break;
    case DefenseConfig::Kind::Tppd:
        defense.thresholds.validate(llc.associativity);
        break;
    case DefenseConfig::Kind::Nomo:
        defense.nomo.validate(llc.associativity, pids.size());
        break;
    }
    if (force_engage) {
        if (defense.kind != DefenseConfig::Kind::Tppd)
            throw ConfigError("force_engage: requires the tppd defense");
        if (!attack.enabled)
            throw ConfigError("force_engage: requires an enabled attack workload");
    }
    if (detector.enabled && detector.epoch_accesses == 0)
        throw ConfigError("detector.epoch_accesses: must be positive");
    for (std::size_t s : detector.occupancy_sets)
        if (s >= llc.num_sets)
            throw ConfigError("detector.occupancy_sets: set " + std::to_string(s) +
                              " out of range");
    if (schedule.kind == Schedule::Kind::Ratio) {
        const std::size_t sources = (attack.enabled ? 1 : 0) + benign.size();
        if (schedule.ratio.size() != sources)
            throw ConfigError("workload.schedule.ratio: needs one entry per stream (" +
                              std::to_string(sources) + ")");
    }
    resolved_bindings(); // raises on incomplete explicit bindings
}

std::vector<WorkloadEvent> build_workload(const ExperimentConfig& config) {
    config.validate();
    std::vector<std::vector<WorkloadEvent>> sources;

    if (config.attack.enabled) {
        const auto bits =
            PrimeProbeChannel::random_bits(config.attack.bits, config.attack.bit_seed);
        const auto attack_events =
            emit_attack_stream(config.llc, config.l1, config.attack.channel, bits);
        std::vector<WorkloadEvent> stream;
        stream.reserve(attack_events.size());
        for (const auto& ev : attack_events)
            stream.push_back({ev.pid, ev.address, Op::Read, true, ev.phase, ev.bit_index});
        sources.push_back(std::move(stream));
    }
    for (const auto& profile : config.benign) {
        const auto trace = generate_benign(profile, config.llc, config.benign_events);
        std::vector<WorkloadEvent> stream;
        stream.reserve(trace.size());
        for (const auto& ev : trace)
            stream.push_back(
                {ev.pid, ev.address, ev.op, false, AttackEvent::Phase::Prime, 0});
        sources.push_back(std::move(stream));
    }

    std::vector<std::size_t> lengths;
    for (const auto& s : sources)
        lengths.push_back(s.size());
    const auto order = merge_order(lengths, config.schedule);

    std::vector<WorkloadEvent> merged;
    merged.reserve(order.size());
    std::vector<std::size_t> cursor(sources.size(), 0);
    for (std::size_t src : order)
        merged.push_back(sources[src][cursor[src]++]);
    return merged;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();

    Hierarchy hierarchy(config.l1, config.llc, config.cores);
    for (const auto& [pid, core] : config.resolved_bindings())
        hierarchy.bind_process(pid, core);

    std::unique_ptr<LlcPolicy> policy;
    TppdPolicy* tppd_policy = nullptr;
    switch (config.defense.kind) {
    case DefenseConfig::Kind::None:
        policy = std::make_unique<LruPolicy>();
        break;
    case DefenseConfig::Kind::Tppd: {
        auto p = std::make_unique<TppdPolicy>(config.llc.num_sets, config.llc.associativity,
                                              config.defense.thresholds);
        tppd_policy = p.get();
        policy = std::move(p);
        break;
    }
    case DefenseConfig::Kind::Nomo:
        policy = std::make_unique<NomoPolicy>(config.defense.nomo);
        break;
    }
    hierarchy.set_policy(policy.get());

    const std::size_t target_set = config.attack.channel.target_set;
    if (config.force_engage)
        tppd_policy->engage(target_set, config.attack.channel.spy_pid,
                            config.attack.channel.trojan_pid, hierarchy.llc_set(target_set));

    std::optional<ConflictMissDetector> detector;
    std::uint64_t epoch_cross_evictions = 0;
    if (config.detector.enabled) {
        detector.emplace(config.llc.num_sets, config.detector.epoch_accesses,
                         config.detector_threshold());
        hierarchy.set_eviction_observer(
            [&](std::size_t set_index, Pid evictor, Pid owner) {
                detector->record_eviction(set_index, evictor, owner);
                epoch_cross_evictions += evictor != owner;
            });
    }

    std::vector<std::size_t> occupancy_sets = config.detector.occupancy_sets;
    if (config.detector.enabled && config.attack.enabled &&
        std::find(occupancy_sets.begin(), occupancy_sets.end(), target_set) ==
            occupancy_sets.end())
        occupancy_sets.push_back(target_set);

    ExperimentResult result;
    const std::size_t bit_count = config.attack.enabled ? config.attack.bits : 0;
    std::vector<ProbeOutcome> per_bit(bit_count);
    std::vector<bool> bit_probe_seen(bit_count, false);
    result.bit_engaged.assign(bit_count, false);

    const auto events = build_workload(config);
    for (const auto& ev : events) {
        if (ev.attack && ev.phase == AttackEvent::Phase::Probe &&
            !bit_probe_seen[ev.bit_index]) {
            bit_probe_seen[ev.bit_index] = true;
            result.bit_engaged[ev.bit_index] = tppd_policy && tppd_policy->engaged(target_set);
        }

        const AccessResult r = hierarchy.access({ev.pid, ev.address, ev.op});

        if (ev.attack && ev.phase == AttackEvent::Phase::Probe) {
            per_bit[ev.bit_index].total_latency += r.latency;
            per_bit[ev.bit_index].miss_count += r.level == HitLevel::Miss;
        }
        if (detector && r.level != HitLevel::L1Hit) {
            if (auto report = detector->tick()) {
                EpochRow row;
                row.epoch = report->epoch;
                row.cross_evictions = epoch_cross_evictions;
                row.hottest = report->hottest;
                row.verdicts = report->verdicts.size();
                result.epochs.push_back(row);
                epoch_cross_evictions = 0;

                for (const auto& verdict : report->verdicts) {
                    result.verdicts.push_back(verdict);
                    if (!result.first_engagement_epoch)
                        result.first_engagement_epoch = verdict.epoch;
                    if (tppd_policy && !tppd_policy->engaged(verdict.set_index))
                        tppd_policy->engage(verdict.set_index, verdict.spy, verdict.trojan,
                                            hierarchy.llc_set(verdict.set_index));
                }
                for (std::size_t s : occupancy_sets)
                    for (const auto& [pid, core] : hierarchy.bindings())
                        result.occupancy[s][pid].push_back(
                            static_cast<double>(hierarchy.llc_occupancy(s, pid)));
                for (const auto& [pid, blocks] : hierarchy.llc_occupancy_totals())
                    result.llc_occupancy[pid].push_back(static_cast<double>(blocks));
            }
        }
    }

    if (config.attack.enabled) {
        ChannelRun run;
        run.decode_threshold =
            channel_decode_threshold(config.llc, config.l1, config.attack.channel);
        run.bits_sent = PrimeProbeChannel::random_bits(config.attack.bits, config.attack.bit_seed);
        run.per_bit_probe = std::move(per_bit);
        run.bits_decoded.reserve(run.per_bit_probe.size());
        for (const auto& outcome : run.per_bit_probe)
            run.bits_decoded.push_back(outcome.total_latency > run.decode_threshold);
        result.channel = std::move(run);
    }

    result.stats = hierarchy.stats();
    return result;
}

namespace {

json geometry_json(const CacheGeometry& g) {
    return json{{"sets", g.num_sets},
                {"ways", g.associativity},
                {"block_bytes", g.block_size},
                {"hit_latency", g.hit_latency},
                {"next_level_latency", g.next_level_latency}};
}

double accuracy_over(const ChannelRun& run, const std::vector<bool>& mask, bool wanted) {
    std::size_t total = 0, correct = 0;
    for (std::size_t i = 0; i < run.bits_sent.size(); ++i) {
        if (mask[i] != wanted)
            continue;
        ++total;
        correct += run.bits_sent[i] == run.bits_decoded[i];
    }
    return total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total);
}

json summary_json(const ExperimentConfig& config, const ExperimentResult& result) {
    json j;
    j["name"] = config.name;
    j["config"] = {
        {"cores", config.cores},
        {"l1", geometry_json(config.l1)},
        {"llc", geometry_json(config.llc)},
        {"defense", config.defense.describe()},
        {"detector_enabled", config.detector.enabled},
        {"detector_epoch_accesses", config.detector.epoch_accesses},
        {"detector_threshold", config.detector_threshold()},
        {"force_engage", config.force_engage},
        {"seed", config.seed},
        {"benign_processes", config.benign.size()},
        {"benign_events", config.benign_events},
    };
    j["totals"] = {
        {"accesses", result.stats.total_accesses},
        {"llc_lookups", result.stats.llc_lookups},
        {"llc_hits", result.stats.llc_hits},
        {"llc_misses", result.stats.llc_misses},
    };
    const unsigned core_id_bits =
        config.cores <= 1 ? 1 : static_cast<unsigned>(std::bit_width(config.cores - 1));
    const auto core_cost = storage_overhead(config.llc.num_sets, config.llc.associativity,
                                            core_id_bits);
    const auto pid_cost = storage_overhead(config.llc.num_sets, config.llc.associativity, 16);
    j["defense_storage"] = {
        {"core_id_bits_per_set", core_cost.bits_per_set},
        {"core_id_total_bytes", core_cost.total_bytes},
        {"process_id_bits_per_set", pid_cost.bits_per_set},
        {"process_id_total_bytes", pid_cost.total_bytes},
    };
    if (result.channel) {
        const auto& run = *result.channel;
        j["channel"] = {
            {"bits", run.bits_sent.size()},
            {"decode_threshold", run.decode_threshold},
            {"accuracy", run.accuracy()},
            {"accuracy_before_engagement", accuracy_over(run, result.bit_engaged, false)},
            {"accuracy_after_engagement", accuracy_over(run, result.bit_engaged, true)},
        };
    }
    if (config.detector.enabled) {
        json verdicts = json::array();
        for (const auto& v : result.verdicts)
            verdicts.push_back({{"epoch", v.epoch},
                                {"set", v.set_index},
                                {"spy", v.spy},
                                {"trojan", v.trojan},
                                {"score", v.pair_score}});
        j["detector"] = {
            {"verdicts", verdicts},
            {"first_engagement_epoch",
             result.first_engagement_epoch ? json(*result.first_engagement_epoch) : json()},
        };
    }
    return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out)
        throw IoError("failed writing " + path.string());
}

} // namespace

void write_reports(const ExperimentConfig& config, const ExperimentResult& result) {
    const std::filesystem::path dir(config.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + dir.string());

    write_text_file(dir / "summary.json", summary_json(config, result).dump(2) + "\n");

    {
        std::ostringstream csv;
        csv << "# mpki denominator is memory accesses (the simulator has no instruction"
               " stream)\n";
        csv << "pid,accesses,l1_hits,llc_hits,llc_misses,mpki\n";
        for (const auto& [pid, ps] : result.stats.per_pid) {
            csv << pid << ',' << ps.accesses << ',' << ps.l1_hits << ',' << ps.llc_hits << ','
                << ps.llc_misses << ','
                << fmt_double(ps.accesses ? mpki(ps.llc_misses, ps.accesses) : 0.0) << '\n';
        }
        csv << "total," << result.stats.total_accesses << ','
            << result.stats.total_accesses - result.stats.llc_lookups << ','
            << result.stats.llc_hits << ',' << result.stats.llc_misses << ','
            << fmt_double(result.stats.total_accesses
                              ? mpki(result.stats.llc_misses, result.stats.total_accesses)
                              : 0.0)
            << '\n';
        write_text_file(dir / "run_stats.csv", csv.str());
    }

    if (result.channel) {
        std::ostringstream csv;
        csv << "bit,sent,decoded,probe_misses,probe_latency,engaged\n";
        const auto& run = *result.channel;
        for (std::size_t i = 0; i < run.bits_sent.size(); ++i) {
            csv << i << ',' << run.bits_sent[i] << ',' << run.bits_decoded[i] << ','
                << run.per_bit_probe[i].miss_count << ',' << run.per_bit_probe[i].total_latency
                << ',' << result.bit_engaged[i] << '\n';
        }
        write_text_file(dir / "channel_bits.csv", csv.str());
    }

    if (config.detector.enabled) {
        std::ostringstream csv;
        csv << "epoch,cross_evictions,hottest_set,hottest_pid_a,hottest_pid_b,hottest_score,"
               "verdicts\n";
        for (const auto& row : result.epochs) {
            csv << row.epoch << ',' << row.cross_evictions << ',';
            if (row.hottest)
                csv << row.hottest->set_index << ',' << row.hottest->spy << ','
                    << row.hottest->trojan << ',' << row.hottest->pair_score;
            else
                csv << ",,,0";
            csv << ',' << row.verdicts << '\n';
        }
        write_text_file(dir / "detector_epochs.csv", csv.str());

        std::ostringstream occ;
        occ << "epoch,set,pid,blocks\n";
        for (const auto& [set_index, by_pid] : result.occupancy)
            for (const auto& [pid, series] : by_pid)
                for (std::size_t e = 0; e < series.size(); ++e)
                    occ << e << ',' << set_index << ',' << pid << ','
                        << static_cast<std::uint64_t>(series[e]) << '\n';
        write_text_file(dir / "occupancy.csv", occ.str());

        std::ostringstream whole;
        whole << "epoch,pid,blocks\n";
        for (const auto& [pid, series] : result.llc_occupancy)
            for (std::size_t e = 0; e < series.size(); ++e)
                whole << e << ',' << pid << ',' << static_cast<std::uint64_t>(series[e])
                      << '\n';
        write_text_file(dir / "llc_occupancy.csv", whole.str());
    }
}

void MatrixConfig::validate() const {
    if (!base.attack.enabled)
        throw ConfigError("matrix: the shared attack workload must be enabled");
    if (z_values.empty())
        throw ConfigError("matrix.z_values: must not be empty");
    if (std::find(z_values.begin(), z_values.end(), std::size_t{0}) == z_values.end())
        throw ConfigError("matrix.z_values: must include 0, the undefended baseline the"
                          " miss deltas are measured against");
    for (std::size_t z : z_values)
        if (z != 0)
            ThresholdConfig::symmetric(z).validate(base.llc.associativity);
    for (const auto& name : benchmarks)
        mix_preset(name, base.llc, 0, 0); // raises on unknown names
}

namespace {

ExperimentConfig matrix_cell(const MatrixConfig& mc, std::size_t z,
                             const std::string& benchmark) {
    ExperimentConfig cell = mc.base;
    cell.name = benchmark + "-z" + std::to_string(z);
    cell.detector.enabled = false;
    cell.benign.clear();
    cell.benign_events = 0;
    cell.schedule = Schedule{};
    if (z == 0) {
        cell.defense = DefenseConfig{};
        cell.force_engage = false;
    } else {
        cell.defense.kind = DefenseConfig::Kind::Tppd;
        cell.defense.thresholds = ThresholdConfig::symmetric(z);
        cell.defense.nomo = NomoConfig{};
        cell.force_engage = true;
    }
    if (benchmark != "attack-only") {
        const Pid first_benign =
            std::max(cell.attack.channel.spy_pid, cell.attack.channel.trojan_pid) + 1;
        cell.benign = mix_preset(benchmark, cell.llc, first_benign, cell.seed);
        cell.benign_events = mc.benign_events;
    }
    return cell;
}

} // namespace

ImpactTable run_matrix(const MatrixConfig& config) {
    config.validate();
    ImpactTable table;
    table.z_values = config.z_values;
    table.benchmarks = config.benchmarks;

    // A failing cell does not stop the sweep; the errors surface together
    // once every cell has been attempted.
    std::string errors;
    const auto record = [&errors](const std::string& cell, const std::exception& e) {
        errors += (errors.empty() ? "" : "; ") + cell + ": " + e.what();
    };

    for (std::size_t z : config.z_values) {
        const auto cell = matrix_cell(config, z, "attack-only");
        try {
            const auto result = run_experiment(cell);
            table.attack_only_misses[z] = result.stats.llc_misses;
            table.attack_only_accesses[z] = result.stats.total_accesses;
        } catch (const std::exception& e) {
            record(cell.name, e);
        }
    }
    for (const auto& benchmark : config.benchmarks) {
        for (std::size_t z : config.z_values) {
            const auto cell = matrix_cell(config, z, benchmark);
            try {
                const auto result = run_experiment(cell);
                table.combined_misses[{benchmark, z}] = result.stats.llc_misses;
                table.combined_accesses[{benchmark, z}] = result.stats.total_accesses;
            } catch (const std::exception& e) {
                record(cell.name, e);
            }
        }
    }
    if (!errors.empty())
        throw SimError("matrix cells failed: " + errors);

    for (std::size_t z : config.z_values) {
        table.diff[z] = miss_diff(table.attack_only_misses[z], table.attack_only_misses[0]);
        std::vector<long long> impacts;
        for (const auto& benchmark : config.benchmarks) {
            const long long dp = miss_diff(table.combined_misses[{benchmark, z}],
                                           table.combined_misses[{benchmark, 0}]);
            table.diff_prime[{benchmark, z}] = dp;
            table.isolated[{benchmark, z}] = isolated_impact(dp, table.diff[z]);
            impacts.push_back(table.isolated[{benchmark, z}]);
        }
        table.avg_isolated[z] = avg_impact(impacts); // raises when no benchmarks
    }
    return table;
}

void write_matrix_report(const MatrixConfig& config, const ImpactTable& table) {
    const std::filesystem::path dir(config.base.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + dir.string());

    std::ostringstream csv;
    csv << "# per-cell LLC misses; diff columns are deltas against the z=0 baseline\n";
    csv << "# mpki denominator is memory accesses (no instruction stream)\n";
    csv << "benchmark,z,llc_misses,total_accesses,mpki,misses_norm_z0,diff,diff_prime,"
           "isolated_impact\n";

    for (std::size_t z : table.z_values) {
        const double norm = static_cast<double>(table.attack_only_misses.at(z)) /
                            static_cast<double>(table.attack_only_misses.at(0));
        csv << "attack-only," << z << ',' << table.attack_only_misses.at(z) << ','
            << table.attack_only_accesses.at(z) << ','
            << fmt_double(mpki(table.attack_only_misses.at(z),
                               table.attack_only_accesses.at(z)))
            << ',' << fmt_double(norm) << ',' << table.diff.at(z) << ",,\n";
    }
    for (const auto& benchmark : table.benchmarks) {
        for (std::size_t z : table.z_values) {
            const auto key = std::make_pair(benchmark, z);
            const double norm = static_cast<double>(table.combined_misses.at(key)) /
                                static_cast<double>(table.combined_misses.at({benchmark, 0}));
            csv << benchmark << ',' << z << ',' << table.combined_misses.at(key) << ','
                << table.combined_accesses.at(key) << ','
                << fmt_double(mpki(table.combined_misses.at(key),
                                   table.combined_accesses.at(key)))
                << ',' << fmt_double(norm) << ",," << table.diff_prime.at(key) << ','
                << table.isolated.at(key) << '\n';
        }
    }
    for (std::size_t z : table.z_values)
        csv << "avg_isolated," << z << ",,,,,,," << fmt_double(table.avg_isolated.at(z))
            << '\n';
    write_text_file(dir / "impact_matrix.csv", csv.str());
}

// --- configuration files ---------------------------------------------------

namespace {

const json& require(const json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end())
        throw ConfigError(path + "." + key + ": missing required field");
    return *it;
}

template <typename T>
T number_at(const json& j, const std::string& path) {
    if (!j.is_number())
        throw ConfigError(path + ": expected a number");
    if constexpr (std::is_unsigned_v<T>) {
        if (j.is_number_integer() && !j.is_number_unsigned())
            throw ConfigError(path + ": must not be negative");
        if (j.is_number_float())
            throw ConfigError(path + ": expected an integer");
    }
    return j.get<T>();
}

template <typename T>
T number_or(const json& parent, const char* key, const std::string& path, T fallback) {
    auto it = parent.find(key);
    if (it == parent.end())
        return fallback;
    return number_at<T>(*it, path + "." + key);
}

bool bool_or(const json& parent, const char* key, const std::string& path, bool fallback) {
    auto it = parent.find(key);
    if (it == parent.end())
        return fallback;
    if (!it->is_boolean())
        throw ConfigError(path + "." + key + ": expected a boolean");
    return it->get<bool>();
}

std::string string_or(const json& parent, const char* key, const std::string& path,
                      const std::string& fallback) {
    auto it = parent.find(key);
    if (it == parent.end())
        return fallback;
    if (!it->is_string())
        throw ConfigError(path + "." + key + ": expected a string");
    return it->get<std::string>();
}

CacheGeometry geometry_from(const json& j, const std::string& path, CacheGeometry defaults) {
    CacheGeometry g = defaults;
    g.num_sets = number_or<std::size_t>(j, "sets", path, g.num_sets);
    g.associativity = number_or<std::size_t>(j, "ways", path, g.associativity);
    g.block_size = number_or<std::size_t>(j, "block_bytes", path, g.block_size);
    g.hit_latency = number_or<Cycles>(j, "hit_latency", path, g.hit_latency);
    return g;
}

DefenseConfig defense_from(const json& j, const std::string& path, std::size_t llc_ways) {
    DefenseConfig d;
    const std::string kind = string_or(j, "kind", path, "none");
    if (kind == "none") {
        d.kind = DefenseConfig::Kind::None;
    } else if (kind == "tppd") {
        d.kind = DefenseConfig::Kind::Tppd;
        if (j.contains("z")) {
            d.thresholds = ThresholdConfig::symmetric(
                number_at<std::size_t>(j.at("z"), path + ".z"));
        } else {
            d.thresholds.th_spy = number_or<std::size_t>(j, "th_spy", path, llc_ways / 2);
            d.thresholds.th_trojan =
                number_or<std::size_t>(j, "th_trojan", path, llc_ways / 2);
        }
    } else if (kind == "nomo") {
        d.kind = DefenseConfig::Kind::Nomo;
        d.nomo.reserved_ways = number_or<std::size_t>(j, "reserved_ways", path, 2);
    } else {
        throw ConfigError(path + ".kind: unknown defense '" + kind + "'");
    }
    return d;
}

ExperimentConfig experiment_from_json(const json& j, const std::string& origin) {
    ExperimentConfig config;
    config.name = string_or(j, "name", origin, config.name);
    config.cores = number_or<std::size_t>(j, "cores", origin, config.cores);
    if (j.contains("l1"))
        config.l1 = geometry_from(j.at("l1"), origin + ".l1", config.l1);
    if (j.contains("llc"))
        config.llc = geometry_from(j.at("llc"), origin + ".llc", config.llc);
    config.llc.next_level_latency =
        number_or<Cycles>(j, "memory_latency", origin, config.llc.next_level_latency);
    config.l1.next_level_latency = config.llc.hit_latency;

    if (j.contains("defense"))
        config.defense =
            defense_from(j.at("defense"), origin + ".defense", config.llc.associativity);

    if (j.contains("detector")) {
        const json& d = j.at("detector");
        const std::string path = origin + ".detector";
        config.detector.enabled = bool_or(d, "enabled", path, false);
        config.detector.epoch_accesses =
            number_or<std::uint64_t>(d, "epoch_accesses", path, 10000);
        config.detector.threshold = number_or<std::uint64_t>(d, "threshold", path, 0);
        if (d.contains("occupancy_sets")) {
            const json& sets = d.at("occupancy_sets");
            if (!sets.is_array())
                throw ConfigError(path + ".occupancy_sets: expected an array");
            for (const auto& s : sets)
                config.detector.occupancy_sets.push_back(
                    number_at<std::size_t>(s, path + ".occupancy_sets[]"));
        }
    }

    config.force_engage = bool_or(j, "force_engage", origin, false);
    config.seed = number_or<std::uint64_t>(j, "seed", origin, config.seed);
    config.out_dir = string_or(j, "out_dir", origin, config.out_dir);

    if (j.contains("bindings")) {
        const json& b = j.at("bindings");
        if (!b.is_object())
            throw ConfigError(origin + ".bindings: expected an object of pid: core");
        for (const auto& [key, value] : b.items())
            config.bindings[static_cast<Pid>(std::stoul(key))] =
                number_at<std::size_t>(value, origin + ".bindings." + key);
    }

    if (j.contains("workload")) {
        const json& w = j.at("workload");
        const std::string wpath = origin + ".workload";
        if (w.contains("attack")) {
            const json& a = w.at("attack");
            const std::string apath = wpath + ".attack";
            config.attack.enabled = bool_or(a, "enabled", apath, true);
            config.attack.bits = number_or<std::size_t>(a, "bits", apath, 256);
            config.attack.bit_seed = number_or<std::uint64_t>(a, "bit_seed", apath, 1);
            ChannelConfig& ch = config.attack.channel;
            ch.target_set = number_or<std::size_t>(a, "target_set", apath, 0);
            ch.spy_pid = number_or<Pid>(a, "spy_pid", apath, 0);
            ch.trojan_pid = number_or<Pid>(a, "trojan_pid", apath, 1);
            ch.es_size = number_or<std::size_t>(a, "es_size", apath, 0);
            ch.spy_tag_seed = number_or<Addr>(a, "spy_tag_seed", apath, ch.spy_tag_seed);
            ch.trojan_tag_seed =
                number_or<Addr>(a, "trojan_tag_seed", apath, ch.trojan_tag_seed);
            if (a.contains("decode_threshold"))
                ch.decode_threshold =
                    number_at<Cycles>(a.at("decode_threshold"), apath + ".decode_threshold");
        }
        if (w.contains("schedule")) {
            const json& s = w.at("schedule");
            const std::string spath = wpath + ".schedule";
            const std::string kind = string_or(s, "kind", spath, "round_robin");
            if (kind == "round_robin") {
                config.schedule.kind = Schedule::Kind::RoundRobin;
            } else if (kind == "ratio") {
                config.schedule.kind = Schedule::Kind::Ratio;
                const json& ratio = require(s, "ratio", spath);
                if (!ratio.is_array())
                    throw ConfigError(spath + ".ratio: expected an array");
                for (const auto& r : ratio)
                    config.schedule.ratio.push_back(
                        number_at<std::size_t>(r, spath + ".ratio[]"));
            } else {
                throw ConfigError(spath + ".kind: unknown schedule '" + kind + "'");
            }
        }
    }
    return config;
}

// Benign workloads resolve after overrides so the final seed feeds the
// generator streams.
void resolve_benign(ExperimentConfig& config, const json& j, const std::string& origin) {
    if (!j.contains("workload") || !j.at("workload").contains("benign"))
        return;
    const json& b = j.at("workload").at("benign");
    const std::string bpath = origin + ".workload.benign";
    config.benign_events =
        number_or<std::size_t>(b, "events_per_process", bpath, 100000);
    if (b.contains("preset")) {
        const std::string preset =
            string_or(b, "preset", bpath, "");
        const Pid first_pid = number_or<Pid>(b, "first_pid", bpath,
                                             config.attack.enabled ? 2 : 0);
        config.benign = mix_preset(preset, config.llc, first_pid, config.seed);
        return;
    }
    if (!b.contains("profiles"))
        return;
    const json& profiles = b.at("profiles");
    if (!profiles.is_array())
        throw ConfigError(bpath + ".profiles: expected an array");
    std::size_t index = 0;
    for (const auto& p : profiles) {
        const std::string ppath = bpath + ".profiles[" + std::to_string(index) + "]";
        BenignProfile profile;
        profile.pid = number_at<Pid>(require(p, "pid", ppath), ppath + ".pid");
        profile.first_set =
            number_at<std::size_t>(require(p, "first_set", ppath), ppath + ".first_set");
        profile.last_set =
            number_at<std::size_t>(require(p, "last_set", ppath), ppath + ".last_set");
        profile.locality =
            number_at<double>(require(p, "locality", ppath), ppath + ".locality");
        profile.working_set_blocks = number_at<std::size_t>(
            require(p, "working_set_blocks", ppath), ppath + ".working_set_blocks");
        profile.rng_seed = number_or<std::uint64_t>(p, "seed", ppath,
                                                    config.seed * 977 + profile.pid);
        config.benign.push_back(profile);
        ++index;
    }
}

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& overrides) {
    if (overrides.seed)
        config.seed = *overrides.seed;
    if (overrides.out_dir)
        config.out_dir = *overrides.out_dir;
    if (overrides.defense) {
        const std::string& kind = *overrides.defense;
        if (kind == "none") {
            config.defense = DefenseConfig{};
        } else if (kind == "tppd") {
            if (config.defense.kind != DefenseConfig::Kind::Tppd)
                config.defense.thresholds =
                    ThresholdConfig::symmetric(config.llc.associativity / 2);
            config.defense.kind = DefenseConfig::Kind::Tppd;
        } else if (kind == "nomo") {
            if (config.defense.kind != DefenseConfig::Kind::Nomo)
                config.defense.nomo.reserved_ways = 2;
            config.defense.kind = DefenseConfig::Kind::Nomo;
        } else {
            throw ConfigError("--defense: unknown defense '" + kind + "'");
        }
    }
    if (overrides.z) {
        if (config.defense.kind != DefenseConfig::Kind::Tppd)
            throw ConfigError("--z: only applies to the tppd defense");
        config.defense.thresholds = ThresholdConfig::symmetric(*overrides.z);
    }
}

json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (!j.is_object())
        throw ConfigError(path + ": top-level value must be an object");
    return j;
}

} // namespace

ExperimentConfig load_experiment_config(const std::string& path,
                                        const ConfigOverrides& overrides) {
    const json j = parse_json_file(path);
    ExperimentConfig config = experiment_from_json(j, "config");
    apply_overrides(config, overrides);
    resolve_benign(config, j, "config");
    config.validate();
    return config;
}

MatrixConfig load_matrix_config(const std::string& path, const ConfigOverrides& overrides) {
    const json j = parse_json_file(path);
    MatrixConfig mc;
    mc.base = experiment_from_json(j, "config");
    apply_overrides(mc.base, overrides);

    const json& m = require(j, "matrix", "config");
    if (m.contains("z_values")) {
        const json& zs = m.at("z_values");
        if (!zs.is_array())
            throw ConfigError("config.matrix.z_values: expected an array");
        for (const auto& z : zs)
            mc.z_values.push_back(number_at<std::size_t>(z, "config.matrix.z_values[]"));
    }
    if (m.contains("benchmarks")) {
        const json& bs = m.at("benchmarks");
        if (!bs.is_array())
            throw ConfigError("config.matrix.benchmarks: expected an array");
        for (const auto& b : bs) {
            if (!b.is_string())
                throw ConfigError("config.matrix.benchmarks[]: expected strings");
            mc.benchmarks.push_back(b.get<std::string>());
        }
    }
    mc.benign_events = number_or<std::size_t>(m, "benign_events", "config.matrix", 100000);
    mc.validate();
    return mc;
}

bool selfcheck(const ExperimentConfig& config, std::ostream& out) {
    bool all_ok = true;
    const auto report = [&](const char* name, bool ok) {
        out << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
        all_ok &= ok;
    };

    bool valid = true;
    try {
        config.validate();
    } catch (const SimError&) {
        valid = false;
    }
    report("config-valid", valid);
    if (!valid)
        return false;

    const auto first = run_experiment(config);
    const auto second = run_experiment(config);
    report("deterministic-rerun",
           summary_json(config, first).dump() == summary_json(config, second).dump());

    const auto small = storage_overhead(4096, 8, 2);
    const auto wide = storage_overhead(4096, 8, 16);
    report("storage-formula", small.bits_per_set == 11 && small.total_bytes == 5632.0 &&
                                  wide.bits_per_set == 39 && wide.total_bytes == 19968.0);

    if (config.attack.enabled && config.defense.kind == DefenseConfig::Kind::Tppd &&
        config.detector.enabled && !config.force_engage) {
        ExperimentConfig forced = config;
        forced.force_engage = true;
        forced.detector.enabled = false;
        const auto forced_result = run_experiment(forced);

        std::size_t first_engaged = first.bit_engaged.size();
        for (std::size_t i = 0; i < first.bit_engaged.size(); ++i) {
            if (first.bit_engaged[i]) {
                first_engaged = i;
                break;
            }
        }
        bool converges = first_engaged < first.bit_engaged.size();
        if (converges && first.channel && forced_result.channel) {
            for (std::size_t i = first_engaged + 1; i < first.channel->per_bit_probe.size();
                 ++i) {
                converges &= first.channel->per_bit_probe[i].miss_count ==
                             forced_result.channel->per_bit_probe[i].miss_count;
                converges &= first.channel->per_bit_probe[i].total_latency ==
                             forced_result.channel->per_bit_probe[i].total_latency;
            }
        }
        report("engagement-convergence", converges);
    }
    return all_ok;
}

} // namespace tppd
