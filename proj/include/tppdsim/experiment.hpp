#ifndef TPPDSIM_EXPERIMENT_HPP
#define TPPDSIM_EXPERIMENT_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tppdsim/attack.hpp"
#include "tppdsim/detector.hpp"
#include "tppdsim/hierarchy.hpp"
#include "tppdsim/metrics.hpp"
#include "tppdsim/nomo.hpp"
#include "tppdsim/tppd.hpp"
#include "tppdsim/workload.hpp"

namespace tppd {

struct DefenseConfig {
    enum class Kind { None, Tppd, Nomo };
    Kind kind = Kind::None;
    ThresholdConfig thresholds; // Tppd
    NomoConfig nomo;            // Nomo

    std::string describe() const;
};

struct DetectorConfig {
    bool enabled = false;
    std::uint64_t epoch_accesses = 10000;
    std::uint64_t threshold = 0; // 0: defaults to 4 x LLC associativity
    std::vector<std::size_t> occupancy_sets;
};

struct AttackConfig {
    bool enabled = false;
    ChannelConfig channel;
    std::size_t bits = 256;
    std::uint64_t bit_seed = 1;
};

/// A fully resolved experiment. Defaults mirror the reference machine:
/// 4 cores, 64KB 4-way L1 at 2 cycles, 2MB 8-way shared LLC at 18
/// cycles, 64B blocks, 250-cycle memory.
struct ExperimentConfig {
    std::string name = "experiment";
    std::size_t cores = 4;
    CacheGeometry l1{256, 4, 64, 2, 18};
    CacheGeometry llc{4096, 8, 64, 18, 250};
    DefenseConfig defense;
    DetectorConfig detector;
    AttackConfig attack;
    std::vector<BenignProfile> benign;
    std::size_t benign_events = 0; // events per benign process
    Schedule schedule;
    bool force_engage = false;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::map<Pid, std::size_t> bindings; // empty: assign in pid order

    void validate() const; // throws ConfigError with a field path
    std::uint64_t detector_threshold() const;
    std::map<Pid, std::size_t> resolved_bindings() const;
};

/// Unified workload event: a benign trace entry or one attack access.
struct WorkloadEvent {
    Pid pid = kNoPid;
    Addr address = 0;
    Op op = Op::Read;
    bool attack = false;
    AttackEvent::Phase phase = AttackEvent::Phase::Prime;
    std::size_t bit_index = 0;
};

/// The deterministic merged access stream for a config (attack stream
/// interleaved with generated benign traces per the schedule).
std::vector<WorkloadEvent> build_workload(const ExperimentConfig& config);

struct EpochRow {
    std::uint64_t epoch = 0;
    std::uint64_t cross_evictions = 0;
    std::optional<DetectionVerdict> hottest; // best pair, unfiltered
    std::size_t verdicts = 0;
};

struct ExperimentResult {
    RunStats stats;
    std::optional<ChannelRun> channel;
    std::vector<bool> bit_engaged; // engagement state at each probe
    std::vector<DetectionVerdict> verdicts;
    std::optional<std::uint64_t> first_engagement_epoch;
    std::vector<EpochRow> epochs;
    // occupancy[set][pid] = per-epoch block counts for configured sets
    std::map<std::size_t, std::map<Pid, std::vector<double>>> occupancy;
    // whole-LLC per-process block counts, one sample per epoch
    std::map<Pid, std::vector<double>> llc_occupancy;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Run and write the report files under config.out_dir.
void write_reports(const ExperimentConfig& config, const ExperimentResult& result);

struct MatrixConfig {
    ExperimentConfig base;        // attack settings shared by every cell
    std::vector<std::size_t> z_values; // must contain 0 (the baseline)
    std::vector<std::string> benchmarks; // preset names; attack-only is implicit
    std::size_t benign_events = 100000;

    void validate() const;
};

struct ImpactTable {
    std::vector<std::size_t> z_values;
    std::vector<std::string> benchmarks;
    std::map<std::size_t, std::uint64_t> attack_only_misses;
    std::map<std::size_t, std::uint64_t> attack_only_accesses;
    std::map<std::pair<std::string, std::size_t>, std::uint64_t> combined_misses;
    std::map<std::pair<std::string, std::size_t>, std::uint64_t> combined_accesses;
    std::map<std::size_t, long long> diff;                              // attack-only delta
    std::map<std::pair<std::string, std::size_t>, long long> diff_prime; // combined delta
    std::map<std::pair<std::string, std::size_t>, long long> isolated;   // per-benchmark
    std::map<std::size_t, double> avg_isolated;
};

ImpactTable run_matrix(const MatrixConfig& config);
void write_matrix_report(const MatrixConfig& config, const ImpactTable& table);

/// Configuration loading. The file is JSON; overrides come from CLI flags.
struct ConfigOverrides {
    std::optional<std::string> defense; // none | tppd | nomo
    std::optional<std::size_t> z;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

ExperimentConfig load_experiment_config(const std::string& path,
                                        const ConfigOverrides& overrides = {});
MatrixConfig load_matrix_config(const std::string& path,
                                const ConfigOverrides& overrides = {});

/// Built-in consistency checks over a config: double-run determinism,
/// storage-cost spot values, and detector-vs-forced engagement
/// convergence when applicable. Prints one line per check.
bool selfcheck(const ExperimentConfig& config, std::ostream& out);

} // namespace tppd

#endif
