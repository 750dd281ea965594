#ifndef TPPDSIM_METRICS_HPP
#define TPPDSIM_METRICS_HPP

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "tppdsim/cache.hpp"

namespace tppd {

struct PidStats {
    std::uint64_t accesses = 0;
    std::uint64_t l1_hits = 0;
    std::uint64_t llc_hits = 0;
    std::uint64_t llc_misses = 0;
};

/// Counters accumulated over one simulated run.
struct RunStats {
    std::uint64_t total_accesses = 0;
    std::uint64_t llc_lookups = 0;
    std::uint64_t llc_hits = 0;
    std::uint64_t llc_misses = 0;
    std::map<Pid, PidStats> per_pid;
    std::vector<std::uint64_t> per_set_misses;
};

/// Miss delta between a defended run and the undefended baseline on the
/// same trace. May be negative.
long long miss_diff(std::uint64_t misses_defended, std::uint64_t misses_baseline);

/// Isolated impact on one benchmark: its combined-run delta minus the
/// attack-only delta.
long long isolated_impact(long long diff_combined, long long diff_attack_only);

/// Mean isolated impact across benchmarks. Throws EmptyBenchmarkSet.
double avg_impact(std::span<const long long> impacts);

/// Misses per thousand accesses. The denominator is memory accesses, not
/// instructions; the reports note this. Throws SimError on zero accesses.
double mpki(std::uint64_t misses, std::uint64_t accesses);

struct StorageOverhead {
    unsigned bits_per_set = 0;
    std::uint64_t total_bits = 0;
    double total_bytes = 0.0;
};

/// Per-set defense metadata cost: 1 flag bit plus two process ids and two
/// log2(A)-bit block counters.
StorageOverhead storage_overhead(std::size_t num_sets, std::size_t associativity,
                                 unsigned id_bits);

} // namespace tppd

#endif
