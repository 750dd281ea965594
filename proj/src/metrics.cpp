#include "tppdsim/metrics.hpp"

#include <bit>
#include <string>

namespace tppd {

long long miss_diff(std::uint64_t misses_defended, std::uint64_t misses_baseline) {
    return static_cast<long long>(misses_defended) - static_cast<long long>(misses_baseline);
}

long long isolated_impact(long long diff_combined, long long diff_attack_only) {
    return diff_combined - diff_attack_only;
}

double avg_impact(std::span<const long long> impacts) {
    if (impacts.empty())
        throw EmptyBenchmarkSet("avg_impact: no benchmarks to average over");
    long long sum = 0;
    for (long long d : impacts)
        sum += d;
    return static_cast<double>(sum) / static_cast<double>(impacts.size());
}

double mpki(std::uint64_t misses, std::uint64_t accesses) {
    if (accesses == 0)
        throw SimError("mpki: division by zero accesses");
    return static_cast<double>(misses) * 1000.0 / static_cast<double>(accesses);
}

StorageOverhead storage_overhead(std::size_t num_sets, std::size_t associativity,
                                 unsigned id_bits) {
    if (associativity == 0 || (associativity & (associativity - 1)) != 0)
        throw ConfigError("storage_overhead: associativity must be a power of two, got " +
                          std::to_string(associativity));
    const unsigned counter_bits = std::bit_width(associativity) - 1; // log2(A)
    StorageOverhead out;
    out.bits_per_set = 1 + 2 * (id_bits + counter_bits);
    out.total_bits = static_cast<std::uint64_t>(out.bits_per_set) * num_sets;
    out.total_bytes = static_cast<double>(out.total_bits) / 8.0;
    return out;
}

} // namespace tppd
