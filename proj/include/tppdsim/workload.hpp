#ifndef TPPDSIM_WORKLOAD_HPP
#define TPPDSIM_WORKLOAD_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tppdsim/cache.hpp"

namespace tppd {

/// One line of a trace file: `pid,R|W,0xADDRESS`.
struct TraceEvent {
    std::uint64_t seq = 0;
    Pid pid = kNoPid;
    Addr address = 0;
    Op op = Op::Read;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

/// Parameters of one synthetic benign process. Each generated event
/// reuses an already-issued address with probability `locality` and
/// otherwise draws uniformly from a pool of `working_set_blocks` blocks
/// spread evenly over the footprint sets.
struct BenignProfile {
    Pid pid = kNoPid;
    std::size_t first_set = 0;
    std::size_t last_set = 0; // inclusive
    double locality = 0.0;
    std::size_t working_set_blocks = 0;
    std::uint64_t rng_seed = 0;

    void validate(const CacheGeometry& llc) const;
};

std::vector<TraceEvent> generate_benign(const BenignProfile& profile,
                                        const CacheGeometry& llc_geometry,
                                        std::size_t n_events);

/// Deterministic merge order over several event sources.
struct Schedule {
    enum class Kind { RoundRobin, Ratio };
    Kind kind = Kind::RoundRobin;
    std::vector<std::size_t> ratio; // per-source burst lengths, Ratio only
};

/// Merge positions: (source index) per output slot. Exhausted sources are
/// skipped; each source's internal order is preserved.
std::vector<std::size_t> merge_order(std::span<const std::size_t> lengths,
                                     const Schedule& schedule);

std::vector<TraceEvent> interleave(std::span<const std::vector<TraceEvent>> traces,
                                   const Schedule& schedule);

std::vector<TraceEvent> read_trace(std::istream& in, const std::string& name = "<trace>");
std::vector<TraceEvent> read_trace_file(const std::string& path);
void write_trace(std::ostream& out, std::span<const TraceEvent> trace);
void write_trace_file(const std::string& path, std::span<const TraceEvent> trace);

/// Named two-process benign mixes standing in for the usual benchmark
/// pairings, scaled to the configured LLC. Valid names: mix1..mix7.
std::vector<BenignProfile> mix_preset(const std::string& name, const CacheGeometry& llc,
                                      Pid first_pid, std::uint64_t seed);
std::vector<std::string> mix_preset_names();

} // namespace tppd

#endif
