#ifndef TPPDSIM_ATTACK_HPP
#define TPPDSIM_ATTACK_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tppdsim/hierarchy.hpp"

namespace tppd {

/// A group of distinct-tag block addresses all mapping to one LLC set.
struct EvictionSet {
    std::size_t set_index = 0;
    std::vector<Addr> addresses;
    Pid owner = kNoPid;
};

/// Deterministic eviction set: addresses (tag_seed + k) for k in
/// [0, count). Distinct tag seeds give tag-disjoint sets, mirroring
/// attackers with no shared address space.
EvictionSet build_eviction_set(const CacheGeometry& llc_geometry, std::size_t set_index,
                               std::size_t count, Pid owner, Addr tag_seed);

/// Channel parameters. Tag seeds must keep the spy's and trojan's address
/// pools disjoint; the flush pools back the L1-conflict passes issued
/// before each counted pass so that probe accesses always reach the LLC.
struct ChannelConfig {
    std::size_t target_set = 0;
    Pid spy_pid = 0;
    Pid trojan_pid = 1;
    std::size_t es_size = 0; // 0 means the LLC associativity
    Addr spy_tag_seed = 0;
    Addr trojan_tag_seed = 1u << 16;
    Addr spy_flush_tag_seed = 1u << 20;
    Addr trojan_flush_tag_seed = 1u << 21;
    std::optional<Cycles> decode_threshold; // empty: midpoint of noiseless modes

    void validate(const CacheGeometry& llc, const CacheGeometry& l1) const;
};

struct ProbeOutcome {
    std::size_t miss_count = 0; // LLC misses over the probe pass
    Cycles total_latency = 0;   // summed latency of the probe pass
};

/// Decode threshold for a channel: the configured value, or the midpoint
/// between the two noiseless undefended probe latencies.
Cycles channel_decode_threshold(const CacheGeometry& llc_geometry,
                                const CacheGeometry& l1_geometry,
                                const ChannelConfig& config);

/// Full channel transcript plus the decode rule's threshold.
struct ChannelRun {
    std::vector<bool> bits_sent;
    std::vector<bool> bits_decoded;
    std::vector<ProbeOutcome> per_bit_probe;
    Cycles decode_threshold = 0;

    double accuracy() const; // 1.0 for an empty run
};

/// One access of the attack's open-loop stream. The stream depends only
/// on the bit sequence, never on simulated outcomes, so the same channel
/// can run interactively or be interleaved into a mixed workload.
struct AttackEvent {
    enum class Phase : std::uint8_t { Prime, TrojanFlush, Transmit, SpyFlush, Probe };
    Pid pid = kNoPid;
    Addr address = 0;
    Phase phase = Phase::Prime;
    std::size_t bit_index = 0; // meaningful from the first transmit on
};

/// The complete access stream for a channel run over `bits`.
std::vector<AttackEvent> emit_attack_stream(const CacheGeometry& llc_geometry,
                                            const CacheGeometry& l1_geometry,
                                            const ChannelConfig& config,
                                            const std::vector<bool>& bits);

/// Fold the simulated outcomes of probe-phase events back into a
/// ChannelRun. `results` must align one-to-one with `events`.
ChannelRun decode_attack_results(const ChannelConfig& config,
                                 const CacheGeometry& llc_geometry,
                                 const CacheGeometry& l1_geometry,
                                 std::span<const AttackEvent> events,
                                 std::span<const AccessResult> results,
                                 const std::vector<bool>& bits);

/// Reference Prime+Probe driver bound to a simulator.
///
/// Round protocol per bit: the trojan replays its eviction set for a 1
/// and stays idle for a 0; the spy then re-walks its eviction set and
/// times it. The probe pass leaves the spy's blocks resident, so it
/// doubles as the next round's prime. Spy passes alternate direction
/// each round and both attackers cycle an L1-conflict buffer before a
/// pass, keeping self-eviction artifacts out of the measured set.
class PrimeProbeChannel {
public:
    PrimeProbeChannel(Hierarchy& hierarchy, ChannelConfig config);

    void prime();
    void transmit(bool bit);
    ProbeOutcome probe();

    /// Prime once, then transmit/probe per bit and decode: a bit reads 1
    /// iff the probe latency exceeds the threshold (ties decode to 0).
    ChannelRun run_channel(const std::vector<bool>& bits);

    Cycles decode_threshold() const { return decode_threshold_; }
    const EvictionSet& spy_eviction_set() const { return spy_es_; }
    const EvictionSet& trojan_eviction_set() const { return trojan_es_; }

    static std::vector<bool> random_bits(std::size_t count, std::uint64_t seed);

private:
    ProbeOutcome replay(std::span<const Addr> addresses, Pid pid, bool count);

    Hierarchy& hierarchy_;
    ChannelConfig config_;
    EvictionSet spy_es_;
    EvictionSet trojan_es_;
    std::vector<Addr> spy_flush_;
    std::vector<Addr> trojan_flush_;
    Cycles decode_threshold_ = 0;
    bool forward_ = true; // direction of the next spy pass
};

} // namespace tppd

#endif
