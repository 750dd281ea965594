#include "tppdsim/attack.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace tppd {

namespace {

std::vector<Addr> flush_addresses(const CacheGeometry& llc, const CacheGeometry& l1,
                                  std::size_t target_set, Addr flush_tag_seed) {
    // Same L1 set as the eviction-set blocks, different LLC set: cycling
    // these displaces the attacker's own blocks from its L1 without
    // touching the target set.
    const std::size_t flush_set = (target_set + l1.num_sets) % llc.num_sets;
    std::vector<Addr> out;
    out.reserve(l1.associativity);
    for (std::size_t k = 0; k < l1.associativity; ++k)
        out.push_back(compose_address(llc, flush_set, flush_tag_seed + k));
    return out;
}

} // namespace

EvictionSet build_eviction_set(const CacheGeometry& llc_geometry, std::size_t set_index,
                               std::size_t count, Pid owner, Addr tag_seed) {
    if (count < llc_geometry.associativity)
        throw ConfigError("eviction set: needs at least " +
                          std::to_string(llc_geometry.associativity) +
                          " addresses, got " + std::to_string(count));
    EvictionSet es;
    es.set_index = set_index;
    es.owner = owner;
    es.addresses.reserve(count);
    for (std::size_t k = 0; k < count; ++k)
        es.addresses.push_back(compose_address(llc_geometry, set_index, tag_seed + k));
    return es;
}

void ChannelConfig::validate(const CacheGeometry& llc, const CacheGeometry& l1) const {
    if (target_set >= llc.num_sets)
        throw ConfigError("channel.target_set: " + std::to_string(target_set) +
                          " out of range for " + std::to_string(llc.num_sets) + " sets");
    if (spy_pid == trojan_pid)
        throw ConfigError("channel: spy and trojan must be distinct processes");
    if (llc.num_sets < 2 * l1.num_sets)
        throw ConfigError("channel: the LLC needs at least twice the L1's sets so the "
                          "flush buffer can avoid the target set");
    const std::size_t size = es_size == 0 ? llc.associativity : es_size;
    if (size < llc.associativity)
        throw ConfigError("channel.es_size: must be at least the LLC associativity");
    // Tag pools of the four address groups must not collide.
    const Addr spans[4] = {spy_tag_seed, trojan_tag_seed, spy_flush_tag_seed,
                           trojan_flush_tag_seed};
    const std::size_t widths[4] = {size, size, l1.associativity, l1.associativity};
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            if (spans[a] < spans[b] + widths[b] && spans[b] < spans[a] + widths[a])
                throw ConfigError("channel: tag seed ranges overlap");
}

Cycles channel_decode_threshold(const CacheGeometry& llc_geometry,
                                const CacheGeometry& l1_geometry,
                                const ChannelConfig& config) {
    if (config.decode_threshold)
        return *config.decode_threshold;
    // With no defense a probe pass costs es_size LLC hits for a 0 and
    // es_size memory fills for a 1; decode at the midpoint.
    const std::size_t es_size =
        config.es_size == 0 ? llc_geometry.associativity : config.es_size;
    const Cycles hit_pass = es_size * (l1_geometry.hit_latency + llc_geometry.hit_latency);
    const Cycles miss_pass = es_size * (l1_geometry.hit_latency + llc_geometry.hit_latency +
                                        llc_geometry.next_level_latency);
    return (hit_pass + miss_pass) / 2;
}

double ChannelRun::accuracy() const {
    if (bits_sent.empty())
        return 1.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < bits_sent.size(); ++i)
        correct += bits_sent[i] == bits_decoded[i];
    return static_cast<double>(correct) / static_cast<double>(bits_sent.size());
}

namespace {

void append_pass(std::vector<AttackEvent>& events, const std::vector<Addr>& addresses,
                 Pid pid, AttackEvent::Phase phase, std::size_t bit_index, bool forward) {
    if (forward) {
        for (Addr a : addresses)
            events.push_back({pid, a, phase, bit_index});
    } else {
        for (auto it = addresses.rbegin(); it != addresses.rend(); ++it)
            events.push_back({pid, *it, phase, bit_index});
    }
}

} // namespace

std::vector<AttackEvent> emit_attack_stream(const CacheGeometry& llc_geometry,
                                            const CacheGeometry& l1_geometry,
                                            const ChannelConfig& config,
                                            const std::vector<bool>& bits) {
    config.validate(llc_geometry, l1_geometry);
    const std::size_t es_size =
        config.es_size == 0 ? llc_geometry.associativity : config.es_size;
    const EvictionSet spy_es = build_eviction_set(llc_geometry, config.target_set, es_size,
                                                  config.spy_pid, config.spy_tag_seed);
    const EvictionSet trojan_es = build_eviction_set(
        llc_geometry, config.target_set, es_size, config.trojan_pid, config.trojan_tag_seed);
    const auto spy_flush = flush_addresses(llc_geometry, l1_geometry, config.target_set,
                                           config.spy_flush_tag_seed);
    const auto trojan_flush = flush_addresses(llc_geometry, l1_geometry, config.target_set,
                                              config.trojan_flush_tag_seed);

    std::vector<AttackEvent> events;
    bool forward = true;

    append_pass(events, spy_flush, config.spy_pid, AttackEvent::Phase::SpyFlush, 0, true);
    append_pass(events, spy_es.addresses, config.spy_pid, AttackEvent::Phase::Prime, 0,
                forward);
    forward = !forward;

    for (std::size_t bit = 0; bit < bits.size(); ++bit) {
        if (bits[bit]) {
            append_pass(events, trojan_flush, config.trojan_pid,
                        AttackEvent::Phase::TrojanFlush, bit, true);
            append_pass(events, trojan_es.addresses, config.trojan_pid,
                        AttackEvent::Phase::Transmit, bit, true);
        }
        append_pass(events, spy_flush, config.spy_pid, AttackEvent::Phase::SpyFlush, bit,
                    true);
        append_pass(events, spy_es.addresses, config.spy_pid, AttackEvent::Phase::Probe, bit,
                    forward);
        forward = !forward;
    }
    return events;
}

ChannelRun decode_attack_results(const ChannelConfig& config,
                                 const CacheGeometry& llc_geometry,
                                 const CacheGeometry& l1_geometry,
                                 std::span<const AttackEvent> events,
                                 std::span<const AccessResult> results,
                                 const std::vector<bool>& bits) {
    ChannelRun run;
    run.decode_threshold = channel_decode_threshold(llc_geometry, l1_geometry, config);
    run.bits_sent.assign(bits.begin(), bits.end());
    run.per_bit_probe.assign(bits.size(), ProbeOutcome{});

    for (std::size_t i = 0; i < events.size(); ++i) {
        if (events[i].phase != AttackEvent::Phase::Probe)
            continue;
        ProbeOutcome& outcome = run.per_bit_probe[events[i].bit_index];
        outcome.total_latency += results[i].latency;
        outcome.miss_count += results[i].level == HitLevel::Miss;
    }
    run.bits_decoded.reserve(bits.size());
    for (const auto& outcome : run.per_bit_probe)
        run.bits_decoded.push_back(outcome.total_latency > run.decode_threshold);
    return run;
}

PrimeProbeChannel::PrimeProbeChannel(Hierarchy& hierarchy, ChannelConfig config)
    : hierarchy_(hierarchy), config_(config) {
    const CacheGeometry& llc = hierarchy_.llc_geometry();
    const CacheGeometry& l1 = hierarchy_.l1_geometry();
    config_.validate(llc, l1);
    const std::size_t es_size = config_.es_size == 0 ? llc.associativity : config_.es_size;
    spy_es_ = build_eviction_set(llc, config_.target_set, es_size, config_.spy_pid,
                                 config_.spy_tag_seed);
    trojan_es_ = build_eviction_set(llc, config_.target_set, es_size, config_.trojan_pid,
                                    config_.trojan_tag_seed);
    spy_flush_ = flush_addresses(llc, l1, config_.target_set, config_.spy_flush_tag_seed);
    trojan_flush_ =
        flush_addresses(llc, l1, config_.target_set, config_.trojan_flush_tag_seed);
    decode_threshold_ = channel_decode_threshold(llc, l1, config_);
}

ProbeOutcome PrimeProbeChannel::replay(std::span<const Addr> addresses, Pid pid,
                                       bool count) {
    ProbeOutcome outcome;
    for (Addr address : addresses) {
        const AccessResult r = hierarchy_.access({pid, address, Op::Read});
        if (count) {
            outcome.total_latency += r.latency;
            outcome.miss_count += r.level == HitLevel::Miss;
        }
    }
    return outcome;
}

void PrimeProbeChannel::prime() {
    replay(spy_flush_, config_.spy_pid, false);
    std::vector<Addr> pass = spy_es_.addresses;
    if (!forward_)
        std::reverse(pass.begin(), pass.end());
    replay(pass, config_.spy_pid, false);
    forward_ = !forward_;
}

void PrimeProbeChannel::transmit(bool bit) {
    if (!bit)
        return; // a 0 is conveyed by staying idle
    replay(trojan_flush_, config_.trojan_pid, false);
    replay(trojan_es_.addresses, config_.trojan_pid, false);
}

ProbeOutcome PrimeProbeChannel::probe() {
    replay(spy_flush_, config_.spy_pid, false);
    std::vector<Addr> pass = spy_es_.addresses;
    if (!forward_)
        std::reverse(pass.begin(), pass.end());
    const ProbeOutcome outcome = replay(pass, config_.spy_pid, true);
    forward_ = !forward_;
    return outcome;
}

ChannelRun PrimeProbeChannel::run_channel(const std::vector<bool>& bits) {
    ChannelRun run;
    run.decode_threshold = decode_threshold_;
    run.bits_sent.assign(bits.begin(), bits.end());
    prime();
    for (bool bit : bits) {
        transmit(bit);
        const ProbeOutcome outcome = probe();
        run.per_bit_probe.push_back(outcome);
        run.bits_decoded.push_back(outcome.total_latency > decode_threshold_);
    }
    return run;
}

std::vector<bool> PrimeProbeChannel::random_bits(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<bool> bits;
    bits.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        bits.push_back((rng() & 1u) != 0);
    return bits;
}

} // namespace tppd
