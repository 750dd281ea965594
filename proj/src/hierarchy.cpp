#include "tppdsim/hierarchy.hpp"

#include <string>

namespace tppd {

Hierarchy::Hierarchy(CacheGeometry l1_geometry, CacheGeometry llc_geometry,
                     std::size_t num_cores)
    : llc_(llc_geometry) {
    if (num_cores == 0)
        throw ConfigError("hierarchy: core count must be positive");
    l1_geometry.validate("l1");
    llc_geometry.validate("llc");
    if (l1_geometry.block_size != llc_geometry.block_size)
        throw ConfigError("hierarchy: L1 and LLC block sizes must match");
    l1s_.reserve(num_cores);
    for (std::size_t core = 0; core < num_cores; ++core)
        l1s_.emplace_back(l1_geometry);
    stats_.per_set_misses.assign(llc_geometry.num_sets, 0);
}

void Hierarchy::bind_process(Pid pid, std::size_t core) {
    if (core >= l1s_.size())
        throw ConfigError("bind_process: core " + std::to_string(core) + " out of range");
    core_of_pid_[pid] = core;
}

std::size_t Hierarchy::core_of(Pid pid) const {
    auto it = core_of_pid_.find(pid);
    if (it == core_of_pid_.end())
        throw UnknownProcess("access by pid " + std::to_string(pid) +
                             " which is not bound to any core");
    return it->second;
}

const CacheGeometry& Hierarchy::l1_geometry() const {
    return l1s_.front().geometry();
}

AccessResult Hierarchy::access(const AccessRecord& record) {
    const std::size_t core = core_of(record.pid);
    CacheLevel& l1 = l1s_[core];
    const CacheGeometry& l1g = l1.geometry();
    const CacheGeometry& llcg = llc_.geometry();

    ++stats_.total_accesses;
    PidStats& ps = stats_.per_pid[record.pid];
    ++ps.accesses;

    AccessResult result;
    result.set_index = map_address(llcg, record.address).first;

    const auto l1_lookup = l1.probe(record.address);
    if (l1_lookup.hit) {
        l1.touch(l1_lookup.set_index, l1_lookup.way);
        ++ps.l1_hits;
        result.level = HitLevel::L1Hit;
        result.latency = l1g.hit_latency;
        return result;
    }

    ++stats_.llc_lookups;
    const auto llc_lookup = llc_.probe(record.address);
    if (llc_lookup.hit) {
        llc_.touch(llc_lookup.set_index, llc_lookup.way);
        ++stats_.llc_hits;
        ++ps.llc_hits;
        result.level = HitLevel::LlcHit;
        result.latency = l1g.hit_latency + llcg.hit_latency;
    } else {
        ++stats_.llc_misses;
        ++ps.llc_misses;
        ++stats_.per_set_misses[llc_lookup.set_index];

        LlcPolicy& policy = policy_ ? *policy_ : default_policy_;
        const auto set = llc_.set_view(llc_lookup.set_index);
        const std::size_t way = policy.victim_way(llc_lookup.set_index, record.pid, set);

        std::optional<Pid> evicted_owner;
        if (set[way].valid) {
            const BlockMeta victim = set[way];
            evicted_owner = victim.owner;
            result.evicted = EvictedBlock{victim.tag, victim.owner};
            if (observer_)
                observer_(llc_lookup.set_index, record.pid, victim.owner);
            // Inclusion: purge the block from every private L1.
            const Addr victim_addr = compose_address(llcg, llc_lookup.set_index, victim.tag);
            for (auto& other_l1 : l1s_) {
                const auto mapping = map_address(other_l1.geometry(), victim_addr);
                result.back_invalidated |= other_l1.invalidate(mapping.first, mapping.second);
            }
        }
        llc_.fill(llc_lookup.set_index, way, llc_lookup.tag, record.pid);
        policy.block_inserted(llc_lookup.set_index, record.pid, evicted_owner);

        result.level = HitLevel::Miss;
        result.latency = l1g.hit_latency + llcg.hit_latency + llcg.next_level_latency;
    }

    // Fill the private L1; its victim stays resident in the LLC.
    const std::size_t l1_way = lru_victim(l1.set_view(l1_lookup.set_index));
    l1.fill(l1_lookup.set_index, l1_way, l1_lookup.tag, record.pid);
    return result;
}

std::span<const BlockMeta> Hierarchy::llc_set(std::size_t set_index) const {
    return llc_.set_view(set_index);
}

std::span<const BlockMeta> Hierarchy::l1_set(std::size_t core, std::size_t set_index) const {
    return l1s_[core].set_view(set_index);
}

std::size_t Hierarchy::llc_occupancy(std::size_t set_index, Pid pid) const {
    std::size_t count = 0;
    for (const auto& block : llc_.set_view(set_index))
        if (block.valid && block.owner == pid)
            ++count;
    return count;
}

std::map<Pid, std::size_t> Hierarchy::llc_occupancy_totals() const {
    std::map<Pid, std::size_t> totals;
    for (const auto& [pid, core] : core_of_pid_)
        totals[pid] = 0;
    for (std::size_t s = 0; s < llc_.geometry().num_sets; ++s)
        for (const auto& block : llc_.set_view(s))
            if (block.valid)
                ++totals[block.owner];
    return totals;
}

} // namespace tppd
