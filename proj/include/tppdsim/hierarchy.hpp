#ifndef TPPDSIM_HIERARCHY_HPP
#define TPPDSIM_HIERARCHY_HPP

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "tppdsim/cache.hpp"
#include "tppdsim/metrics.hpp"
#include "tppdsim/policy.hpp"

namespace tppd {

/// Called on every eviction of a valid LLC block: (set, evicting pid,
/// owner of the evicted block).
using EvictionObserver = std::function<void(std::size_t, Pid, Pid)>;

/// Two-level hierarchy: one private L1 per core and a shared inclusive
/// LLC. Latency is purely additive: L1 hit, L1+LLC for an LLC hit, and
/// L1+LLC+llc.next_level_latency for a miss. Writes allocate and age
/// exactly like reads. The whole object is a sequential state machine;
/// identical traces produce identical results.
class Hierarchy {
public:
    Hierarchy(CacheGeometry l1_geometry, CacheGeometry llc_geometry, std::size_t num_cores);

    /// Every pid must be bound to a core before it issues accesses.
    void bind_process(Pid pid, std::size_t core);
    std::size_t core_of(Pid pid) const; // throws UnknownProcess

    /// Route LLC victim selection through `policy`. Plain LRU when unset.
    void set_policy(LlcPolicy* policy) { policy_ = policy; }
    void set_eviction_observer(EvictionObserver observer) { observer_ = std::move(observer); }

    AccessResult access(const AccessRecord& record);

    std::span<const BlockMeta> llc_set(std::size_t set_index) const;
    std::span<const BlockMeta> l1_set(std::size_t core, std::size_t set_index) const;
    const CacheGeometry& llc_geometry() const { return llc_.geometry(); }
    const CacheGeometry& l1_geometry() const;
    std::size_t num_cores() const { return l1s_.size(); }
    const std::map<Pid, std::size_t>& bindings() const { return core_of_pid_; }

    const RunStats& stats() const { return stats_; }

    /// Count of valid LLC blocks owned by `pid` in one set.
    std::size_t llc_occupancy(std::size_t set_index, Pid pid) const;

    /// Valid-block counts per owner across the whole LLC.
    std::map<Pid, std::size_t> llc_occupancy_totals() const;

private:
    std::vector<CacheLevel> l1s_;
    CacheLevel llc_;
    LruPolicy default_policy_;
    LlcPolicy* policy_ = nullptr;
    EvictionObserver observer_;
    std::map<Pid, std::size_t> core_of_pid_;
    RunStats stats_;
};

} // namespace tppd

#endif
