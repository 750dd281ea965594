#ifndef TPPDSIM_POLICY_HPP
#define TPPDSIM_POLICY_HPP

#include <optional>
#include <span>

#include "tppdsim/cache.hpp"

namespace tppd {

/// Victim-selection hook for the shared LLC. The hierarchy calls
/// victim_way() exactly once per fill and always completes the fill, then
/// reports it through block_inserted() so stateful policies can keep their
/// per-set accounting in step with the actual set contents.
class LlcPolicy {
public:
    virtual ~LlcPolicy() = default;

    virtual std::size_t victim_way(std::size_t set_index, Pid requester,
                                   std::span<const BlockMeta> set) = 0;

    /// evicted_owner is empty when the fill took an invalid way.
    virtual void block_inserted(std::size_t set_index, Pid inserted,
                                std::optional<Pid> evicted_owner) {
        (void)set_index;
        (void)inserted;
        (void)evicted_owner;
    }
};

/// Baseline replacement: plain LRU on every set.
class LruPolicy final : public LlcPolicy {
public:
    std::size_t victim_way(std::size_t, Pid, std::span<const BlockMeta> set) override {
        return lru_victim(set);
    }
};

} // namespace tppd

#endif
