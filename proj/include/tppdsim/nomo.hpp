#ifndef TPPDSIM_NOMO_HPP
#define TPPDSIM_NOMO_HPP

#include <span>

#include "tppdsim/policy.hpp"

namespace tppd {

/// Static way reservation: every process keeps `reserved_ways` ways in
/// every set, against every other process. The comparison baseline for
/// the targeted defense.
struct NomoConfig {
    std::size_t reserved_ways = 0;

    void validate(std::size_t associativity, std::size_t active_processes) const;
};

/// Oldest valid block whose eviction does not cut into another process's
/// reservation: the requester may take its own blocks freely, and blocks
/// of a process holding more than the reserved count. Invalid ways fill
/// first. Throws NoEligibleVictim when reservations exclude every way
/// (prevented by the config invariant).
std::size_t nomo_victim(std::span<const BlockMeta> set, Pid requester,
                        const NomoConfig& config);

/// NoMo applied uniformly to every LLC set.
class NomoPolicy final : public LlcPolicy {
public:
    explicit NomoPolicy(NomoConfig config) : config_(config) {}

    std::size_t victim_way(std::size_t, Pid requester,
                           std::span<const BlockMeta> set) override {
        return nomo_victim(set, requester, config_);
    }

    const NomoConfig& config() const { return config_; }

private:
    NomoConfig config_;
};

} // namespace tppd

#endif
