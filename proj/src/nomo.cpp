#include "tppdsim/nomo.hpp"

#include <map>
#include <string>

namespace tppd {

void NomoConfig::validate(std::size_t associativity, std::size_t active_processes) const {
    if (reserved_ways < 1)
        throw ConfigError("nomo.reserved_ways: must be at least 1");
    if (reserved_ways * active_processes > associativity)
        throw ConfigError("nomo.reserved_ways: " + std::to_string(reserved_ways) + " ways x " +
                          std::to_string(active_processes) +
                          " processes exceeds the associativity " +
                          std::to_string(associativity));
}

std::size_t nomo_victim(std::span<const BlockMeta> set, Pid requester,
                        const NomoConfig& config) {
    for (std::size_t way = 0; way < set.size(); ++way)
        if (!set[way].valid)
            return way;

    std::map<Pid, std::size_t> held;
    for (const auto& block : set)
        ++held[block.owner];

    std::size_t victim = set.size();
    std::uint64_t max_age = 0;
    for (std::size_t way = 0; way < set.size(); ++way) {
        const Pid owner = set[way].owner;
        if (owner != requester && held[owner] <= config.reserved_ways)
            continue; // inside another process's reservation
        if (victim == set.size() || set[way].age > max_age) {
            victim = way;
            max_age = set[way].age;
        }
    }
    if (victim == set.size())
        throw NoEligibleVictim("nomo_victim: reservations exclude every way for pid " +
                               std::to_string(requester));
    return victim;
}

} // namespace tppd
