#include "tppdsim/tppd.hpp"

#include <string>

namespace tppd {

void ThresholdConfig::validate(std::size_t associativity) const {
    if (th_spy < 1 || th_trojan < 1)
        throw ConfigError("thresholds: partition floors must be at least 1 way");
    if (th_spy + th_trojan > associativity)
        throw ConfigError("thresholds: th_spy + th_trojan = " +
                          std::to_string(th_spy + th_trojan) +
                          " exceeds the associativity " + std::to_string(associativity) +
                          " (z may be at most A/2 for symmetric floors)");
}

void update_counter(TppdSetState& state, Pid p_in, std::optional<Pid> p_out,
                    std::size_t associativity) {
    if (p_out && *p_out == p_in)
        return;
    if (p_out) {
        if (*p_out == state.spy) {
            if (state.spy_blocks == 0)
                throw CounterError("spy block counter underflow");
            --state.spy_blocks;
        } else if (*p_out == state.trojan) {
            if (state.trojan_blocks == 0)
                throw CounterError("trojan block counter underflow");
            --state.trojan_blocks;
        }
    }
    if (p_in == state.spy) {
        if (state.spy_blocks == associativity)
            throw CounterError("spy block counter overflow");
        ++state.spy_blocks;
    } else if (p_in == state.trojan) {
        if (state.trojan_blocks == associativity)
            throw CounterError("trojan block counter overflow");
        ++state.trojan_blocks;
    }
    if (state.spy_blocks + state.trojan_blocks > associativity)
        throw CounterError("spy and trojan counters exceed the set size");
}

TppdPolicy::TppdPolicy(std::size_t num_sets, std::size_t associativity,
                       ThresholdConfig thresholds)
    : thresholds_(thresholds), associativity_(associativity) {
    thresholds_.validate(associativity);
    states_.assign(num_sets, TppdSetState{});
}

void TppdPolicy::engage(std::size_t set_index, Pid spy, Pid trojan,
                        std::span<const BlockMeta> contents) {
    if (spy == trojan)
        throw ConfigError("engage: spy and trojan must be distinct processes");
    TppdSetState& state = states_[set_index];
    if (state.attack_flag) {
        if (state.spy == spy && state.trojan == trojan)
            return; // re-confirmation of the same pair
        throw AlreadyEngaged("set " + std::to_string(set_index) +
                             " is already engaged for a different pair");
    }
    state.attack_flag = true;
    state.spy = spy;
    state.trojan = trojan;
    state.spy_blocks = 0;
    state.trojan_blocks = 0;
    for (const auto& block : contents) {
        if (!block.valid)
            continue;
        if (block.owner == spy)
            ++state.spy_blocks;
        else if (block.owner == trojan)
            ++state.trojan_blocks;
    }
}

void TppdPolicy::disengage(std::size_t set_index) {
    states_[set_index] = TppdSetState{};
}

std::size_t TppdPolicy::victim_way(std::size_t set_index, Pid requester,
                                   std::span<const BlockMeta> set) {
    const std::size_t way = lru_victim(set);
    const TppdSetState& state = states_[set_index];
    if (!state.attack_flag)
        return way;
    if (!set[way].valid)
        return way; // plain fill, nothing to protect

    const Pid victim_owner = set[way].owner;
    const bool requester_suspicious = requester == state.spy || requester == state.trojan;
    if (!requester_suspicious || victim_owner == requester)
        return way;

    // The eviction crosses the suspicious pair: honour the partition
    // floor. A process keeps at least its threshold of ways, so the
    // eviction is redirected whenever it would drop the count below it.
    if (victim_owner == state.spy && state.spy_blocks <= thresholds_.th_spy)
        return find_victim_except(set, state.spy);
    if (victim_owner == state.trojan && state.trojan_blocks <= thresholds_.th_trojan)
        return find_victim_except(set, state.trojan);
    return way;
}

void TppdPolicy::block_inserted(std::size_t set_index, Pid inserted,
                                std::optional<Pid> evicted_owner) {
    TppdSetState& state = states_[set_index];
    if (!state.attack_flag)
        return;
    update_counter(state, inserted, evicted_owner, associativity_);
}

} // namespace tppd
