#include "tppdsim/cache.hpp"

#include <algorithm>
#include <string>

namespace tppd {

namespace {

bool is_pow2(std::size_t v) {
    return v != 0 && (v & (v - 1)) == 0;
}

// Ages stay far below this in any realistic run; the guard keeps the
// distinct-age invariant safe even on pathological traces.
constexpr std::uint64_t kRenormAge = std::uint64_t{1} << 62;

} // namespace

void CacheGeometry::validate(const char* name) const {
    const std::string n(name);
    if (!is_pow2(num_sets))
        throw ConfigError(n + ".num_sets: must be a power of two, got " + std::to_string(num_sets));
    if (!is_pow2(block_size))
        throw ConfigError(n + ".block_size: must be a power of two, got " + std::to_string(block_size));
    if (associativity < 2)
        throw ConfigError(n + ".associativity: must be at least 2, got " + std::to_string(associativity));
}

std::pair<std::size_t, Addr> map_address(const CacheGeometry& geometry, Addr address) {
    const Addr block = address / geometry.block_size;
    return {static_cast<std::size_t>(block % geometry.num_sets), block / geometry.num_sets};
}

Addr compose_address(const CacheGeometry& geometry, std::size_t set_index, Addr tag) {
    return (tag * geometry.num_sets + set_index) * geometry.block_size;
}

std::size_t lru_victim(std::span<const BlockMeta> set) {
    for (std::size_t way = 0; way < set.size(); ++way)
        if (!set[way].valid)
            return way;
    std::size_t victim = 0;
    std::uint64_t max_age = set[0].age;
    for (std::size_t way = 1; way < set.size(); ++way) {
        if (set[way].age > max_age) {
            victim = way;
            max_age = set[way].age;
        }
    }
    return victim;
}

std::size_t find_victim_except(std::span<const BlockMeta> set, Pid omit) {
    std::size_t way = 0;
    std::size_t victim = set.size();
    std::uint64_t max_age = 0;
    for (; way < set.size(); ++way) {
        if (set[way].valid && set[way].owner != omit) {
            victim = way;
            max_age = set[way].age;
            break;
        }
    }
    for (; way < set.size(); ++way) {
        if (set[way].valid && set[way].owner != omit && set[way].age > max_age) {
            victim = way;
            max_age = set[way].age;
        }
    }
    if (victim == set.size())
        throw NoEligibleVictim("find_victim_except: every valid block belongs to pid " +
                               std::to_string(omit));
    return victim;
}

CacheLevel::CacheLevel(CacheGeometry geometry) : geometry_(geometry) {
    geometry_.validate();
    sets_.assign(geometry_.num_sets, std::vector<BlockMeta>(geometry_.associativity));
}

CacheLevel::Lookup CacheLevel::probe(Addr address) const {
    const auto [set_index, tag] = map_address(geometry_, address);
    const auto& set = sets_[set_index];
    for (std::size_t way = 0; way < set.size(); ++way) {
        if (set[way].valid && set[way].tag == tag)
            return {true, set_index, tag, way};
    }
    return {false, set_index, tag, 0};
}

void CacheLevel::age_set(std::size_t set_index) {
    bool renorm = false;
    for (auto& block : sets_[set_index]) {
        if (block.valid) {
            ++block.age;
            renorm |= block.age >= kRenormAge;
        }
    }
    if (renorm)
        renormalize(set_index);
}

void CacheLevel::renormalize(std::size_t set_index) {
    // Rewrite ages as their rank, preserving relative order.
    auto& set = sets_[set_index];
    std::vector<std::size_t> order;
    for (std::size_t way = 0; way < set.size(); ++way)
        if (set[way].valid)
            order.push_back(way);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return set[a].age < set[b].age; });
    for (std::size_t rank = 0; rank < order.size(); ++rank)
        set[order[rank]].age = rank;
}

void CacheLevel::touch(std::size_t set_index, std::size_t way) {
    age_set(set_index);
    sets_[set_index][way].age = 0;
}

void CacheLevel::fill(std::size_t set_index, std::size_t way, Addr tag, Pid owner) {
    age_set(set_index);
    auto& block = sets_[set_index][way];
    block.valid = true;
    block.tag = tag;
    block.owner = owner;
    block.age = 0;
}

bool CacheLevel::invalidate(std::size_t set_index, Addr tag) {
    for (auto& block : sets_[set_index]) {
        if (block.valid && block.tag == tag) {
            block.valid = false;
            return true;
        }
    }
    return false;
}

std::span<const BlockMeta> CacheLevel::set_view(std::size_t set_index) const {
    return sets_[set_index];
}

} // namespace tppd
