#ifndef TPPDSIM_CACHE_HPP
#define TPPDSIM_CACHE_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tppdsim/errors.hpp"

namespace tppd {

using Pid = std::uint32_t;
using Addr = std::uint64_t;
using Cycles = std::uint64_t;

inline constexpr Pid kNoPid = std::numeric_limits<Pid>::max();

/// Geometry and timing of one set-associative cache level.
/// num_sets and block_size must be powers of two so index/offset extraction
/// is exact bit slicing; associativity must be at least 2 so a set can be
/// partitioned between two processes.
struct CacheGeometry {
    std::size_t num_sets = 0;
    std::size_t associativity = 0;
    std::size_t block_size = 0;
    Cycles hit_latency = 0;
    /// Cost of a fill from the level below. Only the last cache level's
    /// value enters the latency sum (it is the memory latency there).
    Cycles next_level_latency = 0;

    void validate(const char* name = "geometry") const;
    std::size_t capacity_blocks() const { return num_sets * associativity; }
};

/// Metadata of one cache way. Ages are per-set LRU ages: larger = older,
/// and ages of valid blocks within a set are pairwise distinct.
struct BlockMeta {
    bool valid = false;
    Addr tag = 0;
    Pid owner = kNoPid;
    std::uint64_t age = 0;
};

enum class Op : std::uint8_t { Read, Write };

/// One memory reference issued by a process.
struct AccessRecord {
    Pid pid = kNoPid;
    Addr address = 0;
    Op op = Op::Read;
};

enum class HitLevel : std::uint8_t { L1Hit, LlcHit, Miss };

struct EvictedBlock {
    Addr tag = 0;
    Pid owner = kNoPid;
};

/// Outcome of one simulated access.
struct AccessResult {
    HitLevel level = HitLevel::Miss;
    Cycles latency = 0;
    std::size_t set_index = 0; // LLC set of the referenced block
    std::optional<EvictedBlock> evicted; // LLC eviction, if any
    bool back_invalidated = false;       // eviction removed an L1 copy
};

/// Split an address into (set index, tag) for the given geometry.
std::pair<std::size_t, Addr> map_address(const CacheGeometry& geometry, Addr address);

/// Rebuild a block-aligned address from (set index, tag).
Addr compose_address(const CacheGeometry& geometry, std::size_t set_index, Addr tag);

/// Plain LRU victim: any invalid way first (lowest index), otherwise the
/// unique way with maximum age.
std::size_t lru_victim(std::span<const BlockMeta> set);

/// Oldest valid way whose owner differs from `omit`. Scans ways in
/// ascending order and replaces the candidate only on strictly greater
/// age, so the lowest way index wins on equal footing. Throws
/// NoEligibleVictim when every valid block belongs to `omit`.
std::size_t find_victim_except(std::span<const BlockMeta> set, Pid omit);

/// One cache level: an array of sets with per-set LRU age bookkeeping.
class CacheLevel {
public:
    explicit CacheLevel(CacheGeometry geometry);

    struct Lookup {
        bool hit = false;
        std::size_t set_index = 0;
        Addr tag = 0;
        std::size_t way = 0; // valid only when hit
    };

    /// Locate the block for `address` without touching any state.
    Lookup probe(Addr address) const;

    /// Refresh the LRU age of a way after a hit or a fill.
    void touch(std::size_t set_index, std::size_t way);

    /// Install a block into a way. Any previous content is overwritten;
    /// the caller handles eviction consequences beforehand.
    void fill(std::size_t set_index, std::size_t way, Addr tag, Pid owner);

    /// Drop the block holding `tag`, if present. Returns true if one was
    /// removed (used for inclusion back-invalidation).
    bool invalidate(std::size_t set_index, Addr tag);

    std::span<const BlockMeta> set_view(std::size_t set_index) const;
    const CacheGeometry& geometry() const { return geometry_; }

private:
    void age_set(std::size_t set_index);
    void renormalize(std::size_t set_index);

    CacheGeometry geometry_;
    std::vector<std::vector<BlockMeta>> sets_;
};

} // namespace tppd

#endif
