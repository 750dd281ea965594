#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "tppdsim/hierarchy.hpp"

using namespace tppd;

namespace {

const CacheGeometry kBigLlc{4096, 8, 64, 18, 250};

CacheGeometry small_l1() { return {4, 2, 64, 2, 18}; }
CacheGeometry small_llc() { return {16, 4, 64, 18, 250}; }

// Brute-force remapping: enumerate every (set, tag) pair in a small range
// and confirm the address round-trips.
void check_remap(const CacheGeometry& g, std::size_t sets_to_try, Addr tags_to_try) {
    for (std::size_t set = 0; set < sets_to_try; ++set) {
        for (Addr tag = 0; tag < tags_to_try; ++tag) {
            const Addr address = compose_address(g, set, tag);
            const auto [s, t] = map_address(g, address);
            REQUIRE(s == set);
            REQUIRE(t == tag);
        }
    }
}

} // namespace

TEST_CASE("map_address splits set and tag") {
    CHECK(map_address(kBigLlc, 0x0) == std::pair<std::size_t, Addr>{0, 0});
    CHECK(map_address(kBigLlc, 5 * 64) == std::pair<std::size_t, Addr>{5, 0});
    CHECK(map_address(kBigLlc, (3 * 4096 + 5) * 64) == std::pair<std::size_t, Addr>{5, 3});
    // offset bits never matter
    CHECK(map_address(kBigLlc, (3 * 4096 + 5) * 64 + 63) ==
          std::pair<std::size_t, Addr>{5, 3});
    check_remap(kBigLlc, 8, 8);
    check_remap(small_llc(), 16, 16);
}

TEST_CASE("geometry invariants are enforced") {
    CHECK_THROWS_AS(CacheGeometry({3, 4, 64, 1, 1}).validate(), ConfigError);
    CHECK_THROWS_AS(CacheGeometry({16, 4, 48, 1, 1}).validate(), ConfigError);
    CHECK_THROWS_AS(CacheGeometry({16, 1, 64, 1, 1}).validate(), ConfigError);
    CHECK_NOTHROW(CacheGeometry({16, 2, 64, 1, 1}).validate());
}

TEST_CASE("lru_victim prefers invalid ways, then maximum age") {
    std::vector<BlockMeta> set(4);
    for (std::size_t i = 0; i < 4; ++i)
        set[i] = {true, i, 0, 0};
    set[0].age = 3;
    set[1].age = 1;
    set[2].age = 2;
    set[3].age = 0;
    CHECK(lru_victim(set) == 0);

    set[2].valid = false;
    CHECK(lru_victim(set) == 2);
}

TEST_CASE("find_victim_except scans for the oldest foreign block") {
    std::vector<BlockMeta> set(4);
    const Pid p1 = 1, p2 = 2;
    set[0] = {true, 10, p1, 3};
    set[1] = {true, 11, p1, 2};
    set[2] = {true, 12, p2, 5};
    set[3] = {true, 13, p1, 1};
    CHECK(find_victim_except(set, p2) == 0);

    // single eligible block: owners P1,P2,P2,P2 with omit P2
    set[1].owner = p2;
    set[3].owner = p2;
    set[2].age = 9;
    CHECK(find_victim_except(set, p2) == 0);

    // nothing eligible
    set[0].owner = p2;
    CHECK_THROWS_AS(find_victim_except(set, p2), NoEligibleVictim);
}

TEST_CASE("find_victim_except matches an exhaustive reference scan") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t ways = 2 + rng() % 7;
        std::vector<BlockMeta> set(ways);
        std::uint64_t age = 0;
        std::vector<std::uint64_t> ages;
        for (std::size_t i = 0; i < ways; ++i)
            ages.push_back(age++);
        std::shuffle(ages.begin(), ages.end(), rng);
        for (std::size_t i = 0; i < ways; ++i)
            set[i] = {rng() % 8 != 0, static_cast<Addr>(i), static_cast<Pid>(rng() % 3),
                      ages[i]};
        const Pid omit = static_cast<Pid>(rng() % 3);

        std::size_t expected = ways;
        for (std::size_t i = 0; i < ways; ++i) {
            if (!set[i].valid || set[i].owner == omit)
                continue;
            if (expected == ways || set[i].age > set[expected].age)
                expected = i;
        }
        if (expected == ways) {
            CHECK_THROWS_AS(find_victim_except(set, omit), NoEligibleVictim);
        } else {
            CHECK(find_victim_except(set, omit) == expected);
        }
    }
}

TEST_CASE("access latencies follow the additive model") {
    Hierarchy h(small_l1(), small_llc(), 2);
    h.bind_process(0, 0);
    h.bind_process(1, 1);

    const auto first = h.access({0, 0x1000, Op::Read});
    CHECK(first.level == HitLevel::Miss);
    CHECK(first.latency == 2 + 18 + 250);

    const auto repeat = h.access({0, 0x1000, Op::Read});
    CHECK(repeat.level == HitLevel::L1Hit);
    CHECK(repeat.latency == 2);

    // same block from the other core: misses L1, hits the shared LLC
    const auto cross = h.access({1, 0x1000, Op::Read});
    CHECK(cross.level == HitLevel::LlcHit);
    CHECK(cross.latency == 2 + 18);
}

TEST_CASE("table-default latencies give a 270 cycle cold miss") {
    Hierarchy h({256, 4, 64, 2, 18}, {4096, 8, 64, 18, 250}, 4);
    h.bind_process(7, 2);
    const auto r = h.access({7, 0xdeadbe00, Op::Write});
    CHECK(r.level == HitLevel::Miss);
    CHECK(r.latency == 270);
}

TEST_CASE("unbound pids are rejected") {
    Hierarchy h(small_l1(), small_llc(), 1);
    CHECK_THROWS_AS(h.access({9, 0x0, Op::Read}), UnknownProcess);
}

TEST_CASE("LLC eviction back-invalidates L1 copies") {
    // L1 large enough to keep every block; LLC set holds only 4.
    Hierarchy h({16, 4, 64, 2, 18}, {4, 4, 64, 18, 250}, 2);
    h.bind_process(0, 0);
    h.bind_process(1, 1);

    const std::size_t target = 1;
    const auto addr = [&](Addr tag) { return compose_address(h.llc_geometry(), target, tag); };

    // core 1 owns one block in the target set
    CHECK(h.access({1, addr(0), Op::Read}).level == HitLevel::Miss);
    // core 0 fills the remaining ways
    for (Addr tag = 1; tag <= 3; ++tag)
        h.access({0, addr(tag), Op::Read});
    // next fill evicts core 1's LRU block and must purge its L1 copy
    const auto r = h.access({0, addr(4), Op::Read});
    CHECK(r.level == HitLevel::Miss);
    REQUIRE(r.evicted.has_value());
    CHECK(r.evicted->owner == 1);
    CHECK(r.evicted->tag == 0);
    CHECK(r.back_invalidated);

    // the purged block now misses in both levels for core 1
    const auto again = h.access({1, addr(0), Op::Read});
    CHECK(again.level == HitLevel::Miss);
}

TEST_CASE("inclusion holds after random traffic") {
    Hierarchy h(small_l1(), small_llc(), 2);
    h.bind_process(0, 0);
    h.bind_process(1, 1);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20000; ++i) {
        const Pid pid = rng() % 2;
        const Addr address = (rng() % 256) * 64;
        h.access({pid, address, rng() % 4 == 0 ? Op::Write : Op::Read});
    }
    // every valid L1 block must be present in the LLC
    for (std::size_t core = 0; core < 2; ++core) {
        for (std::size_t s = 0; s < h.l1_geometry().num_sets; ++s) {
            for (const auto& block : h.l1_set(core, s)) {
                if (!block.valid)
                    continue;
                const Addr address =
                    compose_address(h.l1_geometry(), s, block.tag);
                bool in_llc = false;
                const auto [ls, lt] = map_address(h.llc_geometry(), address);
                for (const auto& lb : h.llc_set(ls))
                    in_llc |= lb.valid && lb.tag == lt;
                CHECK(in_llc);
            }
        }
    }
}

TEST_CASE("ages in a set stay pairwise distinct and rankable") {
    Hierarchy h(small_l1(), small_llc(), 1);
    h.bind_process(0, 0);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 5000; ++i)
        h.access({0, (rng() % 128) * 64, Op::Read});

    for (std::size_t s = 0; s < h.llc_geometry().num_sets; ++s) {
        std::set<std::uint64_t> seen;
        std::size_t valid = 0;
        for (const auto& block : h.llc_set(s)) {
            if (!block.valid)
                continue;
            ++valid;
            seen.insert(block.age);
        }
        CHECK(seen.size() == valid); // distinct ages rank-normalize to 0..k-1
    }
}

TEST_CASE("identical traces give identical result sequences") {
    const auto run = [] {
        Hierarchy h(small_l1(), small_llc(), 2);
        h.bind_process(0, 0);
        h.bind_process(1, 1);
        std::mt19937_64 rng(99);
        std::vector<std::tuple<HitLevel, Cycles, std::size_t, bool>> log;
        for (int i = 0; i < 4000; ++i) {
            const auto r = h.access({static_cast<Pid>(rng() % 2), (rng() % 512) * 64,
                                     Op::Read});
            log.emplace_back(r.level, r.latency, r.set_index, r.back_invalidated);
        }
        return log;
    };
    CHECK(run() == run());
}
