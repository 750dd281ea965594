#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "tppdsim/hierarchy.hpp"
#include "tppdsim/nomo.hpp"

using namespace tppd;

namespace {

std::vector<BlockMeta> set_of_owners(const std::vector<Pid>& owners,
                                     const std::vector<std::uint64_t>& ages) {
    std::vector<BlockMeta> set(owners.size());
    for (std::size_t i = 0; i < owners.size(); ++i)
        set[i] = {true, static_cast<Addr>(10 + i), owners[i], ages[i]};
    return set;
}

} // namespace

TEST_CASE("config bounds") {
    CHECK_THROWS_AS(NomoConfig{0}.validate(8, 2), ConfigError);
    CHECK_THROWS_AS(NomoConfig{3}.validate(8, 3), ConfigError); // 9 > 8
    CHECK_NOTHROW(NomoConfig{2}.validate(8, 4));
}

TEST_CASE("self-eviction is unrestricted") {
    const auto set = set_of_owners({1, 1, 1, 1}, {2, 3, 1, 0});
    CHECK(nomo_victim(set, 1, NomoConfig{2}) == 1); // plain LRU victim
}

TEST_CASE("blocks inside another process's reservation are skipped") {
    // pid 2 holds exactly v blocks: untouchable for pid 1
    const auto set = set_of_owners({2, 2, 1, 1}, {5, 4, 1, 2});
    CHECK(nomo_victim(set, 1, NomoConfig{2}) == 3); // oldest block of pid 1 itself

    // pid 2 holds more than v: its oldest block is fair game again
    const auto set2 = set_of_owners({2, 2, 2, 1}, {5, 4, 3, 0});
    CHECK(nomo_victim(set2, 1, NomoConfig{2}) == 0);
}

TEST_CASE("invalid ways fill before any reservation question") {
    auto set = set_of_owners({2, 2, 1, 1}, {5, 4, 1, 2});
    set[1].valid = false;
    CHECK(nomo_victim(set, 1, NomoConfig{2}) == 1);
}

TEST_CASE("chosen victim is the oldest eligible block") {
    std::mt19937_64 rng(17);
    const NomoConfig config{2};
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<Pid> owners(8);
        for (auto& o : owners)
            o = static_cast<Pid>(rng() % 4);
        std::vector<std::uint64_t> ages{0, 1, 2, 3, 4, 5, 6, 7};
        std::shuffle(ages.begin(), ages.end(), rng);
        const auto set = set_of_owners(owners, ages);
        const Pid requester = static_cast<Pid>(rng() % 4);
        const std::size_t way = nomo_victim(set, requester, config);

        const auto held = [&](Pid p) {
            std::size_t n = 0;
            for (const auto& b : set)
                n += b.owner == p;
            return n;
        };
        REQUIRE((set[way].owner == requester ||
                 held(set[way].owner) > config.reserved_ways));
        for (std::size_t w = 0; w < set.size(); ++w) {
            if (set[w].owner == requester || held(set[w].owner) > config.reserved_ways)
                REQUIRE(set[way].age >= set[w].age);
        }
    }
}

TEST_CASE("uniformity: the restriction also bites on attacker-free sets") {
    // Two benign processes sharing sets, no attack anywhere. NoMo's floor
    // redirects some evictions that plain LRU would have taken.
    Hierarchy lru_h({4, 2, 64, 2, 18}, {8, 4, 64, 18, 250}, 2);
    Hierarchy nomo_h({4, 2, 64, 2, 18}, {8, 4, 64, 18, 250}, 2);
    for (auto* h : {&lru_h, &nomo_h}) {
        h->bind_process(0, 0);
        h->bind_process(1, 1);
    }
    NomoPolicy nomo_policy(NomoConfig{2});
    nomo_h.set_policy(&nomo_policy);

    std::mt19937_64 rng(4);
    bool diverged = false;
    for (int i = 0; i < 20000; ++i) {
        const AccessRecord r{static_cast<Pid>(rng() % 2), (rng() % 48) * 64, Op::Read};
        const auto a = lru_h.access(r);
        const auto b = nomo_h.access(r);
        diverged |= a.evicted.has_value() != b.evicted.has_value() ||
                    (a.evicted && b.evicted && a.evicted->tag != b.evicted->tag);
    }
    CHECK(diverged);
}
