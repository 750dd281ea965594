// Independent brute-force reference for the two-level hierarchy and the
// three eviction policies. Written against its own representation
// (monotonic use stamps, counts recomputed by scanning) so it shares no
// logic with the production path it checks.

#ifndef TPPDSIM_TESTS_REFERENCE_SIM_HPP
#define TPPDSIM_TESTS_REFERENCE_SIM_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace refsim {

struct Block {
    bool valid = false;
    std::uint64_t tag = 0;
    unsigned owner = 0;
    std::uint64_t stamp = 0; // larger = more recently used
};

struct Level {
    std::size_t sets = 0, ways = 0, block = 0;
    std::vector<std::vector<Block>> data;
    std::uint64_t clock = 1;

    Level(std::size_t s, std::size_t w, std::size_t b) : sets(s), ways(w), block(b) {
        data.assign(sets, std::vector<Block>(ways));
    }
    std::size_t set_of(std::uint64_t addr) const { return (addr / block) % sets; }
    std::uint64_t tag_of(std::uint64_t addr) const { return (addr / block) / sets; }
    int find(std::size_t s, std::uint64_t tag) const {
        for (std::size_t w = 0; w < ways; ++w)
            if (data[s][w].valid && data[s][w].tag == tag)
                return static_cast<int>(w);
        return -1;
    }
    int first_invalid(std::size_t s) const {
        for (std::size_t w = 0; w < ways; ++w)
            if (!data[s][w].valid)
                return static_cast<int>(w);
        return -1;
    }
    std::size_t oldest(std::size_t s) const {
        std::size_t best = 0;
        for (std::size_t w = 1; w < ways; ++w)
            if (data[s][w].stamp < data[s][best].stamp)
                best = w;
        return best;
    }
    std::size_t count_owner(std::size_t s, unsigned pid) const {
        std::size_t n = 0;
        for (const auto& b : data[s])
            n += b.valid && b.owner == pid;
        return n;
    }
};

enum class Mode { Lru, Tppd, Nomo };

struct RefResult {
    int level = 2; // 0 = L1 hit, 1 = LLC hit, 2 = miss
    std::size_t llc_set = 0;
    int victim_way = -1; // way filled on miss
    bool evicted = false;
    std::uint64_t evicted_tag = 0;
    unsigned evicted_owner = 0;
    bool back_invalidated = false;

    friend bool operator==(const RefResult&, const RefResult&) = default;
};

struct Engagement {
    bool on = false;
    unsigned spy = 0, trojan = 0;
};

class RefSim {
public:
    RefSim(std::size_t l1_sets, std::size_t l1_ways, std::size_t llc_sets,
           std::size_t llc_ways, std::size_t block, std::size_t cores, Mode mode,
           std::size_t th_spy = 0, std::size_t th_trojan = 0, std::size_t nomo_v = 0)
        : llc_(llc_sets, llc_ways, block), mode_(mode), th_spy_(th_spy),
          th_trojan_(th_trojan), nomo_v_(nomo_v), engaged_(llc_sets) {
        for (std::size_t c = 0; c < cores; ++c)
            l1s_.emplace_back(l1_sets, l1_ways, block);
    }

    void bind(unsigned pid, std::size_t core) { core_of_[pid] = core; }
    void engage(std::size_t set, unsigned spy, unsigned trojan) {
        engaged_[set] = {true, spy, trojan};
    }

    std::size_t spy_count(std::size_t set) const {
        return llc_.count_owner(set, engaged_[set].spy);
    }
    std::size_t trojan_count(std::size_t set) const {
        return llc_.count_owner(set, engaged_[set].trojan);
    }

    RefResult access(unsigned pid, std::uint64_t addr) {
        Level& l1 = l1s_[core_of_.at(pid)];
        RefResult r;
        r.llc_set = llc_.set_of(addr);

        const std::size_t s1 = l1.set_of(addr);
        const std::uint64_t t1 = l1.tag_of(addr);
        if (int w = l1.find(s1, t1); w >= 0) {
            l1.data[s1][w].stamp = l1.clock++;
            r.level = 0;
            return r;
        }

        const std::uint64_t tl = llc_.tag_of(addr);
        if (int w = llc_.find(r.llc_set, tl); w >= 0) {
            llc_.data[r.llc_set][w].stamp = llc_.clock++;
            r.level = 1;
        } else {
            const std::size_t victim = pick_llc_victim(r.llc_set, pid);
            Block& vb = llc_.data[r.llc_set][victim];
            if (vb.valid) {
                r.evicted = true;
                r.evicted_tag = vb.tag;
                r.evicted_owner = vb.owner;
                const std::uint64_t victim_addr =
                    (vb.tag * llc_.sets + r.llc_set) * llc_.block;
                for (auto& other : l1s_) {
                    const std::size_t os = other.set_of(victim_addr);
                    if (int ow = other.find(os, other.tag_of(victim_addr)); ow >= 0) {
                        other.data[os][ow].valid = false;
                        r.back_invalidated = true;
                    }
                }
            }
            vb = {true, tl, pid, llc_.clock++};
            r.level = 2;
            r.victim_way = static_cast<int>(victim);
        }

        int w1 = l1.first_invalid(s1);
        if (w1 < 0)
            w1 = static_cast<int>(l1.oldest(s1));
        l1.data[s1][w1] = {true, t1, pid, l1.clock++};
        return r;
    }

private:
    std::size_t pick_llc_victim(std::size_t s, unsigned pid) {
        if (int w = llc_.first_invalid(s); w >= 0)
            return static_cast<std::size_t>(w);
        if (mode_ == Mode::Nomo)
            return nomo_victim(s, pid);
        const std::size_t lru = llc_.oldest(s);
        if (mode_ == Mode::Lru || !engaged_[s].on)
            return lru;

        const auto& e = engaged_[s];
        const unsigned victim_owner = llc_.data[s][lru].owner;
        const bool pid_suspicious = pid == e.spy || pid == e.trojan;
        if (!pid_suspicious || victim_owner == pid)
            return lru;
        if (victim_owner == e.spy && llc_.count_owner(s, e.spy) <= th_spy_)
            return oldest_excluding(s, e.spy);
        if (victim_owner == e.trojan && llc_.count_owner(s, e.trojan) <= th_trojan_)
            return oldest_excluding(s, e.trojan);
        return lru;
    }

    std::size_t oldest_excluding(std::size_t s, unsigned omit) {
        int best = -1;
        for (std::size_t w = 0; w < llc_.ways; ++w) {
            const Block& b = llc_.data[s][w];
            if (!b.valid || b.owner == omit)
                continue;
            if (best < 0 || b.stamp < llc_.data[s][best].stamp)
                best = static_cast<int>(w);
        }
        return static_cast<std::size_t>(best);
    }

    std::size_t nomo_victim(std::size_t s, unsigned pid) {
        int best = -1;
        for (std::size_t w = 0; w < llc_.ways; ++w) {
            const Block& b = llc_.data[s][w];
            if (b.owner != pid && llc_.count_owner(s, b.owner) <= nomo_v_)
                continue;
            if (best < 0 || b.stamp < llc_.data[s][best].stamp)
                best = static_cast<int>(w);
        }
        return static_cast<std::size_t>(best);
    }

    std::vector<Level> l1s_;
    Level llc_;
    Mode mode_;
    std::size_t th_spy_, th_trojan_, nomo_v_;
    std::vector<Engagement> engaged_;
    std::map<unsigned, std::size_t> core_of_;
};

} // namespace refsim

#endif
