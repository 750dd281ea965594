#ifndef TPPDSIM_TPPD_HPP
#define TPPDSIM_TPPD_HPP

#include <optional>
#include <span>
#include <vector>

#include "tppdsim/policy.hpp"

namespace tppd {

/// Partition floors for the suspicious pair, in ways. A process at or
/// below its floor cannot lose blocks to the other suspicious process.
struct ThresholdConfig {
    std::size_t th_spy = 0;
    std::size_t th_trojan = 0;

    static ThresholdConfig symmetric(std::size_t z) { return {z, z}; }
    void validate(std::size_t associativity) const;
};

/// Per-set defense state: the engagement flag, the suspicious pair, and
/// the live counts of their blocks in the set. While attack_flag is false
/// the other fields are ignored by every operation.
struct TppdSetState {
    bool attack_flag = false;
    Pid spy = kNoPid;
    Pid trojan = kNoPid;
    std::size_t spy_blocks = 0;    // CpS
    std::size_t trojan_blocks = 0; // CpT
};

/// Counter maintenance for one engaged set: decrement for the departing
/// block's owner, increment for the arriving one; same-process
/// replacements and innocent processes leave the counters untouched.
/// p_out is empty when the fill took an invalid way. Throws CounterError
/// when a counter would leave [0, associativity].
void update_counter(TppdSetState& state, Pid p_in, std::optional<Pid> p_out,
                    std::size_t associativity);

/// Targeted pseudo partitioning layered over LRU. Unengaged sets behave
/// exactly like plain LRU; on an engaged set a suspicious process that
/// would push its counterpart below the partition floor is redirected to
/// the oldest block outside that partition.
class TppdPolicy final : public LlcPolicy {
public:
    TppdPolicy(std::size_t num_sets, std::size_t associativity, ThresholdConfig thresholds);

    /// Flag a set as under attack. Counters are initialised by scanning
    /// the current contents. Engagement is permanent; a second distinct
    /// pair on the same set raises AlreadyEngaged.
    void engage(std::size_t set_index, Pid spy, Pid trojan,
                std::span<const BlockMeta> contents);

    /// Present for completeness; the shipped experiments never disengage.
    void disengage(std::size_t set_index);

    bool engaged(std::size_t set_index) const { return states_[set_index].attack_flag; }
    const TppdSetState& set_state(std::size_t set_index) const { return states_[set_index]; }
    const ThresholdConfig& thresholds() const { return thresholds_; }

    std::size_t victim_way(std::size_t set_index, Pid requester,
                           std::span<const BlockMeta> set) override;
    void block_inserted(std::size_t set_index, Pid inserted,
                        std::optional<Pid> evicted_owner) override;

private:
    ThresholdConfig thresholds_;
    std::size_t associativity_;
    std::vector<TppdSetState> states_;
};

} // namespace tppd

#endif
