#ifndef TPPDSIM_DETECTOR_HPP
#define TPPDSIM_DETECTOR_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "tppdsim/cache.hpp"

namespace tppd {

/// A set flagged as a covert-channel target, with the suspected pair.
/// The conflict-miss signal is symmetric, so the spy label goes to the
/// lower pid; the defense treats the pair symmetrically anyway.
struct DetectionVerdict {
    std::size_t set_index = 0;
    Pid spy = kNoPid;
    Pid trojan = kNoPid;
    std::uint64_t epoch = 0;
    std::uint64_t pair_score = 0;
};

/// Cross-process eviction counts for one set within the current epoch,
/// keyed by the ordered (evictor, victim owner) pair.
struct SetEpochCounts {
    std::map<std::pair<Pid, Pid>, std::uint64_t> by_pair;
};

/// Online detector fed by LLC eviction events. Time is counted in LLC
/// accesses; at each epoch boundary every active set is scored and the
/// counters reset. A set is flagged when one unordered pair accounts for
/// at least `threshold` cross evictions with traffic in both directions
/// (the ping-pong signature). The detector observes only; it never
/// touches cache state.
class ConflictMissDetector {
public:
    ConflictMissDetector(std::size_t num_sets, std::uint64_t epoch_accesses,
                         std::uint64_t threshold);

    struct EpochReport {
        std::uint64_t epoch = 0;
        std::vector<DetectionVerdict> verdicts;
        /// Best-scoring pair of the epoch regardless of the threshold;
        /// feeds the plot-ready per-epoch CSV.
        std::optional<DetectionVerdict> hottest;
    };

    /// Record one eviction; same-process evictions are ignored.
    void record_eviction(std::size_t set_index, Pid evictor, Pid victim_owner);

    /// Advance the access clock by one LLC access. At an epoch boundary
    /// returns the completed epoch's report and resets the counters.
    std::optional<EpochReport> tick();

    /// Score one set against the current epoch's counters.
    std::optional<DetectionVerdict> evaluate_set(std::size_t set_index) const;

    std::uint64_t current_epoch() const { return epoch_; }
    std::uint64_t epoch_accesses() const { return epoch_accesses_; }
    std::uint64_t threshold() const { return threshold_; }
    const SetEpochCounts& set_counts(std::size_t set_index) const {
        return counts_[set_index];
    }

private:
    std::uint64_t epoch_accesses_;
    std::uint64_t threshold_;
    std::uint64_t accesses_in_epoch_ = 0;
    std::uint64_t epoch_ = 0;
    std::vector<SetEpochCounts> counts_;
    std::vector<std::size_t> active_sets_;
};

/// Pearson correlation of two equal-length occupancy series. Throws
/// DegenerateTrace on length < 2, length mismatch, or zero variance.
double occupancy_correlation(std::span<const double> series_a,
                             std::span<const double> series_b);

} // namespace tppd

#endif
