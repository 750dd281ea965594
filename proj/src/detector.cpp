#include "tppdsim/detector.hpp"

#include <algorithm>
#include <cmath>

namespace tppd {

ConflictMissDetector::ConflictMissDetector(std::size_t num_sets,
                                           std::uint64_t epoch_accesses,
                                           std::uint64_t threshold)
    : epoch_accesses_(epoch_accesses), threshold_(threshold), counts_(num_sets) {
    if (epoch_accesses_ == 0)
        throw ConfigError("detector.epoch_accesses: must be positive");
    if (threshold_ == 0)
        throw ConfigError("detector.threshold: must be positive");
}

void ConflictMissDetector::record_eviction(std::size_t set_index, Pid evictor,
                                           Pid victim_owner) {
    if (evictor == victim_owner)
        return;
    auto& counts = counts_[set_index];
    if (counts.by_pair.empty())
        active_sets_.push_back(set_index);
    ++counts.by_pair[{evictor, victim_owner}];
}

std::optional<DetectionVerdict> ConflictMissDetector::evaluate_set(
    std::size_t set_index) const {
    const auto& counts = counts_[set_index];
    std::optional<DetectionVerdict> best;
    for (const auto& [pair, forward] : counts.by_pair) {
        const auto [a, b] = pair;
        if (a > b)
            continue; // the unordered pair is scored at its (min,max) key
        auto rev = counts.by_pair.find({b, a});
        const std::uint64_t backward = rev == counts.by_pair.end() ? 0 : rev->second;
        if (forward == 0 || backward == 0)
            continue; // one-sided thrashing is not the ping-pong signature
        const std::uint64_t score = forward + backward;
        if (score < threshold_)
            continue;
        if (!best || score > best->pair_score) {
            best = DetectionVerdict{set_index, a, b, epoch_, score};
        }
    }
    return best;
}

std::optional<ConflictMissDetector::EpochReport> ConflictMissDetector::tick() {
    if (++accesses_in_epoch_ < epoch_accesses_)
        return std::nullopt;

    EpochReport report;
    report.epoch = epoch_;
    std::sort(active_sets_.begin(), active_sets_.end());
    for (std::size_t set_index : active_sets_) {
        if (auto verdict = evaluate_set(set_index))
            report.verdicts.push_back(*verdict);
        // Track the loudest pair of the epoch even when below threshold
        // or one-sided.
        const auto& counts = counts_[set_index];
        for (const auto& [pair, forward] : counts.by_pair) {
            const auto [a, b] = pair;
            auto rev = counts.by_pair.find({b, a});
            const std::uint64_t backward = rev == counts.by_pair.end() ? 0 : rev->second;
            if (a > b && rev != counts.by_pair.end())
                continue; // already scored under the (min,max) key
            const std::uint64_t score = forward + backward;
            if (!report.hottest || score > report.hottest->pair_score)
                report.hottest =
                    DetectionVerdict{set_index, std::min(a, b), std::max(a, b), epoch_, score};
        }
        counts_[set_index].by_pair.clear();
    }
    active_sets_.clear();
    accesses_in_epoch_ = 0;
    ++epoch_;
    return report;
}

double occupancy_correlation(std::span<const double> series_a,
                             std::span<const double> series_b) {
    if (series_a.size() != series_b.size())
        throw DegenerateTrace("occupancy_correlation: series lengths differ");
    const std::size_t n = series_a.size();
    if (n < 2)
        throw DegenerateTrace("occupancy_correlation: need at least two samples");

    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += series_a[i];
        mean_b += series_b[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);

    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = series_a[i] - mean_a;
        const double db = series_b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0)
        throw DegenerateTrace("occupancy_correlation: constant series has no variance");
    return cov / std::sqrt(var_a * var_b);
}

} // namespace tppd
