#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "seqband/baseline.hpp"
#include "seqband/parallel.hpp"
#include "seqband/types.hpp"

namespace seqband {

/// Draws M independent rows of the first r GOSs based on `baseline` and `params`.
/// Row i depends only on (seed, i): waiting times on the cumulative-hazard scale are
/// independent exponentials with rates gamma_1, ..., gamma_r.
SampleSet sample_gos(const LoadSharingParams& params, const Baseline& baseline, std::size_t M,
                     std::uint64_t seed, Execution exec = Execution::parallel);

/// Same draws as sample_gos, returned on the cumulative-hazard scale (standard
/// exponential baseline). Useful for rank-only statistics.
SampleSet sample_gos_hazard(const LoadSharingParams& params, std::size_t M, std::uint64_t seed,
                            Execution exec = Execution::parallel);

struct PooledEvent {
    double time;
    std::uint32_t system;  // 0-based owner
    std::uint32_t rank;    // 1-based within-system rank j; the owner sits in state j-1 just before
};

/// Globally sorted failure times of all systems with left-limit state occupancy.
/// occupancy(k, s) counts systems with N_i(t_k-) = s for s = 0..r (s = r means absorbed).
/// Systems failing at one timestamp all see the occupancy from before that timestamp.
class EventTable {
public:
    explicit EventTable(const SampleSet& data);

    std::size_t M() const noexcept { return M_; }
    std::size_t r() const noexcept { return r_; }
    std::size_t size() const noexcept { return events_.size(); }
    const PooledEvent& operator[](std::size_t k) const { return events_[k]; }
    std::span<const PooledEvent> events() const noexcept { return events_; }

    std::span<const std::uint32_t> occupancy(std::size_t k) const
    {
        return std::span<const std::uint32_t>(occupancy_).subspan(k * (r_ + 1), r_ + 1);
    }

    /// gamma-bar(t_k-) = (1/M) sum_i gamma_{N_i(t_k-)+1}; absorbed systems contribute 0.
    double gamma_bar(std::size_t k, const LoadSharingParams& params) const;
    /// delta-bar_j(t_k-) for 1-based j.
    double delta_bar(std::size_t k, std::size_t j) const
    {
        return static_cast<double>(occupancy(k)[j - 1]) / static_cast<double>(M_);
    }

    /// Number of events with time <= t.
    std::size_t count_until(double t) const;

private:
    std::size_t M_;
    std::size_t r_;
    std::vector<PooledEvent> events_;
    std::vector<std::uint32_t> occupancy_;
};

/// One pooled event with its left-limit summaries.
struct PooledSummary {
    double time;
    std::uint32_t system;
    std::uint32_t rank;
    double gamma_bar;
    std::vector<double> delta_bar;  // j = 1..r at index j - 1
};

/// Event table materialized with gamma-bar and delta-bar at every left limit.
std::vector<PooledSummary> pooled_events(const SampleSet& data, const LoadSharingParams& params);

}  // namespace seqband
