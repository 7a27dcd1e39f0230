#include "seqband/gos.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "seqband/error.hpp"
#include "seqband/rng.hpp"

namespace seqband {

namespace {

template <class Transform>
SampleSet sample_rows(const LoadSharingParams& params, std::size_t M, std::uint64_t seed, Execution exec,
                      Transform&& to_time)
{
    require(M >= 1, ErrorCode::EmptyRequest, "requested M = 0 systems");
    const std::size_t r = params.r();
    std::vector<double> times(M * r);
    for_each_index(exec, M, [&](std::size_t i) {
        Engine eng = make_stream(seed, i);
        std::exponential_distribution<double> waiting(1.0);
        double* row = times.data() + i * r;
        // Redraw the row in the (floating-point only) event of a tie.
        for (;;) {
            double z = 0.0;
            bool increasing = true;
            for (std::size_t j = 0; j < r; ++j) {
                z += waiting(eng) / params[j];
                row[j] = to_time(z);
                if (!(row[j] > 0.0) || !std::isfinite(row[j]) || (j > 0 && row[j] <= row[j - 1])) {
                    increasing = false;
                }
            }
            if (increasing) {
                break;
            }
        }
    });
    return SampleSet(M, r, std::move(times));
}

}  // namespace

SampleSet sample_gos(const LoadSharingParams& params, const Baseline& baseline, std::size_t M,
                     std::uint64_t seed, Execution exec)
{
    return sample_rows(params, M, seed, exec, [&](double z) { return baseline.from_hazard(z); });
}

SampleSet sample_gos_hazard(const LoadSharingParams& params, std::size_t M, std::uint64_t seed, Execution exec)
{
    return sample_rows(params, M, seed, exec, [](double z) { return z; });
}

EventTable::EventTable(const SampleSet& data) : M_(data.M()), r_(data.r())
{
    require(M_ >= 1, ErrorCode::EmptyRequest, "no systems");
    events_.reserve(M_ * r_);
    for (std::size_t i = 0; i < M_; ++i) {
        for (std::size_t j = 0; j < r_; ++j) {
            events_.push_back({data(i, j), static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j + 1)});
        }
    }
    // Ties across systems: system index ascending.
    std::stable_sort(events_.begin(), events_.end(),
                     [](const PooledEvent& a, const PooledEvent& b) { return a.time < b.time; });

    occupancy_.assign(events_.size() * (r_ + 1), 0);
    std::vector<std::uint32_t> state(r_ + 1, 0);
    state[0] = static_cast<std::uint32_t>(M_);
    std::size_t k = 0;
    while (k < events_.size()) {
        std::size_t end = k;
        while (end < events_.size() && events_[end].time == events_[k].time) {
            ++end;
        }
        for (std::size_t e = k; e < end; ++e) {
            std::copy(state.begin(), state.end(), occupancy_.begin() + static_cast<std::ptrdiff_t>(e * (r_ + 1)));
        }
        for (std::size_t e = k; e < end; ++e) {
            const std::uint32_t from = events_[e].rank - 1;
            --state[from];
            ++state[from + 1];
        }
        k = end;
    }
}

double EventTable::gamma_bar(std::size_t k, const LoadSharingParams& params) const
{
    const auto occ = occupancy(k);
    double sum = 0.0;
    for (std::size_t j = 0; j < r_; ++j) {
        sum += params[j] * static_cast<double>(occ[j]);
    }
    return sum / static_cast<double>(M_);
}

std::size_t EventTable::count_until(double t) const
{
    const auto it = std::upper_bound(events_.begin(), events_.end(), t,
                                     [](double value, const PooledEvent& e) { return value < e.time; });
    return static_cast<std::size_t>(it - events_.begin());
}

std::vector<PooledSummary> pooled_events(const SampleSet& data, const LoadSharingParams& params)
{
    const EventTable table(data);
    require(params.r() == table.r(), ErrorCode::InvalidParams,
            "gamma has length " + std::to_string(params.r()) + " but data has r = " + std::to_string(table.r()));
    std::vector<PooledSummary> out;
    out.reserve(table.size());
    for (std::size_t k = 0; k < table.size(); ++k) {
        PooledSummary row{table[k].time, table[k].system, table[k].rank, table.gamma_bar(k, params), {}};
        row.delta_bar.resize(table.r());
        for (std::size_t j = 1; j <= table.r(); ++j) {
            row.delta_bar[j - 1] = table.delta_bar(k, j);
        }
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace seqband
