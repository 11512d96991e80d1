#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsc/simulator.h"

namespace tsc {

struct EpisodeMetrics {
    double average_travel_time = 0.0;  // seconds; 0 with `empty` set when no vehicles
    bool empty = true;
    std::size_t throughput = 0;        // completed trips
    std::size_t injected = 0;          // arrivals due by the horizon (entered or blocked at entry)
    std::size_t remaining = 0;         // due but not completed; counted with truncated travel time
    std::vector<int> queue_series;     // total queued vehicles after each tick
    std::string config_hash;
    std::uint64_t seed = 0;

    bool operator==(const EpisodeMetrics&) const = default;
};

// Completed trips count exit - entry; unfinished ones count horizon - entry.
EpisodeMetrics compute_metrics(const std::vector<DepartedRecord>& departed, const std::vector<double>& remaining_entries,
                               double horizon);

// Metrics of a world at its current clock (used as the horizon).
EpisodeMetrics metrics_from_world(const World& world);

int total_queue(const World& world);

// Least-squares slope of `series[from..]` against its index.
double linear_trend(const std::vector<int>& series, std::size_t from);

}  // namespace tsc
