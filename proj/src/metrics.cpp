#include "tsc/metrics.h"

namespace tsc {

EpisodeMetrics compute_metrics(const std::vector<DepartedRecord>& departed, const std::vector<double>& remaining_entries,
                               double horizon) {
    EpisodeMetrics m;
    m.throughput = departed.size();
    m.remaining = remaining_entries.size();
    m.injected = m.throughput + m.remaining;
    m.empty = m.injected == 0;
    if (m.empty) return m;
    double total = 0.0;
    for (const auto& d : departed) total += static_cast<double>(d.exit_time) - d.entry_time;
    for (double entry : remaining_entries) total += horizon - entry;
    m.average_travel_time = total / static_cast<double>(m.injected);
    return m;
}

EpisodeMetrics metrics_from_world(const World& world) {
    std::vector<double> remaining;
    for (const auto& lane : world.lanes) {
        for (const auto& v : lane) remaining.push_back(v.entry_time);
    }
    for (auto id : world.waiting) remaining.push_back(world.flow->times[id]);
    return compute_metrics(world.departed, remaining, static_cast<double>(world.clock));
}

int total_queue(const World& world) {
    int q = 0;
    for (const auto& lane : world.lanes) {
        for (const auto& v : lane) q += v.speed < world.config.stop_speed ? 1 : 0;
    }
    return q;
}

double linear_trend(const std::vector<int>& series, std::size_t from) {
    if (from >= series.size() || series.size() - from < 2) return 0.0;
    const double n = static_cast<double>(series.size() - from);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = from; k < series.size(); ++k) {
        const double x = static_cast<double>(k - from);
        const double y = series[k];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    return denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
}

}  // namespace tsc
