#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tsc/network.h"

namespace tsc {

// One scheduled vehicle: entry time t (seconds) and pre-planned route u (road ids).
struct Arrival {
    double time = 0.0;
    std::vector<std::string> route;
    bool operator==(const Arrival&) const = default;
};

struct FlowSpec {
    std::vector<Arrival> arrivals;  // sorted by time, stable for equal times
    bool operator==(const FlowSpec&) const = default;
};

// Routes as road indices, validated against a network.
struct ResolvedFlow {
    std::vector<double> times;
    std::vector<std::vector<int>> routes;
};

// Throws ValidationError naming the offending route index when a route is
// empty, references an unknown road, or is not a connected path.
ResolvedFlow resolve_flow(const TrafficNetwork& net, const FlowSpec& flow);

struct TurnWeights {
    double left = 0.2;
    double straight = 0.6;
    double right = 0.2;
};

// Poisson arrivals (integer-second entry times) on every boundary entry road.
// A route goes straight, turns once at a uniformly chosen intersection along the
// straight path (turn kind drawn from `weights`) and leaves the network.
FlowSpec generate_poisson_flow(const TrafficNetwork& net, double rate_per_entry, double horizon, std::uint64_t seed,
                               TurnWeights weights = {});

// CityFlow-compatible flow document (one entry per arrival).
std::string flow_to_json(const FlowSpec& flow);

}  // namespace tsc
