#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsc/episode.h"
#include "tsc/network.h"
#include "tsc/simulator.h"

namespace tsc::test {

// A vehicle parked far in the future so its route exists without ever being injected.
constexpr double kNever = 1e12;

inline std::shared_ptr<const TrafficNetwork> share(TrafficNetwork net) {
    return std::make_shared<const TrafficNetwork>(std::move(net));
}

inline FlowSpec flow_of(const std::vector<std::pair<double, std::vector<std::string>>>& items) {
    FlowSpec f;
    for (const auto& [t, route] : items) f.arrivals.push_back({t, route});
    std::stable_sort(f.arrivals.begin(), f.arrivals.end(),
                     [](const Arrival& a, const Arrival& b) { return a.time < b.time; });
    return f;
}

inline World world_of(const std::shared_ptr<const TrafficNetwork>& net, const FlowSpec& flow, SimConfig cfg = {},
                      std::vector<int> phases = {}) {
    auto resolved = std::make_shared<const ResolvedFlow>(resolve_flow(*net, flow));
    return make_world(net, resolved, cfg, phases);
}

inline int lane_of(const TrafficNetwork& net, const std::string& road, int index) {
    return net.roads[net.road_index(road)].lanes.at(index);
}

// Places a vehicle directly on a lane, keeping front-first order.
inline void place(World& w, int lane, std::uint32_t id, double position, double speed, std::uint32_t cursor = 0) {
    Vehicle v;
    v.id = id;
    v.cursor = cursor;
    v.position = position;
    v.speed = speed;
    v.length = w.config.vehicle_length;
    v.min_gap = w.config.min_gap;
    auto& vs = w.lanes[lane];
    vs.insert(std::upper_bound(vs.begin(), vs.end(), v,
                               [](const Vehicle& a, const Vehicle& b) { return a.position > b.position; }),
              v);
}

// Copy of `net` with every lane of `road` given the turn mask `turns`.
inline TrafficNetwork with_lane_turns(const TrafficNetwork& net, const std::string& road, std::vector<std::string> turns) {
    auto doc = nlohmann::json::parse(network_to_json(net));
    for (auto& r : doc["roads"]) {
        if (r["id"] != road) continue;
        for (auto& lane : r["lanes"]) lane = turns;
    }
    return network_from_json(doc.dump());
}

}  // namespace tsc::test
