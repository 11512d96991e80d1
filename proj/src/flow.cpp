#include "tsc/flow.h"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "tsc/rng.h"

namespace tsc {

ResolvedFlow resolve_flow(const TrafficNetwork& net, const FlowSpec& flow) {
    ResolvedFlow out;
    out.times.reserve(flow.arrivals.size());
    out.routes.reserve(flow.arrivals.size());
    for (std::size_t k = 0; k < flow.arrivals.size(); ++k) {
        const auto& a = flow.arrivals[k];
        const std::string where = "route " + std::to_string(k);
        if (!(a.time >= 0.0)) throw ValidationError(where + ": negative entry time");
        if (a.route.empty()) throw ValidationError(where + ": empty route");
        std::vector<int> roads;
        roads.reserve(a.route.size());
        for (const auto& id : a.route) {
            const int r = net.road_index(id);
            if (r < 0) throw ValidationError(where + ": unknown road '" + id + "'");
            roads.push_back(r);
        }
        for (std::size_t j = 0; j + 1 < roads.size(); ++j) {
            if (net.movement_between(roads[j], roads[j + 1]) == nullptr)
                throw ValidationError(where + ": disconnected at '" + a.route[j] + "' -> '" + a.route[j + 1] + "'");
        }
        out.times.push_back(a.time);
        out.routes.push_back(std::move(roads));
    }
    return out;
}

namespace {

int straight_successor(const TrafficNetwork& net, int road) {
    const int node = net.roads[road].to_intersection;
    if (node < 0) return -1;
    return net.intersections[node].out_roads[static_cast<int>(net.roads[road].heading)];
}

}  // namespace

FlowSpec generate_poisson_flow(const TrafficNetwork& net, double rate_per_entry, double horizon, std::uint64_t seed,
                               TurnWeights weights) {
    if (!(rate_per_entry >= 0.0)) throw ArgumentError("arrival rate must be non-negative");
    if (!(horizon > 0.0)) throw ArgumentError("horizon must be positive");
    if (weights.left < 0 || weights.straight < 0 || weights.right < 0 ||
        !(weights.left + weights.straight + weights.right > 0.0))
        throw ArgumentError("turn weights must be non-negative with a positive sum");

    FlowSpec flow;
    if (rate_per_entry == 0.0) return flow;

    Rng rng(seed);
    const double total = weights.left + weights.straight + weights.right;
    for (int entry : net.entry_roads()) {
        // Intersections crossed when driving straight through from this entry.
        std::vector<int> straight_path{entry};
        while (net.roads[straight_path.back()].to_intersection >= 0 &&
               straight_path.size() <= net.roads.size()) {
            straight_path.push_back(straight_successor(net, straight_path.back()));
        }
        const std::size_t crossings = straight_path.size() - 1;

        double t = rng.exponential(rate_per_entry);
        while (t < horizon) {
            const double u = rng.uniform() * total;
            const Turn turn = u < weights.left ? Turn::Left
                              : u < weights.left + weights.straight ? Turn::Straight
                                                                    : Turn::Right;
            const std::size_t turn_at = crossings > 0 ? rng.below(crossings) : 0;

            Arrival arrival;
            arrival.time = std::floor(t);
            int road = entry;
            arrival.route.push_back(net.roads[road].id);
            std::size_t crossed = 0;
            while (net.roads[road].to_intersection >= 0) {
                const auto& inter = net.intersections[net.roads[road].to_intersection];
                const Turn here = (crossed == turn_at) ? turn : Turn::Straight;
                road = inter.out_roads[static_cast<int>(turned(net.roads[road].heading, here))];
                arrival.route.push_back(net.roads[road].id);
                ++crossed;
                if (crossed > net.roads.size()) throw ValidationError("route generation did not reach a boundary");
            }
            flow.arrivals.push_back(std::move(arrival));
            t += rng.exponential(rate_per_entry);
        }
    }
    std::stable_sort(flow.arrivals.begin(), flow.arrivals.end(),
                     [](const Arrival& a, const Arrival& b) { return a.time < b.time; });
    return flow;
}

std::string flow_to_json(const FlowSpec& flow) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& a : flow.arrivals) {
        nlohmann::ordered_json vehicle = {{"length", 5.0},      {"width", 2.0},       {"maxPosAcc", 2.0},
                                          {"maxNegAcc", 4.5},   {"usualPosAcc", 2.0}, {"usualNegAcc", 4.5},
                                          {"minGap", 2.5},      {"maxSpeed", 11.111}, {"headwayTime", 2.0}};
        doc.push_back({{"vehicle", std::move(vehicle)},
                       {"route", a.route},
                       {"interval", 1.0},
                       {"startTime", a.time},
                       {"endTime", a.time}});
    }
    return doc.dump(1);
}

}  // namespace tsc
