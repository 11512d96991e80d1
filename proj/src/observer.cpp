#include "tsc/observer.h"

#include <cmath>
#include <limits>

#include <json.hpp>

namespace tsc {

std::string_view to_string(ObservationMode m) {
    switch (m) {
        case ObservationMode::Default: return "default";
        case ObservationMode::Config1: return "config1";
        case ObservationMode::Config2: return "config2";
        case ObservationMode::Config3: return "config3";
    }
    return "?";
}

ObservationMode observation_mode_from_string(std::string_view s) {
    if (s == "default") return ObservationMode::Default;
    if (s == "config1") return ObservationMode::Config1;
    if (s == "config2") return ObservationMode::Config2;
    if (s == "config3") return ObservationMode::Config3;
    throw ArgumentError("unknown observation mode '" + std::string(s) + "'");
}

double observation_range(ObservationMode mode, double v_max, double t_duration) {
    switch (mode) {
        case ObservationMode::Config1: return 100.0;
        case ObservationMode::Config2: return 200.0;
        case ObservationMode::Config3: return std::numeric_limits<double>::infinity();
        case ObservationMode::Default: break;
    }
    return EffectiveRange{v_max, t_duration}.meters();
}

LaneStats lane_stats(const World& world, int lane, double range, double stop_threshold) {
    if (lane < 0 || static_cast<std::size_t>(lane) >= world.lanes.size())
        throw ArgumentError("unknown lane " + std::to_string(lane));
    if (!(range >= 0.0)) throw ArgumentError("range must be non-negative");
    const double length = world.net->lane_length(lane);
    LaneStats s;
    s.lane = lane;
    for (const auto& v : world.lanes[lane]) {
        if (v.speed < stop_threshold) {
            ++s.queue_length;
            continue;
        }
        ++s.total_running;
        if (length - v.position <= range) ++s.effective_running;
    }
    return s;
}

namespace {

int queue_of(const World& world, int lane) {
    int q = 0;
    for (const auto& v : world.lanes[lane]) q += v.speed < world.config.stop_speed ? 1 : 0;
    return q;
}

bool to_sink(const World& world, const Movement& m) { return world.net->roads[m.out_road].ends_at_boundary(); }

}  // namespace

double efficient_pressure(const World& world, const Movement& m) {
    int up = 0;
    for (int lane : m.in_lanes) up += queue_of(world, lane);
    int down = 0;
    if (!to_sink(world, m)) {
        for (int lane : m.out_lanes) down += queue_of(world, lane);
    }
    return static_cast<double>(up) / static_cast<double>(m.in_lanes.size()) -
           static_cast<double>(down) / static_cast<double>(m.out_lanes.size());
}

int classic_pressure(const World& world, const Movement& m) {
    int up = 0;
    for (int lane : m.in_lanes) up += queue_of(world, lane);
    int down = 0;
    if (!to_sink(world, m)) {
        for (int lane : m.out_lanes) down += queue_of(world, lane);
    }
    return up - down;
}

double phase_pressure(const std::vector<MovementState>& movements, const Phase& phase) {
    double p = 0.0;
    for (int k : phase.movements) p += movements[k].efficient_pressure;
    return p;
}

int phase_demand(const std::vector<MovementState>& movements, const Phase& phase) {
    int d = 0;
    for (int k : phase.movements) d += movements[k].effective_running;
    return d;
}

int intersection_pressure(const World& world, int intersection) {
    const auto& inter = world.net->intersections[intersection];
    int p = 0;
    for (int lane : inter.in_lanes) p += queue_of(world, lane);
    for (int lane : inter.out_lanes) {
        if (!world.net->road_of_lane(lane).ends_at_boundary()) p -= queue_of(world, lane);
    }
    return p;
}

int effective_running(const World& world, const Movement& m, double range, DemandLanes lanes) {
    int r = 0;
    const auto& source = lanes == DemandLanes::WholeRoad ? world.net->roads[m.in_road].lanes : m.in_lanes;
    for (int lane : source) r += lane_stats(world, lane, range, world.config.stop_speed).effective_running;
    return r;
}

IntersectionObservation observe(const World& world, int intersection, const ObserverConfig& config) {
    const auto& inter = world.net->intersections.at(intersection);
    IntersectionObservation obs;
    obs.intersection = intersection;
    obs.current_phase = world.signals[intersection].active;
    obs.range = observation_range(config.mode, world.net->max_speed(), config.t_duration);
    obs.movements.reserve(inter.movements.size());
    for (std::size_t k = 0; k < inter.movements.size(); ++k) {
        const auto& m = inter.movements[k];
        obs.movements.push_back({static_cast<int>(k), efficient_pressure(world, m),
                                 effective_running(world, m, obs.range, config.demand_lanes),
                                 classic_pressure(world, m)});
    }
    for (const auto& ph : inter.phases) {
        obs.phase_pressure.push_back(phase_pressure(obs.movements, ph));
        obs.phase_demand.push_back(phase_demand(obs.movements, ph));
        int classic = 0;
        for (int k : ph.movements) classic += obs.movements[k].classic_pressure;
        obs.classic_phase_pressure.push_back(classic);
    }
    obs.intersection_pressure = intersection_pressure(world, intersection);
    for (int lane : inter.in_lanes) obs.incoming_queue += queue_of(world, lane);
    return obs;
}

std::vector<IntersectionObservation> observe_all(const World& world, const ObserverConfig& config) {
    std::vector<IntersectionObservation> out;
    out.reserve(world.net->intersections.size());
    for (std::size_t i = 0; i < world.net->intersections.size(); ++i) out.push_back(observe(world, static_cast<int>(i), config));
    return out;
}

std::string observation_to_json(const IntersectionObservation& obs) {
    nlohmann::ordered_json j;
    j["intersection"] = obs.intersection;
    j["phase"] = obs.current_phase;
    j["range"] = std::isinf(obs.range) ? nlohmann::ordered_json("inf") : nlohmann::ordered_json(obs.range);
    std::vector<double> e;
    std::vector<int> r;
    for (const auto& m : obs.movements) {
        e.push_back(m.efficient_pressure);
        r.push_back(m.effective_running);
    }
    j["e"] = e;
    j["r"] = r;
    j["p"] = obs.phase_pressure;
    j["d"] = obs.phase_demand;
    j["P"] = obs.intersection_pressure;
    return j.dump();
}

}  // namespace tsc
