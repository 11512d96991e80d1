#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsc/flow.h"
#include "tsc/network.h"

namespace tsc {

struct SimConfig {
    int yellow = 3;             // seconds
    int all_red = 2;            // seconds
    double vehicle_length = 5.0;
    double min_gap = 2.5;
    double stop_speed = 0.1;    // m/s; slower vehicles count as queued
    int horizon = 3600;         // seconds
    std::uint64_t seed = 0;

    int transition() const { return yellow + all_red; }
    void validate() const;
};

struct Vehicle {
    std::uint32_t id = 0;       // arrival index in the flow
    std::uint32_t cursor = 0;   // index of the current road within the route
    double position = 0.0;      // front bumper, meters from lane start
    double speed = 0.0;         // m/s over the last tick
    double length = 5.0;
    double min_gap = 2.5;
    double entry_time = 0.0;    // scheduled entry time
};

struct SignalState {
    int active = 0;
    int pending = -1;
    int countdown = 0;  // seconds of yellow + all-red left
    int elapsed = 0;    // seconds since `active` started

    bool in_transition() const { return countdown > 0; }
};

struct DepartedRecord {
    std::uint32_t id = 0;
    double entry_time = 0.0;
    std::int64_t exit_time = 0;
};

struct Crossing {
    int intersection = -1;
    int movement = -1;
    std::uint32_t vehicle = 0;
};

struct LaneEntry {
    double position = 0.0;
    double speed = 0.0;
    bool operator==(const LaneEntry&) const = default;
};

// Complete simulation state. Copyable; `step` is a value transition.
struct World {
    std::shared_ptr<const TrafficNetwork> net;
    std::shared_ptr<const ResolvedFlow> flow;
    SimConfig config;

    std::int64_t clock = 0;
    std::vector<std::vector<Vehicle>> lanes;  // per lane, front (largest position) first
    std::vector<SignalState> signals;
    std::vector<std::uint32_t> order;         // arrival indices sorted by entry time
    std::size_t next_arrival = 0;             // cursor into `order`
    std::vector<std::uint32_t> waiting;       // due arrivals blocked at the boundary
    std::vector<DepartedRecord> departed;
    std::vector<Crossing> last_crossings;     // stop-line crossings of the last tick
    std::int64_t injected_through = -1;       // last clock second arrivals were injected for
    std::size_t entered = 0;

    std::size_t on_network() const;
    // Arrivals with entry time <= clock that have not yet entered.
    std::size_t due_pending() const { return waiting.size(); }
};

// Throws ValidationError if a route's first road does not start at a boundary node.
World make_world(std::shared_ptr<const TrafficNetwork> net, std::shared_ptr<const ResolvedFlow> flow,
                 SimConfig config, const std::vector<int>& initial_phases = {});

using Commands = std::vector<std::optional<int>>;

// Advances one second. `commands` is empty or has one entry per intersection.
World step(World world, const Commands& commands);
void step_in_place(World& world, const Commands& commands);

// Injects arrivals due at the current clock second; a no-op when repeated.
void inject_arrivals(World& world);

std::vector<LaneEntry> snapshot_lane(const World& world, int lane);

std::uint64_t world_digest(const World& world);

// One JSON line: clock, per-intersection phase/countdown, per-lane counts and queues.
std::string trace_line(const World& world);

}  // namespace tsc
