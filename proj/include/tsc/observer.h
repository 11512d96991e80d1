#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "tsc/simulator.h"

namespace tsc {

struct LaneStats {
    int lane = -1;
    int queue_length = 0;       // q(l'): vehicles slower than the stop threshold
    int effective_running = 0;  // r_e(l'): moving vehicles within range of the stop line
    int total_running = 0;
    bool operator==(const LaneStats&) const = default;
};

// L = V_max * t_duration.
struct EffectiveRange {
    double v_max = 0.0;
    double t_duration = 0.0;
    double meters() const { return v_max * t_duration; }
};

struct MovementState {
    int movement = -1;
    double efficient_pressure = 0.0;  // e(l,m)
    int effective_running = 0;        // r(l,m)
    int classic_pressure = 0;         // unaveraged upstream minus downstream queue sum
    bool operator==(const MovementState&) const = default;
};

enum class ObservationMode { Default, Config1, Config2, Config3 };

std::string_view to_string(ObservationMode m);
ObservationMode observation_mode_from_string(std::string_view s);

// Which incoming lanes feed r(l,m): every lane of road l, or only the movement's used lanes.
enum class DemandLanes { WholeRoad, UsedLanes };

struct ObserverConfig {
    double t_duration = 15.0;
    ObservationMode mode = ObservationMode::Default;
    DemandLanes demand_lanes = DemandLanes::WholeRoad;
};

// Range in meters for running-vehicle counts; infinite for Config3.
double observation_range(ObservationMode mode, double v_max, double t_duration);

struct IntersectionObservation {
    int intersection = -1;
    int current_phase = 0;
    double range = 0.0;
    std::vector<MovementState> movements;   // canonical slot order (the ATS vector)
    std::vector<double> phase_pressure;     // p(s)
    std::vector<int> phase_demand;          // d(s)
    std::vector<int> classic_phase_pressure;
    int intersection_pressure = 0;          // P_i
    int incoming_queue = 0;                 // sum of q(l') over incoming lanes
    bool operator==(const IntersectionObservation&) const = default;
};

LaneStats lane_stats(const World& world, int lane, double range, double stop_threshold);

// Mean upstream minus mean downstream queue over the movement's used lanes; a downstream road ending at a sink contributes 0.
double efficient_pressure(const World& world, const Movement& movement);
int classic_pressure(const World& world, const Movement& movement);

double phase_pressure(const std::vector<MovementState>& movements, const Phase& phase);
int phase_demand(const std::vector<MovementState>& movements, const Phase& phase);
int intersection_pressure(const World& world, int intersection);
int effective_running(const World& world, const Movement& movement, double range, DemandLanes lanes);

IntersectionObservation observe(const World& world, int intersection, const ObserverConfig& config);
std::vector<IntersectionObservation> observe_all(const World& world, const ObserverConfig& config);

std::string observation_to_json(const IntersectionObservation& obs);

}  // namespace tsc
