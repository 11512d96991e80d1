#include "tsc/controllers.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "tsc/hash.h"

namespace tsc {

std::string_view to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::FixedTime: return "fixedtime";
        case ControllerKind::MaxPressure: return "maxpressure";
        case ControllerKind::EfficientMP: return "efficientmp";
        case ControllerKind::AdvancedMP: return "advancedmp";
    }
    return "?";
}

ControllerKind controller_kind_from_string(std::string_view s) {
    if (s == "fixedtime") return ControllerKind::FixedTime;
    if (s == "maxpressure") return ControllerKind::MaxPressure;
    if (s == "efficientmp") return ControllerKind::EfficientMP;
    if (s == "advancedmp") return ControllerKind::AdvancedMP;
    throw ArgumentError("unknown controller '" + std::string(s) + "'");
}

void ControllerConfig::validate() const {
    if (!(t_duration > 0.0) || t_duration != std::floor(t_duration))
        throw ArgumentError("t_duration must be a positive whole number of seconds");
    if (!(w1 >= 0.0)) throw ArgumentError("W1 must be non-negative");
    for (int s : split) {
        if (s <= 0) throw ArgumentError("fixed-time split entries must be positive");
    }
}

Decision fixed_time_decide(std::int64_t clock, const ControllerConfig& config) {
    const std::int64_t cycle = std::accumulate(config.split.begin(), config.split.end(), std::int64_t{0});
    std::int64_t t = ((clock % cycle) + cycle) % cycle;
    Decision d;
    for (int k = 0; k < static_cast<int>(config.split.size()); ++k) {
        if (t < config.split[k]) {
            d.target = k;
            return d;
        }
        t -= config.split[k];
    }
    return d;
}

Decision max_pressure_decide(const IntersectionObservation& obs) {
    Decision d;
    d.target = argmax_prefer(obs.classic_phase_pressure, obs.current_phase);
    d.max_pressure = obs.classic_phase_pressure[d.target];
    d.keep = d.target == obs.current_phase;
    return d;
}

Decision efficient_mp_decide(const IntersectionObservation& obs) {
    Decision d;
    d.target = argmax_prefer(obs.phase_pressure, obs.current_phase);
    d.max_pressure = obs.phase_pressure[d.target];
    d.keep = d.target == obs.current_phase;
    return d;
}

Decision advanced_mp_decide(const IntersectionObservation& obs, int current, const ControllerConfig& config) {
    Decision d;
    const int phases = static_cast<int>(obs.phase_pressure.size());
    const int best = argmax_prefer(obs.phase_pressure, current);
    d.max_pressure = obs.phase_pressure[best];
    if (config.exclude_current_in_max && current >= 0) {
        bool any = false;
        for (int k = 0; k < phases; ++k) {
            if (k == current) continue;
            if (!any || obs.phase_pressure[k] > d.max_pressure) d.max_pressure = obs.phase_pressure[k];
            any = true;
        }
    }
    if (current >= 0 && current < phases) {
        d.current_request = static_cast<double>(obs.phase_demand[current]) * config.w1;
        if (d.current_request > 0.0 && d.current_request > d.max_pressure) {
            d.target = current;
            d.keep = true;
            return d;
        }
    }
    d.target = best;
    d.keep = best == current;
    return d;
}

ClassicController::ClassicController(ControllerKind kind, ControllerConfig config)
    : kind_(kind), config_(config) {
    config_.validate();
}

int ClassicController::decision_interval() const {
    return kind_ == ControllerKind::FixedTime ? 1 : static_cast<int>(config_.t_duration);
}

ObserverConfig ClassicController::observer() const {
    ObserverConfig o;
    o.t_duration = config_.t_duration;
    o.mode = ObservationMode::Default;
    return o;
}

int ClassicController::decide(const IntersectionObservation& obs, int current, std::int64_t clock) {
    IntersectionObservation view = obs;
    view.current_phase = current;
    switch (kind_) {
        case ControllerKind::FixedTime: last_ = fixed_time_decide(clock, config_); break;
        case ControllerKind::MaxPressure: last_ = max_pressure_decide(view); break;
        case ControllerKind::EfficientMP: last_ = efficient_mp_decide(view); break;
        case ControllerKind::AdvancedMP: last_ = advanced_mp_decide(view, current, config_); break;
    }
    return last_.target;
}

EpisodeResult run_policy(const Scenario& scenario, ControllerKind kind, const ControllerConfig& config,
                         const EpisodeOptions& options) {
    ClassicController controller(kind, config);
    EpisodeResult r = run_episode(scenario, controller, options);
    nlohmann::ordered_json cfg = {{"scenario", scenario.name},
                                  {"controller", std::string(to_string(kind))},
                                  {"t_duration", config.t_duration},
                                  {"w1", config.w1},
                                  {"split", config.split},
                                  {"exclude_current_in_max", config.exclude_current_in_max},
                                  {"horizon", scenario.sim.horizon},
                                  {"seed", scenario.sim.seed}};
    r.metrics.config_hash = hex64(fnv1a64(cfg.dump()));
    return r;
}

}  // namespace tsc
