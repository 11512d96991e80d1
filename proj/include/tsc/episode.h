#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "tsc/flow.h"
#include "tsc/metrics.h"
#include "tsc/network.h"
#include "tsc/observer.h"
#include "tsc/simulator.h"

namespace tsc {

// A network, its resolved demand and simulation settings.
struct Scenario {
    std::string name;
    std::shared_ptr<const TrafficNetwork> net;
    std::shared_ptr<const ResolvedFlow> flow;
    SimConfig sim;

    static Scenario make(std::string name, TrafficNetwork net, const FlowSpec& flow, SimConfig sim);
};

// Anything that picks phases from observations on a fixed decision cadence.
class SignalPolicy {
public:
    virtual ~SignalPolicy() = default;
    virtual int decision_interval() const = 0;
    virtual ObserverConfig observer() const = 0;
    // `current` is -1 for the initial decision at t = 0.
    virtual int decide(const IntersectionObservation& obs, int current, std::int64_t clock) = 0;
    // Observations at the horizon, after the last tick.
    virtual void on_episode_end(const std::vector<IntersectionObservation>& /*final_obs*/) {}
};

struct EpisodeOptions {
    std::ostream* trace = nullptr;         // JSON-lines world trace, one line per tick
    std::ostream* observations = nullptr;  // JSON-lines observations at each decision
    bool record_decisions = true;
};

struct EpisodeResult {
    EpisodeMetrics metrics;
    std::vector<int> decisions;  // decision-time phase choices, intersection-major within a decision
    std::uint64_t final_digest = 0;
};

EpisodeResult run_episode(const Scenario& scenario, SignalPolicy& policy, const EpisodeOptions& options = {});

}  // namespace tsc
