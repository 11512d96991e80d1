#include "tsc/episode.h"

namespace tsc {

Scenario Scenario::make(std::string name, TrafficNetwork net, const FlowSpec& flow, SimConfig sim) {
    Scenario s;
    s.name = std::move(name);
    auto resolved = std::make_shared<ResolvedFlow>(resolve_flow(net, flow));
    s.net = std::make_shared<const TrafficNetwork>(std::move(net));
    s.flow = std::move(resolved);
    s.sim = sim;
    return s;
}

EpisodeResult run_episode(const Scenario& scenario, SignalPolicy& policy, const EpisodeOptions& options) {
    const int interval = policy.decision_interval();
    if (interval <= 0) throw ArgumentError("decision interval must be positive");
    const ObserverConfig obs_config = policy.observer();
    const std::size_t n = scenario.net->intersections.size();

    World world = make_world(scenario.net, scenario.flow, scenario.sim);
    EpisodeResult result;
    std::vector<int> current(n, -1);

    auto decide_all = [&](Commands* commands) {
        const auto obs = observe_all(world, obs_config);
        for (std::size_t i = 0; i < n; ++i) {
            const int phase = policy.decide(obs[i], current[i], world.clock);
            if (options.record_decisions) result.decisions.push_back(phase);
            if (commands) {
                (*commands)[i] = phase;
            } else {
                world.signals[i].active = phase;
            }
            current[i] = phase;
            if (options.observations) *options.observations << observation_to_json(obs[i]) << '\n';
        }
    };

    decide_all(nullptr);
    std::vector<int> queues;
    queues.reserve(static_cast<std::size_t>(scenario.sim.horizon));
    Commands commands(n);
    for (std::int64_t t = 0; t < scenario.sim.horizon; ++t) {
        std::fill(commands.begin(), commands.end(), std::nullopt);
        if (t > 0 && t % interval == 0) decide_all(&commands);
        step_in_place(world, commands);
        queues.push_back(total_queue(world));
        if (options.trace) *options.trace << trace_line(world) << '\n';
    }
    policy.on_episode_end(observe_all(world, obs_config));

    result.metrics = metrics_from_world(world);
    result.metrics.queue_series = std::move(queues);
    result.metrics.seed = scenario.sim.seed;
    result.final_digest = world_digest(world);
    return result;
}

}  // namespace tsc
