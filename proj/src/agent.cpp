#include "tsc/agent.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "tsc/hash.h"
#include "tsc/text.h"

namespace tsc {

AgentState make_state(const IntersectionObservation& obs, int current_phase, double feature_scale) {
    AgentState s;
    const int phase = current_phase >= 0 ? current_phase : obs.current_phase;
    if (phase >= 0 && phase < kPhaseCount) s.features[phase] = 1.0;
    const std::size_t n = std::min<std::size_t>(obs.movements.size(), kMovementCount);
    for (std::size_t k = 0; k < n; ++k) {
        s.features[kPhaseCount + 2 * k] = obs.movements[k].efficient_pressure / feature_scale;
        s.features[kPhaseCount + 2 * k + 1] = obs.movements[k].effective_running / feature_scale;
    }
    return s;
}

std::string_view to_string(RewardMode m) { return m == RewardMode::Pressure ? "pressure" : "queue"; }

RewardMode reward_mode_from_string(std::string_view s) {
    if (s == "pressure") return RewardMode::Pressure;
    if (s == "queue") return RewardMode::Queue;
    throw ArgumentError("unknown reward mode '" + std::string(s) + "'");
}

double reward_of(const IntersectionObservation& obs, RewardMode mode) {
    if (mode == RewardMode::Pressure) return -std::abs(static_cast<double>(obs.intersection_pressure));
    return -static_cast<double>(obs.incoming_queue);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ArgumentError("replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(t));
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t count, Rng& rng) const {
    std::vector<const Transition*> out;
    if (items_.empty()) return out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(&items_[rng.below(items_.size())]);
    return out;
}

void TrainConfig::validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ArgumentError("gamma must lie in [0, 1)");
    if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0))
        throw ArgumentError("epsilon schedule must lie in [0, 1]");
    if (replay_capacity == 0 || batch_size == 0) throw ArgumentError("replay capacity and batch size must be positive");
    if (episodes < 0 || updates_per_episode < 0 || target_sync <= 0 || eval_last < 1)
        throw ArgumentError("invalid training schedule");
    if (!(feature_scale > 0.0)) throw ArgumentError("feature scale must be positive");
    if (!(t_duration > 0.0) || t_duration != std::floor(t_duration))
        throw ArgumentError("t_duration must be a positive whole number of seconds");
}

double TrainConfig::epsilon_at(int episode) const {
    if (epsilon_decay_episodes <= 0 || episode >= epsilon_decay_episodes) return epsilon_end;
    const double f = static_cast<double>(episode) / epsilon_decay_episodes;
    return epsilon_start + (epsilon_end - epsilon_start) * f;
}

std::vector<int> TrainConfig::layer_sizes() const {
    std::vector<int> sizes{kFeatureCount};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(kPhaseCount);
    return sizes;
}

std::vector<double> forward(const Mlp& net, const AgentState& s) { return net.forward(s.features); }

double bellman_target(const Transition& t, const Mlp& target_net, double gamma) {
    if (t.terminal) return t.reward;
    const auto q = forward(target_net, t.next_state);
    return t.reward + gamma * *std::max_element(q.begin(), q.end());
}

double td_loss_and_gradient(const Mlp& net, const Mlp& target_net, std::span<const Transition* const> batch,
                            double gamma, std::span<double> grad) {
    if (batch.empty()) throw ArgumentError("training batch is empty");
    std::fill(grad.begin(), grad.end(), 0.0);
    const double n = static_cast<double>(batch.size());
    double loss = 0.0;
    Mlp::Tape tape;
    std::vector<double> grad_out(net.output_size(), 0.0);
    for (const Transition* t : batch) {
        const double target = bellman_target(*t, target_net, gamma);
        const auto q = net.forward(t->state.features, tape);
        const double err = q[t->action] - target;
        loss += err * err / n;
        std::fill(grad_out.begin(), grad_out.end(), 0.0);
        grad_out[t->action] = 2.0 * err / n;
        net.backward(tape, grad_out, grad);
    }
    return loss;
}

double train_step(Mlp& net, const Mlp& target_net, std::span<const Transition* const> batch, double gamma,
                  AdamOptimizer& optimizer) {
    std::vector<double> grad(net.param_count(), 0.0);
    const double loss = td_loss_and_gradient(net, target_net, batch, gamma, grad);
    if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "non-finite TD loss (" << loss << ") at optimizer step " << optimizer.steps() << ", batch of "
            << batch.size();
        throw TrainingError(msg.str());
    }
    optimizer.apply(net.params(), grad);
    return loss;
}

int greedy_action(std::span<const double> q) {
    int best = 0;
    for (int k = 1; k < static_cast<int>(q.size()); ++k) {
        if (q[k] > q[best]) best = k;
    }
    return best;
}

int act(const Mlp& net, const AgentState& s, double epsilon, Rng& rng) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ArgumentError("epsilon must lie in [0, 1]");
    if (epsilon > 0.0 && rng.uniform() < epsilon) return static_cast<int>(rng.below(net.output_size()));
    return greedy_action(forward(net, s));
}

XLightPolicy::XLightPolicy(const Mlp& net, const TrainConfig& config, double epsilon, Rng& rng, ReplayBuffer* replay)
    : net_(net), config_(config), epsilon_(epsilon), rng_(rng), replay_(replay) {}

ObserverConfig XLightPolicy::observer() const {
    ObserverConfig o;
    o.t_duration = config_.t_duration;
    o.mode = config_.obs_mode;
    return o;
}

void XLightPolicy::record(int intersection, const IntersectionObservation& obs, const AgentState& next,
                          bool terminal) {
    const auto i = static_cast<std::size_t>(intersection);
    if (i >= prev_action_.size() || prev_action_[i] < 0) return;
    const double r = reward_of(obs, config_.reward);
    reward_sum_ += r;
    ++rewards_;
    if (replay_) replay_->push({prev_state_[i], prev_action_[i], r, next, terminal});
}

int XLightPolicy::decide(const IntersectionObservation& obs, int current, std::int64_t /*clock*/) {
    const auto i = static_cast<std::size_t>(obs.intersection);
    if (i >= prev_action_.size()) {
        prev_action_.resize(i + 1, -1);
        prev_state_.resize(i + 1);
    }
    const AgentState s = make_state(obs, current, config_.feature_scale);
    record(obs.intersection, obs, s, false);
    const int a = act(net_, s, epsilon_, rng_);
    prev_state_[i] = s;
    prev_action_[i] = a;
    return a;
}

void XLightPolicy::on_episode_end(const std::vector<IntersectionObservation>& final_obs) {
    // The horizon truncates the episode; the last transitions still bootstrap.
    for (const auto& obs : final_obs) {
        const auto i = static_cast<std::size_t>(obs.intersection);
        if (i >= prev_action_.size() || prev_action_[i] < 0) continue;
        record(obs.intersection, obs, make_state(obs, prev_action_[i], config_.feature_scale), false);
        prev_action_[i] = -1;
    }
}

EpisodeResult evaluate_policy(const Scenario& scenario, const Mlp& net, const TrainConfig& config,
                              const EpisodeOptions& options) {
    Rng unused(0);
    XLightPolicy policy(net, config, 0.0, unused, nullptr);
    EpisodeResult r = run_episode(scenario, policy, options);
    r.metrics.config_hash = train_config_hash(config);
    return r;
}

TrainResult run_xlight(const Scenario& scenario, const TrainConfig& config) {
    config.validate();
    Rng rng(config.seed);
    TrainResult result;
    result.net = Mlp(config.layer_sizes());
    if (config.zero_init) {
        result.net.init_zero();
    } else {
        result.net.init_random(rng);
    }
    Mlp target = result.net;
    AdamOptimizer optimizer(result.net.param_count(), config.learning_rate);
    ReplayBuffer replay(config.replay_capacity);
    std::uint64_t train_steps = 0;

    const int eval_from = std::max(0, config.episodes - config.eval_last);
    double eval_sum = 0.0;
    int evals = 0;
    for (int ep = 0; ep < config.episodes; ++ep) {
        CurveRow row;
        row.episode = ep;
        row.epsilon = config.epsilon_at(ep);
        XLightPolicy policy(result.net, config, row.epsilon, rng, &replay);
        EpisodeOptions quiet;
        quiet.record_decisions = false;
        const EpisodeResult rollout = run_episode(scenario, policy, quiet);
        row.mean_reward = policy.mean_reward();
        row.train_travel_time = rollout.metrics.average_travel_time;

        double loss_sum = 0.0;
        int updates = 0;
        if (replay.size() >= config.batch_size) {
            for (int u = 0; u < config.updates_per_episode; ++u) {
                const auto batch = replay.sample(config.batch_size, rng);
                loss_sum += train_step(result.net, target, batch, config.gamma, optimizer);
                ++updates;
                if (++train_steps % static_cast<std::uint64_t>(config.target_sync) == 0) target = result.net;
            }
        }
        row.mean_loss = updates ? loss_sum / updates : 0.0;
        if (ep >= eval_from) {
            const EpisodeResult ev = evaluate_policy(scenario, result.net, config, quiet);
            row.eval_travel_time = ev.metrics.average_travel_time;
            row.evaluated = true;
            eval_sum += row.eval_travel_time;
            ++evals;
        }
        result.curve.push_back(row);
    }
    EpisodeOptions quiet;
    quiet.record_decisions = false;
    result.eval = evaluate_policy(scenario, result.net, config, quiet).metrics;
    result.eval_travel_time = evals ? eval_sum / evals : result.eval.average_travel_time;
    return result;
}

TransferResult transfer_eval(const Mlp& trained, const Scenario& target, const TrainConfig& config) {
    TransferResult r;
    EpisodeOptions quiet;
    quiet.record_decisions = false;
    r.transfer_travel_time = evaluate_policy(target, trained, config, quiet).metrics.average_travel_time;
    const TrainResult direct = run_xlight(target, config);
    r.direct_travel_time = evaluate_policy(target, direct.net, config, quiet).metrics.average_travel_time;
    r.ratio = r.direct_travel_time > 0.0 ? r.transfer_travel_time / r.direct_travel_time : 1.0;
    return r;
}

namespace {

nlohmann::ordered_json config_json(const TrainConfig& c) {
    return {{"gamma", c.gamma},
            {"learning_rate", c.learning_rate},
            {"epsilon_start", c.epsilon_start},
            {"epsilon_end", c.epsilon_end},
            {"epsilon_decay_episodes", c.epsilon_decay_episodes},
            {"replay_capacity", c.replay_capacity},
            {"batch_size", c.batch_size},
            {"episodes", c.episodes},
            {"updates_per_episode", c.updates_per_episode},
            {"target_sync", c.target_sync},
            {"eval_last", c.eval_last},
            {"reward", std::string(to_string(c.reward))},
            {"seed", c.seed},
            {"hidden", c.hidden},
            {"feature_scale", c.feature_scale},
            {"zero_init", c.zero_init},
            {"t_duration", c.t_duration},
            {"obs_mode", std::string(to_string(c.obs_mode))},
            {"optimizer", "adam(beta1=0.9,beta2=0.999,eps=1e-8)"}};
}

}  // namespace

std::string train_config_hash(const TrainConfig& config) { return hex64(fnv1a64(config_json(config).dump())); }

std::string checkpoint_to_json(const Mlp& net, const TrainConfig& config) {
    nlohmann::ordered_json doc;
    doc["format"] = "tsc-qnet/1";
    doc["layer_sizes"] = net.layer_sizes();
    doc["param_count"] = net.param_count();
    doc["config"] = config_json(config);
    doc["config_hash"] = train_config_hash(config);
    doc["params"] = std::vector<double>(net.params().begin(), net.params().end());
    return doc.dump();
}

Mlp checkpoint_from_json(std::string_view text, TrainConfig* config) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("checkpoint", e.what());
    }
    if (doc.value("format", std::string{}) != "tsc-qnet/1") throw ParseError("/format", "unsupported checkpoint format");
    Mlp net(doc.at("layer_sizes").get<std::vector<int>>());
    const auto params = doc.at("params").get<std::vector<double>>();
    if (params.size() != net.param_count()) throw ParseError("/params", "parameter count does not match layer sizes");
    std::copy(params.begin(), params.end(), net.params().begin());
    if (config) {
        const auto& c = doc.at("config");
        config->gamma = c.at("gamma");
        config->learning_rate = c.at("learning_rate");
        config->epsilon_start = c.at("epsilon_start");
        config->epsilon_end = c.at("epsilon_end");
        config->epsilon_decay_episodes = c.at("epsilon_decay_episodes");
        config->replay_capacity = c.at("replay_capacity");
        config->batch_size = c.at("batch_size");
        config->episodes = c.at("episodes");
        config->updates_per_episode = c.at("updates_per_episode");
        config->target_sync = c.at("target_sync");
        config->eval_last = c.at("eval_last");
        config->reward = reward_mode_from_string(c.at("reward").get<std::string>());
        config->seed = c.at("seed");
        config->hidden = c.at("hidden").get<std::vector<int>>();
        config->feature_scale = c.at("feature_scale");
        config->zero_init = c.at("zero_init");
        config->t_duration = c.at("t_duration");
        config->obs_mode = observation_mode_from_string(c.at("obs_mode").get<std::string>());
    }
    return net;
}

std::string curve_to_csv(const std::vector<CurveRow>& curve) {
    std::string out = "episode,epsilon,mean_reward,mean_loss,train_travel_time,eval_travel_time\n";
    for (const auto& r : curve) {
        out += std::to_string(r.episode) + "," + format_double(r.epsilon) + "," + format_double(r.mean_reward) + "," +
               format_double(r.mean_loss) + "," + format_double(r.train_travel_time) + "," +
               (r.evaluated ? format_double(r.eval_travel_time) : std::string()) + "\n";
    }
    return out;
}

}  // namespace tsc
