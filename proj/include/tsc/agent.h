#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <string>
#include <string_view>
#include <vector>

#include "tsc/episode.h"
#include "tsc/observer.h"
#include "tsc/qnet.h"
#include "tsc/rng.h"

namespace tsc {

constexpr int kFeatureCount = kPhaseCount + 2 * kMovementCount;  // 28

// Current-phase one-hot followed by (e, r) per movement in canonical slot order.
struct AgentState {
    std::array<double, kFeatureCount> features{};
    bool operator==(const AgentState&) const = default;
};

AgentState make_state(const IntersectionObservation& obs, int current_phase, double feature_scale);

struct Transition {
    AgentState state;
    int action = 0;
    double reward = 0.0;
    AgentState next_state;
    bool terminal = false;
};

enum class RewardMode { Pressure, Queue };

std::string_view to_string(RewardMode m);
RewardMode reward_mode_from_string(std::string_view s);

// -|P_i| or -(incoming queue).
double reward_of(const IntersectionObservation& obs, RewardMode mode);

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t k) const { return items_[k]; }
    // Uniform with replacement.
    std::vector<const Transition*> sample(std::size_t count, Rng& rng) const;

private:
    std::size_t capacity_;
    std::deque<Transition> items_;
};

struct TrainConfig {
    double gamma = 0.8;
    double learning_rate = 1e-3;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    int epsilon_decay_episodes = 30;  // linear decay length
    std::size_t replay_capacity = 20000;
    std::size_t batch_size = 32;
    int episodes = 50;
    int updates_per_episode = 150;
    int target_sync = 100;            // train steps between target-network copies
    int eval_last = 10;               // evaluation episodes averaged at the end of training
    RewardMode reward = RewardMode::Pressure;
    std::uint64_t seed = 0;
    std::vector<int> hidden{64, 64};
    double feature_scale = 20.0;      // ATS features are divided by this
    bool zero_init = false;
    double t_duration = 15.0;
    ObservationMode obs_mode = ObservationMode::Default;

    void validate() const;
    double epsilon_at(int episode) const;
    std::vector<int> layer_sizes() const;
};

// Row-major Q-values for one state.
std::vector<double> forward(const Mlp& net, const AgentState& s);

double bellman_target(const Transition& t, const Mlp& target_net, double gamma);

// One optimizer step on the mean squared TD error; returns the loss before the step.
double train_step(Mlp& net, const Mlp& target_net, std::span<const Transition* const> batch, double gamma,
                  AdamOptimizer& optimizer);

// Loss and its exact gradient without updating; used by train_step and the gradient checks.
double td_loss_and_gradient(const Mlp& net, const Mlp& target_net, std::span<const Transition* const> batch,
                            double gamma, std::span<double> grad);

int greedy_action(std::span<const double> q);
int act(const Mlp& net, const AgentState& s, double epsilon, Rng& rng);

// Shared-parameter policy for every intersection. Records transitions into
// `replay` when given one.
class XLightPolicy : public SignalPolicy {
public:
    XLightPolicy(const Mlp& net, const TrainConfig& config, double epsilon, Rng& rng, ReplayBuffer* replay);

    int decision_interval() const override { return static_cast<int>(config_.t_duration); }
    ObserverConfig observer() const override;
    int decide(const IntersectionObservation& obs, int current, std::int64_t clock) override;
    void on_episode_end(const std::vector<IntersectionObservation>& final_obs) override;

    double mean_reward() const { return rewards_ == 0 ? 0.0 : reward_sum_ / static_cast<double>(rewards_); }

private:
    void record(int intersection, const IntersectionObservation& obs, const AgentState& next, bool terminal);

    const Mlp& net_;
    const TrainConfig& config_;
    double epsilon_;
    Rng& rng_;
    ReplayBuffer* replay_;
    std::vector<AgentState> prev_state_;
    std::vector<int> prev_action_;
    double reward_sum_ = 0.0;
    std::size_t rewards_ = 0;
};

struct CurveRow {
    int episode = 0;
    double epsilon = 0.0;
    double mean_reward = 0.0;
    double mean_loss = 0.0;
    double train_travel_time = 0.0;
    double eval_travel_time = 0.0;  // NaN-free: 0 when no evaluation ran that episode
    bool evaluated = false;
};

struct TrainResult {
    Mlp net;
    std::vector<CurveRow> curve;
    EpisodeMetrics eval;          // metrics of a final greedy episode
    double eval_travel_time = 0;  // mean over the last `eval_last` greedy evaluations
};

// Training loop: every t_duration each intersection builds its state, the shared
// network picks a phase, transitions are stored, and training runs after each episode.
TrainResult run_xlight(const Scenario& scenario, const TrainConfig& config);

// Greedy (epsilon = 0) episode with a frozen network.
EpisodeResult evaluate_policy(const Scenario& scenario, const Mlp& net, const TrainConfig& config,
                              const EpisodeOptions& options = {});

struct TransferResult {
    double transfer_travel_time = 0.0;
    double direct_travel_time = 0.0;
    double ratio = 0.0;  // transfer / direct
};

// Frozen `trained` policy on `target` versus a policy trained directly on `target`
// with the same config.
TransferResult transfer_eval(const Mlp& trained, const Scenario& target, const TrainConfig& config);

std::string checkpoint_to_json(const Mlp& net, const TrainConfig& config);
Mlp checkpoint_from_json(std::string_view text, TrainConfig* config = nullptr);
std::string train_config_hash(const TrainConfig& config);
std::string curve_to_csv(const std::vector<CurveRow>& curve);

}  // namespace tsc
