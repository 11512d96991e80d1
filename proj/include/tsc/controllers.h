#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "tsc/episode.h"
#include "tsc/observer.h"

namespace tsc {

enum class ControllerKind { FixedTime, MaxPressure, EfficientMP, AdvancedMP };

std::string_view to_string(ControllerKind k);
ControllerKind controller_kind_from_string(std::string_view s);

struct ControllerConfig {
    double t_duration = 15.0;              // seconds between decisions
    double w1 = 1.0;                       // demand weight
    std::array<int, 4> split{30, 30, 30, 30};  // FixedTime seconds per phase
    // Sensitivity variant: the keep test compares against the best *other* phase.
    bool exclude_current_in_max = false;

    void validate() const;
};

struct Decision {
    int target = 0;
    bool keep = false;
    // Diagnostics: max p(s) (or classic pressure) and the current phase's request d(cur) * W1.
    double max_pressure = 0.0;
    double current_request = 0.0;
};

Decision fixed_time_decide(std::int64_t clock, const ControllerConfig& config);

// Argmax of classic (unaveraged) phase pressure; ties prefer the observed
// current phase, then the lowest index.
Decision max_pressure_decide(const IntersectionObservation& obs);

// Argmax of p(s); same tie rule.
Decision efficient_mp_decide(const IntersectionObservation& obs);

// Keeps `current` while d(current) * W1 is positive and exceeds max p(s);
// otherwise moves to argmax p(s). `current` < 0 means no phase yet.
Decision advanced_mp_decide(const IntersectionObservation& obs, int current, const ControllerConfig& config);

// Index of the largest value; ties go to `preferred` when it is among them, else the lowest index.
template <class Range>
int argmax_prefer(const Range& values, int preferred) {
    int best = 0;
    for (int k = 1; k < static_cast<int>(std::size(values)); ++k) {
        if (values[k] > values[best]) best = k;
    }
    if (preferred >= 0 && preferred < static_cast<int>(std::size(values)) && values[preferred] == values[best])
        return preferred;
    return best;
}

class ClassicController : public SignalPolicy {
public:
    ClassicController(ControllerKind kind, ControllerConfig config);

    int decision_interval() const override;
    ObserverConfig observer() const override;
    int decide(const IntersectionObservation& obs, int current, std::int64_t clock) override;

    ControllerKind kind() const { return kind_; }
    const Decision& last_decision() const { return last_; }

private:
    ControllerKind kind_;
    ControllerConfig config_;
    Decision last_;
};

EpisodeResult run_policy(const Scenario& scenario, ControllerKind kind, const ControllerConfig& config,
                         const EpisodeOptions& options = {});

}  // namespace tsc
