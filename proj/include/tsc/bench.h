#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsc/agent.h"
#include "tsc/controllers.h"
#include "tsc/episode.h"
#include "tsc/flow.h"

namespace tsc {

// Synthetic grid with Poisson demand, or CityFlow files on disk.
struct ScenarioSpec {
    std::string name = "grid";
    int rows = 1;
    int cols = 1;
    double ew_length = 300.0;
    double ns_length = 300.0;
    int lanes = 3;
    double max_speed = 11.11;
    double rate = 0.1;  // vehicles/second per entry road
    TurnWeights turns;
    std::string roadnet_path;
    std::string flow_path;

    bool from_files() const { return !roadnet_path.empty(); }
};

// Builds the scenario for one seed (the seed drives synthetic demand).
Scenario build_scenario(const ScenarioSpec& spec, std::uint64_t seed, int horizon);

// Per-approach arrival rate that saturates a 4-phase intersection of single-lane
// turn movements discharging one vehicle per second per lane (no lost time).
double saturation_rate(const TurnWeights& turns);

struct ExperimentPlan {
    std::vector<ScenarioSpec> scenarios;
    std::vector<std::string> methods{"fixedtime", "maxpressure", "efficientmp", "advancedmp"};
    std::vector<double> w1{1.0};
    std::vector<double> t_duration{15.0};
    std::vector<ObservationMode> obs_modes{ObservationMode::Default};
    std::vector<std::uint64_t> seeds{1, 2, 3};
    int horizon = 3600;
    ControllerConfig controller;  // split and variant flags; W1 and t_duration come from the sweep axes
    TrainConfig train;
    unsigned workers = 0;  // 0: hardware concurrency

    void validate() const;
};

ExperimentPlan plan_from_json(std::string_view text);

struct ResultRow {
    std::string scenario;
    std::string method;
    std::optional<double> w1;
    double t_duration = 0.0;
    std::optional<std::string> obs_mode;
    std::optional<double> range_m;
    std::optional<std::uint64_t> seed;  // empty on aggregate rows
    bool aggregate = false;
    int samples = 1;
    double average_travel_time = 0.0;
    std::optional<double> ci95;  // aggregate rows only
    double throughput = 0.0;
    double injected = 0.0;
    double remaining = 0.0;
    bool empty = false;
    std::string config_hash;
    std::string status = "ok";

    bool operator==(const ResultRow&) const = default;
};

// One row per (scenario, method, sweep point, seed) plus one aggregate row per cell,
// canonically sorted. Cell failures become rows with an error status.
std::vector<ResultRow> run_plan(const ExperimentPlan& plan);

enum class OutputFormat { Csv, Json };

std::string results_to_csv(const std::vector<ResultRow>& rows);
std::string results_to_json(const std::vector<ResultRow>& rows);
std::vector<ResultRow> results_from_csv(std::string_view text);
std::vector<ResultRow> results_from_json(std::string_view text);

// Writes the table; throws Error naming the path on I/O failure.
void emit(const std::vector<ResultRow>& rows, OutputFormat format, const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace tsc
