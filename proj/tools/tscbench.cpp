// tscbench: run traffic signal controllers, sweeps and RL training from the command line.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsc/agent.h"
#include "tsc/bench.h"
#include "tsc/cityflow.h"
#include "tsc/controllers.h"
#include "tsc/hash.h"
#include "tsc/text.h"

using namespace tsc;

namespace {

struct ScenarioArgs {
    ScenarioSpec spec;
    std::uint64_t seed = 1;
    int horizon = 3600;
};

void add_scenario_options(CLI::App* app, ScenarioArgs& a) {
    app->add_option("--name", a.spec.name, "Scenario label used in result rows");
    app->add_option("--rows", a.spec.rows, "Grid rows")->check(CLI::PositiveNumber);
    app->add_option("--cols", a.spec.cols, "Grid columns")->check(CLI::PositiveNumber);
    app->add_option("--ew-length", a.spec.ew_length, "East-west road length (m)")->check(CLI::PositiveNumber);
    app->add_option("--ns-length", a.spec.ns_length, "North-south road length (m)")->check(CLI::PositiveNumber);
    app->add_option("--lanes", a.spec.lanes, "Lanes per road")->check(CLI::Range(1, 8));
    app->add_option("--speed", a.spec.max_speed, "Road speed limit (m/s)")->check(CLI::PositiveNumber);
    app->add_option("--rate", a.spec.rate, "Poisson arrivals per second per entry road")->check(CLI::NonNegativeNumber);
    app->add_option("--turn-left", a.spec.turns.left, "Relative weight of left turns");
    app->add_option("--turn-straight", a.spec.turns.straight, "Relative weight of going straight");
    app->add_option("--turn-right", a.spec.turns.right, "Relative weight of right turns");
    app->add_option("--roadnet", a.spec.roadnet_path, "CityFlow roadnet file (replaces the grid)")->check(CLI::ExistingFile);
    app->add_option("--flow", a.spec.flow_path, "CityFlow flow file")->check(CLI::ExistingFile);
    app->add_option("--seed", a.seed, "Seed for demand and learning");
    app->add_option("--horizon", a.horizon, "Episode length (s)")->check(CLI::PositiveNumber);
}

void check_files(const ScenarioArgs& a) {
    if (a.spec.roadnet_path.empty() != a.spec.flow_path.empty())
        throw ArgumentError("--roadnet and --flow must be given together");
}

OutputFormat format_for(const std::string& path) {
    return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0 ? OutputFormat::Json : OutputFormat::Csv;
}

void write_rows(const std::vector<ResultRow>& rows, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << results_to_csv(rows);
    } else {
        emit(rows, format_for(out), out);
    }
}

ResultRow row_from_metrics(const ScenarioArgs& a, const std::string& method, const EpisodeMetrics& m) {
    ResultRow r;
    r.scenario = a.spec.name;
    r.method = method;
    r.seed = a.seed;
    r.average_travel_time = m.average_travel_time;
    r.throughput = static_cast<double>(m.throughput);
    r.injected = static_cast<double>(m.injected);
    r.remaining = static_cast<double>(m.remaining);
    r.empty = m.empty;
    r.config_hash = m.config_hash;
    return r;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    return f;
}

void print_warnings(const TrafficNetwork& net) {
    for (const auto& w : net.warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Traffic signal control benchmark"};
    app.require_subcommand(1);

    // simulate
    ScenarioArgs sim_args;
    std::string controller = "advancedmp";
    ControllerConfig ctrl;
    std::string obs_mode = "default";
    std::string sim_out, trace_path, obs_path, sim_model;
    auto* simulate = app.add_subcommand("simulate", "Run one episode with one controller");
    add_scenario_options(simulate, sim_args);
    simulate->add_option("--controller", controller, "Signal controller")
        ->check(CLI::IsMember({"fixedtime", "maxpressure", "efficientmp", "advancedmp", "mplight"}));
    simulate->add_option("--w1", ctrl.w1, "Demand weight for advancedmp")->check(CLI::NonNegativeNumber);
    simulate->add_option("--t-duration", ctrl.t_duration, "Seconds between decisions")->check(CLI::PositiveNumber);
    simulate->add_option("--obs-mode", obs_mode, "Observation range for mplight")
        ->check(CLI::IsMember({"default", "config1", "config2", "config3"}));
    simulate->add_option("--split", ctrl.split, "Fixed-time seconds per phase (4 values)")->expected(4);
    simulate->add_flag("--exclude-current", ctrl.exclude_current_in_max,
                       "Advanced-MP keep test compares against the best other phase");
    simulate->add_option("--model", sim_model, "Checkpoint for --controller mplight")->check(CLI::ExistingFile);
    simulate->add_option("--out", sim_out, "Result file (.csv or .json); stdout when omitted");
    simulate->add_option("--trace", trace_path, "Per-tick JSON-lines world trace");
    simulate->add_option("--obs-dump", obs_path, "JSON-lines observations at each decision");

    // sweep
    std::string plan_path, sweep_out;
    unsigned workers = 0;
    bool workers_set = false;
    auto* sweep = app.add_subcommand("sweep", "Run an experiment plan (JSON)");
    sweep->add_option("plan", plan_path, "Plan file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", sweep_out, "Result file (.csv or .json); stdout when omitted");
    sweep->add_option("--workers", workers, "Worker threads (0: all cores)")->each([&](const std::string&) {
        workers_set = true;
    });

    // train
    ScenarioArgs train_args;
    TrainConfig tc;
    std::string train_obs = "default", reward = "pressure";
    std::string model_out, curve_out, train_out;
    auto* train = app.add_subcommand("train", "Train the shared Q-network (Advanced-MPLight)");
    add_scenario_options(train, train_args);
    train->add_option("--episodes", tc.episodes, "Training episodes")->check(CLI::PositiveNumber);
    train->add_option("--t-duration", tc.t_duration, "Seconds between decisions")->check(CLI::PositiveNumber);
    train->add_option("--obs-mode", train_obs, "Observation range")
        ->check(CLI::IsMember({"default", "config1", "config2", "config3"}));
    train->add_option("--reward", reward, "Reward signal")->check(CLI::IsMember({"pressure", "queue"}));
    train->add_option("--lr", tc.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
    train->add_option("--gamma", tc.gamma, "Discount")->check(CLI::Range(0.0, 1.0));
    train->add_option("--model", model_out, "Checkpoint output (JSON)");
    train->add_option("--curve", curve_out, "Training curve CSV");
    train->add_option("--out", train_out, "Result file (.csv or .json); stdout when omitted");

    // transfer
    ScenarioArgs transfer_args;
    std::string transfer_model, transfer_out;
    auto* transfer = app.add_subcommand("transfer", "Evaluate a trained checkpoint on another scenario");
    add_scenario_options(transfer, transfer_args);
    transfer->add_option("--model", transfer_model, "Checkpoint trained elsewhere")->required()->check(CLI::ExistingFile);
    transfer->add_option("--out", transfer_out, "Result JSON; stdout when omitted");

    // validate
    std::string val_roadnet, val_flow, val_out;
    auto* validate = app.add_subcommand("validate", "Check CityFlow data files and summarize them");
    validate->add_option("--roadnet", val_roadnet, "CityFlow roadnet file")->required()->check(CLI::ExistingFile);
    validate->add_option("--flow", val_flow, "CityFlow flow file")->check(CLI::ExistingFile);
    validate->add_option("--out", val_out, "Write the canonical network JSON here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help and version requests exit 0; every usage error exits 2.
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) {
            check_files(sim_args);
            ctrl.validate();
            const Scenario scenario = build_scenario(sim_args.spec, sim_args.seed, sim_args.horizon);
            print_warnings(*scenario.net);
            std::ofstream trace_file, obs_file;
            EpisodeOptions opts;
            if (!trace_path.empty()) {
                trace_file = open_out(trace_path);
                opts.trace = &trace_file;
            }
            if (!obs_path.empty()) {
                obs_file = open_out(obs_path);
                opts.observations = &obs_file;
            }
            ResultRow row;
            if (controller == "mplight") {
                if (sim_model.empty()) throw ArgumentError("--controller mplight needs --model");
                TrainConfig cfg;
                const Mlp net = checkpoint_from_json(read_file(sim_model), &cfg);
                cfg.t_duration = ctrl.t_duration;
                cfg.obs_mode = observation_mode_from_string(obs_mode);
                const EpisodeResult r = evaluate_policy(scenario, net, cfg, opts);
                row = row_from_metrics(sim_args, controller, r.metrics);
                row.obs_mode = obs_mode;
                row.config_hash = train_config_hash(cfg);
            } else {
                const EpisodeResult r = run_policy(scenario, controller_kind_from_string(controller), ctrl, opts);
                row = row_from_metrics(sim_args, controller, r.metrics);
                if (controller == "advancedmp") row.w1 = ctrl.w1;
            }
            row.t_duration = ctrl.t_duration;
            if (controller != "fixedtime") {
                row.range_m = observation_range(observation_mode_from_string(obs_mode), scenario.net->max_speed(),
                                                ctrl.t_duration);
            }
            write_rows({row}, sim_out);
        } else if (sweep->parsed()) {
            ExperimentPlan plan = plan_from_json(read_file(plan_path));
            if (workers_set) plan.workers = workers;
            write_rows(run_plan(plan), sweep_out);
        } else if (train->parsed()) {
            check_files(train_args);
            tc.seed = train_args.seed;
            tc.obs_mode = observation_mode_from_string(train_obs);
            tc.reward = reward_mode_from_string(reward);
            tc.validate();
            const Scenario scenario = build_scenario(train_args.spec, train_args.seed, train_args.horizon);
            print_warnings(*scenario.net);
            const TrainResult result = run_xlight(scenario, tc);
            if (!model_out.empty()) write_file(model_out, checkpoint_to_json(result.net, tc));
            if (!curve_out.empty()) write_file(curve_out, curve_to_csv(result.curve));
            ResultRow row = row_from_metrics(train_args, "mplight", result.eval);
            row.average_travel_time = result.eval_travel_time;
            row.t_duration = tc.t_duration;
            row.obs_mode = train_obs;
            row.range_m = observation_range(tc.obs_mode, scenario.net->max_speed(), tc.t_duration);
            row.config_hash = train_config_hash(tc);
            write_rows({row}, train_out);
        } else if (transfer->parsed()) {
            check_files(transfer_args);
            TrainConfig cfg;
            const Mlp net = checkpoint_from_json(read_file(transfer_model), &cfg);
            cfg.seed = transfer_args.seed;
            const Scenario target = build_scenario(transfer_args.spec, transfer_args.seed, transfer_args.horizon);
            print_warnings(*target.net);
            const TransferResult t = transfer_eval(net, target, cfg);
            nlohmann::ordered_json doc = {{"scenario", transfer_args.spec.name},
                                          {"seed", transfer_args.seed},
                                          {"transfer_travel_time", t.transfer_travel_time},
                                          {"direct_travel_time", t.direct_travel_time},
                                          {"ratio", t.ratio},
                                          {"config_hash", train_config_hash(cfg)}};
            const std::string text = doc.dump(1) + "\n";
            if (transfer_out.empty()) {
                std::cout << text;
            } else {
                write_file(transfer_out, text);
            }
        } else if (validate->parsed()) {
            TrafficNetwork net = load_cityflow_roadnet(read_file(val_roadnet));
            print_warnings(net);
            std::size_t arrivals = 0;
            if (!val_flow.empty()) {
                const FlowSpec flow = load_cityflow_flow(read_file(val_flow));
                resolve_flow(net, flow);
                arrivals = flow.arrivals.size();
            }
            std::cout << "signalized intersections: " << net.intersections.size() << "\n"
                      << "boundary nodes: " << net.boundary_nodes.size() << "\n"
                      << "roads: " << net.roads.size() << "\n"
                      << "lanes: " << net.lanes.size() << "\n"
                      << "max speed: " << format_double(net.max_speed()) << " m/s\n";
            if (!val_flow.empty()) std::cout << "arrivals: " << arrivals << "\n";
            if (!net.provenance.empty()) std::cout << "provenance: " << net.provenance << "\n";
            if (!val_out.empty()) write_file(val_out, network_to_json(net));
        }
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
