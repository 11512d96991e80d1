#include "tsc/bench.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "tsc/cityflow.h"
#include "tsc/hash.h"
#include "tsc/text.h"

namespace tsc {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write to '" + path + "' failed");
}

double saturation_rate(const TurnWeights& turns) {
    const double total = turns.left + turns.straight + turns.right;
    const double s = turns.straight / total;
    const double l = turns.left / total;
    return 1.0 / (2.0 * (s + l));
}

Scenario build_scenario(const ScenarioSpec& spec, std::uint64_t seed, int horizon) {
    SimConfig sim;
    sim.horizon = horizon;
    sim.seed = seed;
    if (spec.from_files()) {
        auto [net, flow] = load_cityflow(read_file(spec.roadnet_path), read_file(spec.flow_path));
        return Scenario::make(spec.name, std::move(net), flow, sim);
    }
    TrafficNetwork net = generate_grid(spec.rows, spec.cols, spec.ew_length, spec.ns_length, spec.lanes, spec.max_speed);
    const FlowSpec flow = generate_poisson_flow(net, spec.rate, horizon, seed, spec.turns);
    return Scenario::make(spec.name, std::move(net), flow, sim);
}

void ExperimentPlan::validate() const {
    if (scenarios.empty() || methods.empty() || w1.empty() || t_duration.empty() || obs_modes.empty())
        throw ArgumentError("plan must have at least one cell");
    if (seeds.empty()) throw ArgumentError("plan needs at least one seed");
    if (horizon <= 0) throw ArgumentError("horizon must be positive");
    for (const auto& m : methods) {
        if (m != "mplight") controller_kind_from_string(m);
    }
}

namespace {

template <class T>
void read_opt(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

ScenarioSpec scenario_from_json(const json& j) {
    ScenarioSpec s;
    read_opt(j, "name", s.name);
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        read_opt(g, "rows", s.rows);
        read_opt(g, "cols", s.cols);
        read_opt(g, "ew_length", s.ew_length);
        read_opt(g, "ns_length", s.ns_length);
        read_opt(g, "lanes", s.lanes);
        read_opt(g, "max_speed", s.max_speed);
    }
    read_opt(j, "rate", s.rate);
    if (j.contains("turns")) {
        read_opt(j.at("turns"), "left", s.turns.left);
        read_opt(j.at("turns"), "straight", s.turns.straight);
        read_opt(j.at("turns"), "right", s.turns.right);
    }
    read_opt(j, "roadnet", s.roadnet_path);
    read_opt(j, "flow", s.flow_path);
    return s;
}

void train_from_json(const json& j, TrainConfig& c) {
    read_opt(j, "gamma", c.gamma);
    read_opt(j, "learning_rate", c.learning_rate);
    read_opt(j, "epsilon_start", c.epsilon_start);
    read_opt(j, "epsilon_end", c.epsilon_end);
    read_opt(j, "epsilon_decay_episodes", c.epsilon_decay_episodes);
    read_opt(j, "replay_capacity", c.replay_capacity);
    read_opt(j, "batch_size", c.batch_size);
    read_opt(j, "episodes", c.episodes);
    read_opt(j, "updates_per_episode", c.updates_per_episode);
    read_opt(j, "target_sync", c.target_sync);
    read_opt(j, "eval_last", c.eval_last);
    read_opt(j, "hidden", c.hidden);
    read_opt(j, "feature_scale", c.feature_scale);
    if (j.contains("reward")) c.reward = reward_mode_from_string(j.at("reward").get<std::string>());
}

}  // namespace

ExperimentPlan plan_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("plan", e.what());
    }
    ExperimentPlan plan;
    try {
        if (!doc.contains("scenarios")) throw ParseError("/scenarios", "missing field");
        for (const auto& s : doc.at("scenarios")) plan.scenarios.push_back(scenario_from_json(s));
        read_opt(doc, "methods", plan.methods);
        read_opt(doc, "w1", plan.w1);
        read_opt(doc, "t_duration", plan.t_duration);
        if (doc.contains("obs_modes")) {
            plan.obs_modes.clear();
            for (const auto& m : doc.at("obs_modes")) plan.obs_modes.push_back(observation_mode_from_string(m.get<std::string>()));
        }
        read_opt(doc, "seeds", plan.seeds);
        read_opt(doc, "horizon", plan.horizon);
        read_opt(doc, "workers", plan.workers);
        if (doc.contains("split")) plan.controller.split = doc.at("split").get<std::array<int, 4>>();
        read_opt(doc, "exclude_current_in_max", plan.controller.exclude_current_in_max);
        if (doc.contains("train")) train_from_json(doc.at("train"), plan.train);
    } catch (const json::exception& e) {
        throw ParseError("plan", e.what());
    }
    plan.validate();
    return plan;
}

namespace {

struct Cell {
    std::size_t scenario;
    std::string method;
    std::optional<double> w1;
    double t_duration;
    std::optional<ObservationMode> obs_mode;
};

struct Job {
    std::size_t cell;
    std::uint64_t seed;
};

std::string cell_hash(const ExperimentPlan& plan, const Cell& c) {
    const auto& s = plan.scenarios[c.scenario];
    ordered_json j = {{"scenario", s.name},
                      {"grid", {s.rows, s.cols, s.ew_length, s.ns_length, s.lanes, s.max_speed}},
                      {"rate", s.rate},
                      {"turns", {s.turns.left, s.turns.straight, s.turns.right}},
                      {"roadnet", s.roadnet_path},
                      {"flow", s.flow_path},
                      {"method", c.method},
                      {"w1", c.w1 ? json(*c.w1) : json()},
                      {"t_duration", c.t_duration},
                      {"obs_mode", c.obs_mode ? json(std::string(to_string(*c.obs_mode))) : json()},
                      {"split", plan.controller.split},
                      {"exclude_current_in_max", plan.controller.exclude_current_in_max},
                      {"horizon", plan.horizon}};
    if (c.method == "mplight") j["train"] = train_config_hash(plan.train);
    return hex64(fnv1a64(j.dump()));
}

ResultRow run_job(const ExperimentPlan& plan, const Cell& cell, std::uint64_t seed, const std::string& hash) {
    ResultRow row;
    const auto& spec = plan.scenarios[cell.scenario];
    row.scenario = spec.name;
    row.method = cell.method;
    row.w1 = cell.w1;
    row.t_duration = cell.t_duration;
    row.obs_mode = cell.obs_mode ? std::optional<std::string>(std::string(to_string(*cell.obs_mode))) : std::nullopt;
    row.seed = seed;
    row.config_hash = hash;
    try {
        const Scenario scenario = build_scenario(spec, seed, plan.horizon);
        if (cell.method != "fixedtime") {
            row.range_m = observation_range(cell.obs_mode.value_or(ObservationMode::Default),
                                            scenario.net->max_speed(), cell.t_duration);
        }
        if (cell.method == "mplight") {
            TrainConfig tc = plan.train;
            tc.seed = seed;
            tc.t_duration = cell.t_duration;
            tc.obs_mode = cell.obs_mode.value_or(ObservationMode::Default);
            const TrainResult tr = run_xlight(scenario, tc);
            row.average_travel_time = tr.eval_travel_time;
            row.throughput = static_cast<double>(tr.eval.throughput);
            row.injected = static_cast<double>(tr.eval.injected);
            row.remaining = static_cast<double>(tr.eval.remaining);
            row.empty = tr.eval.empty;
        } else {
            ControllerConfig cc = plan.controller;
            cc.t_duration = cell.t_duration;
            cc.w1 = cell.w1.value_or(cc.w1);
            EpisodeOptions quiet;
            quiet.record_decisions = false;
            const EpisodeResult r = run_policy(scenario, controller_kind_from_string(cell.method), cc, quiet);
            row.average_travel_time = r.metrics.average_travel_time;
            row.throughput = static_cast<double>(r.metrics.throughput);
            row.injected = static_cast<double>(r.metrics.injected);
            row.remaining = static_cast<double>(r.metrics.remaining);
            row.empty = r.metrics.empty;
        }
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        row.status = "error: " + msg;
    }
    return row;
}

auto sort_key(const ResultRow& r) {
    return std::make_tuple(r.scenario, r.method, r.w1.value_or(-1.0), r.t_duration, r.obs_mode.value_or(""),
                           r.aggregate, r.seed.value_or(0));
}

}  // namespace

std::vector<ResultRow> run_plan(const ExperimentPlan& plan) {
    plan.validate();
    std::vector<Cell> cells;
    for (std::size_t s = 0; s < plan.scenarios.size(); ++s) {
        for (const auto& method : plan.methods) {
            if (method == "fixedtime") {
                cells.push_back({s, method, std::nullopt, plan.t_duration.front(), std::nullopt});
                continue;
            }
            for (double td : plan.t_duration) {
                if (method == "advancedmp") {
                    for (double w : plan.w1) cells.push_back({s, method, w, td, std::nullopt});
                } else if (method == "mplight") {
                    for (auto m : plan.obs_modes) cells.push_back({s, method, std::nullopt, td, m});
                } else {
                    cells.push_back({s, method, std::nullopt, td, std::nullopt});
                }
            }
        }
    }
    std::vector<std::string> hashes;
    for (const auto& c : cells) hashes.push_back(cell_hash(plan, c));

    std::vector<Job> jobs;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (auto seed : plan.seeds) jobs.push_back({c, seed});
    }
    std::vector<ResultRow> rows(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < jobs.size(); k = next++) {
            rows[k] = run_job(plan, cells[jobs[k].cell], jobs[k].seed, hashes[jobs[k].cell]);
        }
    };
    unsigned threads = plan.workers ? plan.workers : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, jobs.size())));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    // Aggregate per cell over successful seeds.
    for (std::size_t c = 0; c < cells.size(); ++c) {
        std::vector<const ResultRow*> ok;
        const ResultRow* first = nullptr;
        for (std::size_t k = 0; k < jobs.size(); ++k) {
            if (jobs[k].cell != c) continue;
            if (!first) first = &rows[k];
            if (rows[k].status == "ok") ok.push_back(&rows[k]);
        }
        ResultRow agg = *first;
        agg.seed.reset();
        agg.aggregate = true;
        agg.samples = static_cast<int>(ok.size());
        agg.status = ok.empty() ? "error: no successful seeds" : "ok";
        if (!ok.empty()) {
            const double n = static_cast<double>(ok.size());
            double mean = 0, thr = 0, inj = 0, rem = 0;
            bool all_empty = true;
            for (const auto* r : ok) {
                mean += r->average_travel_time;
                thr += r->throughput;
                inj += r->injected;
                rem += r->remaining;
                all_empty = all_empty && r->empty;
                if (r->range_m) agg.range_m = r->range_m;
            }
            mean /= n;
            double var = 0;
            for (const auto* r : ok) var += (r->average_travel_time - mean) * (r->average_travel_time - mean);
            const double sd = ok.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
            agg.average_travel_time = mean;
            agg.ci95 = 1.96 * sd / std::sqrt(n);
            agg.throughput = thr / n;
            agg.injected = inj / n;
            agg.remaining = rem / n;
            agg.empty = all_empty;
        }
        rows.push_back(std::move(agg));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) { return sort_key(a) < sort_key(b); });
    return rows;
}

namespace {

const char* kColumns[] = {"scenario",  "method",     "w1",       "t_duration", "obs_mode",  "range_m",
                          "seed",      "aggregate",  "samples",  "average_travel_time",   "ci95",
                          "throughput", "injected",  "remaining", "empty",     "config_hash", "status"};

std::string opt_num(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::vector<std::string> row_fields(const ResultRow& r) {
    return {r.scenario,
            r.method,
            opt_num(r.w1),
            format_double(r.t_duration),
            r.obs_mode.value_or(""),
            opt_num(r.range_m),
            r.seed ? std::to_string(*r.seed) : std::string(),
            r.aggregate ? "1" : "0",
            std::to_string(r.samples),
            format_double(r.average_travel_time),
            opt_num(r.ci95),
            format_double(r.throughput),
            format_double(r.injected),
            format_double(r.remaining),
            r.empty ? "1" : "0",
            r.config_hash,
            r.status};
}

std::optional<double> parse_opt_num(const std::string& s) {
    if (s.empty()) return std::nullopt;
    if (s == "inf") return std::numeric_limits<double>::infinity();
    return std::stod(s);
}

ResultRow row_from_fields(const std::vector<std::string>& f) {
    if (f.size() != std::size(kColumns)) throw ParseError("csv", "wrong column count");
    ResultRow r;
    r.scenario = f[0];
    r.method = f[1];
    r.w1 = parse_opt_num(f[2]);
    r.t_duration = std::stod(f[3]);
    if (!f[4].empty()) r.obs_mode = f[4];
    r.range_m = parse_opt_num(f[5]);
    if (!f[6].empty()) r.seed = std::stoull(f[6]);
    r.aggregate = f[7] == "1";
    r.samples = std::stoi(f[8]);
    r.average_travel_time = std::stod(f[9]);
    r.ci95 = parse_opt_num(f[10]);
    r.throughput = std::stod(f[11]);
    r.injected = std::stod(f[12]);
    r.remaining = std::stod(f[13]);
    r.empty = f[14] == "1";
    r.config_hash = f[15];
    r.status = f[16];
    return r;
}

}  // namespace

std::string results_to_csv(const std::vector<ResultRow>& rows) {
    std::string out;
    for (std::size_t k = 0; k < std::size(kColumns); ++k) out += (k ? "," : "") + std::string(kColumns[k]);
    out += '\n';
    for (const auto& r : rows) {
        const auto f = row_fields(r);
        for (std::size_t k = 0; k < f.size(); ++k) out += (k ? "," : "") + f[k];
        out += '\n';
    }
    return out;
}

std::vector<ResultRow> results_from_csv(std::string_view text) {
    std::vector<ResultRow> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> fields;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        fields.push_back(cur);
        rows.push_back(row_from_fields(fields));
    }
    return rows;
}

std::string results_to_json(const std::vector<ResultRow>& rows) {
    ordered_json doc;
    doc["travel_time_rule"] = "completed: exit - entry; unfinished at horizon: horizon - scheduled entry";
    doc["ci_method"] = "normal approximation, 1.96 * sample sd / sqrt(n) over seeds";
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) {
        auto num = [](const std::optional<double>& v) -> ordered_json {
            if (!v) return nullptr;
            if (std::isinf(*v)) return "inf";
            return *v;
        };
        arr.push_back({{"scenario", r.scenario},
                       {"method", r.method},
                       {"w1", num(r.w1)},
                       {"t_duration", r.t_duration},
                       {"obs_mode", r.obs_mode ? ordered_json(*r.obs_mode) : ordered_json(nullptr)},
                       {"range_m", num(r.range_m)},
                       {"seed", r.seed ? ordered_json(*r.seed) : ordered_json(nullptr)},
                       {"aggregate", r.aggregate},
                       {"samples", r.samples},
                       {"average_travel_time", r.average_travel_time},
                       {"ci95", num(r.ci95)},
                       {"throughput", r.throughput},
                       {"injected", r.injected},
                       {"remaining", r.remaining},
                       {"empty", r.empty},
                       {"config_hash", r.config_hash},
                       {"status", r.status}});
    }
    doc["rows"] = std::move(arr);
    return doc.dump(1) + "\n";
}

std::vector<ResultRow> results_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("results", e.what());
    }
    auto num = [](const json& v) -> std::optional<double> {
        if (v.is_null()) return std::nullopt;
        if (v.is_string()) return std::numeric_limits<double>::infinity();
        return v.get<double>();
    };
    std::vector<ResultRow> rows;
    for (const auto& j : doc.at("rows")) {
        ResultRow r;
        r.scenario = j.at("scenario");
        r.method = j.at("method");
        r.w1 = num(j.at("w1"));
        r.t_duration = j.at("t_duration");
        if (!j.at("obs_mode").is_null()) r.obs_mode = j.at("obs_mode").get<std::string>();
        r.range_m = num(j.at("range_m"));
        if (!j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
        r.aggregate = j.at("aggregate");
        r.samples = j.at("samples");
        r.average_travel_time = j.at("average_travel_time");
        r.ci95 = num(j.at("ci95"));
        r.throughput = j.at("throughput");
        r.injected = j.at("injected");
        r.remaining = j.at("remaining");
        r.empty = j.at("empty");
        r.config_hash = j.at("config_hash");
        r.status = j.at("status");
        rows.push_back(std::move(r));
    }
    return rows;
}

void emit(const std::vector<ResultRow>& rows, OutputFormat format, const std::string& path) {
    write_file(path, format == OutputFormat::Csv ? results_to_csv(rows) : results_to_json(rows));
}

}  // namespace tsc
