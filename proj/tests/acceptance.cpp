// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.h"
#include "oracle.h"
#include "tsc/agent.h"
#include "tsc/bench.h"
#include "tsc/cityflow.h"
#include "tsc/controllers.h"
#include "tsc/metrics.h"

#ifndef TSCBENCH_PATH
#define TSCBENCH_PATH "tscbench"
#endif

using namespace tsc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    bool skipped = false;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 2) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(prec);
    os << v;
    return os.str();
}

Outcome oracle_equivalence() {
    const auto t0 = Clock::now();
    Rng rng(7);
    int mismatches = 0;
    std::string first;
    for (int k = 0; k < 200; ++k) {
        const World w = test::random_world(rng);
        const ObserverConfig cfg = test::random_observer(rng);
        for (std::size_t i = 0; i < w.net->intersections.size(); ++i) {
            const std::string diff = test::compare_with_recount(w, static_cast<int>(i), cfg);
            if (!diff.empty()) {
                if (first.empty()) first = "world " + std::to_string(k) + ": " + diff;
                ++mismatches;
            }
        }
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && secs < 10.0,
            "200 worlds, " + std::to_string(mismatches) + " mismatches, " + fmt(secs) + " s" +
                (first.empty() ? "" : "; " + first)};
}

Outcome effective_ranges() {
    const double a = EffectiveRange{11.0, 10.0}.meters();
    const double b = EffectiveRange{11.0, 15.0}.meters();
    return {a == 110.0 && b == 165.0, "L(10 s) = " + fmt(a, 6) + ", L(15 s) = " + fmt(b, 6)};
}

Outcome zero_weight_reduction() {
    int equal = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ScenarioSpec spec;
        spec.rows = 2;
        spec.cols = 2;
        spec.rate = 0.08 + 0.02 * static_cast<double>(seed);
        const Scenario s = build_scenario(spec, seed, 1800);
        ControllerConfig c;
        c.w1 = 0.0;
        auto adv = run_policy(s, ControllerKind::AdvancedMP, c);
        auto eff = run_policy(s, ControllerKind::EfficientMP, c);
        // The configuration hash names the controller, so it differs by construction.
        adv.metrics.config_hash.clear();
        eff.metrics.config_hash.clear();
        if (adv.decisions == eff.decisions && adv.metrics == eff.metrics && adv.final_digest == eff.final_digest)
            ++equal;
    }
    return {equal == 5, std::to_string(equal) + "/5 scenarios identical"};
}

Outcome ordering() {
    const auto t0 = Clock::now();
    ExperimentPlan plan;
    ScenarioSpec spec;
    spec.name = "grid3x3";
    spec.rows = 3;
    spec.cols = 3;
    spec.rate = 0.1;
    plan.scenarios = {spec};
    plan.w1 = {0.5, 1.0, 2.0, 4.0};
    plan.seeds = {1, 2, 3, 4, 5};
    plan.horizon = 3600;
    const auto rows = run_plan(plan);

    // method -> seed -> travel time; Advanced-MP uses the W1 with the best mean.
    std::map<std::string, std::map<std::uint64_t, double>> per_seed;
    std::map<double, double> adv_mean;
    for (const auto& r : rows) {
        if (r.status != "ok") return {false, "run failed: " + r.status};
        if (r.method == "advancedmp" && r.aggregate) adv_mean[*r.w1] = r.average_travel_time;
    }
    double best_w1 = plan.w1.front();
    for (auto [w, m] : adv_mean)
        if (m < adv_mean[best_w1]) best_w1 = w;
    for (const auto& r : rows) {
        if (r.aggregate) continue;
        if (r.method == "advancedmp" && *r.w1 != best_w1) continue;
        per_seed[r.method][*r.seed] = r.average_travel_time;
    }
    const std::vector<std::string> order{"advancedmp", "efficientmp", "maxpressure", "fixedtime"};
    std::map<std::string, double> mean;
    for (const auto& m : order) {
        for (auto [seed, v] : per_seed[m]) mean[m] += v / 5.0;
    }
    bool pass = true;
    std::string detail = "best W1 " + fmt(best_w1, 1) + "; means";
    for (const auto& m : order) detail += " " + m + "=" + fmt(mean[m]);
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        int wins = 0;
        for (auto seed : plan.seeds)
            if (per_seed[order[k]][seed] < per_seed[order[k + 1]][seed]) ++wins;
        pass = pass && mean[order[k]] < mean[order[k + 1]] && wins >= 4;
        detail += "; " + order[k] + "<" + order[k + 1] + " in " + std::to_string(wins) + "/5";
    }
    const double secs = seconds_since(t0);
    pass = pass && secs < 300.0;
    return {pass, detail + "; " + fmt(secs, 1) + " s"};
}

Outcome stability() {
    const auto t0 = Clock::now();
    ScenarioSpec spec;
    spec.rate = 0.6 * saturation_rate(spec.turns);
    bool pass = true;
    std::string detail = "rate " + fmt(spec.rate, 3) + " veh/s;";
    for (auto kind : {ControllerKind::MaxPressure, ControllerKind::EfficientMP, ControllerKind::AdvancedMP}) {
        int ok = 0;
        std::string slopes;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const Scenario s = build_scenario(spec, seed, 3600);
            const auto r = run_policy(s, kind, {});
            const auto& q = r.metrics.queue_series;
            const double slope = linear_trend(q, q.size() / 2);
            if (slope <= 0.0) ++ok;
            slopes += (slopes.empty() ? "" : ",") + fmt(slope * 3600.0, 1);
        }
        pass = pass && ok >= 4;
        detail += " " + std::string(to_string(kind)) + " " + std::to_string(ok) + "/5 (veh/h: " + slopes + ")";
    }
    const double secs = seconds_since(t0);
    return {pass && secs < 60.0, detail + "; " + fmt(secs, 1) + " s"};
}

Outcome gradient_check() {
    const auto t0 = Clock::now();
    Rng rng(11);
    double worst = 0.0, mismatch = 0.0;
    std::size_t compared = 0, kinks = 0;
    for (int k = 0; k < 20; ++k) {
        TrainConfig cfg;
        Mlp net(cfg.layer_sizes());
        net.init_random(rng);
        Mlp target(cfg.layer_sizes());
        target.init_random(rng);
        const auto batch = test::random_batch(rng, 1 + rng.below(32));
        const auto g = test::check_gradient(net, target, batch, cfg.gamma);
        worst = std::max(worst, g.max_rel_error);
        compared += g.compared;
        kinks += g.kinks;
        mismatch = std::max(mismatch, g.loss_mismatch);
    }
    const double secs = seconds_since(t0);
    std::ostringstream os;
    os << "max relative error " << worst << " over " << compared << " entries (" << kinks
       << " ReLU-kink stencils skipped), loss cross-check " << mismatch << ", " << fmt(secs) << " s";
    // Kinks must stay rare or the check would be vacuous.
    const bool enough = compared > 0 && kinks * 20 < compared;
    return {worst < 1e-4 && mismatch < 1e-9 && enough && secs < 30.0, os.str()};
}

ScenarioSpec rl_scenario() {
    ScenarioSpec spec;
    spec.name = "rl1x1";
    spec.rate = 0.2;
    return spec;
}

constexpr int kRlHorizon = 3600;

Outcome rl_sanity() {
    const auto t0 = Clock::now();
    int wins = 0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const Scenario s = build_scenario(rl_scenario(), seed, kRlHorizon);
        TrainConfig cfg;
        cfg.seed = seed;
        cfg.episodes = 50;
        const auto tr = run_xlight(s, cfg);
        const double rl = evaluate_policy(s, tr.net, cfg).metrics.average_travel_time;
        const double ft = run_policy(s, ControllerKind::FixedTime, {}).metrics.average_travel_time;
        const double gain = 1.0 - rl / ft;
        if (gain >= 0.10) ++wins;
        detail += "seed " + std::to_string(seed) + ": " + fmt(rl) + " vs " + fmt(ft) + " (" + fmt(100 * gain, 1) + "%); ";
    }
    const double secs = seconds_since(t0);
    return {wins >= 2 && secs < 600.0, detail + std::to_string(wins) + "/3 seeds, " + fmt(secs, 1) + " s"};
}

Outcome ablation_direction() {
    const auto t0 = Clock::now();
    double def = 0.0, far = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const Scenario s = build_scenario(rl_scenario(), seed, kRlHorizon);
        TrainConfig cfg;
        cfg.seed = seed;
        cfg.episodes = 50;
        cfg.obs_mode = ObservationMode::Default;
        def += run_xlight(s, cfg).eval_travel_time / 3.0;
        cfg.obs_mode = ObservationMode::Config3;
        far += run_xlight(s, cfg).eval_travel_time / 3.0;
    }
    return {def <= far, "default " + fmt(def) + " vs config3 " + fmt(far) + ", " + fmt(seconds_since(t0), 1) + " s"};
}

Outcome transfer_identity() {
    const Scenario s = build_scenario(rl_scenario(), 4, 600);
    TrainConfig cfg;
    cfg.seed = 4;
    cfg.episodes = 3;
    cfg.eval_last = 2;
    const auto tr = run_xlight(s, cfg);
    const auto r = transfer_eval(tr.net, s, cfg);
    return {r.ratio == 1.0, "ratio " + fmt(r.ratio, 17)};
}

int run(const std::string& cmd) {
    return std::system((cmd + " >/dev/null 2>&1").c_str());
}

Outcome cli_determinism() {
    const fs::path dir = fs::temp_directory_path() / "tsc_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string bin = TSCBENCH_PATH;
    const std::string plan = (dir / "plan.json").string();
    write_file(plan, R"({"scenarios": [{"name": "g", "grid": {"rows": 2, "cols": 2}, "rate": 0.1}],
                        "methods": ["fixedtime", "maxpressure", "efficientmp", "advancedmp"],
                        "w1": [0.5, 1], "seeds": [1, 2], "horizon": 900, "workers": 4})");
    std::vector<std::string> files;
    for (const std::string run_id : {"a", "b"}) {
        const std::string p = (dir / run_id).string();
        const std::vector<std::string> cmds{
            bin + " simulate --rows 2 --cols 2 --controller advancedmp --horizon 600 --seed 3 --out " + p +
                "_sim.json --trace " + p + "_trace.jsonl",
            bin + " sweep " + plan + " --out " + p + "_sweep.csv",
            bin + " train --episodes 2 --horizon 600 --seed 5 --model " + p + "_model.json --curve " + p +
                "_curve.csv --out " + p + "_train.json",
        };
        for (const auto& c : cmds) {
            if (run(c) != 0) return {false, "command failed: " + c};
        }
    }
    int same = 0, total = 0;
    for (const std::string name : {"_sim.json", "_trace.jsonl", "_sweep.csv", "_model.json", "_curve.csv", "_train.json"}) {
        ++total;
        const std::string a = read_file((dir / ("a" + name)).string());
        const std::string b = read_file((dir / ("b" + name)).string());
        if (!a.empty() && a == b) ++same;
    }
    fs::remove_all(dir);
    return {same == total, std::to_string(same) + "/" + std::to_string(total) + " output files byte-identical"};
}

std::optional<fs::path> find_file(const fs::path& root, const std::string& name) {
    std::error_code ec;
    for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator(); ++it) {
        if (it->is_regular_file() && it->path().filename() == name) return it->path();
    }
    return std::nullopt;
}

int signalized(const std::string& roadnet) {
    return static_cast<int>(load_cityflow_roadnet(roadnet).intersections.size());
}

Outcome ingestion() {
    // Generated fixtures of the same shapes always run.
    const int g12 = signalized(roadnet_to_cityflow(generate_grid(3, 4, 300, 300, 3, 11.11)));
    const int g16 = signalized(roadnet_to_cityflow(generate_grid(4, 4, 300, 300, 3, 11.11)));
    std::string detail = "generated 3x4 -> " + std::to_string(g12) + ", 4x4 -> " + std::to_string(g16);
    bool pass = g12 == 12 && g16 == 16;

    const char* env = std::getenv("TSC_DATA_DIR");
    if (env == nullptr || !fs::is_directory(env)) {
        detail += "; public datasets not found (set TSC_DATA_DIR), skipped";
        return {pass, detail, true};
    }
    bool skipped = false;
    for (auto [file, want] : {std::pair{std::string("roadnet_3_4.json"), 12}, {std::string("roadnet_4_4.json"), 16}}) {
        const auto path = find_file(env, file);
        if (!path) {
            detail += "; " + file + " not found, skipped";
            skipped = true;
            continue;
        }
        try {
            const int n = signalized(read_file(path->string()));
            detail += "; " + path->string() + " -> " + std::to_string(n);
            pass = pass && n == want;
        } catch (const std::exception& e) {
            detail += "; " + path->string() + ": " + e.what();
            pass = false;
        }
    }
    return {pass, detail, skipped};
}

}  // namespace

int main(int argc, char** argv) {
    // --expect-fail N marks a criterion whose failure is analysed and accepted;
    // it still prints FAIL, but does not change the exit status.
    std::vector<std::size_t> expected;
    for (int a = 1; a + 1 < argc; ++a) {
        if (std::string(argv[a]) == "--expect-fail") expected.push_back(std::stoul(argv[++a]));
    }
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"observer matches brute-force recount", oracle_equivalence},
        {"effective range values", effective_ranges},
        {"W1 = 0 reduces to efficient MP", zero_weight_reduction},
        {"controller ordering on 3x3 grid", ordering},
        {"queue stability at 60% saturation", stability},
        {"gradient check", gradient_check},
        {"RL beats fixed time", rl_sanity},
        {"default range not worse than unlimited", ablation_direction},
        {"transfer identity", transfer_identity},
        {"CLI determinism", cli_determinism},
        {"CityFlow ingestion counts", ingestion},
    };
    int failed = 0, unexpected = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const bool known = std::find(expected.begin(), expected.end(), k + 1) != expected.end();
        if (!o.pass) {
            ++failed;
            if (!known) ++unexpected;
        }
        std::string tag;
        if (o.skipped) tag = " (partial skip)";
        if (known) tag += o.pass ? " (expected to fail)" : " (known failure)";
        std::cout << (o.pass ? "PASS" : "FAIL") << tag << "  [" << k + 1 << "] " << criteria[k].first << ": "
                  << o.detail << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed";
    if (failed != unexpected) std::cout << ", " << failed - unexpected << " known failure(s)";
    std::cout << std::endl;
    return unexpected == 0 ? 0 : 1;
}
