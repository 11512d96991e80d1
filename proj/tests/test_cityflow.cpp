#include <doctest.h>

#include <json.hpp>

#include "support.h"
#include "tsc/cityflow.h"

using namespace tsc;
using nlohmann::json;

TEST_CASE("cityflow writer output reloads to the same network") {
    for (auto [rows, cols] : {std::pair{1, 1}, std::pair{3, 4}, std::pair{4, 4}}) {
        const auto net = generate_grid(rows, cols, 400, 800, 3, 11.11);
        const auto back = load_cityflow_roadnet(roadnet_to_cityflow(net));
        CHECK(back.intersections.size() == static_cast<std::size_t>(rows * cols));
        CHECK(back == net);
        // serialize(load(x)) parses back to a structurally equal network
        CHECK(network_from_json(network_to_json(back)) == back);
    }
}

TEST_CASE("cityflow flow: empty array loads as zero vehicles") {
    const auto flow = load_cityflow_flow("[]");
    CHECK(flow.arrivals.empty());
    const auto net = generate_grid(1, 1, 300, 300, 3, 11.11);
    auto [n2, f2] = load_cityflow(roadnet_to_cityflow(net), "[]");
    CHECK(f2.arrivals.empty());
    CHECK(n2 == net);
}

TEST_CASE("cityflow flow: interval expansion and ordering") {
    const auto flow = load_cityflow_flow(R"([
        {"vehicle": {}, "route": ["a", "b"], "interval": 2.5, "startTime": 10, "endTime": 20},
        {"vehicle": {}, "route": ["c"], "interval": 1.0, "startTime": 3, "endTime": 3}
    ])");
    REQUIRE(flow.arrivals.size() == 6);
    CHECK(flow.arrivals[0].time == 3.0);
    CHECK(flow.arrivals[0].route == std::vector<std::string>{"c"});
    CHECK(flow.arrivals[1].time == 10.0);
    CHECK(flow.arrivals[5].time == 20.0);
}

TEST_CASE("cityflow flow written by the generator reloads identically") {
    const auto net = generate_grid(2, 2, 300, 300, 3, 11.11);
    const auto flow = generate_poisson_flow(net, 0.05, 600, 4);
    CHECK(load_cityflow_flow(flow_to_json(flow)) == flow);
}

TEST_CASE("cityflow: malformed JSON is a parse error with a location") {
    try {
        load_cityflow_roadnet("{\"intersections\": [");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK_FALSE(e.path().empty());
    }
    try {
        load_cityflow_roadnet(R"({"intersections": [], "roads": [{"id": "r"}]})");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.path().find("/roads/0") != std::string::npos);
    }
}

TEST_CASE("cityflow: disconnected route is a validation error naming the route") {
    const auto net = generate_grid(1, 1, 300, 300, 3, 11.11);
    const std::string flow = R"([
        {"route": ["road_0_1_0", "road_1_1_0"], "startTime": 0},
        {"route": ["road_0_1_0", "road_1_1_0"], "startTime": 1},
        {"route": ["road_1_0_1", "road_0_1_0"], "startTime": 2}
    ])";
    try {
        load_cityflow(roadnet_to_cityflow(net), flow);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("route 2") != std::string::npos);
    }
}

TEST_CASE("cityflow: non-four-way signalized node is unsupported") {
    const auto net = generate_grid(1, 2, 300, 300, 3, 11.11);
    auto doc = json::parse(roadnet_to_cityflow(net));
    // Drop the road that enters intersection_1_1 from the west, leaving a three-way node.
    auto& roads = doc["roads"];
    for (std::size_t k = 0; k < roads.size(); ++k) {
        if (roads[k]["id"] == "road_0_1_0") {
            roads.erase(k);
            break;
        }
    }
    for (auto& inter : doc["intersections"]) {
        auto& links = inter["roadLinks"];
        json kept = json::array();
        for (auto& l : links) {
            if (l["startRoad"] != "road_0_1_0") kept.push_back(l);
        }
        links = kept;
        auto& rs = inter["roads"];
        json keep_ids = json::array();
        for (auto& r : rs) {
            if (r != "road_0_1_0") keep_ids.push_back(r);
        }
        rs = keep_ids;
    }
    CHECK_THROWS_AS(load_cityflow_roadnet(doc.dump()), UnsupportedFeature);
}

TEST_CASE("cityflow: curved geometry and per-lane speeds are ignored with a warning") {
    const auto net = generate_grid(1, 1, 300, 300, 3, 11.11);
    auto doc = json::parse(roadnet_to_cityflow(net));
    auto& road = doc["roads"][0];
    const auto p0 = road["points"][0];
    const auto p1 = road["points"][1];
    json mid = {{"x", (p0["x"].get<double>() + p1["x"].get<double>()) / 2},
                {"y", (p0["y"].get<double>() + p1["y"].get<double>()) / 2}};
    road["points"] = json::array({p0, mid, p1});
    road["lanes"][1]["maxSpeed"] = 8.0;
    const auto loaded = load_cityflow_roadnet(doc.dump());
    CHECK(loaded.warnings.size() == 2);
    const auto& r = loaded.roads[loaded.road_index(road["id"].get<std::string>())];
    CHECK(r.length == doctest::Approx(300.0));
    CHECK(r.max_speed == 11.11);
}

TEST_CASE("cityflow: phases are remapped and recorded in provenance") {
    const auto net = generate_grid(1, 1, 300, 300, 3, 11.11);
    const auto loaded = load_cityflow_roadnet(roadnet_to_cityflow(net));
    CHECK_FALSE(loaded.provenance.empty());
    CHECK(loaded.provenance.find("phase") != std::string::npos);
}
