#include "tsc/cityflow.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tsc {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json parse_document(std::string_view text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(what) + "@byte" + std::to_string(e.byte), e.what());
    }
}

const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw ParseError(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(path + "/" + key, "missing field");
    return *it;
}

template <class T>
T get_as(const json& value, const std::string& path) {
    try {
        return value.get<T>();
    } catch (const json::exception& e) {
        throw ParseError(path, e.what());
    }
}

template <class T>
T field_as(const json& obj, const char* key, const std::string& path) {
    return get_as<T>(field(obj, key, path), path + "/" + key);
}

const json& array_field(const json& obj, const char* key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_array()) throw ParseError(path + "/" + key, "expected an array");
    return v;
}

std::pair<double, double> point_of(const json& p, const std::string& path) {
    return {field_as<double>(p, "x", path), field_as<double>(p, "y", path)};
}

}  // namespace

TrafficNetwork load_cityflow_roadnet(std::string_view roadnet_json) {
    const json doc = parse_document(roadnet_json, "roadnet");
    const json& inters = array_field(doc, "intersections", "");
    const json& roads = array_field(doc, "roads", "");

    NetworkDraft draft;
    std::set<std::string> warned;
    auto warn_once = [&](const std::string& msg) {
        if (warned.insert(msg).second) draft.warnings.push_back(msg);
    };

    std::map<std::string, std::pair<double, double>> node_pos;
    for (std::size_t k = 0; k < inters.size(); ++k) {
        const std::string p = "/intersections/" + std::to_string(k);
        NetworkDraft::Node node;
        node.id = field_as<std::string>(inters[k], "id", p);
        std::tie(node.x, node.y) = point_of(field(inters[k], "point", p), p + "/point");
        node.signalized = !inters[k].value("virtual", false);
        node_pos[node.id] = {node.x, node.y};
        draft.nodes.push_back(std::move(node));
    }

    // Lane turn permissions come from the lane links of the downstream node.
    std::map<std::string, std::vector<TurnMask>> lane_turns;
    std::map<std::string, std::size_t> lane_counts;
    for (std::size_t k = 0; k < roads.size(); ++k) {
        const std::string p = "/roads/" + std::to_string(k);
        lane_counts[field_as<std::string>(roads[k], "id", p)] = array_field(roads[k], "lanes", p).size();
    }
    struct Link {
        std::string start, end;
        Turn turn;
    };
    std::map<std::string, std::vector<Link>> node_links;
    std::map<std::string, std::vector<std::vector<int>>> node_phase_links;
    for (std::size_t k = 0; k < inters.size(); ++k) {
        const std::string p = "/intersections/" + std::to_string(k);
        const std::string id = draft.nodes[k].id;
        if (!inters[k].contains("roadLinks")) continue;
        const json& links = array_field(inters[k], "roadLinks", p);
        for (std::size_t j = 0; j < links.size(); ++j) {
            const std::string lp = p + "/roadLinks/" + std::to_string(j);
            const auto type = field_as<std::string>(links[j], "type", lp);
            const auto turn = turn_from_string(type);
            if (!turn) throw UnsupportedFeature(lp + ": unsupported roadLink type '" + type + "'");
            Link link{field_as<std::string>(links[j], "startRoad", lp), field_as<std::string>(links[j], "endRoad", lp),
                      *turn};
            auto& masks = lane_turns[link.start];
            masks.resize(lane_counts.count(link.start) ? lane_counts[link.start] : 0, 0);
            if (links[j].contains("laneLinks")) {
                const json& lls = array_field(links[j], "laneLinks", lp);
                for (std::size_t q = 0; q < lls.size(); ++q) {
                    const std::string qp = lp + "/laneLinks/" + std::to_string(q);
                    const auto idx = field_as<std::size_t>(lls[q], "startLaneIndex", qp);
                    if (idx >= masks.size()) throw ValidationError(qp + ": startLaneIndex out of range");
                    masks[idx] |= turn_bit(*turn);
                    if (lls[q].contains("points") && lls[q]["points"].size() > 2)
                        warn_once("curved lane-link geometry ignored");
                }
            }
            node_links[id].push_back(std::move(link));
        }
        if (inters[k].contains("trafficLight")) {
            const json& tl = inters[k]["trafficLight"];
            if (tl.contains("lightphases")) {
                const json& phases = array_field(tl, "lightphases", p + "/trafficLight");
                for (std::size_t j = 0; j < phases.size(); ++j) {
                    const std::string pp = p + "/trafficLight/lightphases/" + std::to_string(j);
                    node_phase_links[id].push_back(
                        get_as<std::vector<int>>(field(phases[j], "availableRoadLinks", pp), pp + "/availableRoadLinks"));
                }
            }
        }
    }

    for (std::size_t k = 0; k < roads.size(); ++k) {
        const std::string p = "/roads/" + std::to_string(k);
        NetworkDraft::DraftRoad road;
        road.id = field_as<std::string>(roads[k], "id", p);
        road.from = field_as<std::string>(roads[k], "startIntersection", p);
        road.to = field_as<std::string>(roads[k], "endIntersection", p);
        double length = 0.0;
        if (roads[k].contains("points")) {
            const json& pts = array_field(roads[k], "points", p);
            if (pts.size() > 2) warn_once("curved road geometry ignored (polyline length kept)");
            for (std::size_t j = 1; j < pts.size(); ++j) {
                const auto [x0, y0] = point_of(pts[j - 1], p + "/points/" + std::to_string(j - 1));
                const auto [x1, y1] = point_of(pts[j], p + "/points/" + std::to_string(j));
                length += std::hypot(x1 - x0, y1 - y0);
            }
        }
        if (length <= 0.0 && node_pos.count(road.from) && node_pos.count(road.to)) {
            const auto [x0, y0] = node_pos[road.from];
            const auto [x1, y1] = node_pos[road.to];
            length = std::hypot(x1 - x0, y1 - y0);
        }
        road.length = length;
        const json& lanes = array_field(roads[k], "lanes", p);
        double speed = 0.0;
        for (std::size_t j = 0; j < lanes.size(); ++j) {
            const double v = field_as<double>(lanes[j], "maxSpeed", p + "/lanes/" + std::to_string(j));
            if (j > 0 && v != speed) warn_once("per-lane speed overrides ignored (road speed = fastest lane)");
            speed = std::max(speed, v);
        }
        road.max_speed = speed;
        auto masks = lane_turns.count(road.id) ? lane_turns[road.id] : std::vector<TurnMask>{};
        masks.resize(lanes.size(), 0);
        const bool to_sink = std::any_of(draft.nodes.begin(), draft.nodes.end(),
                                         [&](const auto& n) { return n.id == road.to && !n.signalized; });
        for (std::size_t j = 0; j < masks.size(); ++j) {
            if (masks[j] == 0) {
                if (!to_sink)
                    throw ValidationError(p + ": lane " + std::to_string(j) + " of road '" + road.id +
                                          "' has no lane link at its downstream intersection");
                masks[j] = kAllTurns;
            }
        }
        road.lane_turns = std::move(masks);
        draft.roads.push_back(std::move(road));
    }

    TrafficNetwork net;
    {
        // Provenance is finalized below, once the remapping is known.
        draft.provenance = "cityflow";
        net = assemble_network(draft);
    }

    // Cross-check road links against the geometric movement derivation.
    for (const auto& inter : net.intersections) {
        for (const auto& link : node_links[inter.id]) {
            const int in = net.road_index(link.start);
            const int out = net.road_index(link.end);
            if (in < 0 || out < 0)
                throw ValidationError("intersection '" + inter.id + "': roadLink references unknown road");
            const int m = inter.find_movement(in, out);
            if (m < 0 || inter.movements[m].turn != link.turn)
                throw UnsupportedFeature("intersection '" + inter.id + "': roadLink " + link.start + " -> " + link.end +
                                         " (" + std::string(to_string(link.turn)) +
                                         ") does not match the four-way geometry");
        }
    }

    std::ostringstream prov;
    prov << "cityflow roadnet: " << net.intersections.size() << " signalized, " << net.boundary_nodes.size()
         << " boundary nodes; source light phases remapped onto [NS-straight, EW-straight, NS-left, EW-left]";
    std::size_t unmatched = 0, total = 0;
    for (const auto& inter : net.intersections) {
        const auto& links = node_links[inter.id];
        std::vector<std::set<int>> ours;
        for (const auto& ph : inter.phases) ours.emplace_back(ph.movements.begin(), ph.movements.end());
        for (const auto& avail : node_phase_links[inter.id]) {
            ++total;
            std::set<int> signalized;
            for (int idx : avail) {
                if (idx < 0 || static_cast<std::size_t>(idx) >= links.size()) continue;
                const int m = inter.find_movement(net.road_index(links[idx].start), net.road_index(links[idx].end));
                if (m >= 0 && inter.movements[m].signalized()) signalized.insert(m);
            }
            if (std::find(ours.begin(), ours.end(), signalized) == ours.end()) ++unmatched;
        }
    }
    prov << "; " << total << " source phases, " << (total - unmatched) << " matched a fixed phase, " << unmatched
         << " had no equivalent (all-red or single-approach phases)";
    net.provenance = prov.str();
    return net;
}

FlowSpec load_cityflow_flow(std::string_view flow_json) {
    const json doc = parse_document(flow_json, "flow");
    if (!doc.is_array()) throw ParseError("", "flow document must be an array");
    FlowSpec flow;
    for (std::size_t k = 0; k < doc.size(); ++k) {
        const std::string p = "/" + std::to_string(k);
        const auto route = get_as<std::vector<std::string>>(field(doc[k], "route", p), p + "/route");
        const double start = doc[k].contains("startTime") ? field_as<double>(doc[k], "startTime", p) : 0.0;
        const double end = doc[k].contains("endTime") ? field_as<double>(doc[k], "endTime", p) : start;
        const double interval = doc[k].contains("interval") ? field_as<double>(doc[k], "interval", p) : 1.0;
        if (start < 0.0) throw ValidationError(p + ": negative startTime");
        if (end <= start || interval <= 0.0) {
            flow.arrivals.push_back({start, route});
            continue;
        }
        for (long n = 0; start + static_cast<double>(n) * interval <= end; ++n)
            flow.arrivals.push_back({start + static_cast<double>(n) * interval, route});
    }
    std::stable_sort(flow.arrivals.begin(), flow.arrivals.end(),
                     [](const Arrival& a, const Arrival& b) { return a.time < b.time; });
    return flow;
}

std::pair<TrafficNetwork, FlowSpec> load_cityflow(std::string_view roadnet_json, std::string_view flow_json) {
    TrafficNetwork net = load_cityflow_roadnet(roadnet_json);
    FlowSpec flow = load_cityflow_flow(flow_json);
    resolve_flow(net, flow);
    return {std::move(net), std::move(flow)};
}

std::string roadnet_to_cityflow(const TrafficNetwork& net) {
    ordered_json doc;
    ordered_json inters = ordered_json::array();
    auto emit_node = [&](const std::string& id, double x, double y, bool is_virtual) {
        ordered_json node;
        node["id"] = id;
        node["point"] = {{"x", x}, {"y", y}};
        node["width"] = is_virtual ? 0.0 : 10.0;
        ordered_json roads = ordered_json::array();
        for (const auto& r : net.roads) {
            if (r.from_node == id || r.to_node == id) roads.push_back(r.id);
        }
        node["roads"] = std::move(roads);
        return node;
    };
    for (const auto& inter : net.intersections) {
        ordered_json node = emit_node(inter.id, inter.x, inter.y, false);
        ordered_json links = ordered_json::array();
        for (const auto& mv : inter.movements) {
            ordered_json lane_links = ordered_json::array();
            for (int in : mv.in_lanes) {
                for (int out : mv.out_lanes) {
                    lane_links.push_back({{"startLaneIndex", net.lanes[in].index},
                                          {"endLaneIndex", net.lanes[out].index},
                                          {"points", ordered_json::array()}});
                }
            }
            const char* type = mv.turn == Turn::Left ? "turn_left" : mv.turn == Turn::Right ? "turn_right" : "go_straight";
            links.push_back({{"type", type},
                             {"startRoad", net.roads[mv.in_road].id},
                             {"endRoad", net.roads[mv.out_road].id},
                             {"direction", static_cast<int>(net.roads[mv.in_road].heading)},
                             {"laneLinks", std::move(lane_links)}});
        }
        node["roadLinks"] = std::move(links);
        ordered_json indices = ordered_json::array();
        for (std::size_t k = 0; k < inter.movements.size(); ++k) indices.push_back(k);
        std::vector<int> rights;
        for (std::size_t k = 0; k < inter.movements.size(); ++k) {
            if (!inter.movements[k].signalized()) rights.push_back(static_cast<int>(k));
        }
        ordered_json phases = ordered_json::array();
        phases.push_back({{"time", 5}, {"availableRoadLinks", rights}});
        for (const auto& ph : inter.phases) {
            std::vector<int> avail = rights;
            avail.insert(avail.end(), ph.movements.begin(), ph.movements.end());
            std::sort(avail.begin(), avail.end());
            phases.push_back({{"time", 30}, {"availableRoadLinks", avail}});
        }
        node["trafficLight"] = {{"roadLinkIndices", indices}, {"lightphases", phases}};
        node["virtual"] = false;
        inters.push_back(std::move(node));
    }
    for (const auto& b : net.boundary_nodes) {
        ordered_json node = emit_node(b.id, b.x, b.y, true);
        node["roadLinks"] = ordered_json::array();
        node["trafficLight"] = {{"roadLinkIndices", ordered_json::array()}, {"lightphases", ordered_json::array()}};
        node["virtual"] = true;
        inters.push_back(std::move(node));
    }
    doc["intersections"] = std::move(inters);

    auto pos_of = [&](const std::string& id) -> std::pair<double, double> {
        for (const auto& i : net.intersections)
            if (i.id == id) return {i.x, i.y};
        for (const auto& b : net.boundary_nodes)
            if (b.id == id) return {b.x, b.y};
        return {0.0, 0.0};
    };
    ordered_json roads = ordered_json::array();
    for (const auto& r : net.roads) {
        const auto [x0, y0] = pos_of(r.from_node);
        const auto [x1, y1] = pos_of(r.to_node);
        // Node spacing may differ from road length; scale the polyline so its
        // length equals the road length along the same direction.
        const double span = std::hypot(x1 - x0, y1 - y0);
        const double scale = span > 0.0 ? r.length / span : 0.0;
        ordered_json lanes = ordered_json::array();
        for (std::size_t k = 0; k < r.lanes.size(); ++k) lanes.push_back({{"width", 3.0}, {"maxSpeed", r.max_speed}});
        roads.push_back({{"id", r.id},
                         {"points", {{{"x", x0}, {"y", y0}}, {{"x", x0 + (x1 - x0) * scale}, {"y", y0 + (y1 - y0) * scale}}}},
                         {"lanes", std::move(lanes)},
                         {"startIntersection", r.from_node},
                         {"endIntersection", r.to_node}});
    }
    doc["roads"] = std::move(roads);
    return doc.dump(1);
}

}  // namespace tsc
