#include "tsc/network.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

namespace tsc {

using nlohmann::json;
using nlohmann::ordered_json;

Heading turned(Heading h, Turn t) {
    const int base = static_cast<int>(h);
    switch (t) {
        case Turn::Left: return static_cast<Heading>((base + 1) % 4);
        case Turn::Right: return static_cast<Heading>((base + 3) % 4);
        case Turn::Straight: break;
    }
    return h;
}

std::string_view to_string(Turn t) {
    switch (t) {
        case Turn::Left: return "left";
        case Turn::Straight: return "straight";
        case Turn::Right: return "right";
    }
    return "?";
}

std::string_view to_string(Heading h) {
    switch (h) {
        case Heading::East: return "east";
        case Heading::North: return "north";
        case Heading::West: return "west";
        case Heading::South: return "south";
    }
    return "?";
}

std::optional<Turn> turn_from_string(std::string_view s) {
    if (s == "left" || s == "turn_left") return Turn::Left;
    if (s == "straight" || s == "go_straight") return Turn::Straight;
    if (s == "right" || s == "turn_right") return Turn::Right;
    return std::nullopt;
}

Approach approach_of(Heading travel) {
    switch (travel) {
        case Heading::South: return Approach::FromNorth;
        case Heading::West: return Approach::FromEast;
        case Heading::North: return Approach::FromSouth;
        case Heading::East: return Approach::FromWest;
    }
    return Approach::FromNorth;
}

int Intersection::find_movement(int in_road, int out_road) const {
    for (std::size_t k = 0; k < movements.size(); ++k) {
        if (movements[k].in_road == in_road && movements[k].out_road == out_road) return static_cast<int>(k);
    }
    return -1;
}

int TrafficNetwork::road_index(std::string_view id) const {
    auto it = road_ids_.find(std::string(id));
    return it == road_ids_.end() ? -1 : it->second;
}

double TrafficNetwork::max_speed() const {
    double v = 0.0;
    for (const auto& r : roads) v = std::max(v, r.max_speed);
    return v;
}

std::vector<int> TrafficNetwork::entry_roads() const {
    std::vector<int> out;
    for (std::size_t r = 0; r < roads.size(); ++r) {
        if (roads[r].starts_at_boundary()) out.push_back(static_cast<int>(r));
    }
    return out;
}

const Movement* TrafficNetwork::movement_between(int in_road, int out_road) const {
    const int node = roads[in_road].to_intersection;
    if (node < 0) return nullptr;
    const auto& inter = intersections[node];
    const int k = inter.find_movement(in_road, out_road);
    return k < 0 ? nullptr : &inter.movements[k];
}

void TrafficNetwork::reindex() {
    road_ids_.clear();
    for (std::size_t r = 0; r < roads.size(); ++r) road_ids_.emplace(roads[r].id, static_cast<int>(r));
}

TurnMask default_lane_turns(int index, int count) {
    if (count <= 1) return kAllTurns;
    if (count == 2) {
        return index == 0 ? (turn_bit(Turn::Left) | turn_bit(Turn::Straight))
                          : (turn_bit(Turn::Straight) | turn_bit(Turn::Right));
    }
    if (index == 0) return turn_bit(Turn::Left);
    if (index == count - 1) return turn_bit(Turn::Right);
    return turn_bit(Turn::Straight);
}

namespace {

Heading heading_from_delta(double dx, double dy) {
    if (std::abs(dx) >= std::abs(dy)) return dx >= 0.0 ? Heading::East : Heading::West;
    return dy >= 0.0 ? Heading::North : Heading::South;
}

}  // namespace

TrafficNetwork assemble_network(const NetworkDraft& draft) {
    TrafficNetwork net;
    net.provenance = draft.provenance;
    net.warnings = draft.warnings;

    struct NodeRef {
        bool signalized;
        int index;
        double x, y;
    };
    std::unordered_map<std::string, NodeRef> nodes;
    for (const auto& n : draft.nodes) {
        if (nodes.count(n.id)) throw ValidationError("duplicate node id '" + n.id + "'");
        if (n.signalized) {
            Intersection inter;
            inter.id = n.id;
            inter.x = n.x;
            inter.y = n.y;
            nodes.emplace(n.id, NodeRef{true, static_cast<int>(net.intersections.size()), n.x, n.y});
            net.intersections.push_back(std::move(inter));
        } else {
            nodes.emplace(n.id, NodeRef{false, static_cast<int>(net.boundary_nodes.size()), n.x, n.y});
            net.boundary_nodes.push_back({n.id, n.x, n.y});
        }
    }
    if (draft.nodes.empty()) throw ValidationError("network has no nodes");

    net.bbox.min_x = net.bbox.min_y = std::numeric_limits<double>::infinity();
    net.bbox.max_x = net.bbox.max_y = -std::numeric_limits<double>::infinity();
    for (const auto& n : draft.nodes) {
        net.bbox.min_x = std::min(net.bbox.min_x, n.x);
        net.bbox.min_y = std::min(net.bbox.min_y, n.y);
        net.bbox.max_x = std::max(net.bbox.max_x, n.x);
        net.bbox.max_y = std::max(net.bbox.max_y, n.y);
    }

    for (const auto& dr : draft.roads) {
        const auto from = nodes.find(dr.from);
        const auto to = nodes.find(dr.to);
        if (from == nodes.end()) throw ValidationError("road '" + dr.id + "': unknown start node '" + dr.from + "'");
        if (to == nodes.end()) throw ValidationError("road '" + dr.id + "': unknown end node '" + dr.to + "'");
        if (dr.from == dr.to) throw ValidationError("road '" + dr.id + "' is a self-loop");
        if (!(dr.length > 0.0)) throw ValidationError("road '" + dr.id + "': length must be positive");
        if (!(dr.max_speed > 0.0)) throw ValidationError("road '" + dr.id + "': max_speed must be positive");
        if (dr.lane_turns.empty()) throw ValidationError("road '" + dr.id + "' has no lanes");
        if (!from->second.signalized && !to->second.signalized)
            throw ValidationError("road '" + dr.id + "' connects two boundary nodes");

        Road road;
        road.id = dr.id;
        road.from_node = dr.from;
        road.to_node = dr.to;
        road.from_intersection = from->second.signalized ? from->second.index : -1;
        road.to_intersection = to->second.signalized ? to->second.index : -1;
        road.length = dr.length;
        road.max_speed = dr.max_speed;
        road.heading = heading_from_delta(to->second.x - from->second.x, to->second.y - from->second.y);
        const int road_idx = static_cast<int>(net.roads.size());
        for (std::size_t k = 0; k < dr.lane_turns.size(); ++k) {
            if (dr.lane_turns[k] == 0 || (dr.lane_turns[k] & ~kAllTurns) != 0)
                throw ValidationError("road '" + dr.id + "' lane " + std::to_string(k) + ": empty turn permission set");
            road.lanes.push_back(static_cast<int>(net.lanes.size()));
            net.lanes.push_back({dr.id + "_" + std::to_string(k), road_idx, static_cast<int>(k), dr.lane_turns[k]});
        }
        net.roads.push_back(std::move(road));
    }
    net.reindex();
    for (const auto& r : net.roads) {
        if (net.road_index(r.id) != &r - net.roads.data()) throw ValidationError("duplicate road id '" + r.id + "'");
    }

    for (std::size_t r = 0; r < net.roads.size(); ++r) {
        const auto& road = net.roads[r];
        if (road.to_intersection >= 0) {
            auto& inter = net.intersections[road.to_intersection];
            auto& slot = inter.in_roads[static_cast<int>(approach_of(road.heading))];
            if (slot >= 0)
                throw UnsupportedFeature("intersection '" + inter.id + "': two incoming roads on the same approach ('" +
                                         net.roads[slot].id + "', '" + road.id + "'); only four-way nodes are supported");
            slot = static_cast<int>(r);
        }
        if (road.from_intersection >= 0) {
            auto& inter = net.intersections[road.from_intersection];
            auto& slot = inter.out_roads[static_cast<int>(road.heading)];
            if (slot >= 0)
                throw UnsupportedFeature("intersection '" + inter.id + "': two outgoing roads with the same heading ('" +
                                         net.roads[slot].id + "', '" + road.id + "'); only four-way nodes are supported");
            slot = static_cast<int>(r);
        }
    }

    for (auto& inter : net.intersections) {
        for (int a = 0; a < 4; ++a) {
            if (inter.in_roads[a] < 0 || inter.out_roads[a] < 0)
                throw UnsupportedFeature("intersection '" + inter.id +
                                         "' is not four-way; only four-way signalized intersections are supported");
        }
        for (int a = 0; a < 4; ++a) {
            for (int r : net.roads[inter.in_roads[a]].lanes) inter.in_lanes.push_back(r);
        }
        for (int h = 0; h < 4; ++h) {
            for (int r : net.roads[inter.out_roads[h]].lanes) inter.out_lanes.push_back(r);
        }
        inter.movements.resize(kMovementCount);
        for (int a = 0; a < 4; ++a) {
            const int in_road = inter.in_roads[a];
            const Road& in = net.roads[in_road];
            for (Turn t : {Turn::Left, Turn::Straight, Turn::Right}) {
                Movement mv;
                mv.in_road = in_road;
                mv.out_road = inter.out_roads[static_cast<int>(turned(in.heading, t))];
                mv.turn = t;
                for (int lane : in.lanes) {
                    if (net.lanes[lane].permits(t)) mv.in_lanes.push_back(lane);
                }
                if (mv.in_lanes.empty())
                    throw ValidationError("intersection '" + inter.id + "': road '" + in.id + "' has no lane permitting " +
                                          std::string(to_string(t)));
                mv.out_lanes = net.roads[mv.out_road].lanes;
                inter.movements[movement_slot(static_cast<Approach>(a), t)] = std::move(mv);
            }
        }
        using A = Approach;
        inter.phases = {
            Phase{0, {movement_slot(A::FromNorth, Turn::Straight), movement_slot(A::FromSouth, Turn::Straight)}},
            Phase{1, {movement_slot(A::FromEast, Turn::Straight), movement_slot(A::FromWest, Turn::Straight)}},
            Phase{2, {movement_slot(A::FromNorth, Turn::Left), movement_slot(A::FromSouth, Turn::Left)}},
            Phase{3, {movement_slot(A::FromEast, Turn::Left), movement_slot(A::FromWest, Turn::Left)}},
        };
    }
    return net;
}

TrafficNetwork generate_grid(int rows, int cols, double ew_length, double ns_length, int lanes_per_road,
                             double max_speed) {
    if (rows < 1 || cols < 1) throw ArgumentError("grid dimensions must be at least 1x1");
    if (!(ew_length > 0.0) || !(ns_length > 0.0)) throw ArgumentError("grid road lengths must be positive");
    if (lanes_per_road < 1) throw ArgumentError("lanes_per_road must be at least 1");
    if (!(max_speed > 0.0)) throw ArgumentError("max_speed must be positive");

    NetworkDraft draft;
    draft.provenance = "generate_grid(rows=" + std::to_string(rows) + ", cols=" + std::to_string(cols) + ")";
    auto node_id = [](int gx, int gy) { return "intersection_" + std::to_string(gx) + "_" + std::to_string(gy); };
    auto interior = [&](int gx, int gy) { return gx >= 1 && gx <= cols && gy >= 1 && gy <= rows; };
    auto exists = [&](int gx, int gy) {
        if (gx < 0 || gy < 0 || gx > cols + 1 || gy > rows + 1) return false;
        const bool edge_x = gx == 0 || gx == cols + 1;
        const bool edge_y = gy == 0 || gy == rows + 1;
        return !(edge_x && edge_y);
    };
    for (int gy = 0; gy <= rows + 1; ++gy) {
        for (int gx = 0; gx <= cols + 1; ++gx) {
            if (!exists(gx, gy)) continue;
            draft.nodes.push_back({node_id(gx, gy), gx * ew_length, gy * ns_length, interior(gx, gy)});
        }
    }
    static constexpr int kDx[4] = {1, 0, -1, 0};
    static constexpr int kDy[4] = {0, 1, 0, -1};
    std::vector<TurnMask> lanes;
    for (int k = 0; k < lanes_per_road; ++k) lanes.push_back(default_lane_turns(k, lanes_per_road));
    for (int gy = 0; gy <= rows + 1; ++gy) {
        for (int gx = 0; gx <= cols + 1; ++gx) {
            if (!exists(gx, gy)) continue;
            for (int d = 0; d < 4; ++d) {
                const int nx = gx + kDx[d];
                const int ny = gy + kDy[d];
                if (!exists(nx, ny) || !(interior(gx, gy) || interior(nx, ny))) continue;
                NetworkDraft::DraftRoad road;
                road.id = "road_" + std::to_string(gx) + "_" + std::to_string(gy) + "_" + std::to_string(d);
                road.from = node_id(gx, gy);
                road.to = node_id(nx, ny);
                road.length = (d % 2 == 0) ? ew_length : ns_length;
                road.max_speed = max_speed;
                // Lanes into a sink never turn; any lane may be used to leave.
                road.lane_turns = interior(nx, ny) ? lanes : std::vector<TurnMask>(lanes.size(), kAllTurns);
                draft.roads.push_back(std::move(road));
            }
        }
    }
    return assemble_network(draft);
}

namespace {

ordered_json turns_to_json(TurnMask m) {
    ordered_json arr = ordered_json::array();
    for (Turn t : {Turn::Left, Turn::Straight, Turn::Right}) {
        if (m & turn_bit(t)) arr.push_back(std::string(to_string(t)));
    }
    return arr;
}

template <class T>
T require(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) throw ParseError(path + "/" + key, "missing field");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(path + "/" + key, e.what());
    }
}

}  // namespace

std::string network_to_json(const TrafficNetwork& net) {
    ordered_json doc;
    doc["format"] = "tsc-network/1";
    doc["provenance"] = net.provenance;
    ordered_json nodes = ordered_json::array();
    for (const auto& i : net.intersections) nodes.push_back({{"id", i.id}, {"x", i.x}, {"y", i.y}, {"signalized", true}});
    for (const auto& b : net.boundary_nodes) nodes.push_back({{"id", b.id}, {"x", b.x}, {"y", b.y}, {"signalized", false}});
    doc["nodes"] = std::move(nodes);
    ordered_json roads = ordered_json::array();
    for (const auto& r : net.roads) {
        ordered_json lanes = ordered_json::array();
        for (int l : r.lanes) lanes.push_back(turns_to_json(net.lanes[l].turns));
        roads.push_back({{"id", r.id},
                         {"from", r.from_node},
                         {"to", r.to_node},
                         {"length", r.length},
                         {"max_speed", r.max_speed},
                         {"lanes", std::move(lanes)}});
    }
    doc["roads"] = std::move(roads);
    return doc.dump(1);
}

TrafficNetwork network_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("", e.what());
    }
    NetworkDraft draft;
    draft.provenance = doc.value("provenance", std::string{});
    const auto& nodes = doc.contains("nodes") ? doc["nodes"] : throw ParseError("/nodes", "missing field");
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const std::string p = "/nodes/" + std::to_string(k);
        draft.nodes.push_back({require<std::string>(nodes[k], "id", p), require<double>(nodes[k], "x", p),
                               require<double>(nodes[k], "y", p), require<bool>(nodes[k], "signalized", p)});
    }
    const auto& roads = doc.contains("roads") ? doc["roads"] : throw ParseError("/roads", "missing field");
    for (std::size_t k = 0; k < roads.size(); ++k) {
        const std::string p = "/roads/" + std::to_string(k);
        NetworkDraft::DraftRoad r;
        r.id = require<std::string>(roads[k], "id", p);
        r.from = require<std::string>(roads[k], "from", p);
        r.to = require<std::string>(roads[k], "to", p);
        r.length = require<double>(roads[k], "length", p);
        r.max_speed = require<double>(roads[k], "max_speed", p);
        const auto lanes = require<json>(roads[k], "lanes", p);
        for (std::size_t j = 0; j < lanes.size(); ++j) {
            TurnMask m = 0;
            for (const auto& t : lanes[j]) {
                auto turn = turn_from_string(t.get<std::string>());
                if (!turn) throw ParseError(p + "/lanes/" + std::to_string(j), "unknown turn kind");
                m |= turn_bit(*turn);
            }
            r.lane_turns.push_back(m);
        }
        draft.roads.push_back(std::move(r));
    }
    return assemble_network(draft);
}

}  // namespace tsc
