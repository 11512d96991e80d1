#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tsc/errors.h"

namespace tsc {

enum class Turn : std::uint8_t { Left = 0, Straight = 1, Right = 2 };

// Direction of travel along a road. Counter-clockwise order, x east / y north.
enum class Heading : std::uint8_t { East = 0, North = 1, West = 2, South = 3 };

using TurnMask = std::uint8_t;

constexpr TurnMask turn_bit(Turn t) { return static_cast<TurnMask>(1u << static_cast<unsigned>(t)); }
constexpr TurnMask kAllTurns = turn_bit(Turn::Left) | turn_bit(Turn::Straight) | turn_bit(Turn::Right);

Heading turned(Heading h, Turn t);
std::string_view to_string(Turn t);
std::string_view to_string(Heading h);
std::optional<Turn> turn_from_string(std::string_view s);

struct Lane {
    std::string id;
    int road = -1;
    int index = 0;
    TurnMask turns = kAllTurns;

    bool permits(Turn t) const { return (turns & turn_bit(t)) != 0; }
    bool operator==(const Lane&) const = default;
};

struct Road {
    std::string id;
    std::string from_node;
    std::string to_node;
    int from_intersection = -1;  // -1: boundary node
    int to_intersection = -1;
    double length = 0.0;     // meters
    double max_speed = 0.0;  // m/s
    Heading heading = Heading::East;
    std::vector<int> lanes;

    bool starts_at_boundary() const { return from_intersection < 0; }
    bool ends_at_boundary() const { return to_intersection < 0; }
    bool operator==(const Road&) const = default;
};

// Traffic from incoming road `in_road` to outgoing road `out_road`.
struct Movement {
    int in_road = -1;
    int out_road = -1;
    Turn turn = Turn::Straight;
    std::vector<int> in_lanes;   // lanes of in_road permitting `turn`
    std::vector<int> out_lanes;  // all lanes of out_road

    bool signalized() const { return turn != Turn::Right; }
    bool operator==(const Movement&) const = default;
};

struct Phase {
    int index = 0;
    std::vector<int> movements;  // indices into Intersection::movements
    bool operator==(const Phase&) const = default;
};

constexpr int kPhaseCount = 4;
constexpr int kMovementCount = 12;

// Approaches in canonical order: traffic arriving from the north, east, south, west.
enum class Approach : std::uint8_t { FromNorth = 0, FromEast = 1, FromSouth = 2, FromWest = 3 };

Approach approach_of(Heading travel);

// Canonical movement slot: approach * 3 + turn.
constexpr int movement_slot(Approach a, Turn t) { return static_cast<int>(a) * 3 + static_cast<int>(t); }

struct Intersection {
    std::string id;
    double x = 0.0;
    double y = 0.0;
    std::array<int, 4> in_roads{-1, -1, -1, -1};   // indexed by Approach
    std::array<int, 4> out_roads{-1, -1, -1, -1};  // indexed by travel Heading
    std::vector<int> in_lanes;
    std::vector<int> out_lanes;
    std::vector<Movement> movements;  // kMovementCount entries, canonical slot order
    std::vector<Phase> phases;        // [NS-straight, EW-straight, NS-left, EW-left]

    // Index of movement (in_road -> out_road), or -1.
    int find_movement(int in_road, int out_road) const;
    bool operator==(const Intersection&) const = default;
};

struct BoundaryNode {
    std::string id;
    double x = 0.0;
    double y = 0.0;
    bool operator==(const BoundaryNode&) const = default;
};

struct BoundingBox {
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
    bool operator==(const BoundingBox&) const = default;
};

class TrafficNetwork {
public:
    std::vector<Intersection> intersections;
    std::vector<BoundaryNode> boundary_nodes;
    std::vector<Road> roads;
    std::vector<Lane> lanes;
    BoundingBox bbox;
    std::string provenance;
    std::vector<std::string> warnings;

    int road_index(std::string_view id) const;  // -1 if absent
    const Road& road_of_lane(int lane) const { return roads[lanes[lane].road]; }
    double lane_length(int lane) const { return road_of_lane(lane).length; }
    // Largest road speed limit; the network-wide V_max.
    double max_speed() const;
    // Boundary entry roads (start at a boundary node), in road index order.
    std::vector<int> entry_roads() const;

    // Movement taken when leaving `in_road` for `out_road`, or nullptr.
    const Movement* movement_between(int in_road, int out_road) const;

    bool operator==(const TrafficNetwork& o) const {
        return intersections == o.intersections && boundary_nodes == o.boundary_nodes && roads == o.roads &&
               lanes == o.lanes && bbox == o.bbox;
    }

    void reindex();

private:
    std::unordered_map<std::string, int> road_ids_;
};

// Raw description that `assemble_network` turns into a validated TrafficNetwork.
struct NetworkDraft {
    struct Node {
        std::string id;
        double x = 0.0, y = 0.0;
        bool signalized = true;
    };
    struct DraftRoad {
        std::string id;
        std::string from, to;
        double length = 0.0;
        double max_speed = 0.0;
        std::vector<TurnMask> lane_turns;  // one entry per lane, index order
    };
    std::vector<Node> nodes;
    std::vector<DraftRoad> roads;
    std::string provenance;
    std::vector<std::string> warnings;
};

// Derives headings, movements and the 4-phase scheme; throws ValidationError or
// UnsupportedFeature when the draft is not a network of four-way intersections.
TrafficNetwork assemble_network(const NetworkDraft& draft);

TrafficNetwork generate_grid(int rows, int cols, double ew_length, double ns_length, int lanes_per_road,
                             double max_speed);

// Default turn permissions for lane `index` of a road with `count` lanes.
TurnMask default_lane_turns(int index, int count);

std::string network_to_json(const TrafficNetwork& net);
TrafficNetwork network_from_json(std::string_view text);

}  // namespace tsc
