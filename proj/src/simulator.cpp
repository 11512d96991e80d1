#include "tsc/simulator.h"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>

#include <json.hpp>

namespace tsc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lanes of `road` a vehicle may use given the road it turns onto next (-1: none).
bool lane_usable(const TrafficNetwork& net, int lane, int road, int next_road) {
    if (next_road < 0) return true;
    const Movement* mv = net.movement_between(road, next_road);
    return mv != nullptr && net.lanes[lane].permits(mv->turn);
}

int next_road_of(const World& w, std::uint32_t id, std::uint32_t cursor) {
    const auto& route = w.flow->routes[id];
    return cursor + 1 < route.size() ? route[cursor + 1] : -1;
}

bool phase_contains(const Intersection& inter, int phase, int movement) {
    const auto& mv = inter.phases[phase].movements;
    return std::find(mv.begin(), mv.end(), movement) != mv.end();
}

// Furthest admissible front position for a vehicle appended to `lane`.
double tail_limit(const std::vector<Vehicle>& lane, double lane_length) {
    if (lane.empty()) return lane_length;
    const Vehicle& tail = lane.back();
    return tail.position - tail.length - tail.min_gap;
}

}  // namespace

void SimConfig::validate() const {
    if (yellow < 0 || all_red < 0) throw ArgumentError("transition durations must be non-negative");
    if (!(vehicle_length > 0.0) || !(min_gap >= 0.0)) throw ArgumentError("vehicle length must be positive");
    if (!(stop_speed > 0.0)) throw ArgumentError("stop-speed threshold must be positive");
    if (horizon <= 0) throw ArgumentError("horizon must be positive");
}

std::size_t World::on_network() const {
    std::size_t n = 0;
    for (const auto& lane : lanes) n += lane.size();
    return n;
}

World make_world(std::shared_ptr<const TrafficNetwork> net, std::shared_ptr<const ResolvedFlow> flow,
                 SimConfig config, const std::vector<int>& initial_phases) {
    config.validate();
    World w;
    w.config = config;
    w.lanes.resize(net->lanes.size());
    w.signals.resize(net->intersections.size());
    if (!initial_phases.empty()) {
        if (initial_phases.size() != w.signals.size()) throw CommandError("initial phase list has wrong length");
        for (std::size_t i = 0; i < w.signals.size(); ++i) {
            if (initial_phases[i] < 0 || initial_phases[i] >= static_cast<int>(net->intersections[i].phases.size()))
                throw CommandError("invalid initial phase for intersection '" + net->intersections[i].id + "'");
            w.signals[i].active = initial_phases[i];
        }
    }
    for (std::size_t k = 0; k < flow->routes.size(); ++k) {
        const int first = flow->routes[k].front();
        if (!net->roads[first].starts_at_boundary())
            throw ValidationError("route " + std::to_string(k) + ": first road '" + net->roads[first].id +
                                  "' does not start at a boundary node");
    }
    w.order.resize(flow->times.size());
    std::iota(w.order.begin(), w.order.end(), 0u);
    std::stable_sort(w.order.begin(), w.order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return flow->times[a] < flow->times[b]; });
    w.net = std::move(net);
    w.flow = std::move(flow);
    return w;
}

void inject_arrivals(World& w) {
    if (w.injected_through >= w.clock) return;
    w.injected_through = w.clock;
    const auto& net = *w.net;
    const double now = static_cast<double>(w.clock);
    while (w.next_arrival < w.order.size() && w.flow->times[w.order[w.next_arrival]] <= now) {
        w.waiting.push_back(w.order[w.next_arrival++]);
    }
    // Entry roads are FIFO: once one arrival is blocked, later ones on the same road wait too.
    std::vector<char> road_blocked(net.roads.size(), 0);
    std::vector<std::uint32_t> still_waiting;
    for (std::uint32_t id : w.waiting) {
        const int road = w.flow->routes[id].front();
        if (road_blocked[road]) {
            still_waiting.push_back(id);
            continue;
        }
        const int next = next_road_of(w, id, 0);
        int best = -1;
        for (int lane : net.roads[road].lanes) {
            if (!lane_usable(net, lane, road, next)) continue;
            const auto& vs = w.lanes[lane];
            if (tail_limit(vs, net.roads[road].length) < 0.0) continue;
            if (best < 0 || vs.size() < w.lanes[best].size()) best = lane;
        }
        if (best < 0) {
            road_blocked[road] = 1;
            still_waiting.push_back(id);
            continue;
        }
        Vehicle v;
        v.id = id;
        v.cursor = 0;
        v.position = 0.0;
        v.speed = 0.0;
        v.length = w.config.vehicle_length;
        v.min_gap = w.config.min_gap;
        v.entry_time = w.flow->times[id];
        w.lanes[best].push_back(v);
        ++w.entered;
    }
    w.waiting = std::move(still_waiting);
}

void step_in_place(World& w, const Commands& commands) {
    const auto& net = *w.net;
    if (!commands.empty() && commands.size() != w.signals.size())
        throw CommandError("command list must have one entry per intersection");
    for (std::size_t i = 0; i < commands.size(); ++i) {
        if (!commands[i]) continue;
        const int target = *commands[i];
        if (target < 0 || target >= static_cast<int>(net.intersections[i].phases.size()))
            throw CommandError("invalid phase " + std::to_string(target) + " for intersection '" +
                               net.intersections[i].id + "'");
        auto& sig = w.signals[i];
        if (sig.in_transition()) {
            sig.pending = target;
        } else if (target != sig.active) {
            sig.pending = target;
            sig.countdown = w.config.transition();
            if (sig.countdown == 0) {
                sig.active = target;
                sig.pending = -1;
                sig.elapsed = 0;
            }
        }
    }

    inject_arrivals(w);
    w.last_crossings.clear();

    const std::int64_t exit_clock = w.clock + 1;
    struct Entrant {
        int lane;
        Vehicle vehicle;
    };
    std::vector<Entrant> entrants;
    // Extra constraint on each lane's tail from vehicles entering this tick.
    std::vector<double> entry_limit(net.lanes.size(), kInf);
    std::vector<std::size_t> entry_count(net.lanes.size(), 0);
    std::vector<char> front_left(net.lanes.size(), 0);

    // Stop-line crossings: at most the front vehicle of each lane per tick.
    for (std::size_t lane = 0; lane < w.lanes.size(); ++lane) {
        auto& vs = w.lanes[lane];
        if (vs.empty()) continue;
        Vehicle& front = vs.front();
        const int road = net.lanes[lane].road;
        const Road& r = net.roads[road];
        const int next = next_road_of(w, front.id, front.cursor);
        if (next < 0) continue;  // last road: leaves the network at the road end
        const double to_line = r.length - front.position;
        if (r.max_speed <= to_line) continue;
        const int node = r.to_intersection;
        const auto& inter = net.intersections[node];
        const int mv_index = inter.find_movement(road, next);
        const Movement& mv = inter.movements[mv_index];
        const SignalState& sig = w.signals[node];
        const bool admitted = !mv.signalized() || (!sig.in_transition() && phase_contains(inter, sig.active, mv_index));
        if (!admitted) continue;

        const int after = next_road_of(w, front.id, front.cursor + 1);
        const Road& nr = net.roads[next];
        int best = -1;
        double best_limit = 0.0;
        for (int cand : nr.lanes) {
            if (!lane_usable(net, cand, next, after)) continue;
            const double limit = std::min(tail_limit(w.lanes[cand], nr.length), entry_limit[cand]);
            if (limit < 0.0) continue;
            const std::size_t count = w.lanes[cand].size() + entry_count[cand];
            if (best < 0 || count < w.lanes[best].size() + entry_count[best]) {
                best = cand;
                best_limit = limit;
            }
        }
        if (best < 0) continue;

        Vehicle moved = front;
        const double overshoot = r.max_speed - to_line;
        moved.position = std::min({overshoot, best_limit, nr.length});
        moved.speed = to_line + moved.position;
        moved.cursor = front.cursor + 1;
        entry_limit[best] = moved.position - moved.length - moved.min_gap;
        ++entry_count[best];
        w.last_crossings.push_back({node, mv_index, front.id});
        entrants.push_back({best, moved});
        front_left[lane] = 1;
    }

    // Car following within each lane, front to back.
    for (std::size_t lane = 0; lane < w.lanes.size(); ++lane) {
        auto& vs = w.lanes[lane];
        if (vs.empty()) continue;
        const Road& r = net.road_of_lane(static_cast<int>(lane));
        std::size_t begin = front_left[lane] ? 1 : 0;
        double leader_limit = kInf;
        bool leader_gone = front_left[lane] != 0;
        std::vector<Vehicle> kept;
        kept.reserve(vs.size());
        for (std::size_t k = begin; k < vs.size(); ++k) {
            Vehicle v = vs[k];
            const bool last_road = next_road_of(w, v.id, v.cursor) < 0;
            double obstruction = last_road ? kInf : r.length;
            if (!leader_gone) obstruction = std::min(obstruction, leader_limit);
            const double target = std::max(v.position, std::min(v.position + r.max_speed, obstruction));
            v.speed = target - v.position;
            v.position = target;
            if (last_road && v.position >= r.length) {
                w.departed.push_back({v.id, v.entry_time, exit_clock});
                leader_gone = true;
                continue;
            }
            leader_gone = false;
            leader_limit = v.position - v.length - v.min_gap;
            kept.push_back(v);
        }
        vs = std::move(kept);
    }

    for (auto& e : entrants) w.lanes[e.lane].push_back(e.vehicle);

    for (auto& sig : w.signals) {
        if (sig.countdown > 0) {
            if (--sig.countdown == 0) {
                sig.active = sig.pending < 0 ? sig.active : sig.pending;
                sig.pending = -1;
                sig.elapsed = 0;
            }
        } else {
            ++sig.elapsed;
        }
    }
    w.clock = exit_clock;
}

World step(World world, const Commands& commands) {
    step_in_place(world, commands);
    return world;
}

std::vector<LaneEntry> snapshot_lane(const World& w, int lane) {
    if (lane < 0 || static_cast<std::size_t>(lane) >= w.lanes.size())
        throw ArgumentError("unknown lane " + std::to_string(lane));
    std::vector<LaneEntry> out;
    out.reserve(w.lanes[lane].size());
    for (const auto& v : w.lanes[lane]) out.push_back({v.position, v.speed});
    return out;
}

namespace {

struct Fnv {
    std::uint64_t h = 1469598103934665603ull;
    void bytes(const void* p, std::size_t n) {
        const auto* c = static_cast<const unsigned char*>(p);
        for (std::size_t k = 0; k < n; ++k) {
            h ^= c[k];
            h *= 1099511628211ull;
        }
    }
    template <class T>
    void add(const T& v) {
        bytes(&v, sizeof(T));
    }
};

}  // namespace

std::uint64_t world_digest(const World& w) {
    Fnv f;
    f.add(w.clock);
    for (const auto& lane : w.lanes) {
        f.add(lane.size());
        for (const auto& v : lane) {
            f.add(v.id);
            f.add(v.cursor);
            f.add(std::bit_cast<std::uint64_t>(v.position));
            f.add(std::bit_cast<std::uint64_t>(v.speed));
            f.add(std::bit_cast<std::uint64_t>(v.entry_time));
        }
    }
    for (const auto& s : w.signals) {
        f.add(s.active);
        f.add(s.pending);
        f.add(s.countdown);
        f.add(s.elapsed);
    }
    f.add(w.next_arrival);
    for (auto id : w.waiting) f.add(id);
    for (const auto& d : w.departed) {
        f.add(d.id);
        f.add(d.exit_time);
    }
    f.add(w.entered);
    return f.h;
}

std::string trace_line(const World& w) {
    nlohmann::ordered_json line;
    line["clock"] = w.clock;
    std::vector<int> phases, countdowns;
    for (const auto& s : w.signals) {
        phases.push_back(s.active);
        countdowns.push_back(s.countdown);
    }
    line["phase"] = phases;
    line["countdown"] = countdowns;
    std::vector<std::size_t> counts, queues;
    for (const auto& lane : w.lanes) {
        counts.push_back(lane.size());
        queues.push_back(static_cast<std::size_t>(std::count_if(
            lane.begin(), lane.end(), [&](const Vehicle& v) { return v.speed < w.config.stop_speed; })));
    }
    line["lane_count"] = counts;
    line["lane_queue"] = queues;
    line["departed"] = w.departed.size();
    line["waiting"] = w.waiting.size();
    return line.dump();
}

}  // namespace tsc
