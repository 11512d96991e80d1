#pragma once

// Independent recount of every observer quantity from raw lane snapshots.
// Deliberately avoids the observer's helpers: it re-derives movements from
// approach/turn geometry and phases from the fixed phase table.

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "tsc/observer.h"
#include "tsc/rng.h"
#include "tsc/simulator.h"
#include "support.h"

namespace tsc::test {

// Slots per phase: [NS-straight, EW-straight, NS-left, EW-left].
inline const int kPhaseSlots[4][2] = {{1, 7}, {4, 10}, {0, 6}, {3, 9}};

struct RecountLane {
    int queue = 0;
    int running_in_range = 0;
    int running = 0;
};

inline RecountLane recount_lane(const World& w, int lane, double range) {
    RecountLane r;
    const double length = w.net->roads[w.net->lanes[lane].road].length;
    for (const auto& e : snapshot_lane(w, lane)) {
        if (e.speed < 0.1) {
            ++r.queue;
        } else {
            ++r.running;
            if (length - e.position <= range) ++r.running_in_range;
        }
    }
    return r;
}

inline double recount_range(const World& w, const ObserverConfig& c) {
    switch (c.mode) {
        case ObservationMode::Config1: return 100.0;
        case ObservationMode::Config2: return 200.0;
        case ObservationMode::Config3: return std::numeric_limits<double>::infinity();
        case ObservationMode::Default: break;
    }
    double vmax = 0.0;
    for (const auto& r : w.net->roads) vmax = std::max(vmax, r.max_speed);
    return vmax * c.t_duration;
}

// Returns an empty string when the observer agrees with the recount, else a description.
inline std::string compare_with_recount(const World& w, int inter_index, const ObserverConfig& cfg) {
    const auto& net = *w.net;
    const auto& inter = net.intersections[inter_index];
    const IntersectionObservation obs = observe(w, inter_index, cfg);
    std::ostringstream bad;
    const double range = recount_range(w, cfg);
    if (obs.range != range) bad << "range " << obs.range << " vs " << range << "; ";

    std::vector<double> e(12, 0.0);
    std::vector<int> r(12, 0), classic(12, 0);
    for (int a = 0; a < 4; ++a) {
        const int in_road = inter.in_roads[a];
        const Heading h = net.roads[in_road].heading;
        for (int t = 0; t < 3; ++t) {
            const int slot = a * 3 + t;
            const Turn turn = static_cast<Turn>(t);
            const int out_road = inter.out_roads[static_cast<int>(turned(h, turn))];
            int up = 0, m = 0;
            for (int lane : net.roads[in_road].lanes) {
                if (!net.lanes[lane].permits(turn)) continue;
                up += recount_lane(w, lane, range).queue;
                ++m;
            }
            int down = 0, n = 0;
            const bool sink = net.roads[out_road].to_intersection < 0;
            for (int lane : net.roads[out_road].lanes) {
                if (!sink) down += recount_lane(w, lane, range).queue;
                ++n;
            }
            for (int lane : net.roads[in_road].lanes) r[slot] += recount_lane(w, lane, range).running_in_range;
            classic[slot] = up - down;
            const MovementState& ms = obs.movements[slot];
            const Movement& mv = inter.movements[slot];
            if (mv.in_road != in_road || mv.out_road != out_road || mv.turn != turn)
                bad << "slot " << slot << " geometry mismatch; ";
            e[slot] = static_cast<double>(up) / m - static_cast<double>(down) / n;
            // Same double expression must match bit for bit, and agree with the rational up/m - down/n.
            if (ms.efficient_pressure != e[slot] ||
                std::abs(ms.efficient_pressure * m * n - static_cast<double>(up * n - down * m)) > 1e-9)
                bad << "e[" << slot << "] " << ms.efficient_pressure << " vs " << up << "/" << m << "-" << down << "/"
                    << n << "; ";
            if (ms.effective_running != r[slot]) bad << "r[" << slot << "] " << ms.effective_running << " vs " << r[slot] << "; ";
            if (ms.classic_pressure != classic[slot]) bad << "classic[" << slot << "]; ";
        }
    }
    for (int s = 0; s < 4; ++s) {
        const double p = e[kPhaseSlots[s][0]] + e[kPhaseSlots[s][1]];
        const int d = r[kPhaseSlots[s][0]] + r[kPhaseSlots[s][1]];
        const int c = classic[kPhaseSlots[s][0]] + classic[kPhaseSlots[s][1]];
        if (obs.phase_pressure[s] != p) bad << "p[" << s << "] " << obs.phase_pressure[s] << " vs " << p << "; ";
        if (obs.phase_demand[s] != d) bad << "d[" << s << "] " << obs.phase_demand[s] << " vs " << d << "; ";
        if (obs.classic_phase_pressure[s] != c) bad << "classic p[" << s << "]; ";
    }
    int pi = 0, incoming = 0;
    for (int a = 0; a < 4; ++a) {
        for (int lane : net.roads[inter.in_roads[a]].lanes) {
            pi += recount_lane(w, lane, range).queue;
            incoming += recount_lane(w, lane, range).queue;
        }
        const Road& out = net.roads[inter.out_roads[a]];
        if (out.to_intersection >= 0) {
            for (int lane : out.lanes) pi -= recount_lane(w, lane, range).queue;
        }
    }
    if (obs.intersection_pressure != pi) bad << "P " << obs.intersection_pressure << " vs " << pi << "; ";
    if (obs.incoming_queue != incoming) bad << "incoming queue; ";
    return bad.str();
}

// Small random world: 1x1 or 1x2 grid with up to 40 vehicles in arbitrary states.
inline World random_world(Rng& rng) {
    const int cols = 1 + static_cast<int>(rng.below(2));
    const double ew = 60.0 + static_cast<double>(rng.below(300));
    const double ns = 60.0 + static_cast<double>(rng.below(300));
    const int lanes = 1 + static_cast<int>(rng.below(3));
    const double speed = 8.0 + static_cast<double>(rng.below(8));
    auto net = share(generate_grid(1, cols, ew, ns, lanes, speed));
    World w = world_of(net, FlowSpec{});
    const int count = static_cast<int>(rng.below(41));
    const double range_hint = speed * (5.0 * static_cast<double>(1 + rng.below(4)));
    for (int k = 0; k < count; ++k) {
        const int lane = static_cast<int>(rng.below(net->lanes.size()));
        const double length = net->lane_length(lane);
        double pos;
        switch (rng.below(4)) {
            case 0: pos = length; break;                                       // at the stop line
            case 1: pos = std::max(0.0, length - range_hint); break;           // exactly at a likely range edge
            default: pos = std::floor(rng.uniform() * length * 4.0) / 4.0; break;
        }
        double v;
        switch (rng.below(4)) {
            case 0: v = 0.0; break;
            case 1: v = 0.1; break;  // threshold: counts as running
            case 2: v = 0.0999; break;
            default: v = rng.uniform() * speed; break;
        }
        place(w, lane, 0, pos, v);
    }
    return w;
}

inline ObserverConfig random_observer(Rng& rng) {
    ObserverConfig c;
    c.t_duration = 5.0 * static_cast<double>(1 + rng.below(4));
    c.mode = static_cast<ObservationMode>(rng.below(4));
    return c;
}

}  // namespace tsc::test
