#pragma once

#include <string>
#include <string_view>
#include <utility>

#include "tsc/flow.h"
#include "tsc/network.h"

namespace tsc {

// Reads a CityFlow roadnet document and flow document. Intersections marked
// "virtual" become boundary nodes; every other node must be four-way. Source
// light phases are remapped onto the fixed 4-phase scheme and the remapping is
// recorded in the network provenance.
std::pair<TrafficNetwork, FlowSpec> load_cityflow(std::string_view roadnet_json, std::string_view flow_json);

TrafficNetwork load_cityflow_roadnet(std::string_view roadnet_json);
FlowSpec load_cityflow_flow(std::string_view flow_json);

// Writes `net` as a CityFlow roadnet (straight road geometry, one roadLink per
// movement, light phases in the fixed 4-phase order).
std::string roadnet_to_cityflow(const TrafficNetwork& net);

}  // namespace tsc
