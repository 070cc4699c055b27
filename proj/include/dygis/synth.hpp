#pragma once

#include <cstdint>
#include <vector>

#include "dygis/graph.hpp"

namespace dygis {

struct SynthConfig {
    int n = 30;
    int num_hubs = 5;
    int num_snapshots = 6;
    double hub_attach_prob = 0.6;
    double background_edge_prob = 0.02;
    double churn_prob = 0.3;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthResult {
    DynamicGraph graph;
    std::vector<int> hubs;  // node ids planted as hubs
};

// Dynamic graph whose evolution is driven by a fixed hub set: every non-hub
// attaches to at least one hub, hub attachments persist and grow over time,
// and only background (non-hub) edges churn. A repair pass guarantees that
// the hubs hold the top degree ranks in every snapshot.
SynthResult generate_hub_dynamic_graph(const SynthConfig& cfg);

}  // namespace dygis
