#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <set>

#include "dygis/synth.hpp"

using namespace dygis;

namespace {

std::vector<int> degrees(const Snapshot& s, int n) {
    std::vector<int> deg(n, 0);
    for (const Edge& e : s.edges) {
        deg[e.first]++;
        deg[e.second]++;
    }
    return deg;
}

}  // namespace

TEST_CASE("planted hubs hold the top degree ranks in every snapshot") {
    SynthConfig cfg;
    cfg.n = 30;
    cfg.num_hubs = 5;
    cfg.num_snapshots = 6;
    cfg.hub_attach_prob = 0.6;
    cfg.background_edge_prob = 0.02;
    cfg.churn_prob = 0.3;

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        cfg.seed = seed;
        SynthResult result = generate_hub_dynamic_graph(cfg);
        REQUIRE(result.graph.num_snapshots() == 6);
        REQUIRE(result.hubs == std::vector<int>{0, 1, 2, 3, 4});
        for (const Snapshot& s : result.graph.snapshots) {
            std::vector<int> deg = degrees(s, cfg.n);
            int min_hub = deg[0], max_other = 0;
            for (int h : result.hubs) min_hub = std::min(min_hub, deg[h]);
            for (int v = cfg.num_hubs; v < cfg.n; ++v) max_other = std::max(max_other, deg[v]);
            CHECK(min_hub > max_other);
        }
    }
}

TEST_CASE("generated snapshots satisfy the snapshot invariants") {
    SynthConfig cfg;
    cfg.seed = 3;
    SynthResult result = generate_hub_dynamic_graph(cfg);
    for (const Snapshot& s : result.graph.snapshots) {
        std::set<Edge> seen;
        for (const Edge& e : s.edges) {
            CHECK(e.first < e.second);
            CHECK(seen.insert(e).second);
            CHECK(s.active[e.first]);
            CHECK(s.active[e.second]);
        }
    }
}

TEST_CASE("hub attachments persist across snapshots") {
    SynthConfig cfg;
    cfg.seed = 11;
    SynthResult result = generate_hub_dynamic_graph(cfg);
    for (int t = 1; t < result.graph.num_snapshots(); ++t) {
        const Snapshot& prev = result.graph.snapshots[t - 1];
        const Snapshot& cur = result.graph.snapshots[t];
        for (const Edge& e : prev.edges) {
            const bool hub_edge = e.first < cfg.num_hubs || e.second < cfg.num_hubs;
            if (hub_edge) CHECK(cur.has_edge(e.first, e.second));
        }
    }
}

TEST_CASE("zero hubs gives a pure background graph") {
    SynthConfig cfg;
    cfg.num_hubs = 0;
    cfg.background_edge_prob = 0.15;
    cfg.seed = 7;
    SynthResult result = generate_hub_dynamic_graph(cfg);
    CHECK(result.hubs.empty());
    for (const Snapshot& s : result.graph.snapshots) CHECK_FALSE(s.edges.empty());
}

TEST_CASE("equal seeds give identical graphs") {
    SynthConfig cfg;
    cfg.seed = 19;
    SynthResult a = generate_hub_dynamic_graph(cfg);
    SynthResult b = generate_hub_dynamic_graph(cfg);
    REQUIRE(a.graph.num_snapshots() == b.graph.num_snapshots());
    for (int t = 0; t < a.graph.num_snapshots(); ++t)
        CHECK(a.graph.snapshots[t].edges == b.graph.snapshots[t].edges);
}

TEST_CASE("invalid configurations rejected") {
    SynthConfig cfg;
    SUBCASE("attach probability zero with hubs") {
        cfg.hub_attach_prob = 0.0;
        CHECK_THROWS_AS(generate_hub_dynamic_graph(cfg), std::invalid_argument);
    }
    SUBCASE("too many hubs") {
        cfg.num_hubs = cfg.n;
        CHECK_THROWS_AS(generate_hub_dynamic_graph(cfg), std::invalid_argument);
    }
    SUBCASE("probability out of range") {
        cfg.churn_prob = 1.5;
        CHECK_THROWS_AS(generate_hub_dynamic_graph(cfg), std::invalid_argument);
    }
}

TEST_CASE("round-trips through the dataset format") {
    SynthConfig cfg;
    cfg.seed = 23;
    SynthResult result = generate_hub_dynamic_graph(cfg);
    const std::string path = "synth_test_graph.txt";
    save_dynamic_graph(result.graph, path, "synthetic hub graph");
    DynamicGraph loaded = load_dynamic_graph(path, FeatureMode::OneHot);
    REQUIRE(loaded.num_snapshots() == result.graph.num_snapshots());
    CHECK(loaded.n_global == result.graph.n_global);
    for (int t = 0; t < loaded.num_snapshots(); ++t)
        CHECK(loaded.snapshots[t].edges == result.graph.snapshots[t].edges);
    std::remove(path.c_str());
}
