#include "dygis/synth.hpp"

#include <algorithm>
#include <memory>
#include <set>
#include <stdexcept>

namespace dygis {

void SynthConfig::validate() const {
    if (n <= 1) throw std::invalid_argument("synth config: need at least two nodes");
    if (num_hubs < 0 || num_hubs >= n)
        throw std::invalid_argument("synth config: hub count must be in [0, n)");
    if (num_snapshots < 1) throw std::invalid_argument("synth config: need at least one snapshot");
    for (double prob : {hub_attach_prob, background_edge_prob, churn_prob})
        if (prob < 0.0 || prob > 1.0)
            throw std::invalid_argument("synth config: probabilities must lie in [0, 1]");
    if (num_hubs > 0 && hub_attach_prob == 0.0)
        throw std::invalid_argument("synth config: hubs require a positive attach probability");
    if (num_hubs > 0 && n - num_hubs < 2)
        throw std::invalid_argument("synth config: need at least two non-hub nodes");
}

namespace {

struct EdgeState {
    std::set<Edge> hub_edges;         // persist and grow
    std::set<Edge> background_edges;  // churn
};

bool present(const EdgeState& st, const Edge& e) {
    return st.hub_edges.count(e) || st.background_edges.count(e);
}

// Strict degree dominance: raise weak hubs until every hub outranks every
// non-hub. Deterministic given the current edge state.
void repair_hub_dominance(EdgeState& st, int n, int num_hubs) {
    if (num_hubs == 0) return;
    auto degrees = [&]() {
        std::vector<int> deg(n, 0);
        for (const auto* edges : {&st.hub_edges, &st.background_edges})
            for (const Edge& e : *edges) {
                deg[e.first]++;
                deg[e.second]++;
            }
        return deg;
    };
    for (;;) {
        std::vector<int> deg = degrees();
        int weak_hub = 0;
        for (int h = 1; h < num_hubs; ++h)
            if (deg[h] < deg[weak_hub]) weak_hub = h;
        int max_nonhub = 0;
        for (int v = num_hubs; v < n; ++v) max_nonhub = std::max(max_nonhub, deg[v]);
        if (deg[weak_hub] > max_nonhub) return;

        // attach the weakest hub to the lowest-degree node it misses
        int best = -1;
        for (int v = 0; v < n; ++v) {
            if (v == weak_hub) continue;
            if (present(st, make_edge(weak_hub, v))) continue;
            if (best < 0 || deg[v] < deg[best]) best = v;
        }
        if (best < 0)
            throw std::invalid_argument(
                "synth config: hub dominance unreachable, graph too dense");
        st.hub_edges.insert(make_edge(weak_hub, best));
    }
}

Snapshot to_snapshot(const EdgeState& st, int n, const std::shared_ptr<const Tensor>& feats) {
    Snapshot s;
    s.active.assign(n, 0);
    for (const auto* edges : {&st.hub_edges, &st.background_edges})
        for (const Edge& e : *edges) {
            s.edges.push_back(e);
            s.active[e.first] = 1;
            s.active[e.second] = 1;
        }
    std::sort(s.edges.begin(), s.edges.end());
    s.features = feats;
    return s;
}

}  // namespace

SynthResult generate_hub_dynamic_graph(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int n = cfg.n;
    const int hubs = cfg.num_hubs;
    std::uniform_int_distribution<int> pick_hub(0, std::max(0, hubs - 1));
    std::uniform_int_distribution<int> pick_nonhub(hubs, n - 1);

    EdgeState st;
    // initial hub attachments: every non-hub reaches at least one hub
    for (int v = hubs; v < n && hubs > 0; ++v) {
        bool attached = false;
        for (int h = 0; h < hubs; ++h)
            if (unit(rng) < cfg.hub_attach_prob) {
                st.hub_edges.insert(make_edge(v, h));
                attached = true;
            }
        if (!attached) st.hub_edges.insert(make_edge(v, pick_hub(rng)));
    }
    // sparse background among non-hubs (all nodes when there are no hubs)
    const int bg_lo = hubs > 0 ? hubs : 0;
    for (int u = bg_lo; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (unit(rng) < cfg.background_edge_prob) st.background_edges.insert(make_edge(u, v));

    SynthResult result;
    result.graph.n_global = n;
    result.graph.feature_mode = FeatureMode::OneHot;
    result.graph.feature_dim = n;
    for (int h = 0; h < hubs; ++h) result.hubs.push_back(h);
    auto eye = std::make_shared<const Tensor>(Tensor::identity(n));

    for (int t = 0; t < cfg.num_snapshots; ++t) {
        if (t > 0) {
            // churn: each background edge may be rewired to a fresh pair
            std::vector<Edge> current(st.background_edges.begin(), st.background_edges.end());
            for (const Edge& e : current) {
                if (unit(rng) >= cfg.churn_prob) continue;
                st.background_edges.erase(e);
                for (int attempt = 0; attempt < 64; ++attempt) {
                    if (n - bg_lo < 2) break;
                    Edge fresh = make_edge(pick_nonhub(rng), pick_nonhub(rng));
                    if (fresh.first == fresh.second || present(st, fresh)) continue;
                    st.background_edges.insert(fresh);
                    break;
                }
            }
            // growth: non-hubs keep acquiring hub links over time
            for (int v = hubs; v < n && hubs > 0; ++v) {
                if (unit(rng) >= cfg.churn_prob) continue;
                std::vector<int> missing;
                for (int h = 0; h < hubs; ++h)
                    if (!st.hub_edges.count(make_edge(v, h))) missing.push_back(h);
                if (missing.empty()) continue;
                std::uniform_int_distribution<size_t> pick(0, missing.size() - 1);
                st.hub_edges.insert(make_edge(v, missing[pick(rng)]));
            }
        }
        repair_hub_dominance(st, n, hubs);
        if (st.hub_edges.empty() && st.background_edges.empty()) {
            // degenerate hubless + ultra-sparse setting; keep snapshots non-empty
            const int u = pick_nonhub(rng);
            st.background_edges.insert(make_edge(u, (u + 1) % n));
        }
        result.graph.snapshots.push_back(to_snapshot(st, n, eye));
    }
    result.graph.num_test_snapshots = std::min(3, std::max(1, cfg.num_snapshots - 1));
    return result;
}

}  // namespace dygis
