#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dygis/autodiff.hpp"
#include "dygis/graph.hpp"
#include "dygis/rng.hpp"

namespace dygis::test {

// Central finite differences against the tape gradient for every entry of
// every parameter. `loss_fn` must be a pure function of the current parameter
// values (any randomness frozen outside). Returns the worst relative error
// and reports the offending coordinate through `where`.
struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string where;
    int entries_checked = 0;
};

inline GradCheckResult check_gradients(const std::vector<ad::Param*>& params,
                                       const std::function<ad::Var(ad::Tape&)>& loss_fn,
                                       double h = 1e-5) {
    for (ad::Param* p : params) p->zero_grad();
    {
        ad::Tape tape;
        ad::Var loss = loss_fn(tape);
        tape.backward(loss);
    }

    auto eval = [&]() {
        ad::Tape tape;
        return loss_fn(tape).value()(0, 0);
    };

    GradCheckResult res;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        ad::Param& p = *params[pi];
        for (long long i = 0; i < p.value.size(); ++i) {
            const double orig = p.value.data()[i];
            p.value.data()[i] = orig + h;
            const double up = eval();
            p.value.data()[i] = orig - h;
            const double down = eval();
            p.value.data()[i] = orig;

            const double fd = (up - down) / (2.0 * h);
            const double an = p.grad.data()[i];
            const double rel = std::fabs(an - fd) / std::max({std::fabs(an), std::fabs(fd), 1e-3});
            ++res.entries_checked;
            if (rel > res.max_rel_err) {
                res.max_rel_err = rel;
                res.where = "param " + std::to_string(pi) + " entry " + std::to_string(i) +
                            " analytic " + std::to_string(an) + " fd " + std::to_string(fd);
            }
        }
    }
    return res;
}

// Snapshot over n nodes with the given edges; the active mask covers exactly
// the edge endpoints unless `all_active` is set.
inline Snapshot snapshot_of(int n, std::vector<Edge> edges, bool all_active = false) {
    Snapshot s;
    s.active.assign(n, all_active ? 1 : 0);
    for (auto& e : edges) {
        e = make_edge(e.first, e.second);
        s.active[e.first] = 1;
        s.active[e.second] = 1;
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    s.edges = std::move(edges);
    return s;
}

// Random connected-ish dynamic graph with one-hot features, for training-run
// and gradient-check fixtures.
inline DynamicGraph toy_dynamic_graph(int n, int num_snapshots, double edge_prob,
                                      std::uint64_t seed) {
    Rng rng(seed);
    DynamicGraph g;
    g.n_global = n;
    g.feature_mode = FeatureMode::OneHot;
    g.feature_dim = n;
    auto eye = std::make_shared<const Tensor>(Tensor::identity(n));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < num_snapshots; ++t) {
        std::vector<Edge> edges;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (unit(rng) < edge_prob) edges.push_back({i, j});
        // ring fallback keeps every snapshot non-empty and every node active
        if (edges.empty())
            for (int i = 0; i < n; ++i) edges.push_back(make_edge(i, (i + 1) % n));
        Snapshot s = snapshot_of(n, std::move(edges), true);
        s.features = eye;
        g.snapshots.push_back(std::move(s));
    }
    g.num_test_snapshots = std::max(1, num_snapshots / 3);
    return g;
}

}  // namespace dygis::test
