#include "dygis/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace dygis {

namespace {

[[noreturn]] void parse_error(const std::string& path, int line_no, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

std::uint64_t edge_key(int u, int v) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
           static_cast<std::uint32_t>(v);
}

void sort_unique(std::vector<Edge>& edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

long long pair_capacity(long long n) { return n * (n - 1) / 2; }

}  // namespace

int Snapshot::num_active() const {
    int c = 0;
    for (char a : active) c += (a != 0);
    return c;
}

std::vector<int> Snapshot::active_indices() const {
    std::vector<int> idx;
    idx.reserve(active.size());
    for (size_t i = 0; i < active.size(); ++i)
        if (active[i]) idx.push_back(static_cast<int>(i));
    return idx;
}

bool Snapshot::has_edge(int u, int v) const {
    return std::binary_search(edges.begin(), edges.end(), make_edge(u, v));
}

DynamicGraph load_dynamic_graph(const std::string& path, FeatureMode mode,
                                int num_test_snapshots, const std::string& feature_file) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);

    struct RawEdge {
        long long t, u, v;
    };
    std::vector<RawEdge> raw;
    std::vector<long long> ids;

    std::string line;
    int line_no = 0;
    long long prev_t = -1;
    long long first_t = -1;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long long t, u, v;
        if (!(ls >> t)) continue;  // blank or comment-only line
        if (!(ls >> u >> v)) parse_error(path, line_no, "malformed line, expected '<t> <u> <v>'");
        long long extra;
        if (ls >> extra) parse_error(path, line_no, "trailing tokens after '<t> <u> <v>'");
        if (first_t < 0) first_t = t;
        if (t < prev_t) parse_error(path, line_no, "snapshot indices must be non-decreasing");
        if (prev_t >= 0 && t > prev_t + 1)
            parse_error(path, line_no,
                        "timestamp gap: snapshot " + std::to_string(prev_t + 1) + " missing");
        prev_t = t;
        if (u == v) {
            std::cerr << path << ":" << line_no << ": warning: dropping self-loop on node " << u
                      << "\n";
            continue;
        }
        raw.push_back({t - first_t, u, v});
        ids.push_back(u);
        ids.push_back(v);
    }
    if (raw.empty()) throw std::runtime_error(path + ": no edges found");

    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::unordered_map<long long, int> remap;
    remap.reserve(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) remap[ids[i]] = static_cast<int>(i);

    DynamicGraph g;
    g.n_global = static_cast<int>(ids.size());
    g.original_ids = ids;
    g.feature_mode = mode;

    const int T = static_cast<int>(prev_t - first_t + 1);
    g.snapshots.resize(T);
    for (auto& s : g.snapshots) s.active.assign(g.n_global, 0);
    for (const RawEdge& e : raw) {
        Snapshot& s = g.snapshots[static_cast<size_t>(e.t)];
        const int u = remap.at(e.u);
        const int v = remap.at(e.v);
        s.edges.push_back(make_edge(u, v));
        s.active[u] = 1;
        s.active[v] = 1;
    }
    for (auto& s : g.snapshots) sort_unique(s.edges);

    switch (mode) {
        case FeatureMode::OneHot: {
            auto eye = std::make_shared<const Tensor>(Tensor::identity(g.n_global));
            for (auto& s : g.snapshots) s.features = eye;
            g.feature_dim = g.n_global;
            break;
        }
        case FeatureMode::Learnable:
            g.feature_dim = 32;  // trainable matrix is owned by the training stage
            break;
        case FeatureMode::File: {
            std::ifstream ff(feature_file);
            if (!ff) throw std::runtime_error("cannot open feature file: " + feature_file);
            int n, d;
            if (!(ff >> n >> d)) throw std::runtime_error(feature_file + ": bad header");
            if (n != g.n_global)
                throw std::runtime_error(feature_file + ": feature rows " + std::to_string(n) +
                                         " != node count " + std::to_string(g.n_global));
            Tensor feats(n, d);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j)
                    if (!(ff >> feats(i, j)))
                        throw std::runtime_error(feature_file + ": truncated feature matrix");
            auto shared = std::make_shared<const Tensor>(std::move(feats));
            for (auto& s : g.snapshots) s.features = shared;
            g.feature_dim = d;
            break;
        }
    }

    g.num_test_snapshots = std::max(1, std::min(num_test_snapshots, T - 1));
    return g;
}

NodeLabels load_labels(const std::string& path, const DynamicGraph& g) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open labels file: " + path);
    std::unordered_map<long long, int> remap;
    for (size_t i = 0; i < g.original_ids.size(); ++i)
        remap[g.original_ids[i]] = static_cast<int>(i);

    NodeLabels labels;
    labels.label.assign(g.n_global, -1);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long long node;
        int cls;
        if (!(ls >> node)) continue;
        if (!(ls >> cls) || cls < 0) parse_error(path, line_no, "malformed label line");
        auto it = remap.find(node);
        if (it == remap.end())
            parse_error(path, line_no, "unknown node id " + std::to_string(node));
        labels.label[it->second] = cls;
        labels.num_classes = std::max(labels.num_classes, cls + 1);
    }
    return labels;
}

void save_dynamic_graph(const DynamicGraph& g, const std::string& path,
                        const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    for (int t = 0; t < g.num_snapshots(); ++t)
        for (const Edge& e : g.snapshots[t].edges)
            out << t << " " << e.first << " " << e.second << "\n";
}

Tensor normalize_adjacency(const Snapshot& s) { return normalize_edges(s.edges, s.active); }

Tensor normalize_edges(const std::vector<Edge>& edges, const std::vector<char>& active) {
    const int n = static_cast<int>(active.size());
    Tensor a(n, n);
    std::vector<double> deg(n, 0.0);
    for (int i = 0; i < n; ++i)
        if (active[i]) deg[i] = 1.0;  // self-loop for active nodes only
    for (const Edge& e : edges) {
        a(e.first, e.second) += 1.0;
        a(e.second, e.first) += 1.0;
        deg[e.first] += 1.0;
        deg[e.second] += 1.0;
    }
    for (int i = 0; i < n; ++i)
        if (active[i]) a(i, i) += 1.0;

    std::vector<double> inv_sqrt(n, 0.0);
    for (int i = 0; i < n; ++i)
        if (deg[i] > 0.0 && active[i]) inv_sqrt[i] = 1.0 / std::sqrt(deg[i]);
    for (int i = 0; i < n; ++i) {
        if (!active[i]) continue;
        for (int j = 0; j < n; ++j) {
            if (a(i, j) != 0.0) a(i, j) *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    return a;
}

namespace {

// Uniform sample of `count` distinct pairs over `nodes`, excluding `forbidden`
// (sorted). Switches to full enumeration when the pool is small relative to
// the request, otherwise uses rejection sampling.
std::vector<Edge> sample_pairs(const std::vector<int>& nodes, const std::vector<Edge>& forbidden,
                               int count, Rng& rng) {
    const long long n = static_cast<long long>(nodes.size());
    const long long capacity = pair_capacity(n) - static_cast<long long>(forbidden.size());
    if (count > capacity)
        throw std::invalid_argument("sample_pairs: requested " + std::to_string(count) +
                                    " pairs but only " + std::to_string(capacity) +
                                    " are available");
    auto is_forbidden = [&](const Edge& e) {
        return std::binary_search(forbidden.begin(), forbidden.end(), e);
    };

    std::vector<Edge> out;
    out.reserve(count);
    if (capacity <= 4LL * count || capacity <= 64) {
        std::vector<Edge> pool;
        pool.reserve(static_cast<size_t>(capacity));
        for (size_t i = 0; i < nodes.size(); ++i)
            for (size_t j = i + 1; j < nodes.size(); ++j) {
                Edge e = make_edge(nodes[i], nodes[j]);
                if (!is_forbidden(e)) pool.push_back(e);
            }
        // partial Fisher-Yates: the first `count` slots become the sample
        for (int k = 0; k < count; ++k) {
            std::uniform_int_distribution<size_t> pick(k, pool.size() - 1);
            std::swap(pool[k], pool[pick(rng)]);
            out.push_back(pool[k]);
        }
    } else {
        std::unordered_set<std::uint64_t> seen;
        seen.reserve(static_cast<size_t>(count) * 2);
        std::uniform_int_distribution<size_t> pick(0, nodes.size() - 1);
        while (static_cast<int>(out.size()) < count) {
            const int u = nodes[pick(rng)];
            const int v = nodes[pick(rng)];
            if (u == v) continue;
            Edge e = make_edge(u, v);
            if (is_forbidden(e)) continue;
            if (!seen.insert(edge_key(e.first, e.second)).second) continue;
            out.push_back(e);
        }
    }
    return out;
}

}  // namespace

Snapshot erdos_renyi_like(const Snapshot& s, Rng& rng) {
    const std::vector<int> nodes = s.active_indices();
    const int m = static_cast<int>(s.edges.size());
    if (static_cast<long long>(m) > pair_capacity(static_cast<long long>(nodes.size())))
        throw std::invalid_argument("erdos_renyi_like: edge count " + std::to_string(m) +
                                    " exceeds pair capacity of " + std::to_string(nodes.size()) +
                                    " active nodes");
    Snapshot noisy;
    noisy.active = s.active;
    noisy.features = s.features;
    noisy.edges = sample_pairs(nodes, {}, m, rng);
    sort_unique(noisy.edges);
    return noisy;
}

std::vector<Edge> sample_non_edges(const std::vector<int>& candidates,
                                   const std::vector<Edge>& forbidden, int count, Rng& rng) {
    return sample_pairs(candidates, forbidden, count, rng);
}

LinkEvalSplit split_link_detection(const Snapshot& s, int snapshot_index, double val_frac,
                                   double test_frac, Rng& rng) {
    const int m = static_cast<int>(s.edges.size());
    if (m < 10)
        throw std::invalid_argument("split_link_detection: need at least 10 edges, got " +
                                    std::to_string(m));
    const int n_val = static_cast<int>(std::llround(val_frac * m));
    const int n_test = static_cast<int>(std::llround(test_frac * m));
    if (n_val + n_test >= m)
        throw std::invalid_argument("split_link_detection: held-out fractions leave no training "
                                    "edges");

    std::vector<Edge> shuffled = s.edges;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    LinkEvalSplit split;
    split.task = LinkTask::Detection;
    split.snapshot = snapshot_index;
    split.val_pos.assign(shuffled.begin(), shuffled.begin() + n_val);
    split.test_pos.assign(shuffled.begin() + n_val, shuffled.begin() + n_val + n_test);
    split.train_edges.assign(shuffled.begin() + n_val + n_test, shuffled.end());
    std::sort(split.train_edges.begin(), split.train_edges.end());

    std::vector<Edge> negs = sample_non_edges(s.active_indices(), s.edges, n_val + n_test, rng);
    split.val_neg.assign(negs.begin(), negs.begin() + n_val);
    split.test_neg.assign(negs.begin() + n_val, negs.end());
    return split;
}

std::optional<LinkEvalSplit> build_prediction_targets(const DynamicGraph& g, int t, LinkTask task,
                                                      Rng& rng) {
    if (task == LinkTask::Detection)
        throw std::invalid_argument("build_prediction_targets: detection targets come from "
                                    "split_link_detection");
    if (t + 1 >= g.num_snapshots())
        throw std::invalid_argument("build_prediction_targets: snapshot " + std::to_string(t + 1) +
                                    " out of range");
    const Snapshot& next = g.snapshots[t + 1];
    const Snapshot& cur = g.snapshots[t];

    std::vector<Edge> positives;
    if (task == LinkTask::Prediction) {
        positives = next.edges;
    } else {
        std::set_difference(next.edges.begin(), next.edges.end(), cur.edges.begin(),
                            cur.edges.end(), std::back_inserter(positives));
    }
    if (positives.empty()) return std::nullopt;

    LinkEvalSplit split;
    split.task = task;
    split.snapshot = t + 1;
    split.test_pos = positives;
    split.test_neg = sample_non_edges(next.active_indices(), next.edges,
                                      static_cast<int>(positives.size()), rng);
    return split;
}

}  // namespace dygis
