#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dygis/rng.hpp"
#include "dygis/tensor.hpp"

namespace dygis {

// Undirected edge stored as (min, max).
using Edge = std::pair<int, int>;

inline Edge make_edge(int u, int v) { return u < v ? Edge{u, v} : Edge{v, u}; }

enum class FeatureMode { OneHot, Learnable, File };

// One time step of a dynamic graph over the global node index space.
struct Snapshot {
    std::vector<Edge> edges;           // sorted, unique, no self-loops
    std::vector<char> active;          // size n_global
    std::shared_ptr<const Tensor> features;  // null in learnable mode

    int num_active() const;
    std::vector<int> active_indices() const;
    bool has_edge(int u, int v) const;  // binary search over sorted edges
};

struct DynamicGraph {
    int n_global = 0;
    int num_test_snapshots = 0;  // trailing snapshots reserved for evaluation
    FeatureMode feature_mode = FeatureMode::OneHot;
    int feature_dim = 0;
    std::vector<Snapshot> snapshots;
    std::vector<long long> original_ids;  // position = remapped id

    int num_snapshots() const { return static_cast<int>(snapshots.size()); }
};

// Partition of one snapshot's edges at ratio r; informative edges are the
// evolution carriers, bias edges the masked reconstruction target.
struct SubgraphSplit {
    std::vector<Edge> informative;
    std::vector<Edge> bias;
    double ratio = 0.0;
};

enum class LinkTask { Detection, Prediction, NewPrediction };

struct LinkEvalSplit {
    LinkTask task = LinkTask::Detection;
    int snapshot = 0;  // snapshot whose edges are being evaluated
    std::vector<Edge> train_edges;
    std::vector<Edge> val_pos, val_neg;
    std::vector<Edge> test_pos, test_neg;
};

struct NodeLabels {
    std::vector<int> label;  // -1 = unlabeled
    int num_classes = 0;
};

// --- ingestion ----------------------------------------------------------------

// Text format: "<snapshot-index> <src-id> <dst-id>", '#' comments, snapshot
// indices non-decreasing with no gaps. Arbitrary node ids are remapped to a
// contiguous 0-based space (sorted by original id). Self-loops are dropped
// with a warning on stderr; duplicate edges collapse silently.
DynamicGraph load_dynamic_graph(const std::string& path, FeatureMode mode,
                                int num_test_snapshots = 3,
                                const std::string& feature_file = "");

// "<node-id> <class-id>" with ids in the dataset's original id space.
NodeLabels load_labels(const std::string& path, const DynamicGraph& g);

void save_dynamic_graph(const DynamicGraph& g, const std::string& path,
                        const std::string& header_comment = "");

// --- snapshot operations --------------------------------------------------------

// Symmetric self-loop normalization D^-1/2 (A+I) D^-1/2 over active nodes;
// rows and columns of inactive nodes stay zero.
Tensor normalize_adjacency(const Snapshot& s);

// Adjacency normalization for an arbitrary edge subset (same rule); the
// active mask still decides which nodes get self-loops.
Tensor normalize_edges(const std::vector<Edge>& edges, const std::vector<char>& active);

// Uniform random graph over the snapshot's active nodes with exactly the
// same edge count; features and active mask carried over.
Snapshot erdos_renyi_like(const Snapshot& s, Rng& rng);

// Uniformly sample `count` distinct node pairs among `candidates` that do not
// appear in `forbidden` (sorted edge list). Throws if capacity is too small.
std::vector<Edge> sample_non_edges(const std::vector<int>& candidates,
                                   const std::vector<Edge>& forbidden, int count, Rng& rng);

// --- evaluation splits -----------------------------------------------------------

LinkEvalSplit split_link_detection(const Snapshot& s, int snapshot_index, double val_frac,
                                   double test_frac, Rng& rng);

// Positives for predicting snapshot t+1 from snapshot t. Returns nullopt when
// the positive set is empty (new-prediction over identical snapshots).
std::optional<LinkEvalSplit> build_prediction_targets(const DynamicGraph& g, int t,
                                                      LinkTask task, Rng& rng);

}  // namespace dygis
