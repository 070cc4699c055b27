#pragma once

#include <cstdint>
#include <vector>

#include "dygis/dgmae.hpp"
#include "dygis/graph.hpp"

namespace dygis {

struct ScoredPair {
    double score = 0.0;
    int label = 0;  // 1 positive, 0 negative
};

// Mann-Whitney statistic: P(score_pos > score_neg) + 0.5 P(tie). Needs at
// least one positive and one negative.
double auc(const std::vector<ScoredPair>& pairs);

// Mean precision-at-rank over positives, ranked by descending score with
// stable ties (input order). Needs at least one positive.
double average_precision(const std::vector<ScoredPair>& pairs);

struct LinkMetrics {
    double auc_value = 0.0;
    double ap_value = 0.0;
};

// Scores the split's test positives/negatives with the representation of the
// snapshot itself (detection) or the preceding one (prediction tasks).
LinkMetrics eval_link_task(const Representation& reps, const LinkEvalSplit& split,
                           const DynamicGraph& g);

// Same, over the validation pairs of a detection split.
LinkMetrics eval_link_task_val(const Representation& reps, const LinkEvalSplit& split,
                               const DynamicGraph& g);

struct ProbeConfig {
    int epochs = 300;
    double lr = 2e-2;
    double train_fraction = 0.7;
    std::uint64_t seed = 0;
};

// Linear softmax probe on the final snapshot's representations over a
// stratified train/test split of the labeled nodes; the encoder stays frozen.
double node_classification_probe(const Representation& reps, const NodeLabels& labels,
                                 const ProbeConfig& cfg);

}  // namespace dygis
