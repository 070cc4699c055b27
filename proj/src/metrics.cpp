#include "dygis/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dygis/autodiff.hpp"
#include "dygis/optimizer.hpp"
#include "dygis/rng.hpp"

namespace dygis {

double auc(const std::vector<ScoredPair>& pairs) {
    long long n_pos = 0, n_neg = 0;
    for (const ScoredPair& p : pairs) {
        if (!std::isfinite(p.score)) throw std::invalid_argument("auc: non-finite score");
        (p.label ? n_pos : n_neg) += 1;
    }
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("auc: need at least one positive and one negative");

    std::vector<int> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return pairs[a].score < pairs[b].score; });

    // average ranks over tie groups, accumulate positive rank sum
    double pos_rank_sum = 0.0;
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j < order.size() && pairs[order[j]].score == pairs[order[i]].score) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (size_t k = i; k < j; ++k)
            if (pairs[order[k]].label) pos_rank_sum += avg_rank;
        i = j;
    }
    const double n_pos_d = static_cast<double>(n_pos);
    return (pos_rank_sum - n_pos_d * (n_pos_d + 1.0) / 2.0) /
           (n_pos_d * static_cast<double>(n_neg));
}

double average_precision(const std::vector<ScoredPair>& pairs) {
    long long n_pos = 0;
    for (const ScoredPair& p : pairs) {
        if (!std::isfinite(p.score))
            throw std::invalid_argument("average_precision: non-finite score");
        n_pos += (p.label != 0);
    }
    if (n_pos == 0) throw std::invalid_argument("average_precision: no positives");

    std::vector<int> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return pairs[a].score > pairs[b].score; });

    double sum_precision = 0.0;
    long long hits = 0;
    for (size_t rank = 0; rank < order.size(); ++rank) {
        if (pairs[order[rank]].label) {
            ++hits;
            sum_precision += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    return sum_precision / static_cast<double>(n_pos);
}

namespace {

LinkMetrics score_pairs(const Representation& reps, const LinkEvalSplit& split,
                        const DynamicGraph& g, const std::vector<Edge>& pos,
                        const std::vector<Edge>& neg) {
    if (pos.empty()) throw std::invalid_argument("eval_link_task: empty positive set");
    const int z_index = split.task == LinkTask::Detection ? split.snapshot : split.snapshot - 1;
    if (z_index < 0 || z_index >= static_cast<int>(reps.link_features.size()))
        throw std::invalid_argument("eval_link_task: representation for snapshot " +
                                    std::to_string(z_index) + " unavailable");
    const Tensor& z = reps.link_features[z_index];
    const std::vector<char>& active = g.snapshots[split.snapshot].active;

    std::vector<ScoredPair> scored;
    scored.reserve(pos.size() + neg.size());
    for (const Edge& e : pos) scored.push_back({link_score(z, e.first, e.second, active), 1});
    for (const Edge& e : neg) scored.push_back({link_score(z, e.first, e.second, active), 0});
    return {auc(scored), average_precision(scored)};
}

}  // namespace

LinkMetrics eval_link_task(const Representation& reps, const LinkEvalSplit& split,
                           const DynamicGraph& g) {
    return score_pairs(reps, split, g, split.test_pos, split.test_neg);
}

LinkMetrics eval_link_task_val(const Representation& reps, const LinkEvalSplit& split,
                               const DynamicGraph& g) {
    return score_pairs(reps, split, g, split.val_pos, split.val_neg);
}

double node_classification_probe(const Representation& reps, const NodeLabels& labels,
                                 const ProbeConfig& cfg) {
    if (reps.z.empty()) throw std::invalid_argument("probe: no representations");
    if (labels.num_classes < 2)
        throw std::invalid_argument("probe: need at least two classes, got " +
                                    std::to_string(labels.num_classes));
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
        throw std::invalid_argument("probe: train fraction must be in (0, 1)");
    if (cfg.epochs <= 0) throw std::invalid_argument("probe: epochs must be positive");

    const Tensor& z = reps.z.back();
    const int num_classes = labels.num_classes;

    // stratified split, seed-controlled
    Rng rng(mix_seed(cfg.seed, 0xC1));
    std::vector<std::vector<int>> by_class(num_classes);
    for (int i = 0; i < static_cast<int>(labels.label.size()); ++i)
        if (labels.label[i] >= 0) by_class[labels.label[i]].push_back(i);

    std::vector<int> train_nodes, test_nodes;
    for (auto& members : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        const int n_train = static_cast<int>(
            std::ceil(cfg.train_fraction * static_cast<double>(members.size())));
        for (size_t k = 0; k < members.size(); ++k)
            (static_cast<int>(k) < n_train ? train_nodes : test_nodes).push_back(members[k]);
    }
    if (train_nodes.empty() || test_nodes.empty())
        throw std::invalid_argument("probe: degenerate train/test split");

    auto gather = [&](const std::vector<int>& nodes) {
        Tensor out(static_cast<int>(nodes.size()), z.cols());
        for (size_t i = 0; i < nodes.size(); ++i)
            for (int j = 0; j < z.cols(); ++j) out(static_cast<int>(i), j) = z(nodes[i], j);
        return out;
    };
    Tensor x_train = gather(train_nodes);
    Tensor x_test = gather(test_nodes);

    ad::Param w(Tensor(z.cols(), num_classes));
    ad::Param b(Tensor(1, num_classes));
    AdamConfig adam_cfg;
    adam_cfg.lr = cfg.lr;
    Adam opt({&w, &b}, adam_cfg);

    std::vector<std::pair<int, int>> label_entries;
    label_entries.reserve(train_nodes.size());
    for (size_t i = 0; i < train_nodes.size(); ++i)
        label_entries.push_back({static_cast<int>(i), labels.label[train_nodes[i]]});

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        opt.zero_grad();
        ad::Tape t;
        ad::Var logits = ad::add_rowvec(ad::matmul(t.constant(x_train), t.input(w)), t.input(b));
        ad::Var lse = ad::log_sum_exp_rows(logits);
        ad::Var correct = ad::select_entries(logits, label_entries);
        ad::Var loss = ad::mean(ad::sub(lse, correct));
        t.backward(loss);
        opt.step();
    }

    // held-out accuracy with the frozen probe
    Tensor logits = matmul_plain(x_test, w.value);
    int correct = 0;
    for (size_t i = 0; i < test_nodes.size(); ++i) {
        int best = 0;
        double best_v = logits(static_cast<int>(i), 0) + b.value(0, 0);
        for (int c = 1; c < num_classes; ++c) {
            const double v = logits(static_cast<int>(i), c) + b.value(0, c);
            if (v > best_v) {
                best_v = v;
                best = c;
            }
        }
        correct += (best == labels.label[test_nodes[i]]);
    }
    return static_cast<double>(correct) / static_cast<double>(test_nodes.size());
}

}  // namespace dygis
