#include "dygis/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace dygis {

std::string to_string(TaskKind task) {
    switch (task) {
        case TaskKind::Detect: return "detect";
        case TaskKind::Predict: return "predict";
        case TaskKind::NewPredict: return "new-predict";
        case TaskKind::Classify: return "classify";
    }
    return "?";
}

std::string to_string(Ablation ablation) {
    switch (ablation) {
        case Ablation::None: return "none";
        case Ablation::NoIsg: return "no-isg";
        case Ablation::NoMi: return "no-mi";
    }
    return "?";
}

TaskKind task_from_string(const std::string& s) {
    if (s == "detect") return TaskKind::Detect;
    if (s == "predict") return TaskKind::Predict;
    if (s == "new-predict") return TaskKind::NewPredict;
    if (s == "classify") return TaskKind::Classify;
    throw std::invalid_argument("unknown task '" + s +
                                "' (expected detect|predict|new-predict|classify)");
}

Ablation ablation_from_string(const std::string& s) {
    if (s == "none") return Ablation::None;
    if (s == "no-isg") return Ablation::NoIsg;
    if (s == "no-mi") return Ablation::NoMi;
    throw std::invalid_argument("unknown ablation '" + s + "' (expected none|no-isg|no-mi)");
}

FeatureMode feature_mode_from_string(const std::string& s) {
    if (s == "one-hot") return FeatureMode::OneHot;
    if (s == "learnable") return FeatureMode::Learnable;
    if (s == "file") return FeatureMode::File;
    throw std::invalid_argument("unknown feature mode '" + s +
                                "' (expected one-hot|learnable|file)");
}

void RunConfig::validate() const {
    if (!(r > 0.0 && r <= 1.0))
        throw std::invalid_argument("config field r: must be in (0, 1], got " + std::to_string(r));
    if (!(tau > 0.0)) throw std::invalid_argument("config field tau: must be positive");
    if (lambda < 0.0) throw std::invalid_argument("config field lambda: must be >= 0");
    if (embed_dim <= 0) throw std::invalid_argument("config field embed_dim: must be positive");
    if (hidden_dim <= 0 || hidden_dim % 2 != 0)
        throw std::invalid_argument("config field hidden_dim: must be positive and even");
    if (isg_epochs < 0) throw std::invalid_argument("config field isg_epochs: must be >= 0");
    if (dgmae_epochs < 0) throw std::invalid_argument("config field dgmae_epochs: must be >= 0");
    if (lr <= 0.0) throw std::invalid_argument("config field lr: must be positive");
    if (seeds.empty()) throw std::invalid_argument("config field seeds: must be non-empty");
    if (num_test_snapshots < 1)
        throw std::invalid_argument("config field num_test_snapshots: must be >= 1");
    if (!(val_frac >= 0.0 && val_frac < 1.0))
        throw std::invalid_argument("config field val_frac: must be in [0, 1)");
    if (!(test_frac > 0.0 && test_frac < 1.0))
        throw std::invalid_argument("config field test_frac: must be in (0, 1)");
    if (probe_epochs <= 0) throw std::invalid_argument("config field probe_epochs: must be > 0");
    if (probe_lr <= 0.0) throw std::invalid_argument("config field probe_lr: must be positive");
    if (!(probe_train_fraction > 0.0 && probe_train_fraction < 1.0))
        throw std::invalid_argument("config field probe_train_fraction: must be in (0, 1)");
    if (softmax_candidates < 0)
        throw std::invalid_argument("config field softmax_candidates: must be >= 0");
}

namespace {

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    if (xs.empty()) return out;
    for (double x : xs) out.mean += x;
    out.mean /= static_cast<double>(xs.size());
    if (xs.size() >= 2) {
        double acc = 0.0;
        for (double x : xs) acc += (x - out.mean) * (x - out.mean);
        out.std = std::sqrt(acc / static_cast<double>(xs.size() - 1));
    }
    return out;
}

IsgConfig isg_config_of(const RunConfig& cfg, std::uint64_t seed, int prefix) {
    IsgConfig out;
    out.epochs = cfg.isg_epochs;
    out.lambda = cfg.ablation == Ablation::NoMi ? 0.0 : cfg.lambda;
    out.tau = cfg.tau;
    out.r = cfg.r;
    out.lr = cfg.lr;
    out.seed = seed;
    out.embed_dim = cfg.embed_dim;
    out.hidden_dim = cfg.hidden_dim;
    out.dense_recon = cfg.dense_recon;
    out.train_prefix = prefix;
    return out;
}

DgmaeConfig dgmae_config_of(const RunConfig& cfg, std::uint64_t seed, int prefix) {
    DgmaeConfig out;
    out.epochs = cfg.dgmae_epochs;
    out.lr = cfg.lr;
    out.seed = seed;
    out.embed_dim = cfg.embed_dim;
    out.hidden_dim = cfg.hidden_dim;
    out.train_prefix = prefix;
    out.softmax_candidates = cfg.softmax_candidates;
    return out;
}

std::vector<SubgraphSplit> stage_one(const DynamicGraph& train_graph, const RunConfig& cfg,
                                     std::uint64_t seed, int prefix) {
    if (cfg.ablation == Ablation::NoIsg) {
        Rng rng(mix_seed(seed, 0xD2));
        return random_splits(train_graph, cfg.r, rng);
    }
    return train_isg(train_graph, isg_config_of(cfg, seed, prefix)).splits;
}

}  // namespace

MetricsRow run_single_seed(const DynamicGraph& g, const NodeLabels* labels, const RunConfig& cfg,
                           std::uint64_t seed, SeedArtifacts* artifacts) {
    const auto t_start = std::chrono::steady_clock::now();
    const int T = g.num_snapshots();
    const int l = std::min(cfg.num_test_snapshots, T - 1);

    MetricsRow row;
    row.task = to_string(cfg.task);
    row.seed = std::to_string(seed);

    if (cfg.task == TaskKind::Detect) {
        // held-out edges are hidden from both training stages
        Rng split_rng(mix_seed(seed, 0xD1));
        std::vector<LinkEvalSplit> det_splits;
        DynamicGraph train_graph = g;
        for (int t = 0; t < T; ++t) {
            det_splits.push_back(
                split_link_detection(g.snapshots[t], t, cfg.val_frac, cfg.test_frac, split_rng));
            train_graph.snapshots[t].edges = det_splits.back().train_edges;
        }

        auto splits = stage_one(train_graph, cfg, seed, T);
        auto stage2 = train_dgmae(train_graph, splits, dgmae_config_of(cfg, seed, T));

        std::vector<double> aucs_all, aps_all;
        double auc_window = 0.0, ap_window = 0.0;
        for (int t = 0; t < T; ++t) {
            LinkMetrics m = eval_link_task(stage2.reps, det_splits[t], g);
            aucs_all.push_back(m.auc_value);
            aps_all.push_back(m.ap_value);
            if (t >= T - l) {
                auc_window += m.auc_value;
                ap_window += m.ap_value;
            }
        }
        row.auc = auc_window / l;
        row.ap = ap_window / l;
        row.auc_all = mean_std(aucs_all).mean;
        row.ap_all = mean_std(aps_all).mean;
        if (artifacts) *artifacts = {std::move(splits), std::move(stage2.reps)};
    } else if (cfg.task == TaskKind::Predict || cfg.task == TaskKind::NewPredict) {
        const int prefix = T - l;
        if (prefix < 1)
            throw std::invalid_argument("prediction tasks need at least one training snapshot");
        const LinkTask kind =
            cfg.task == TaskKind::Predict ? LinkTask::Prediction : LinkTask::NewPrediction;

        auto splits = stage_one(g, cfg, seed, prefix);
        auto stage2 = train_dgmae(g, splits, dgmae_config_of(cfg, seed, prefix));

        Rng target_rng(mix_seed(seed, 0xD3));
        std::vector<double> aucs, aps;
        for (int target = prefix; target < T; ++target) {
            auto split = build_prediction_targets(g, target - 1, kind, target_rng);
            if (!split) continue;  // empty-target snapshot, skipped
            LinkMetrics m = eval_link_task(stage2.reps, *split, g);
            aucs.push_back(m.auc_value);
            aps.push_back(m.ap_value);
        }
        if (aucs.empty())
            throw std::runtime_error("prediction task has no non-empty targets in the test range");
        row.auc = mean_std(aucs).mean;
        row.ap = mean_std(aps).mean;
        if (artifacts) *artifacts = {std::move(splits), std::move(stage2.reps)};
    } else {
        if (!labels) throw std::invalid_argument("classification task requires a labels file");
        auto splits = stage_one(g, cfg, seed, T);
        auto stage2 = train_dgmae(g, splits, dgmae_config_of(cfg, seed, T));

        ProbeConfig probe;
        probe.epochs = cfg.probe_epochs;
        probe.lr = cfg.probe_lr;
        probe.train_fraction = cfg.probe_train_fraction;
        probe.seed = seed;
        row.acc = node_classification_probe(stage2.reps, *labels, probe);
        if (artifacts) *artifacts = {std::move(splits), std::move(stage2.reps)};
    }

    row.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return row;
}

MetricsReport run_pipeline(const DynamicGraph& g, const NodeLabels* labels,
                           const RunConfig& cfg) {
    cfg.validate();
    if (g.num_snapshots() < 2)
        throw std::invalid_argument("pipeline needs at least two snapshots");

    MetricsReport report;
    report.config = cfg;

    std::vector<double> aucs, aps, accs, aucs_all, aps_all, runtimes;
    for (std::uint64_t seed : cfg.seeds) {
        MetricsRow row = run_single_seed(g, labels, cfg, seed);
        if (row.auc) aucs.push_back(*row.auc);
        if (row.ap) aps.push_back(*row.ap);
        if (row.acc) accs.push_back(*row.acc);
        if (row.auc_all) aucs_all.push_back(*row.auc_all);
        if (row.ap_all) aps_all.push_back(*row.ap_all);
        runtimes.push_back(row.runtime_seconds);
        report.rows.push_back(std::move(row));
    }

    MetricsRow agg;
    agg.task = to_string(cfg.task);
    agg.seed = "aggregate";
    if (!aucs.empty()) {
        MeanStd s = mean_std(aucs);
        agg.auc = s.mean;
        agg.auc_std = s.std;
    }
    if (!aps.empty()) {
        MeanStd s = mean_std(aps);
        agg.ap = s.mean;
        agg.ap_std = s.std;
    }
    if (!accs.empty()) {
        MeanStd s = mean_std(accs);
        agg.acc = s.mean;
        agg.acc_std = s.std;
    }
    if (!aucs_all.empty()) agg.auc_all = mean_std(aucs_all).mean;
    if (!aps_all.empty()) agg.ap_all = mean_std(aps_all).mean;
    agg.runtime_seconds = mean_std(runtimes).mean;
    report.rows.push_back(std::move(agg));
    return report;
}

MetricsReport run_pipeline(const RunConfig& cfg) {
    cfg.validate();
    DynamicGraph g = load_dynamic_graph(cfg.dataset_path, cfg.feature_mode,
                                        cfg.num_test_snapshots, cfg.feature_file);
    std::optional<NodeLabels> labels;
    if (cfg.task == TaskKind::Classify) {
        if (cfg.labels_path.empty())
            throw std::invalid_argument("config field labels_path: required for classify");
        labels = load_labels(cfg.labels_path, g);
    }
    return run_pipeline(g, labels ? &*labels : nullptr, cfg);
}

std::vector<MetricsReport> sensitivity_sweep(const RunConfig& cfg,
                                             const std::vector<double>& r_values) {
    if (r_values.empty()) throw std::invalid_argument("sweep: no r values");
    std::vector<MetricsReport> reports;
    for (double r : r_values) {
        RunConfig per = cfg;
        per.r = r;
        reports.push_back(run_pipeline(per));
    }
    return reports;
}

void write_report(const MetricsReport& report, std::ostream& out) {
    const RunConfig& cfg = report.config;
    nlohmann::json header{{"type", "header"},
                          {"task", to_string(cfg.task)},
                          {"dataset", cfg.dataset_path},
                          {"r", cfg.r},
                          {"lambda", cfg.lambda},
                          {"tau", cfg.tau},
                          {"embed_dim", cfg.embed_dim},
                          {"hidden_dim", cfg.hidden_dim},
                          {"isg_epochs", cfg.isg_epochs},
                          {"dgmae_epochs", cfg.dgmae_epochs},
                          {"lr", cfg.lr},
                          {"ablation", to_string(cfg.ablation)},
                          {"num_seeds", cfg.seeds.size()}};
    out << header.dump() << "\n";
    for (const MetricsRow& row : report.rows) {
        nlohmann::json obj{{"task", row.task}, {"seed", row.seed}};
        auto put = [&](const char* key, const std::optional<double>& v) {
            if (v) obj[key] = *v;
        };
        put("auc", row.auc);
        put("ap", row.ap);
        put("acc", row.acc);
        put("auc_std", row.auc_std);
        put("ap_std", row.ap_std);
        put("acc_std", row.acc_std);
        put("auc_all_snapshots", row.auc_all);
        put("ap_all_snapshots", row.ap_all);
        obj["runtime_seconds"] = row.runtime_seconds;
        out << obj.dump() << "\n";
    }
}

}  // namespace dygis
