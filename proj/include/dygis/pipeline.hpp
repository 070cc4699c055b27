#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dygis/dgmae.hpp"
#include "dygis/graph.hpp"
#include "dygis/isg.hpp"
#include "dygis/metrics.hpp"

namespace dygis {

enum class TaskKind { Detect, Predict, NewPredict, Classify };
enum class Ablation { None, NoIsg, NoMi };

std::string to_string(TaskKind task);
std::string to_string(Ablation ablation);
TaskKind task_from_string(const std::string& s);
Ablation ablation_from_string(const std::string& s);
FeatureMode feature_mode_from_string(const std::string& s);

struct RunConfig {
    std::string dataset_path;
    std::string labels_path;    // node classification
    std::string feature_file;   // FeatureMode::File
    TaskKind task = TaskKind::Detect;

    double r = 0.1;
    double lambda = 0.5;
    double tau = 0.7;
    int embed_dim = 32;
    int hidden_dim = 32;
    int isg_epochs = 100;
    int dgmae_epochs = 1000;
    double lr = 1e-3;  // 5e-3 is the documented alternative for some datasets
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    Ablation ablation = Ablation::None;
    FeatureMode feature_mode = FeatureMode::OneHot;
    int num_test_snapshots = 3;

    double val_frac = 0.05;
    double test_frac = 0.10;
    bool dense_recon = false;
    int softmax_candidates = 0;

    int probe_epochs = 300;
    double probe_lr = 2e-2;
    double probe_train_fraction = 0.7;

    void validate() const;
};

struct MetricsRow {
    std::string task;
    std::string seed;  // seed value or "aggregate"
    std::optional<double> auc, ap, acc;
    std::optional<double> auc_std, ap_std, acc_std;
    std::optional<double> auc_all, ap_all;  // detection averaged over all snapshots
    double runtime_seconds = 0.0;
};

struct MetricsReport {
    RunConfig config;
    std::vector<MetricsRow> rows;  // one per seed plus a trailing aggregate

    const MetricsRow& aggregate() const { return rows.back(); }
};

// Artifacts of one seed's run, for the export subcommands and tests.
struct SeedArtifacts {
    std::vector<SubgraphSplit> splits;
    Representation reps;
};

// Two-stage training and evaluation for one seed over a loaded graph.
MetricsRow run_single_seed(const DynamicGraph& g, const NodeLabels* labels,
                           const RunConfig& cfg, std::uint64_t seed,
                           SeedArtifacts* artifacts = nullptr);

// All seeds plus the aggregate row. The graph overload serves synthetic and
// test inputs; the plain overload loads cfg.dataset_path first.
MetricsReport run_pipeline(const DynamicGraph& g, const NodeLabels* labels,
                           const RunConfig& cfg);
MetricsReport run_pipeline(const RunConfig& cfg);

// Full pipeline per ratio value with shared seeds.
std::vector<MetricsReport> sensitivity_sweep(const RunConfig& cfg,
                                             const std::vector<double>& r_values);

// Line-delimited JSON records: one header object, then one object per row.
void write_report(const MetricsReport& report, std::ostream& out);

}  // namespace dygis
