#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dygis/pipeline.hpp"
#include "dygis/synth.hpp"
#include "support/test_util.hpp"

using namespace dygis;

namespace {

RunConfig quick_config() {
    RunConfig cfg;
    cfg.isg_epochs = 3;
    cfg.dgmae_epochs = 5;
    cfg.embed_dim = 8;
    cfg.hidden_dim = 8;
    cfg.seeds = {0, 1};
    cfg.num_test_snapshots = 2;
    return cfg;
}

DynamicGraph eval_graph() {
    // dense enough that every snapshot survives the 5%/10% detection split
    return test::toy_dynamic_graph(14, 5, 0.35, 2024);
}

}  // namespace

TEST_CASE("config validation names the offending field") {
    RunConfig cfg = quick_config();
    cfg.r = 1.5;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("config field r"),
                         std::invalid_argument);
    cfg.r = 0.1;
    cfg.hidden_dim = 7;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("hidden_dim"), std::invalid_argument);
    cfg.hidden_dim = 8;
    cfg.seeds.clear();
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("seeds"), std::invalid_argument);
}

TEST_CASE("detection pipeline emits per-seed rows plus an aggregate") {
    DynamicGraph g = eval_graph();
    RunConfig cfg = quick_config();
    MetricsReport report = run_pipeline(g, nullptr, cfg);
    REQUIRE(report.rows.size() == 3);  // two seeds + aggregate
    CHECK(report.rows[0].seed == "0");
    CHECK(report.rows[1].seed == "1");
    CHECK(report.rows[2].seed == "aggregate");
    for (const MetricsRow& row : report.rows) {
        REQUIRE(row.auc.has_value());
        REQUIRE(row.ap.has_value());
        CHECK(*row.auc >= 0.0);
        CHECK(*row.auc <= 1.0);
        CHECK(row.auc_all.has_value());  // all-snapshot averaging also reported
    }
    CHECK(report.aggregate().auc_std.has_value());
}

TEST_CASE("rows are deterministic functions of config and seed") {
    DynamicGraph g = eval_graph();
    RunConfig cfg = quick_config();
    cfg.seeds = {7};
    MetricsRow a = run_pipeline(g, nullptr, cfg).rows[0];
    MetricsRow b = run_pipeline(g, nullptr, cfg).rows[0];
    CHECK(*a.auc == *b.auc);  // bit-identical
    CHECK(*a.ap == *b.ap);
    CHECK(*a.auc_all == *b.auc_all);
}

TEST_CASE("no-isg ablation produces lawful random splits") {
    DynamicGraph g = eval_graph();
    RunConfig cfg = quick_config();
    cfg.ablation = Ablation::NoIsg;
    cfg.seeds = {3};
    SeedArtifacts artifacts;
    run_single_seed(g, nullptr, cfg, 3, &artifacts);
    REQUIRE(artifacts.splits.size() == static_cast<size_t>(g.num_snapshots()));
    for (int t = 0; t < g.num_snapshots(); ++t) {
        // splits partition the detection training graph, not the full snapshot
        const size_t m = artifacts.splits[t].informative.size() + artifacts.splits[t].bias.size();
        const int k = std::max(1, static_cast<int>(std::llround(cfg.r * static_cast<double>(m))));
        CHECK(static_cast<int>(artifacts.splits[t].informative.size()) == k);
    }
}

TEST_CASE("no-mi ablation runs stage one without the contrastive term") {
    DynamicGraph g = eval_graph();
    RunConfig cfg = quick_config();
    cfg.ablation = Ablation::NoMi;
    cfg.seeds = {1};
    MetricsReport report = run_pipeline(g, nullptr, cfg);
    CHECK(report.rows.size() == 2);
    CHECK(report.rows[0].auc.has_value());
}

TEST_CASE("prediction and new-prediction tasks score from the previous snapshot") {
    DynamicGraph g = eval_graph();
    RunConfig cfg = quick_config();

    cfg.task = TaskKind::Predict;
    MetricsReport pred = run_pipeline(g, nullptr, cfg);
    CHECK(pred.aggregate().auc.has_value());

    cfg.task = TaskKind::NewPredict;
    MetricsReport newpred = run_pipeline(g, nullptr, cfg);
    CHECK(newpred.aggregate().auc.has_value());
}

TEST_CASE("classification task trains the probe on the final representation") {
    DynamicGraph g = eval_graph();
    NodeLabels labels;
    labels.num_classes = 2;
    for (int i = 0; i < g.n_global; ++i) labels.label.push_back(i % 2);

    RunConfig cfg = quick_config();
    cfg.task = TaskKind::Classify;
    cfg.probe_epochs = 40;
    cfg.seeds = {0};
    MetricsReport report = run_pipeline(g, &labels, cfg);
    REQUIRE(report.aggregate().acc.has_value());
    CHECK(*report.aggregate().acc >= 0.0);
    CHECK(*report.aggregate().acc <= 1.0);
    CHECK_FALSE(report.aggregate().auc.has_value());
}

TEST_CASE("report header echoes the hyperparameters") {
    DynamicGraph g = eval_graph();
    RunConfig cfg = quick_config();
    cfg.seeds = {0};
    MetricsReport report = run_pipeline(g, nullptr, cfg);
    std::ostringstream out;
    write_report(report, out);
    const std::string text = out.str();
    CHECK(text.find("\"r\":0.1") != std::string::npos);
    CHECK(text.find("\"lambda\":0.5") != std::string::npos);
    CHECK(text.find("\"tau\":0.7") != std::string::npos);
    CHECK(text.find("\"embed_dim\":8") != std::string::npos);
    CHECK(text.find("\"seed\":\"aggregate\"") != std::string::npos);
}

TEST_CASE("sweep emits one report per ratio, each reproducible standalone") {
    SynthConfig synth;
    synth.n = 16;
    synth.num_hubs = 3;
    synth.num_snapshots = 4;
    synth.hub_attach_prob = 0.7;
    synth.background_edge_prob = 0.1;
    synth.seed = 5;
    SynthResult sr = generate_hub_dynamic_graph(synth);
    const std::string path = "pipeline_test_synth.txt";
    save_dynamic_graph(sr.graph, path);

    RunConfig cfg = quick_config();
    cfg.dataset_path = path;
    cfg.seeds = {0};
    cfg.num_test_snapshots = 1;

    auto reports = sensitivity_sweep(cfg, {0.1, 0.3, 0.5});
    REQUIRE(reports.size() == 3);
    CHECK(reports[0].config.r == 0.1);
    CHECK(reports[2].config.r == 0.5);

    // a sweep row must match a standalone pipeline run at the same ratio
    RunConfig standalone = cfg;
    standalone.r = 0.3;
    MetricsReport direct = run_pipeline(standalone);
    CHECK(*reports[1].aggregate().auc == *direct.aggregate().auc);

    auto single = sensitivity_sweep(cfg, {0.1});
    CHECK(single.size() == 1);
    CHECK(*single[0].aggregate().auc == *reports[0].aggregate().auc);
    std::remove(path.c_str());
}

TEST_CASE("dataset-path pipeline loads labels for classification") {
    SynthConfig synth;
    synth.n = 14;
    synth.num_hubs = 3;
    synth.num_snapshots = 3;
    synth.hub_attach_prob = 0.7;
    synth.background_edge_prob = 0.12;
    synth.seed = 9;
    SynthResult sr = generate_hub_dynamic_graph(synth);
    const std::string gpath = "pipeline_test_cls.txt";
    const std::string lpath = "pipeline_test_cls_labels.txt";
    save_dynamic_graph(sr.graph, gpath);
    {
        std::ofstream out(lpath);
        for (int i = 0; i < synth.n; ++i) out << i << " " << (i % 3) << "\n";
    }

    RunConfig cfg = quick_config();
    cfg.task = TaskKind::Classify;
    cfg.dataset_path = gpath;
    cfg.labels_path = lpath;
    cfg.probe_epochs = 30;
    cfg.seeds = {0};
    cfg.num_test_snapshots = 1;
    MetricsReport report = run_pipeline(cfg);
    CHECK(report.aggregate().acc.has_value());
    std::remove(gpath.c_str());
    std::remove(lpath.c_str());
}
