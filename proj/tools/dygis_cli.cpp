#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dygis/pipeline.hpp"
#include "dygis/synth.hpp"

namespace {

using namespace dygis;

constexpr int kExitValidation = 2;
constexpr int kExitData = 3;
constexpr int kExitTraining = 4;

struct CliOptions {
    RunConfig run;
    std::string task = "detect";
    std::string ablation = "none";
    std::string feature_mode = "one-hot";
    std::string seeds = "0,1,2,3,4,5,6,7,8,9";
    std::string results_dir;
    std::string out_name;
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        seeds.push_back(std::stoull(item));
    }
    return seeds;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

void add_hyper_options(CLI::App* app, CliOptions& opt) {
    app->add_option("--dataset", opt.run.dataset_path, "dataset file, lines '<t> <u> <v>'")
        ->required();
    app->add_option("--task", opt.task, "detect|predict|new-predict|classify");
    app->add_option("--labels", opt.run.labels_path, "labels file for classify");
    app->add_option("--features-file", opt.run.feature_file, "feature matrix file");
    app->add_option("--feature-mode", opt.feature_mode, "one-hot|learnable|file");
    app->add_option("--r", opt.run.r, "informative subgraph ratio");
    app->add_option("--lambda", opt.run.lambda, "mutual-information trade-off weight");
    app->add_option("--tau", opt.run.tau, "InfoNCE temperature");
    app->add_option("--dim", opt.run.embed_dim, "embedding dimension");
    app->add_option("--hidden-dim", opt.run.hidden_dim, "recurrent hidden dimension");
    app->add_option("--isg-epochs", opt.run.isg_epochs, "stage-1 epochs");
    app->add_option("--dgmae-epochs", opt.run.dgmae_epochs, "stage-2 epochs");
    app->add_option("--lr", opt.run.lr, "learning rate (1e-3 default, 5e-3 alternative)");
    app->add_option("--seeds", opt.seeds, "comma-separated seed list");
    app->add_option("--ablation", opt.ablation, "none|no-isg|no-mi");
    app->add_option("--test-snapshots", opt.run.num_test_snapshots,
                    "trailing snapshots held out for evaluation");
    app->add_option("--val-frac", opt.run.val_frac, "validation edge fraction (detection)");
    app->add_option("--test-frac", opt.run.test_frac, "test edge fraction (detection)");
    app->add_flag("--dense-recon", opt.run.dense_recon,
                  "score every active pair in the stage-1 loss (<=2000 nodes)");
    app->add_option("--softmax-candidates", opt.run.softmax_candidates,
                    "sampled-softmax size for stage 2, 0 = full");
    app->add_option("--probe-epochs", opt.run.probe_epochs, "linear probe epochs");
    app->add_option("--probe-lr", opt.run.probe_lr, "linear probe learning rate");
    app->add_option("--results-dir", opt.results_dir,
                    "results directory (env DYGIS_RESULTS_DIR)");
    app->add_option("--out", opt.out_name, "results file name override");
    app->set_config("--config", "", "flat key = value config file; flags take precedence");
}

void finalize(CliOptions& opt) {
    opt.run.task = task_from_string(opt.task);
    opt.run.ablation = ablation_from_string(opt.ablation);
    opt.run.feature_mode = feature_mode_from_string(opt.feature_mode);
    opt.run.seeds = parse_seeds(opt.seeds);
    if (opt.results_dir.empty()) {
        if (const char* env = std::getenv("DYGIS_RESULTS_DIR")) opt.results_dir = env;
    }
    if (opt.results_dir.empty()) opt.results_dir = ".";
}

std::string results_path(const CliOptions& opt, const std::string& suffix) {
    std::string name = opt.out_name;
    if (name.empty()) {
        name = std::filesystem::path(opt.run.dataset_path).stem().string() + "_" +
               to_string(opt.run.task) + suffix + ".jsonl";
    }
    return (std::filesystem::path(opt.results_dir) / name).string();
}

void emit(const MetricsReport& report, const std::string& path) {
    write_report(report, std::cout);
    std::filesystem::create_directories(std::filesystem::path(path).parent_path().empty()
                                            ? "."
                                            : std::filesystem::path(path).parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open results file: " + path);
    write_report(report, out);
    std::cerr << "results written to " << path << "\n";
}

int cmd_ingest_check(const CliOptions& opt) {
    DynamicGraph g = load_dynamic_graph(opt.run.dataset_path, opt.run.feature_mode,
                                        opt.run.num_test_snapshots, opt.run.feature_file);
    long long total_edges = 0;
    for (const Snapshot& s : g.snapshots) total_edges += static_cast<long long>(s.edges.size());
    std::cout << "dataset: " << opt.run.dataset_path << "\n"
              << "nodes: " << g.n_global << "\n"
              << "snapshots: " << g.num_snapshots() << "\n"
              << "total edges: " << total_edges << "\n"
              << "test snapshots: " << g.num_test_snapshots << "\n";
    for (int t = 0; t < g.num_snapshots(); ++t)
        std::cout << "  snapshot " << t << ": " << g.snapshots[t].edges.size() << " edges, "
                  << g.snapshots[t].num_active() << " active nodes\n";
    return 0;
}

int cmd_train(const CliOptions& opt) {
    MetricsReport report = run_pipeline(opt.run);
    emit(report, results_path(opt, ""));
    return 0;
}

int cmd_sweep(const CliOptions& opt, const std::string& r_values) {
    std::vector<double> rs = parse_doubles(r_values);
    auto reports = sensitivity_sweep(opt.run, rs);
    for (size_t i = 0; i < reports.size(); ++i) {
        std::ostringstream suffix;
        suffix << "_r" << rs[i];
        emit(reports[i], results_path(opt, suffix.str()));
    }
    return 0;
}

int cmd_export_splits(const CliOptions& opt, std::uint64_t seed, const std::string& out_path) {
    DynamicGraph g = load_dynamic_graph(opt.run.dataset_path, opt.run.feature_mode,
                                        opt.run.num_test_snapshots, opt.run.feature_file);
    IsgConfig cfg;
    cfg.epochs = opt.run.isg_epochs;
    cfg.lambda = opt.run.ablation == Ablation::NoMi ? 0.0 : opt.run.lambda;
    cfg.tau = opt.run.tau;
    cfg.r = opt.run.r;
    cfg.lr = opt.run.lr;
    cfg.seed = seed;
    cfg.embed_dim = opt.run.embed_dim;
    cfg.hidden_dim = opt.run.hidden_dim;
    cfg.dense_recon = opt.run.dense_recon;
    IsgTrainResult result = train_isg(g, cfg);
    save_splits(result.splits, out_path);
    std::cerr << "splits written to " << out_path << "\n";
    return 0;
}

int cmd_export_reps(const CliOptions& opt, std::uint64_t seed, const std::string& out_path) {
    RunConfig cfg = opt.run;
    cfg.seeds = {seed};
    cfg.task = TaskKind::Detect;  // artifacts only; the full graph is trained below
    DynamicGraph g = load_dynamic_graph(cfg.dataset_path, cfg.feature_mode,
                                        cfg.num_test_snapshots, cfg.feature_file);

    // representations over the original graph: stage 1 then stage 2, no edges held out
    std::vector<SubgraphSplit> splits;
    if (cfg.ablation == Ablation::NoIsg) {
        Rng rng(mix_seed(seed, 0xD2));
        splits = random_splits(g, cfg.r, rng);
    } else {
        IsgConfig isg_cfg;
        isg_cfg.epochs = cfg.isg_epochs;
        isg_cfg.lambda = cfg.ablation == Ablation::NoMi ? 0.0 : cfg.lambda;
        isg_cfg.tau = cfg.tau;
        isg_cfg.r = cfg.r;
        isg_cfg.lr = cfg.lr;
        isg_cfg.seed = seed;
        isg_cfg.embed_dim = cfg.embed_dim;
        isg_cfg.hidden_dim = cfg.hidden_dim;
        isg_cfg.dense_recon = cfg.dense_recon;
        splits = train_isg(g, isg_cfg).splits;
    }
    DgmaeConfig dg_cfg;
    dg_cfg.epochs = cfg.dgmae_epochs;
    dg_cfg.lr = cfg.lr;
    dg_cfg.seed = seed;
    dg_cfg.embed_dim = cfg.embed_dim;
    dg_cfg.hidden_dim = cfg.hidden_dim;
    dg_cfg.softmax_candidates = cfg.softmax_candidates;
    DgmaeTrainResult stage2 = train_dgmae(g, splits, dg_cfg);
    save_representation(stage2.reps, out_path);
    std::cerr << "representations written to " << out_path << "\n";
    return 0;
}

int cmd_synth(const SynthConfig& cfg, const std::string& out_path) {
    SynthResult result = generate_hub_dynamic_graph(cfg);
    std::ostringstream hubs;
    hubs << "hubs:";
    for (int h : result.hubs) hubs << " " << h;
    save_dynamic_graph(result.graph, out_path, hubs.str());
    std::cout << "wrote " << out_path << " with " << result.graph.num_snapshots()
              << " snapshots over " << result.graph.n_global << " nodes\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dygis: informative-subgraph masked autoencoding for dynamic graphs"};
    app.require_subcommand(1);

    CliOptions ingest_opt, train_opt, sweep_opt, splits_opt, reps_opt;
    std::string sweep_values = "0.1,0.3,0.5";
    std::uint64_t export_seed = 0;
    std::string export_out;

    CLI::App* ingest = app.add_subcommand("ingest-check", "parse a dataset and print statistics");
    ingest->add_option("--dataset", ingest_opt.run.dataset_path, "dataset file")->required();
    ingest->add_option("--feature-mode", ingest_opt.feature_mode, "one-hot|learnable|file");
    ingest->add_option("--features-file", ingest_opt.run.feature_file, "feature matrix file");
    ingest->add_option("--test-snapshots", ingest_opt.run.num_test_snapshots, "trailing test range");

    CLI::App* train = app.add_subcommand("train", "run the two-stage pipeline and evaluate");
    add_hyper_options(train, train_opt);

    CLI::App* sweep = app.add_subcommand("sweep-r", "run the pipeline per subgraph ratio");
    add_hyper_options(sweep, sweep_opt);
    sweep->add_option("--r-values", sweep_values, "comma-separated ratios");

    CLI::App* exp_splits = app.add_subcommand("export-splits", "stage 1 only, write the splits");
    add_hyper_options(exp_splits, splits_opt);
    exp_splits->add_option("--seed", export_seed, "training seed");
    exp_splits->add_option("--splits-out", export_out, "output path")->required();

    CLI::App* exp_reps = app.add_subcommand("export-reps", "train on the full graph, write Z");
    add_hyper_options(exp_reps, reps_opt);
    exp_reps->add_option("--seed", export_seed, "training seed");
    exp_reps->add_option("--reps-out", export_out, "output path")->required();

    SynthConfig synth_cfg;
    std::string synth_out;
    CLI::App* synth = app.add_subcommand("synth", "generate a planted-hub dynamic graph");
    synth->add_option("--out", synth_out, "output dataset path")->required();
    synth->add_option("--n", synth_cfg.n, "node count");
    synth->add_option("--hubs", synth_cfg.num_hubs, "planted hub count");
    synth->add_option("--snapshots", synth_cfg.num_snapshots, "snapshot count");
    synth->add_option("--attach", synth_cfg.hub_attach_prob, "hub attach probability");
    synth->add_option("--background", synth_cfg.background_edge_prob,
                      "background edge probability");
    synth->add_option("--churn", synth_cfg.churn_prob, "background churn probability");
    synth->add_option("--seed", synth_cfg.seed, "generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) {
            finalize(ingest_opt);
            return cmd_ingest_check(ingest_opt);
        }
        if (train->parsed()) {
            finalize(train_opt);
            return cmd_train(train_opt);
        }
        if (sweep->parsed()) {
            finalize(sweep_opt);
            return cmd_sweep(sweep_opt, sweep_values);
        }
        if (exp_splits->parsed()) {
            finalize(splits_opt);
            return cmd_export_splits(splits_opt, export_seed, export_out);
        }
        if (exp_reps->parsed()) {
            finalize(reps_opt);
            return cmd_export_reps(reps_opt, export_seed, export_out);
        }
        if (synth->parsed()) return cmd_synth(synth_cfg, synth_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::runtime_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTraining;
    }
    return 0;
}
