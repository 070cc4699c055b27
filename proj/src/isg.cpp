#include "dygis/isg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dygis/optimizer.hpp"

namespace dygis {

using ad::Gaussian;
using ad::Tape;
using ad::Var;

void IsgConfig::validate() const {
    if (!(r > 0.0 && r <= 1.0))
        throw std::invalid_argument("isg config: r must be in (0, 1], got " + std::to_string(r));
    if (!(tau > 0.0)) throw std::invalid_argument("isg config: tau must be positive");
    if (lambda < 0.0) throw std::invalid_argument("isg config: lambda must be >= 0");
    if (epochs < 0) throw std::invalid_argument("isg config: epochs must be >= 0");
    if (lr <= 0.0) throw std::invalid_argument("isg config: learning rate must be positive");
    if (embed_dim <= 0) throw std::invalid_argument("isg config: embed dim must be positive");
    if (hidden_dim <= 0 || hidden_dim % 2 != 0)
        throw std::invalid_argument("isg config: hidden dim must be positive and even");
}

IsgParams::IsgParams(int feat_dim, const IsgConfig& cfg, Rng& rng) {
    const int h = cfg.hidden_dim;
    const int d = cfg.embed_dim;
    const int half = h / 2;
    phi_x = Dense(feat_dim, half, rng);
    enc_shared = GcnLayer(half + h, h, rng);
    enc_mu = GcnLayer(h, d, rng);
    enc_logvar = GcnLayer(h, d, rng);
    prior_hidden = Dense(h, h, rng);
    prior_mu = Dense(h, d, rng);
    prior_logvar = Dense(h, d, rng);
    dec_l1 = Dense(d, d, rng);
    dec_l2 = Dense(d, d, rng);
    gcrn = GcrnParams(feat_dim, d, h, rng);
}

std::vector<ad::Param*> IsgParams::parameters() {
    std::vector<ad::Param*> out;
    phi_x.collect(out);
    enc_shared.collect(out);
    enc_mu.collect(out);
    enc_logvar.collect(out);
    prior_hidden.collect(out);
    prior_mu.collect(out);
    prior_logvar.collect(out);
    dec_l1.collect(out);
    dec_l2.collect(out);
    gcrn.collect(out);
    return out;
}

Gaussian isg_encode(Tape& t, Var a_hat, Var x, Var h_prev, IsgParams& p) {
    Var stream = ad::concat_cols(ad::tanh(p.phi_x.apply(t, x)), h_prev);
    Var h1 = ad::relu(p.enc_shared.apply(t, a_hat, stream));
    return {p.enc_mu.apply(t, a_hat, h1), p.enc_logvar.apply(t, a_hat, h1)};
}

Gaussian isg_prior(Tape& t, Var h_prev, IsgParams& p) {
    // tanh keeps the map smooth at H = 0, where zero-init weights would park
    // a rectifier exactly on its kink
    Var hidden = ad::tanh(p.prior_hidden.apply(t, h_prev));
    return {p.prior_mu.apply(t, hidden), p.prior_logvar.apply(t, hidden)};
}

Var isg_decoder_features(Tape& t, Var z, IsgParams& p) {
    return p.dec_l2.apply(t, ad::relu(p.dec_l1.apply(t, z)));
}

Var pair_scores(Var decoder_out, const std::vector<Edge>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("pair_scores: empty pair list");
    std::vector<int> us, vs;
    us.reserve(pairs.size());
    vs.reserve(pairs.size());
    for (const Edge& e : pairs) {
        us.push_back(e.first);
        vs.push_back(e.second);
    }
    Var fu = ad::gather_rows(decoder_out, std::move(us));
    Var fv = ad::gather_rows(decoder_out, std::move(vs));
    return ad::sigmoid(ad::rowsum(ad::hadamard(fu, fv)));
}

EdgeScoreMap decode_probabilistic(Tape& t, Var z, const std::vector<Edge>& edges, IsgParams& p) {
    EdgeScoreMap scores;
    if (edges.empty()) return scores;
    Var s = pair_scores(isg_decoder_features(t, z, p), edges);
    for (size_t i = 0; i < edges.size(); ++i) scores[edges[i]] = s.value()(static_cast<int>(i), 0);
    return scores;
}

namespace {

constexpr double kScoreClipLo = 1e-7;
constexpr double kScoreClipHi = 1.0 - 1e-7;

Var clipped_log(Var scores) { return ad::log(ad::clip(scores, kScoreClipLo, kScoreClipHi)); }

}  // namespace

Var reconstruction_elbo(Var pos_scores, Var neg_scores, const Gaussian& q, const Gaussian& prior,
                        double kl_weight) {
    Var bce = ad::negate(ad::sum(clipped_log(pos_scores)));
    if (neg_scores.valid()) {
        Var one_minus = ad::add_scalar(ad::negate(neg_scores), 1.0);
        bce = ad::add(bce, ad::negate(ad::sum(clipped_log(one_minus))));
    }
    Var kl = ad::gaussian_kl(q, prior);
    if (kl_weight != 1.0) kl = ad::scale(kl, kl_weight);
    return ad::add(kl, bce);
}

Var infonce_loss(Var z, Var z_noisy, const std::vector<int>& anchors, double tau) {
    if (anchors.empty()) throw std::invalid_argument("infonce_loss: no active anchors");
    if (!(tau > 0.0)) throw std::invalid_argument("infonce_loss: tau must be positive");
    Var nz = ad::row_l2_normalize(ad::gather_rows(z, anchors));
    Var nzr = ad::row_l2_normalize(ad::gather_rows(z_noisy, anchors));

    const double inv_tau = 1.0 / tau;
    Var sim_zr = ad::scale(ad::matmul(nz, ad::transpose(nzr)), inv_tau);
    Var sim_zz = ad::scale(ad::matmul(nz, ad::transpose(nz)), inv_tau);

    std::vector<std::pair<int, int>> diag;
    diag.reserve(anchors.size());
    for (int i = 0; i < static_cast<int>(anchors.size()); ++i) diag.push_back({i, i});

    Var numerator_log = ad::select_entries(sim_zr, diag);
    Var denom = ad::sub(ad::add(ad::rowsum(ad::exp(sim_zr)), ad::rowsum(ad::exp(sim_zz))),
                        ad::exp(ad::select_entries(sim_zz, diag)));
    return ad::mean(ad::sub(numerator_log, ad::log(denom)));
}

SubgraphSplit select_subgraphs(const Snapshot& s, const EdgeScoreMap& scores, double r) {
    if (s.edges.empty()) throw std::invalid_argument("select_subgraphs: empty edge set");
    if (!(r > 0.0 && r <= 1.0))
        throw std::invalid_argument("select_subgraphs: r must be in (0, 1]");
    if (scores.size() != s.edges.size())
        throw std::invalid_argument("select_subgraphs: scores cover " +
                                    std::to_string(scores.size()) + " edges, snapshot has " +
                                    std::to_string(s.edges.size()));

    std::vector<std::pair<double, Edge>> ranked;
    ranked.reserve(s.edges.size());
    for (const Edge& e : s.edges) {
        auto it = scores.find(e);
        if (it == scores.end())
            throw std::invalid_argument("select_subgraphs: missing score for edge (" +
                                        std::to_string(e.first) + "," +
                                        std::to_string(e.second) + ")");
        ranked.push_back({it->second, e});
    }
    std::sort(ranked.begin(), ranked.end());  // score asc, then (u, v) asc

    const int m = static_cast<int>(ranked.size());
    const int k = std::max(1, static_cast<int>(std::llround(r * m)));

    SubgraphSplit split;
    split.ratio = r;
    for (int i = 0; i < m; ++i)
        (i < k ? split.informative : split.bias).push_back(ranked[i].second);
    std::sort(split.informative.begin(), split.informative.end());
    std::sort(split.bias.begin(), split.bias.end());
    return split;
}

Var isg_sequence_loss(Tape& t, IsgSequenceInputs& in, IsgParams& p, const IsgConfig& cfg) {
    const DynamicGraph& g = *in.graph;
    Var h = t.constant(Tensor(g.n_global, cfg.hidden_dim));
    Var total;
    for (int ti = 0; ti < in.prefix; ++ti) {
        const Snapshot& s = g.snapshots[ti];
        Var x = in.learnable_features ? t.input(*in.learnable_features)
                                      : t.constant(s.features);
        Var a = t.constant(in.a_hat[ti]);
        Var a_noisy = t.constant(in.noise[ti].a_hat_noisy);

        Gaussian q = isg_encode(t, a, x, h, p);
        Gaussian q_noisy = isg_encode(t, a_noisy, x, h, p);
        Gaussian prior = isg_prior(t, h, p);

        Var z = ad::reparameterize(q.mu, q.logvar, in.noise[ti].eps);
        Var z_noisy = ad::reparameterize(q_noisy.mu, q_noisy.logvar, in.noise[ti].eps_noisy);

        const std::vector<int> anchors = s.active_indices();
        Gaussian q_act{ad::gather_rows(q.mu, anchors), ad::gather_rows(q.logvar, anchors)};
        Gaussian prior_act{ad::gather_rows(prior.mu, anchors),
                           ad::gather_rows(prior.logvar, anchors)};

        Var features = isg_decoder_features(t, z, p);
        Var pos = pair_scores(features, s.edges);
        Var neg;
        if (!in.noise[ti].negatives.empty()) neg = pair_scores(features, in.noise[ti].negatives);

        // KL averaged per active node; the summed form swamps the likelihood
        // and collapses the posterior onto the prior
        Var term = reconstruction_elbo(pos, neg, q_act, prior_act,
                                       1.0 / static_cast<double>(anchors.size()));
        if (cfg.lambda != 0.0) {
            Var mi = infonce_loss(z, z_noisy, anchors, cfg.tau);
            term = ad::sub(term, ad::scale(mi, cfg.lambda));
        }
        total = total.valid() ? ad::add(total, term) : term;

        h = gcrn_step(t, a, x, z, h, p.gcrn);
    }
    if (!total.valid()) throw std::invalid_argument("isg_sequence_loss: empty training prefix");
    return total;
}

namespace {

std::vector<Edge> all_non_edges(const Snapshot& s) {
    const std::vector<int> nodes = s.active_indices();
    std::vector<Edge> out;
    for (size_t i = 0; i < nodes.size(); ++i)
        for (size_t j = i + 1; j < nodes.size(); ++j) {
            Edge e = make_edge(nodes[i], nodes[j]);
            if (!s.has_edge(e.first, e.second)) out.push_back(e);
        }
    return out;
}

}  // namespace

IsgTrainResult train_isg(const DynamicGraph& g, const IsgConfig& cfg) {
    cfg.validate();
    const int T = g.num_snapshots();
    if (T == 0) throw std::invalid_argument("train_isg: empty dynamic graph");
    const int prefix = cfg.train_prefix < 0 ? T : std::min(cfg.train_prefix, T);
    if (prefix <= 0) throw std::invalid_argument("train_isg: empty training prefix");
    for (int ti = 0; ti < T; ++ti)
        if (g.snapshots[ti].edges.empty())
            throw std::invalid_argument("train_isg: snapshot " + std::to_string(ti) +
                                        " has no edges");

    Rng init_rng(mix_seed(cfg.seed, 0xA1));
    IsgParams params(g.feature_dim, cfg, init_rng);
    std::optional<ad::Param> learnable;
    if (g.feature_mode == FeatureMode::Learnable)
        learnable.emplace(glorot_uniform(g.n_global, g.feature_dim, init_rng));

    IsgSequenceInputs in;
    in.graph = &g;
    in.prefix = prefix;
    in.learnable_features = learnable ? &*learnable : nullptr;
    in.a_hat.reserve(T);
    for (int ti = 0; ti < T; ++ti)
        in.a_hat.push_back(std::make_shared<const Tensor>(normalize_adjacency(g.snapshots[ti])));

    // one fixed noise graph per snapshot per run
    Rng noise_rng(mix_seed(cfg.seed, 0xA2));
    in.noise.resize(T);
    for (int ti = 0; ti < prefix; ++ti) {
        Snapshot noisy = erdos_renyi_like(g.snapshots[ti], noise_rng);
        in.noise[ti].a_hat_noisy = std::make_shared<const Tensor>(normalize_adjacency(noisy));
        if (cfg.dense_recon) {
            if (g.snapshots[ti].num_active() > 2000)
                throw std::invalid_argument("train_isg: dense reconstruction is limited to "
                                            "2000 active nodes");
            in.noise[ti].negatives = all_non_edges(g.snapshots[ti]);
        }
    }

    std::vector<ad::Param*> opt_params = params.parameters();
    if (learnable) opt_params.push_back(&*learnable);
    AdamConfig adam_cfg;
    adam_cfg.lr = cfg.lr;
    Adam opt(opt_params, adam_cfg);

    Rng train_rng(mix_seed(cfg.seed, 0xA3));
    IsgTrainResult result;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (int ti = 0; ti < prefix; ++ti) {
            const Snapshot& s = g.snapshots[ti];
            in.noise[ti].eps = randn(g.n_global, cfg.embed_dim, train_rng);
            in.noise[ti].eps_noisy = randn(g.n_global, cfg.embed_dim, train_rng);
            if (!cfg.dense_recon) {
                const std::vector<int> nodes = s.active_indices();
                const long long cap =
                    static_cast<long long>(nodes.size()) * (static_cast<long long>(nodes.size()) - 1) / 2 -
                    static_cast<long long>(s.edges.size());
                const int want = static_cast<int>(
                    std::min<long long>(static_cast<long long>(s.edges.size()), cap));
                in.noise[ti].negatives =
                    want > 0 ? sample_non_edges(nodes, s.edges, want, train_rng)
                             : std::vector<Edge>{};
            }
        }
        opt.zero_grad();
        Tape tape;
        Var loss = isg_sequence_loss(tape, in, params, cfg);
        tape.backward(loss);
        opt.step();
        result.epoch_loss.push_back(loss.value()(0, 0));
    }

    // deterministic regeneration pass over the full sequence: posterior means,
    // scores for every original edge, then the rank-based partition
    {
        Tape tape;
        Var h = tape.constant(Tensor(g.n_global, cfg.hidden_dim));
        result.splits.reserve(T);
        for (int ti = 0; ti < T; ++ti) {
            const Snapshot& s = g.snapshots[ti];
            Var x = learnable ? tape.input(*learnable) : tape.constant(s.features);
            Var a = tape.constant(in.a_hat[ti]);
            Gaussian q = isg_encode(tape, a, x, h, params);
            EdgeScoreMap scores = decode_probabilistic(tape, q.mu, s.edges, params);
            result.splits.push_back(select_subgraphs(s, scores, cfg.r));
            h = gcrn_step(tape, a, x, q.mu, h, params.gcrn);
        }
    }

    result.params = std::move(params);
    if (learnable) result.learnable_features = learnable->value;
    return result;
}

std::vector<SubgraphSplit> random_splits(const DynamicGraph& g, double r, Rng& rng) {
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("random_splits: r must be in (0, 1]");
    std::vector<SubgraphSplit> splits;
    splits.reserve(g.num_snapshots());
    for (const Snapshot& s : g.snapshots) {
        if (s.edges.empty())
            throw std::invalid_argument("random_splits: snapshot has no edges");
        std::vector<Edge> shuffled = s.edges;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const int k = std::max(
            1, static_cast<int>(std::llround(r * static_cast<double>(shuffled.size()))));
        SubgraphSplit split;
        split.ratio = r;
        split.informative.assign(shuffled.begin(), shuffled.begin() + k);
        split.bias.assign(shuffled.begin() + k, shuffled.end());
        std::sort(split.informative.begin(), split.informative.end());
        std::sort(split.bias.begin(), split.bias.end());
        splits.push_back(std::move(split));
    }
    return splits;
}

void save_splits(const std::vector<SubgraphSplit>& splits, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (size_t t = 0; t < splits.size(); ++t) {
        for (const Edge& e : splits[t].informative)
            out << t << " " << e.first << " " << e.second << " I\n";
        for (const Edge& e : splits[t].bias)
            out << t << " " << e.first << " " << e.second << " B\n";
    }
}

std::vector<SubgraphSplit> load_splits(const std::string& path, const DynamicGraph& g) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open splits file: " + path);
    std::vector<SubgraphSplit> splits(g.num_snapshots());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        int t, u, v;
        char kind;
        if (!(ls >> t)) continue;
        if (!(ls >> u >> v >> kind) || (kind != 'I' && kind != 'B'))
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed line");
        if (t < 0 || t >= g.num_snapshots())
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": snapshot out of range");
        (kind == 'I' ? splits[t].informative : splits[t].bias).push_back(make_edge(u, v));
    }
    for (auto& s : splits) {
        std::sort(s.informative.begin(), s.informative.end());
        std::sort(s.bias.begin(), s.bias.end());
    }
    return splits;
}

}  // namespace dygis
