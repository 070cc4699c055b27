#include "dygis/dgmae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "dygis/optimizer.hpp"

namespace dygis {

using ad::Gaussian;
using ad::Tape;
using ad::Var;

void DgmaeConfig::validate() const {
    if (epochs < 0) throw std::invalid_argument("dgmae config: epochs must be >= 0");
    if (lr <= 0.0) throw std::invalid_argument("dgmae config: learning rate must be positive");
    if (embed_dim <= 0) throw std::invalid_argument("dgmae config: embed dim must be positive");
    if (hidden_dim <= 0 || hidden_dim % 2 != 0)
        throw std::invalid_argument("dgmae config: hidden dim must be positive and even");
    if (softmax_candidates < 0)
        throw std::invalid_argument("dgmae config: softmax candidates must be >= 0");
}

DgmaeParams::DgmaeParams(int feat_dim, const DgmaeConfig& cfg, Rng& rng) {
    const int h = cfg.hidden_dim;
    const int d = cfg.embed_dim;
    phi_x = Dense(feat_dim, h / 2, rng);
    enc_shared = GcnLayer(h / 2 + h, h, rng);
    enc_mu = GcnLayer(h, d, rng);
    enc_logvar = GcnLayer(h, d, rng);
    prior_hidden = Dense(h, h, rng);
    prior_mu = Dense(h, d, rng);
    prior_logvar = Dense(h, d, rng);
    dec_gcn = GcnLayer(d, d, rng);
    gcrn = GcrnParams(feat_dim, d, h, rng);
}

std::vector<ad::Param*> DgmaeParams::parameters() {
    std::vector<ad::Param*> out;
    phi_x.collect(out);
    enc_shared.collect(out);
    enc_mu.collect(out);
    enc_logvar.collect(out);
    prior_hidden.collect(out);
    prior_mu.collect(out);
    prior_logvar.collect(out);
    dec_gcn.collect(out);
    gcrn.collect(out);
    return out;
}

Gaussian dgmae_encode(Tape& t, Var a_hat_inf, Var x, Var h_prev, DgmaeParams& p) {
    Var stream = ad::concat_cols(ad::tanh(p.phi_x.apply(t, x)), h_prev);
    Var h1 = ad::relu(p.enc_shared.apply(t, a_hat_inf, stream));
    return {p.enc_mu.apply(t, a_hat_inf, h1), p.enc_logvar.apply(t, a_hat_inf, h1)};
}

Gaussian dgmae_prior(Tape& t, Var h_prev, DgmaeParams& p) {
    Var hidden = ad::tanh(p.prior_hidden.apply(t, h_prev));
    return {p.prior_mu.apply(t, hidden), p.prior_logvar.apply(t, hidden)};
}

Var bias_reconstruction_loss(Tape& t, Var z, Var a_hat_inf, const std::vector<Edge>& bias_edges,
                             const std::vector<int>& active, DgmaeParams& p,
                             const Gaussian& q_active, const Gaussian& prior_active,
                             const std::vector<int>& candidates) {
    if (active.empty()) throw std::invalid_argument("bias_reconstruction_loss: no active nodes");
    // KL averaged per active node and embedding dimension; the reconstruction
    // term is a per-edge mean, and stronger divergence weights keep the noise
    // scale high enough to drown the softmax signal
    Var kl = ad::scale(ad::gaussian_kl(q_active, prior_active),
                       1.0 / (static_cast<double>(active.size()) *
                              static_cast<double>(q_active.mu.cols())));
    if (bias_edges.empty()) {
        std::cerr << "dgmae: warning: empty bias subgraph, loss reduces to the KL term\n";
        return kl;
    }

    Var g = p.dec_gcn.apply(t, a_hat_inf, z);  // n x d link features

    // an undirected bias edge anchors the softmax at both endpoints; a single
    // orientation trains only the rows that happen to hold the smaller id
    std::vector<int> heads, tails;
    heads.reserve(2 * bias_edges.size());
    tails.reserve(2 * bias_edges.size());
    for (const Edge& e : bias_edges) {
        heads.push_back(e.first);
        tails.push_back(e.second);
    }
    for (const Edge& e : bias_edges) {
        heads.push_back(e.second);
        tails.push_back(e.first);
    }
    // numerator logits g(v, u) per bias edge
    Var g_heads = ad::gather_rows(g, heads);
    Var g_tails = ad::gather_rows(g, tails);
    Var edge_logit = ad::rowsum(ad::hadamard(g_heads, g_tails));

    Var log_denom;
    if (candidates.empty()) {
        // full softmax over active nodes
        Var g_active = ad::gather_rows(g, active);
        Var logits = ad::matmul(g_heads, ad::transpose(g_active));  // |E_B| x |V_t|
        log_denom = ad::log_sum_exp_rows(logits);
    } else {
        // sampled softmax; the true column is appended so every term stays <= 0
        Var g_cand = ad::gather_rows(g, candidates);
        Var logits = ad::matmul(g_heads, ad::transpose(g_cand));
        Var lse_cand = ad::log_sum_exp_rows(logits);
        log_denom = ad::log_sum_exp_rows(ad::concat_cols(lse_cand, edge_logit));
    }

    Var per_edge = ad::sub(log_denom, edge_logit);  // >= 0 termwise under full softmax
    Var recon = ad::mean(per_edge);
    return ad::add(recon, kl);
}

double link_score(const Tensor& link_features, int u, int v, const std::vector<char>& active) {
    const Tensor& z = link_features;
    if (u < 0 || u >= z.rows() || v < 0 || v >= z.rows())
        throw std::invalid_argument("link_score: node out of range");
    if (!active[u] || !active[v])
        throw std::invalid_argument("link_score: node " +
                                    std::to_string(!active[u] ? u : v) +
                                    " is inactive at the evaluated snapshot");
    double dot = 0.0;
    for (int j = 0; j < z.cols(); ++j) dot += z(u, j) * z(v, j);
    return 1.0 / (1.0 + std::exp(-dot));
}

Var dgmae_sequence_loss(Tape& t, DgmaeSequenceInputs& in, DgmaeParams& p,
                        const DgmaeConfig& cfg) {
    const DynamicGraph& g = *in.graph;
    Var h = t.constant(Tensor(g.n_global, cfg.hidden_dim));
    Var total;
    for (int ti = 0; ti < in.prefix; ++ti) {
        const Snapshot& s = g.snapshots[ti];
        const SubgraphSplit& split = (*in.splits)[ti];
        Var x = in.learnable_features ? t.input(*in.learnable_features)
                                      : t.constant(s.features);
        Var a_inf = t.constant(in.a_hat_inf[ti]);

        Gaussian q = dgmae_encode(t, a_inf, x, h, p);
        Gaussian prior = dgmae_prior(t, h, p);
        Var z = ad::reparameterize(q.mu, q.logvar, in.eps[ti]);

        const std::vector<int> anchors = s.active_indices();
        Gaussian q_act{ad::gather_rows(q.mu, anchors), ad::gather_rows(q.logvar, anchors)};
        Gaussian prior_act{ad::gather_rows(prior.mu, anchors),
                           ad::gather_rows(prior.logvar, anchors)};

        Var term = bias_reconstruction_loss(t, z, a_inf, split.bias, anchors, p, q_act,
                                            prior_act,
                                            in.candidates.empty() ? std::vector<int>{}
                                                                  : in.candidates[ti]);
        total = total.valid() ? ad::add(total, term) : term;

        h = gcrn_step(t, a_inf, x, z, h, p.gcrn);
    }
    if (!total.valid()) throw std::invalid_argument("dgmae_sequence_loss: empty training prefix");
    return total;
}

DgmaeTrainResult train_dgmae(const DynamicGraph& g, const std::vector<SubgraphSplit>& splits,
                             const DgmaeConfig& cfg) {
    cfg.validate();
    const int T = g.num_snapshots();
    if (static_cast<int>(splits.size()) != T)
        throw std::invalid_argument("train_dgmae: " + std::to_string(splits.size()) +
                                    " splits for " + std::to_string(T) + " snapshots");
    const int prefix = cfg.train_prefix < 0 ? T : std::min(cfg.train_prefix, T);
    if (prefix <= 0) throw std::invalid_argument("train_dgmae: empty training prefix");

    Rng init_rng(mix_seed(cfg.seed, 0xB1));
    DgmaeParams params(g.feature_dim, cfg, init_rng);
    std::optional<ad::Param> learnable;
    if (g.feature_mode == FeatureMode::Learnable)
        learnable.emplace(glorot_uniform(g.n_global, g.feature_dim, init_rng));

    DgmaeSequenceInputs in;
    in.graph = &g;
    in.splits = &splits;
    in.prefix = prefix;
    in.learnable_features = learnable ? &*learnable : nullptr;
    in.eps.resize(T);
    for (int ti = 0; ti < T; ++ti)
        in.a_hat_inf.push_back(std::make_shared<const Tensor>(
            normalize_edges(splits[ti].informative, g.snapshots[ti].active)));

    std::vector<ad::Param*> opt_params = params.parameters();
    if (learnable) opt_params.push_back(&*learnable);
    AdamConfig adam_cfg;
    adam_cfg.lr = cfg.lr;
    Adam opt(opt_params, adam_cfg);

    Rng train_rng(mix_seed(cfg.seed, 0xB2));
    DgmaeTrainResult result;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        in.candidates.clear();
        if (cfg.softmax_candidates > 0) {
            in.candidates.resize(T);
            for (int ti = 0; ti < prefix; ++ti) {
                std::vector<int> pool = g.snapshots[ti].active_indices();
                if (static_cast<int>(pool.size()) > cfg.softmax_candidates) {
                    std::shuffle(pool.begin(), pool.end(), train_rng);
                    pool.resize(cfg.softmax_candidates);
                    std::sort(pool.begin(), pool.end());
                }
                in.candidates[ti] = std::move(pool);
            }
        }
        for (int ti = 0; ti < prefix; ++ti)
            in.eps[ti] = randn(g.n_global, cfg.embed_dim, train_rng);

        opt.zero_grad();
        Tape tape;
        Var loss = dgmae_sequence_loss(tape, in, params, cfg);
        tape.backward(loss);
        opt.step();
        result.epoch_loss.push_back(loss.value()(0, 0));
    }

    // deterministic full-sequence pass: posterior means become the
    // representations used downstream
    {
        Tape tape;
        Var h = tape.constant(Tensor(g.n_global, cfg.hidden_dim));
        for (int ti = 0; ti < T; ++ti) {
            const Snapshot& s = g.snapshots[ti];
            Var x = learnable ? tape.input(*learnable) : tape.constant(s.features);
            Var a_inf = tape.constant(in.a_hat_inf[ti]);
            Gaussian q = dgmae_encode(tape, a_inf, x, h, params);
            Var link_feat = params.dec_gcn.apply(tape, a_inf, q.mu);
            h = gcrn_step(tape, a_inf, x, q.mu, h, params.gcrn);
            result.reps.z.push_back(q.mu.value());
            result.reps.link_features.push_back(link_feat.value());
            result.reps.hidden.push_back(h.value());
        }
    }

    result.params = std::move(params);
    if (learnable) result.learnable_features = learnable->value;
    return result;
}

void save_representation(const Representation& reps, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.precision(17);
    for (size_t t = 0; t < reps.z.size(); ++t) {
        const Tensor& z = reps.z[t];
        out << t << " " << z.rows() << " " << z.cols() << "\n";
        for (int i = 0; i < z.rows(); ++i) {
            for (int j = 0; j < z.cols(); ++j) out << (j ? " " : "") << z(i, j);
            out << "\n";
        }
    }
}

}  // namespace dygis
