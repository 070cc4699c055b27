#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "dygis/gcrn.hpp"
#include "dygis/graph.hpp"
#include "dygis/layers.hpp"

namespace dygis {

// Per-node Gaussian posterior/prior as plain tensors (evaluation outputs).
struct GaussianParams {
    Tensor mu;
    Tensor logvar;
};

struct IsgConfig {
    int epochs = 100;
    double lambda = 0.5;      // weight of the mutual-information term
    double tau = 0.7;         // InfoNCE temperature
    double r = 0.1;           // informative subgraph ratio
    double lr = 1e-3;
    std::uint64_t seed = 0;
    int embed_dim = 32;
    int hidden_dim = 32;      // GCRN hidden size, must be even
    bool dense_recon = false; // score every active pair instead of sampling negatives
    int train_prefix = -1;    // snapshots contributing to the loss, -1 = all

    void validate() const;
};

// Stage-1 model: shared-weight variational encoder over the real and noisy
// adjacencies, recurrent prior, and a perceptron decoder that scores pairs.
struct IsgParams {
    Dense phi_x;              // tanh feature extractor
    GcnLayer enc_shared;      // relu
    GcnLayer enc_mu, enc_logvar;
    Dense prior_hidden;       // tanh
    Dense prior_mu, prior_logvar;
    Dense dec_l1, dec_l2;     // decoder f, relu then linear
    GcrnParams gcrn;

    IsgParams() = default;
    IsgParams(int feat_dim, const IsgConfig& cfg, Rng& rng);

    std::vector<ad::Param*> parameters();
};

using EdgeScoreMap = std::map<Edge, double>;

// Posterior q(Z | X, A, H); the same function with the noise graph's
// adjacency realizes the noisy encoder (weights are shared by construction).
ad::Gaussian isg_encode(ad::Tape& t, ad::Var a_hat, ad::Var x, ad::Var h_prev, IsgParams& p);

// Recurrent prior p(Z | H); standard normal at H = 0 with zero-init weights.
ad::Gaussian isg_prior(ad::Tape& t, ad::Var h_prev, IsgParams& p);

// Decoder features f(Z).
ad::Var isg_decoder_features(ad::Tape& t, ad::Var z, IsgParams& p);

// sigmoid(<f_u, f_v>) for each listed pair, as a k x 1 column.
ad::Var pair_scores(ad::Var decoder_out, const std::vector<Edge>& pairs);

// Reconstruction probability per edge of the source snapshot.
EdgeScoreMap decode_probabilistic(ad::Tape& t, ad::Var z, const std::vector<Edge>& edges,
                                  IsgParams& p);

// KL(q||prior) plus binary cross-entropy over positive and sampled negative
// pair scores (scores clipped to [1e-7, 1 - 1e-7] inside the logs). Pass an
// invalid Var for neg_scores when no negatives are available. kl_weight
// rescales the divergence (the sequence losses average it per active node).
ad::Var reconstruction_elbo(ad::Var pos_scores, ad::Var neg_scores, const ad::Gaussian& q,
                            const ad::Gaussian& prior, double kl_weight = 1.0);

// Mean InfoNCE bound over anchors with discriminator exp(cos(a, b) / tau).
// Always <= 0; equals 0 for a single anchor.
ad::Var infonce_loss(ad::Var z, ad::Var z_noisy, const std::vector<int>& anchors, double tau);

// The max(1, round(r * |E|)) worst-reconstructed edges become informative,
// the rest bias. Ties break by ascending (u, v).
SubgraphSplit select_subgraphs(const Snapshot& s, const EdgeScoreMap& scores, double r);

// Frozen per-snapshot randomness for one epoch; fixing it makes the sequence
// loss an exactly re-evaluable function of the parameters.
struct IsgNoise {
    std::shared_ptr<const Tensor> a_hat_noisy;  // normalized noise-graph adjacency
    Tensor eps;
    Tensor eps_noisy;
    std::vector<Edge> negatives;
};

struct IsgSequenceInputs {
    const DynamicGraph* graph = nullptr;
    std::vector<std::shared_ptr<const Tensor>> a_hat;  // per snapshot
    std::vector<IsgNoise> noise;                       // per snapshot
    ad::Param* learnable_features = nullptr;           // set in learnable feature mode
    int prefix = 0;                                    // snapshots included in the loss
};

// Sum over snapshots of [elbo_t - lambda * infonce_t].
ad::Var isg_sequence_loss(ad::Tape& t, IsgSequenceInputs& in, IsgParams& p,
                          const IsgConfig& cfg);

struct IsgTrainResult {
    IsgParams params;
    Tensor learnable_features;             // empty unless learnable feature mode
    std::vector<SubgraphSplit> splits;     // one per snapshot, including test range
    std::vector<double> epoch_loss;
};

// Full stage-1 training per the two-loop schedule: accumulate the sequence
// loss, one optimizer step per epoch, then a deterministic regeneration pass
// (posterior means) that emits the per-snapshot splits.
IsgTrainResult train_isg(const DynamicGraph& g, const IsgConfig& cfg);

// Uniform-random splits at the same ratio (the no-isg ablation).
std::vector<SubgraphSplit> random_splits(const DynamicGraph& g, double r, Rng& rng);

// External split format: "<snapshot> <u> <v> <I|B>" per line.
void save_splits(const std::vector<SubgraphSplit>& splits, const std::string& path);
std::vector<SubgraphSplit> load_splits(const std::string& path, const DynamicGraph& g);

}  // namespace dygis
