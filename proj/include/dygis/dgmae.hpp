#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dygis/gcrn.hpp"
#include "dygis/graph.hpp"
#include "dygis/isg.hpp"
#include "dygis/layers.hpp"

namespace dygis {

struct DgmaeConfig {
    int epochs = 1000;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    int embed_dim = 32;
    int hidden_dim = 32;        // must be even
    int train_prefix = -1;      // snapshots contributing to the loss, -1 = all
    int softmax_candidates = 0; // 0 = full softmax over active nodes

    void validate() const;
};

// Stage-2 masked autoencoder: encodes the informative subgraph, reconstructs
// the bias subgraph through a softmax link estimator.
struct DgmaeParams {
    Dense phi_x;               // tanh feature extractor
    GcnLayer enc_shared;       // relu
    GcnLayer enc_mu, enc_logvar;
    Dense prior_hidden;        // tanh
    Dense prior_mu, prior_logvar;
    GcnLayer dec_gcn;          // link estimator: single GCN then inner product
    GcrnParams gcrn;

    DgmaeParams() = default;
    DgmaeParams(int feat_dim, const DgmaeConfig& cfg, Rng& rng);

    std::vector<ad::Param*> parameters();
};

// Posterior over the informative subgraph; same encoder shape as stage 1,
// separate weights.
ad::Gaussian dgmae_encode(ad::Tape& t, ad::Var a_hat_inf, ad::Var x, ad::Var h_prev,
                          DgmaeParams& p);

ad::Gaussian dgmae_prior(ad::Tape& t, ad::Var h_prev, DgmaeParams& p);

// -(1/|E_B|) sum over bias edges of log softmax(g(v, u)) over the active
// nodes, plus KL(q || prior). g is the inner product of single-GCN outputs
// over the informative adjacency. `candidates` non-empty switches to sampled
// softmax (the target column is always included).
ad::Var bias_reconstruction_loss(ad::Tape& t, ad::Var z, ad::Var a_hat_inf,
                                 const std::vector<Edge>& bias_edges,
                                 const std::vector<int>& active, DgmaeParams& p,
                                 const ad::Gaussian& q_active, const ad::Gaussian& prior_active,
                                 const std::vector<int>& candidates = {});

// Evaluation-time link scorer: sigmoid of the inner product of two rows of
// the link-estimator features. Both endpoints must be active at the
// evaluated snapshot.
double link_score(const Tensor& link_features, int u, int v, const std::vector<char>& active);

struct Representation {
    std::vector<Tensor> z;              // per snapshot, n_global x D posterior means
    std::vector<Tensor> link_features;  // per snapshot, trained link-estimator space
    std::vector<Tensor> hidden;         // per snapshot informative hidden states
};

struct DgmaeSequenceInputs {
    const DynamicGraph* graph = nullptr;
    const std::vector<SubgraphSplit>* splits = nullptr;
    std::vector<std::shared_ptr<const Tensor>> a_hat_inf;  // per snapshot
    std::vector<Tensor> eps;                               // per snapshot
    std::vector<std::vector<int>> candidates;              // per snapshot, may be empty
    ad::Param* learnable_features = nullptr;
    int prefix = 0;
};

ad::Var dgmae_sequence_loss(ad::Tape& t, DgmaeSequenceInputs& in, DgmaeParams& p,
                            const DgmaeConfig& cfg);

struct DgmaeTrainResult {
    DgmaeParams params;
    Tensor learnable_features;  // empty unless learnable feature mode
    Representation reps;        // full sequence, deterministic posterior means
    std::vector<double> epoch_loss;
};

DgmaeTrainResult train_dgmae(const DynamicGraph& g, const std::vector<SubgraphSplit>& splits,
                             const DgmaeConfig& cfg);

// Text export: per snapshot a "t n D" header then n rows of D values.
void save_representation(const Representation& reps, const std::string& path);

}  // namespace dygis
