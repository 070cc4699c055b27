#pragma once

#include <vector>

#include "dygis/layers.hpp"

namespace dygis {

// Recurrent cell over snapshots: a GRU whose gates are graph convolutions.
// Each gate has its own weights for the input stream [phi_x(X), phi_z(Z)]
// and for the hidden stream H.
struct GcrnParams {
    Dense phi_x;  // tanh extractor, feat_dim -> hidden/2
    Dense phi_z;  // tanh extractor, z_dim -> hidden/2
    GcnLayer reset_in, reset_hid;
    GcnLayer update_in, update_hid;
    GcnLayer cand_in, cand_hid;
    int hidden = 0;

    GcrnParams() = default;
    GcrnParams(int feat_dim, int z_dim, int hidden_dim, Rng& rng);

    void collect(std::vector<ad::Param*>& out);
};

// One recurrence step. `a_hat` is the normalized adjacency of the graph being
// processed, `x` the node features, `z` the current embeddings, `h_prev` the
// carried hidden state (n x hidden).
ad::Var gcrn_step(ad::Tape& t, ad::Var a_hat, ad::Var x, ad::Var z, ad::Var h_prev,
                  GcrnParams& p);

}  // namespace dygis
