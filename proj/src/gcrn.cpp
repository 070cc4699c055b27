#include "dygis/gcrn.hpp"

#include <stdexcept>

namespace dygis {

GcrnParams::GcrnParams(int feat_dim, int z_dim, int hidden_dim, Rng& rng) : hidden(hidden_dim) {
    if (hidden_dim <= 0 || hidden_dim % 2 != 0)
        throw std::invalid_argument("GcrnParams: hidden dimension must be positive and even");
    const int half = hidden_dim / 2;
    phi_x = Dense(feat_dim, half, rng);
    phi_z = Dense(z_dim, half, rng);
    reset_in = GcnLayer(hidden_dim, hidden_dim, rng);
    reset_hid = GcnLayer(hidden_dim, hidden_dim, rng);
    update_in = GcnLayer(hidden_dim, hidden_dim, rng);
    update_hid = GcnLayer(hidden_dim, hidden_dim, rng);
    cand_in = GcnLayer(hidden_dim, hidden_dim, rng);
    cand_hid = GcnLayer(hidden_dim, hidden_dim, rng);
}

void GcrnParams::collect(std::vector<ad::Param*>& out) {
    phi_x.collect(out);
    phi_z.collect(out);
    reset_in.collect(out);
    reset_hid.collect(out);
    update_in.collect(out);
    update_hid.collect(out);
    cand_in.collect(out);
    cand_hid.collect(out);
}

ad::Var gcrn_step(ad::Tape& t, ad::Var a_hat, ad::Var x, ad::Var z, ad::Var h_prev,
                  GcrnParams& p) {
    using namespace ad;
    if (h_prev.cols() != p.hidden)
        throw std::invalid_argument("gcrn_step: hidden state has " +
                                    std::to_string(h_prev.cols()) + " columns, expected " +
                                    std::to_string(p.hidden));
    Var stream = concat_cols(tanh(p.phi_x.apply(t, x)), tanh(p.phi_z.apply(t, z)));

    Var reset = sigmoid(add(p.reset_in.apply(t, a_hat, stream),
                            p.reset_hid.apply(t, a_hat, h_prev)));
    Var update = sigmoid(add(p.update_in.apply(t, a_hat, stream),
                             p.update_hid.apply(t, a_hat, h_prev)));
    Var candidate = tanh(add(p.cand_in.apply(t, a_hat, stream),
                             p.cand_hid.apply(t, a_hat, hadamard(reset, h_prev))));

    Var keep = hadamard(update, h_prev);
    Var ones = t.constant(Tensor::constant(update.rows(), update.cols(), 1.0));
    Var blend = hadamard(sub(ones, update), candidate);
    return add(keep, blend);
}

}  // namespace dygis
