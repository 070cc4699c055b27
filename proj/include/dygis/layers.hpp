#pragma once

#include <vector>

#include "dygis/autodiff.hpp"
#include "dygis/rng.hpp"

namespace dygis {

// Affine map x -> x W + b with Glorot-uniform weights and zero bias.
struct Dense {
    ad::Param w;
    ad::Param b;

    Dense() = default;
    Dense(int in, int out, Rng& rng) : w(glorot_uniform(in, out, rng)), b(Tensor(1, out)) {}

    ad::Var apply(ad::Tape& t, ad::Var x) {
        return ad::add_rowvec(ad::matmul(x, t.input(w)), t.input(b));
    }

    void collect(std::vector<ad::Param*>& out) {
        out.push_back(&w);
        out.push_back(&b);
    }
};

// Single graph convolution A_hat (x W) + b.
struct GcnLayer {
    Dense lin;

    GcnLayer() = default;
    GcnLayer(int in, int out, Rng& rng) : lin(in, out, rng) {}

    ad::Var apply(ad::Tape& t, ad::Var a_hat, ad::Var x) {
        return ad::add_rowvec(ad::matmul(a_hat, ad::matmul(x, t.input(lin.w))), t.input(lin.b));
    }

    void collect(std::vector<ad::Param*>& out) { lin.collect(out); }
};

}  // namespace dygis
