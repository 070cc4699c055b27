#pragma once

#include <vector>

#include "dygis/autodiff.hpp"

namespace dygis {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected adaptive optimizer over a fixed parameter set.
class Adam {
public:
    Adam(std::vector<ad::Param*> params, AdamConfig cfg = {});

    void zero_grad();
    void step();  // consumes the grads currently stored on the params

    long long step_count() const { return step_; }
    const std::vector<ad::Param*>& params() const { return params_; }

private:
    std::vector<ad::Param*> params_;
    AdamConfig cfg_;
    long long step_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

}  // namespace dygis
