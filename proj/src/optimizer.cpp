#include "dygis/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace dygis {

Adam::Adam(std::vector<ad::Param*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const ad::Param* p : params_) {
        m_.emplace_back(p->value.rows(), p->value.cols());
        v_.emplace_back(p->value.rows(), p->value.cols());
    }
}

void Adam::zero_grad() {
    for (ad::Param* p : params_) p->zero_grad();
}

void Adam::step() {
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (size_t k = 0; k < params_.size(); ++k) {
        ad::Param& p = *params_[k];
        if (!p.grad.same_shape(p.value))
            throw std::invalid_argument("adam: grad shape " + p.grad.shape_str() +
                                        " does not match param " + p.value.shape_str());
        double* w = p.value.data();
        const double* g = p.grad.data();
        double* m = m_[k].data();
        double* v = v_[k].data();
        for (long long i = 0; i < p.value.size(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

}  // namespace dygis
