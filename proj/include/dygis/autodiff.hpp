#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "dygis/tensor.hpp"

namespace dygis::ad {

class Tape;

// Trainable tensor. Lives outside the tape; `Tape::input` mirrors it onto the
// tape for one forward pass and `Tape::backward` accumulates into `grad`.
struct Param {
    Tensor value;
    Tensor grad;

    Param() = default;
    explicit Param(Tensor v) : value(std::move(v)), grad(value.rows(), value.cols()) {}

    void zero_grad() { grad = Tensor(value.rows(), value.cols()); }
};

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    bool valid() const { return tape != nullptr && id >= 0; }
    const Tensor& value() const;
    int rows() const { return value().rows(); }
    int cols() const { return value().cols(); }
};

// Diagonal Gaussian over node embeddings, as tape variables.
struct Gaussian {
    Var mu;
    Var logvar;
};

// Reverse-mode tape over dense tensors. Nodes are appended in topological
// order during the forward pass; `backward` sweeps them in reverse.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Leaf with no gradient tracking. The shared_ptr overload lets callers
    // reuse one buffer (e.g. a normalized adjacency) across many epochs.
    Var constant(Tensor v);
    Var constant(std::shared_ptr<const Tensor> v);

    // Leaf mirroring a parameter; backward() adds its adjoint to p.grad.
    Var input(Param& p);

    const Tensor& val(int id) const { return *nodes_[id].value; }
    bool requires_grad(int id) const { return nodes_[id].requires_grad; }

    // Reverse accumulation from a 1x1 loss node. Parameters not reachable
    // from the loss are left untouched (their grad stays as-is, zero after
    // zero_grad).
    void backward(Var loss);

    // Adjoint of a node after backward(); zeros if the node was unreachable.
    Tensor adjoint_of(Var v) const;

    size_t num_nodes() const { return nodes_.size(); }

    // --- used by op implementations ---
    Var emplace(Tensor value, bool requires_grad,
                std::function<void(Tape&, const Tensor&)> backprop);
    Var emplace(std::shared_ptr<const Tensor> value, bool requires_grad,
                std::function<void(Tape&, const Tensor&)> backprop);
    void accumulate(int id, const Tensor& g);
    void accumulate_entry(int id, int i, int j, double g);

private:
    struct Node {
        std::shared_ptr<const Tensor> value;
        Tensor adjoint;  // empty until the first contribution arrives
        bool requires_grad = false;
        std::function<void(Tape&, const Tensor&)> backprop;
        Param* param = nullptr;
    };

    std::vector<Node> nodes_;
};

// --- elementwise and structural ops -----------------------------------------

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var negate(Var x);
Var scale(Var x, double c);
Var add_scalar(Var x, double c);
Var sigmoid(Var x);
Var tanh(Var x);
Var relu(Var x);
Var exp(Var x);
Var log(Var x);  // requires strictly positive entries
Var clip(Var x, double lo, double hi);

Var matmul(Var a, Var b);
Var transpose(Var x);
Var concat_cols(Var a, Var b);
Var add_rowvec(Var x, Var b);  // b is 1 x cols, broadcast over rows

Var sum(Var x);
Var mean(Var x);
Var rowsum(Var x);                // n x m -> n x 1
Var log_sum_exp_rows(Var x);      // n x m -> n x 1, row-max stabilized
Var row_l2_normalize(Var x);      // zero rows stay zero (zero gradient)

Var gather_rows(Var x, std::vector<int> rows);
Var select_entries(Var x, std::vector<std::pair<int, int>> entries);  // k x 1

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return hadamard(a, b); }
inline Var operator-(Var x) { return negate(x); }
inline Var operator*(double c, Var x) { return scale(x, c); }

// --- stochastic / divergence helpers ----------------------------------------

// mu + exp(0.5 * logvar) (.) eps, with eps a caller-supplied noise tensor.
Var reparameterize(Var mu, Var logvar, const Tensor& eps);

// Closed-form KL(q || p) between diagonal Gaussians, summed over all rows
// and dimensions. Returns a 1x1 node, always >= 0 up to roundoff.
Var gaussian_kl(const Gaussian& q, const Gaussian& p);

}  // namespace dygis::ad
