#include "dygis/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dygis::ad {

namespace {

// out += a * b^T
void accum_nt(const Tensor& a, const Tensor& b, Tensor& out) {
    const int n = a.rows(), k = a.cols(), m = b.rows();
    for (int i = 0; i < n; ++i) {
        const double* arow = a.data() + static_cast<size_t>(i) * k;
        double* orow = out.data() + static_cast<size_t>(i) * m;
        for (int j = 0; j < m; ++j) {
            const double* brow = b.data() + static_cast<size_t>(j) * k;
            double acc = 0.0;
            for (int kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
            orow[j] += acc;
        }
    }
}

// out += a^T * b
void accum_tn(const Tensor& a, const Tensor& b, Tensor& out) {
    const int n = a.rows(), k = a.cols(), m = b.cols();
    for (int r = 0; r < n; ++r) {
        const double* arow = a.data() + static_cast<size_t>(r) * k;
        const double* brow = b.data() + static_cast<size_t>(r) * m;
        for (int i = 0; i < k; ++i) {
            const double av = arow[i];
            if (av == 0.0) continue;
            double* orow = out.data() + static_cast<size_t>(i) * m;
            for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
}

void check_finite(const Tensor& t, const char* op) {
    if (!t.all_finite())
        throw std::runtime_error(std::string(op) + ": produced non-finite values");
}

void check_same_tape(Var a, Var b, const char* op) {
    if (a.tape != b.tape)
        throw std::invalid_argument(std::string(op) + ": operands from different tapes");
}

}  // namespace

const Tensor& Var::value() const { return tape->val(id); }

Var Tape::emplace(Tensor value, bool requires_grad,
                  std::function<void(Tape&, const Tensor&)> backprop) {
    return emplace(std::make_shared<const Tensor>(std::move(value)), requires_grad,
                   std::move(backprop));
}

Var Tape::emplace(std::shared_ptr<const Tensor> value, bool requires_grad,
                  std::function<void(Tape&, const Tensor&)> backprop) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    if (requires_grad) n.backprop = std::move(backprop);
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Tensor v) { return constant(std::make_shared<const Tensor>(std::move(v))); }

Var Tape::constant(std::shared_ptr<const Tensor> v) {
    Node n;
    n.value = std::move(v);
    n.requires_grad = false;
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::input(Param& p) {
    Node n;
    n.value = std::make_shared<const Tensor>(p.value);
    n.requires_grad = true;
    n.param = &p;
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(int id, const Tensor& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.adjoint.empty())
        n.adjoint = g;
    else
        n.adjoint += g;
}

void Tape::accumulate_entry(int id, int i, int j, double g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.adjoint.empty()) n.adjoint = Tensor(n.value->rows(), n.value->cols());
    n.adjoint(i, j) += g;
}

void Tape::backward(Var loss) {
    if (loss.tape != this) throw std::invalid_argument("backward: loss from a different tape");
    const Tensor& lv = val(loss.id);
    if (lv.rows() != 1 || lv.cols() != 1)
        throw std::invalid_argument("backward: loss must be scalar, got " + lv.shape_str());

    accumulate(loss.id, Tensor::constant(1, 1, 1.0));
    for (int id = loss.id; id >= 0; --id) {
        Node& n = nodes_[id];
        if (!n.requires_grad || n.adjoint.empty()) continue;
        if (n.backprop) n.backprop(*this, n.adjoint);
        if (n.param) n.param->grad += n.adjoint;
    }
}

Tensor Tape::adjoint_of(Var v) const {
    const Node& n = nodes_[v.id];
    if (n.adjoint.empty()) return Tensor(n.value->rows(), n.value->cols());
    return n.adjoint;
}

// --- binary elementwise ------------------------------------------------------

namespace {

const Tensor& binary_check(Var a, Var b, const char* op) {
    check_same_tape(a, b, op);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (!av.same_shape(bv))
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + av.shape_str() +
                                    " vs " + bv.shape_str());
    return av;
}

}  // namespace

Var add(Var a, Var b) {
    const Tensor& av = binary_check(a, b, "add");
    const Tensor& bv = b.value();
    Tensor out(av.rows(), av.cols());
    for (long long i = 0; i < av.size(); ++i) out.data()[i] = av.data()[i] + bv.data()[i];
    check_finite(out, "add");
    const int aid = a.id, bid = b.id;
    return a.tape->emplace(std::move(out), a.tape->requires_grad(aid) || a.tape->requires_grad(bid),
                           [aid, bid](Tape& t, const Tensor& g) {
                               t.accumulate(aid, g);
                               t.accumulate(bid, g);
                           });
}

Var sub(Var a, Var b) {
    const Tensor& av = binary_check(a, b, "sub");
    const Tensor& bv = b.value();
    Tensor out(av.rows(), av.cols());
    for (long long i = 0; i < av.size(); ++i) out.data()[i] = av.data()[i] - bv.data()[i];
    check_finite(out, "sub");
    const int aid = a.id, bid = b.id;
    return a.tape->emplace(std::move(out), a.tape->requires_grad(aid) || a.tape->requires_grad(bid),
                           [aid, bid](Tape& t, const Tensor& g) {
                               t.accumulate(aid, g);
                               if (!t.requires_grad(bid)) return;
                               Tensor ng(g.rows(), g.cols());
                               for (long long i = 0; i < g.size(); ++i)
                                   ng.data()[i] = -g.data()[i];
                               t.accumulate(bid, ng);
                           });
}

Var hadamard(Var a, Var b) {
    const Tensor& av = binary_check(a, b, "hadamard");
    const Tensor& bv = b.value();
    Tensor out(av.rows(), av.cols());
    for (long long i = 0; i < av.size(); ++i) out.data()[i] = av.data()[i] * bv.data()[i];
    check_finite(out, "hadamard");
    const int aid = a.id, bid = b.id;
    return a.tape->emplace(std::move(out), a.tape->requires_grad(aid) || a.tape->requires_grad(bid),
                           [aid, bid](Tape& t, const Tensor& g) {
                               if (t.requires_grad(aid)) {
                                   const Tensor& bv2 = t.val(bid);
                                   Tensor ga(g.rows(), g.cols());
                                   for (long long i = 0; i < g.size(); ++i)
                                       ga.data()[i] = g.data()[i] * bv2.data()[i];
                                   t.accumulate(aid, ga);
                               }
                               if (t.requires_grad(bid)) {
                                   const Tensor& av2 = t.val(aid);
                                   Tensor gb(g.rows(), g.cols());
                                   for (long long i = 0; i < g.size(); ++i)
                                       gb.data()[i] = g.data()[i] * av2.data()[i];
                                   t.accumulate(bid, gb);
                               }
                           });
}

// --- unary elementwise -------------------------------------------------------

// FWD and BWD are expressions over v (input entry) and, for BWD, y (output
// entry). The backward closure shares the result tensor instead of re-reading
// the node, so vector reallocation in the tape cannot invalidate it.
#define DYGIS_UNARY_OP(NAME, FWD, BWD)                                                    \
    Var NAME(Var x) {                                                                     \
        Tape& t = *x.tape;                                                                \
        const Tensor& xv = t.val(x.id);                                                   \
        Tensor out(xv.rows(), xv.cols());                                                 \
        for (long long i = 0; i < xv.size(); ++i) {                                       \
            const double v = xv.data()[i];                                                \
            out.data()[i] = (FWD);                                                        \
        }                                                                                 \
        check_finite(out, #NAME);                                                         \
        const int xid = x.id;                                                             \
        if (!t.requires_grad(xid)) return t.emplace(std::move(out), false, nullptr);      \
        auto result = std::make_shared<const Tensor>(std::move(out));                     \
        return t.emplace(result, true, [xid, result](Tape& tp, const Tensor& g) {        \
            const Tensor& xv2 = tp.val(xid);                                              \
            Tensor gx(g.rows(), g.cols());                                                \
            for (long long i = 0; i < g.size(); ++i) {                                    \
                const double v = xv2.data()[i];                                           \
                const double y = result->data()[i];                                       \
                (void)v;                                                                  \
                (void)y;                                                                  \
                gx.data()[i] = g.data()[i] * (BWD);                                       \
            }                                                                             \
            tp.accumulate(xid, gx);                                                       \
        });                                                                               \
    }

DYGIS_UNARY_OP(negate, -v, -1.0)
DYGIS_UNARY_OP(sigmoid, 1.0 / (1.0 + std::exp(-v)), y*(1.0 - y))
DYGIS_UNARY_OP(tanh, std::tanh(v), 1.0 - y * y)
DYGIS_UNARY_OP(relu, v > 0.0 ? v : 0.0, v > 0.0 ? 1.0 : 0.0)
DYGIS_UNARY_OP(exp, std::exp(v), y)

#undef DYGIS_UNARY_OP

Var log(Var x) {
    Tape& t = *x.tape;
    const Tensor& xv = t.val(x.id);
    Tensor out(xv.rows(), xv.cols());
    for (long long i = 0; i < xv.size(); ++i) {
        const double v = xv.data()[i];
        if (!(v > 0.0))
            throw std::domain_error("log: non-positive entry " + std::to_string(v));
        out.data()[i] = std::log(v);
    }
    check_finite(out, "log");
    const int xid = x.id;
    return t.emplace(std::move(out), t.requires_grad(xid), [xid](Tape& tp, const Tensor& g) {
        const Tensor& xv2 = tp.val(xid);
        Tensor gx(g.rows(), g.cols());
        for (long long i = 0; i < g.size(); ++i) gx.data()[i] = g.data()[i] / xv2.data()[i];
        tp.accumulate(xid, gx);
    });
}

Var scale(Var x, double c) {
    Tape& t = *x.tape;
    const Tensor& xv = t.val(x.id);
    Tensor out(xv.rows(), xv.cols());
    for (long long i = 0; i < xv.size(); ++i) out.data()[i] = c * xv.data()[i];
    check_finite(out, "scale");
    const int xid = x.id;
    return t.emplace(std::move(out), t.requires_grad(xid), [xid, c](Tape& tp, const Tensor& g) {
        Tensor gx(g.rows(), g.cols());
        for (long long i = 0; i < g.size(); ++i) gx.data()[i] = c * g.data()[i];
        tp.accumulate(xid, gx);
    });
}

Var add_scalar(Var x, double c) {
    Tape& t = *x.tape;
    const Tensor& xv = t.val(x.id);
    Tensor out(xv.rows(), xv.cols());
    for (long long i = 0; i < xv.size(); ++i) out.data()[i] = xv.data()[i] + c;
    check_finite(out, "add_scalar");
    const int xid = x.id;
    return t.emplace(std::move(out), t.requires_grad(xid),
                     [xid](Tape& tp, const Tensor& g) { tp.accumulate(xid, g); });
}

Var clip(Var x, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("clip: lo must be < hi");
    Tape& t = *x.tape;
    const Tensor& xv = t.val(x.id);
    Tensor out(xv.rows(), xv.cols());
    for (long long i = 0; i < xv.size(); ++i)
        out.data()[i] = std::min(hi, std::max(lo, xv.data()[i]));
    const int xid = x.id;
    return t.emplace(std::move(out), t.requires_grad(xid),
                     [xid, lo, hi](Tape& tp, const Tensor& g) {
                         const Tensor& xv2 = tp.val(xid);
                         Tensor gx(g.rows(), g.cols());
                         for (long long i = 0; i < g.size(); ++i) {
                             const double v = xv2.data()[i];
                             gx.data()[i] = (v > lo && v < hi) ? g.data()[i] : 0.0;
                         }
                         tp.accumulate(xid, gx);
                     });
}

// --- structural ops ----------------------------------------------------------

Var matmul(Var a, Var b) {
    check_same_tape(a, b, "matmul");
    Tape& t = *a.tape;
    const Tensor& av = t.val(a.id);
    const Tensor& bv = t.val(b.id);
    if (av.cols() != bv.rows())
        throw std::invalid_argument("matmul: shape mismatch " + av.shape_str() + " vs " +
                                    bv.shape_str());
    Tensor out = matmul_plain(av, bv);
    check_finite(out, "matmul");
    const int aid = a.id, bid = b.id;
    return t.emplace(std::move(out), t.requires_grad(aid) || t.requires_grad(bid),
                     [aid, bid](Tape& tp, const Tensor& g) {
                         if (tp.requires_grad(aid)) {
                             const Tensor& bv2 = tp.val(bid);
                             Tensor ga(g.rows(), bv2.rows());
                             accum_nt(g, bv2, ga);
                             tp.accumulate(aid, ga);
                         }
                         if (tp.requires_grad(bid)) {
                             const Tensor& av2 = tp.val(aid);
                             Tensor gb(av2.cols(), g.cols());
                             accum_tn(av2, g, gb);
                             tp.accumulate(bid, gb);
                         }
                     });
}

Var transpose(Var x) {
    Tape& t = *x.tape;
    const Tensor& xv = t.val(x.id);
    Tensor out(xv.cols(), xv.rows());
    for (int i = 0; i < xv.rows(); ++i)
        for (int j = 0; j < xv.cols(); ++j) out(j, i) = xv(i, j);
    const int xid = x.id;
    return t.emplace(std::move(out), t.requires_grad(xid), [xid](Tape& tp, const Tensor& g) {
        Tensor gx(g.cols(), g.rows());
        for (int i = 0; i < g.rows(); ++i)
            for (int j = 0; j < g.cols(); ++j) gx(j, i) = g(i, j);
        tp.accumulate(xid, gx);
    });
}

Var concat_cols(Var a, Var b) {
    check_same_tape(a, b, "concat_cols");
    Tape& t = *a.tape;
    const Tensor& av = t.val(a.id);
    const Tensor& bv = t.val(b.id);
    if (av.rows() != bv.rows())
        throw std::invalid_argument("concat_cols: row mismatch " + av.shape_str() + " vs " +
                                    bv.shape_str());
    Tensor out(av.rows(), av.cols() + bv.cols());
    for (int i = 0; i < av.rows(); ++i) {
        for (int j = 0; j < av.cols(); ++j) out(i, j) = av(i, j);
        for (int j = 0; j < bv.cols(); ++j) out(i, av.cols() + j) = bv(i, j);
    }
    const int aid = a.id, bid = b.id, acols = av.cols(), bcols = bv.cols();
    return t.emplace(std::move(out), t.requires_grad(aid) || t.requires_grad(bid),
                     [aid, bid, acols, bcols](Tape& tp, const Tensor& g) {
                         if (tp.requires_grad(aid)) {
                             Tensor ga(g.rows(), acols);
                             for (int i = 0; i < g.rows(); ++i)
                                 for (int j = 0; j < acols; ++j) ga(i, j) = g(i, j);
                             tp.accumulate(aid, ga);
                         }
                         if (tp.requires_grad(bid)) {
                             Tensor gb(g.rows(), bcols);
                             for (int i = 0; i < g.rows(); ++i)
                                 for (int j = 0; j < bcols; ++j) gb(i, j) = g(i, acols + j);
                             tp.accumulate(bid, gb);
                         }
                     });
}

Var add_rowvec(Var x, Var b) {
    check_same_tape(x, b, "add_rowvec");
    Tape& t = *x.tape;
    const Tensor& xv = t.val(x.id);
    const Tensor& bv = t.val(b.id);
    if (bv.rows() != 1 || bv.cols() != xv.cols())
        throw std::invalid_argument("add_rowvec: bias shape " + bv.shape_str() +
                                    " does not broadcast over " + xv.shape_str());
    Tensor out(xv.rows(), xv.cols());
    for (int i = 0; i < xv.rows(); ++i)
        for (int j = 0; j < xv.cols(); ++j) out(i, j) = xv(i, j) + bv(0, j);
    check_finite(out, "add_rowvec");
    const int xid = x.id, bid = b.id;
    return t.emplace(std::move(out), t.requires_grad(xid) || t.requires_grad(bid),
                     [xid, bid](Tape& tp, const Tensor& g) {
                         tp.accumulate(xid, g);
                         if (!tp.requires_grad(bid)) return;
                         Tensor gb(1, g.cols());
                         for (int i = 0; i < g.rows(); ++i)
                             for (int j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
                         tp.accumulate(bid, gb);
                     });
}

// --- reductions ---------------------------------------------------------------

Var sum(Var x) {
    Tape& t = *x.tape;
    const Tensor& xv = t.val(x.id);
    if (xv.empty()) throw std::invalid_argument("sum: empty input");
    double acc = 0.0;
    for (long long i = 0; i < xv.size(); ++i) acc += xv.data()[i];
    Tensor out = Tensor::constant(1, 1, acc);
    check_finite(out, "sum");
    const int xid = x.id;
    return t.emplace(std::move(out), t.requires_grad(xid), [xid](Tape& tp, const Tensor& g) {
        const Tensor& xv2 = tp.val(xid);
        tp.accumulate(xid, Tensor::constant(xv2.rows(), xv2.cols(), g(0, 0)));
    });
}

Var mean(Var x) {
    Tape& t = *x.tape;
    const Tensor& xv = t.val(x.id);
    if (xv.empty()) throw std::invalid_argument("mean: empty input");
    double acc = 0.0;
    for (long long i = 0; i < xv.size(); ++i) acc += xv.data()[i];
    const double inv = 1.0 / static_cast<double>(xv.size());
    Tensor out = Tensor::constant(1, 1, acc * inv);
    check_finite(out, "mean");
    const int xid = x.id;
    return t.emplace(std::move(out), t.requires_grad(xid), [xid, inv](Tape& tp, const Tensor& g) {
        const Tensor& xv2 = tp.val(xid);
        tp.accumulate(xid, Tensor::constant(xv2.rows(), xv2.cols(), g(0, 0) * inv));
    });
}

Var rowsum(Var x) {
    Tape& t = *x.tape;
    const Tensor& xv = t.val(x.id);
    if (xv.empty()) throw std::invalid_argument("rowsum: empty input");
    Tensor out(xv.rows(), 1);
    for (int i = 0; i < xv.rows(); ++i) {
        double acc = 0.0;
        for (int j = 0; j < xv.cols(); ++j) acc += xv(i, j);
        out(i, 0) = acc;
    }
    check_finite(out, "rowsum");
    const int xid = x.id;
    return t.emplace(std::move(out), t.requires_grad(xid), [xid](Tape& tp, const Tensor& g) {
        const Tensor& xv2 = tp.val(xid);
        Tensor gx(xv2.rows(), xv2.cols());
        for (int i = 0; i < xv2.rows(); ++i)
            for (int j = 0; j < xv2.cols(); ++j) gx(i, j) = g(i, 0);
        tp.accumulate(xid, gx);
    });
}

Var log_sum_exp_rows(Var x) {
    Tape& t = *x.tape;
    const Tensor& xv = t.val(x.id);
    if (xv.empty()) throw std::invalid_argument("log_sum_exp_rows: empty input");
    Tensor out(xv.rows(), 1);
    for (int i = 0; i < xv.rows(); ++i) {
        double mx = xv(i, 0);
        for (int j = 1; j < xv.cols(); ++j) mx = std::max(mx, xv(i, j));
        double acc = 0.0;
        for (int j = 0; j < xv.cols(); ++j) acc += std::exp(xv(i, j) - mx);
        out(i, 0) = mx + std::log(acc);
    }
    check_finite(out, "log_sum_exp_rows");
    const int xid = x.id;
    auto lse = std::make_shared<const Tensor>(std::move(out));
    return t.emplace(lse, t.requires_grad(xid), [xid, lse](Tape& tp, const Tensor& g) {
        const Tensor& xv2 = tp.val(xid);
        Tensor gx(xv2.rows(), xv2.cols());
        for (int i = 0; i < xv2.rows(); ++i)
            for (int j = 0; j < xv2.cols(); ++j)
                gx(i, j) = g(i, 0) * std::exp(xv2(i, j) - (*lse)(i, 0));
        tp.accumulate(xid, gx);
    });
}

Var row_l2_normalize(Var x) {
    Tape& t = *x.tape;
    const Tensor& xv = t.val(x.id);
    Tensor out(xv.rows(), xv.cols());
    std::vector<double> norms(xv.rows(), 0.0);
    for (int i = 0; i < xv.rows(); ++i) {
        double sq = 0.0;
        for (int j = 0; j < xv.cols(); ++j) sq += xv(i, j) * xv(i, j);
        norms[i] = std::sqrt(sq);
        if (norms[i] > 0.0)
            for (int j = 0; j < xv.cols(); ++j) out(i, j) = xv(i, j) / norms[i];
    }
    check_finite(out, "row_l2_normalize");
    const int xid = x.id;
    auto y = std::make_shared<const Tensor>(std::move(out));
    auto nrm = std::make_shared<const std::vector<double>>(std::move(norms));
    return t.emplace(y, t.requires_grad(xid), [xid, y, nrm](Tape& tp, const Tensor& g) {
        Tensor gx(g.rows(), g.cols());
        for (int i = 0; i < g.rows(); ++i) {
            if ((*nrm)[i] == 0.0) continue;  // zero rows get zero gradient
            double dot = 0.0;
            for (int j = 0; j < g.cols(); ++j) dot += g(i, j) * (*y)(i, j);
            for (int j = 0; j < g.cols(); ++j) gx(i, j) = (g(i, j) - dot * (*y)(i, j)) / (*nrm)[i];
        }
        tp.accumulate(xid, gx);
    });
}

Var gather_rows(Var x, std::vector<int> rows) {
    Tape& t = *x.tape;
    const Tensor& xv = t.val(x.id);
    Tensor out(static_cast<int>(rows.size()), xv.cols());
    for (size_t r = 0; r < rows.size(); ++r) {
        const int src = rows[r];
        if (src < 0 || src >= xv.rows())
            throw std::invalid_argument("gather_rows: row " + std::to_string(src) +
                                        " out of range for " + xv.shape_str());
        for (int j = 0; j < xv.cols(); ++j) out(static_cast<int>(r), j) = xv(src, j);
    }
    const int xid = x.id;
    auto idx = std::make_shared<std::vector<int>>(std::move(rows));
    return t.emplace(std::move(out), t.requires_grad(xid), [xid, idx](Tape& tp, const Tensor& g) {
        const Tensor& xv2 = tp.val(xid);
        Tensor gx(xv2.rows(), xv2.cols());
        for (size_t r = 0; r < idx->size(); ++r)
            for (int j = 0; j < g.cols(); ++j) gx((*idx)[r], j) += g(static_cast<int>(r), j);
        tp.accumulate(xid, gx);
    });
}

Var select_entries(Var x, std::vector<std::pair<int, int>> entries) {
    Tape& t = *x.tape;
    const Tensor& xv = t.val(x.id);
    Tensor out(static_cast<int>(entries.size()), 1);
    for (size_t r = 0; r < entries.size(); ++r) {
        const auto [i, j] = entries[r];
        if (i < 0 || i >= xv.rows() || j < 0 || j >= xv.cols())
            throw std::invalid_argument("select_entries: index (" + std::to_string(i) + "," +
                                        std::to_string(j) + ") out of range for " +
                                        xv.shape_str());
        out(static_cast<int>(r), 0) = xv(i, j);
    }
    const int xid = x.id;
    auto idx = std::make_shared<std::vector<std::pair<int, int>>>(std::move(entries));
    return t.emplace(std::move(out), t.requires_grad(xid), [xid, idx](Tape& tp, const Tensor& g) {
        const Tensor& xv2 = tp.val(xid);
        Tensor gx(xv2.rows(), xv2.cols());
        for (size_t r = 0; r < idx->size(); ++r)
            gx((*idx)[r].first, (*idx)[r].second) += g(static_cast<int>(r), 0);
        tp.accumulate(xid, gx);
    });
}

// --- composites ----------------------------------------------------------------

Var reparameterize(Var mu, Var logvar, const Tensor& eps) {
    check_same_tape(mu, logvar, "reparameterize");
    const Tensor& mv = mu.value();
    if (!mv.same_shape(logvar.value()) || !mv.same_shape(eps))
        throw std::invalid_argument("reparameterize: shape mismatch " + mv.shape_str() + " vs " +
                                    logvar.value().shape_str() + " vs " + eps.shape_str());
    Var noise = mu.tape->constant(eps);
    return add(mu, hadamard(exp(scale(logvar, 0.5)), noise));
}

Var gaussian_kl(const Gaussian& q, const Gaussian& p) {
    const Tensor& qm = q.mu.value();
    if (!qm.same_shape(q.logvar.value()) || !qm.same_shape(p.mu.value()) ||
        !qm.same_shape(p.logvar.value()))
        throw std::invalid_argument("gaussian_kl: shape mismatch " + qm.shape_str() + " vs " +
                                    p.mu.value().shape_str());
    Var var_ratio = exp(sub(q.logvar, p.logvar));
    Var diff = sub(q.mu, p.mu);
    Var maha = hadamard(hadamard(diff, diff), exp(negate(p.logvar)));
    Var logdet = sub(p.logvar, q.logvar);
    Var per_entry = add_scalar(add(add(var_ratio, maha), logdet), -1.0);
    return scale(sum(per_entry), 0.5);
}

}  // namespace dygis::ad
