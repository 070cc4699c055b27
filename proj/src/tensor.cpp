#include "dygis/tensor.hpp"

namespace dygis {

Tensor matmul_plain(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: shape mismatch " + a.shape_str() + " vs " +
                                    b.shape_str());
    Tensor out(a.rows(), b.cols());
    const int n = a.rows(), k = a.cols(), m = b.cols();
    const double* ap = a.data();
    const double* bp = b.data();
    double* op = out.data();
    for (int i = 0; i < n; ++i) {
        const double* arow = ap + static_cast<size_t>(i) * k;
        double* orow = op + static_cast<size_t>(i) * m;
        for (int kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            if (av == 0.0) continue;
            const double* brow = bp + static_cast<size_t>(kk) * m;
            for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

}  // namespace dygis
