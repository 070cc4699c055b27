#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dygis {

// Dense row-major matrix of doubles. The only numeric container in the
// project; vectors are n x 1 (or 1 x n) tensors.
class Tensor {
public:
    Tensor() = default;

    Tensor(int rows, int cols)
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(check_dims(rows, cols)), 0.0) {}

    Tensor(int rows, int cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != static_cast<size_t>(check_dims(rows, cols)))
            throw std::invalid_argument("Tensor: data length " + std::to_string(data_.size()) +
                                        " does not match shape " + shape_str(rows, cols));
    }

    // Row-wise brace construction for tests and small fixtures.
    Tensor(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = static_cast<int>(rows.size());
        cols_ = rows_ > 0 ? static_cast<int>(rows.begin()->size()) : 0;
        data_.reserve(static_cast<size_t>(rows_) * cols_);
        for (const auto& r : rows) {
            if (static_cast<int>(r.size()) != cols_)
                throw std::invalid_argument("Tensor: ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Tensor zeros(int rows, int cols) { return Tensor(rows, cols); }

    static Tensor constant(int rows, int cols, double v) {
        Tensor t(rows, cols);
        for (double& x : t.data_) x = v;
        return t;
    }

    static Tensor identity(int n) {
        Tensor t(n, n);
        for (int i = 0; i < n; ++i) t(i, i) = 1.0;
        return t;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    long long size() const { return static_cast<long long>(rows_) * cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<const double> values() const { return data_; }
    std::span<double> values() { return data_; }

    bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    std::string shape_str() const { return shape_str(rows_, cols_); }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    Tensor& operator+=(const Tensor& o) {
        require_same_shape(o, "+=");
        for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }

    void require_same_shape(const Tensor& o, const char* op) const {
        if (!same_shape(o))
            throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str() +
                                        " vs " + o.shape_str());
    }

    static std::string shape_str(int r, int c) {
        return "(" + std::to_string(r) + "x" + std::to_string(c) + ")";
    }

private:
    static long long check_dims(int rows, int cols) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("Tensor: negative dimension");
        return static_cast<long long>(rows) * cols;
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// y = a * b without tape tracking. Used by plain (non-differentiated) code paths.
Tensor matmul_plain(const Tensor& a, const Tensor& b);

}  // namespace dygis
