#pragma once

#include <cstdint>
#include <random>

#include "dygis/tensor.hpp"

namespace dygis {

// Derives independent sub-streams from one user-facing seed, so that e.g.
// edge splitting and weight init stay decoupled when hyperparameters change.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline Tensor randn(int rows, int cols, Rng& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Tensor t(rows, cols);
    for (long long i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
    return t;
}

// Glorot-uniform: U(+-sqrt(6 / (fan_in + fan_out))) with fan_in = rows,
// fan_out = cols for a weight applied as x * W.
inline Tensor glorot_uniform(int rows, int cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Tensor t(rows, cols);
    for (long long i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
    return t;
}

}  // namespace dygis
