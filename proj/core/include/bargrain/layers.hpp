#pragma once

#include <cstddef>

#include "bargrain/rng.hpp"
#include "bargrain/tensor.hpp"

namespace bargrain {

// Weight matrix with entries uniform in +-sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

// Fully connected layer y = x W + b over row vectors (x is rows x in).
struct Linear {
    Tensor weight;  // in x out
    Tensor bias;    // 1 x out

    static Linear initialize(std::size_t in, std::size_t out, Rng& rng);

    std::size_t in_features() const { return weight.rows(); }
    std::size_t out_features() const { return weight.cols(); }

    Tensor operator()(const Tensor& x) const { return add_row(matmul(x, weight), bias); }
};

}  // namespace bargrain
