#pragma once

#include <cstddef>
#include <vector>

#include "bargrain/tensor.hpp"

namespace bargrain {

struct AdamOptions {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with bias-corrected moments:
///   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2
///   p -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
/// Parameters without a gradient are treated as having a zero gradient.
class Adam {
public:
    Adam(std::vector<Tensor> parameters, AdamOptions options);

    void step();
    void zero_grad();

    std::size_t steps() const noexcept { return t_; }
    const AdamOptions& options() const noexcept { return options_; }

private:
    std::vector<Tensor> params_;
    AdamOptions options_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::size_t t_ = 0;
};

}  // namespace bargrain
