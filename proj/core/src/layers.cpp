#include "bargrain/layers.hpp"

#include <cmath>
#include <vector>

namespace bargrain {

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<double> w(fan_in * fan_out);
    for (double& v : w) v = rng.uniform(-limit, limit);
    return Tensor::from_values(fan_in, fan_out, std::move(w), true);
}

Linear Linear::initialize(std::size_t in, std::size_t out, Rng& rng) {
    return {glorot_uniform(in, out, rng), Tensor::zeros(1, out, true)};
}

}  // namespace bargrain
