#include "bargrain/optimizer.hpp"

#include <cmath>

namespace bargrain {

Adam::Adam(std::vector<Tensor> parameters, AdamOptions options)
    : params_(std::move(parameters)), options_(options) {
    for (const auto& p : params_) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void Adam::step() {
    ++t_;
    const double b1 = options_.beta1, b2 = options_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        auto& p = params_[k];
        auto values = p.mutable_values();
        const bool has_grad = p.has_grad();
        const auto grad = p.grad();
        auto& m = m_[k];
        auto& v = v_[k];
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double g = has_grad ? grad[i] : 0.0;
            m[i] = b1 * m[i] + (1.0 - b1) * g;
            v[i] = b2 * v[i] + (1.0 - b2) * g * g;
            values[i] -= options_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + options_.epsilon);
        }
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

}  // namespace bargrain
