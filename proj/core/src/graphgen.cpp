#include "bargrain/graphgen.hpp"

#include <string>

#include "bargrain/errors.hpp"

namespace bargrain {

FilteredAdjacency build_filtered(const CorrMatrix& v, double c) {
    if (!(c > 0.0 && c < 1.0)) {
        throw ValidationError("build_filtered: threshold c must lie in (0,1), got " + std::to_string(c));
    }
    const std::size_t n = v.size();
    if (v.values.cols() != n) throw DimensionError("build_filtered: correlation matrix is not square");
    FilteredAdjacency out{Matrix(n, n), c};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && v.values(i, j) > c) out.values(i, j) = 1.0;
    return out;
}

EdgeScorer EdgeScorer::initialize(std::size_t t_steps, std::size_t d_h, Rng& rng) {
    EdgeScorer s;
    s.extractor = Linear::initialize(t_steps, d_h, rng);
    s.pair_hidden = Linear::initialize(2 * d_h, d_h, rng);
    s.pair_out = Linear::initialize(d_h, 1, rng);
    return s;
}

std::vector<Tensor> EdgeScorer::parameters() const {
    return {extractor.weight, extractor.bias, pair_hidden.weight, pair_hidden.bias, pair_out.weight,
            pair_out.bias};
}

Tensor edge_probabilities(const Tensor& series, const EdgeScorer& scorer) {
    if (series.cols() != scorer.t_steps()) {
        throw ContractError("edge_probabilities: series has " + std::to_string(series.cols()) +
                            " time steps, scorer expects " + std::to_string(scorer.t_steps()));
    }
    const std::size_t n = series.rows();
    const Tensor h = relu(scorer.extractor(series));

    // Row i*n + j of the pair matrix holds h_i || h_j.
    std::vector<std::size_t> src(n * n), dst(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            src[i * n + j] = i;
            dst[i * n + j] = j;
        }
    }
    const Tensor pairs = concat_cols(gather_rows(h, src), gather_rows(h, dst));
    const Tensor hidden = relu(scorer.pair_hidden(pairs));
    return reshape(sigmoid(scorer.pair_out(hidden)), n, n);
}

GumbelNoise GumbelNoise::sample(std::size_t n, Rng& rng) {
    GumbelNoise noise{Matrix(n, n), Matrix(n, n)};
    for (double& g : noise.g1.values()) g = rng.gumbel();
    for (double& g : noise.g2.values()) g = rng.gumbel();
    return noise;
}

GumbelNoise GumbelNoise::zero(std::size_t n) { return {Matrix(n, n), Matrix(n, n)}; }

OptimalAdjacency gumbel_sample(const Tensor& theta, double tau, const GumbelNoise& noise) {
    if (!(tau > 0.0)) throw ValidationError("gumbel_sample: temperature must be positive");
    const std::size_t n = theta.rows();
    if (theta.cols() != n || noise.g1.rows() != n || noise.g1.cols() != n || noise.g2.rows() != n ||
        noise.g2.cols() != n) {
        throw DimensionError("gumbel_sample: theta " + shape_string(theta.rows(), theta.cols()) +
                             " and noise " + shape_string(noise.g1.rows(), noise.g1.cols()) + " must be square and equal");
    }
    Matrix diff(n, n);
    Matrix off_diagonal(n, n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        off_diagonal(i, i) = 0.0;
        for (std::size_t j = 0; j < n; ++j) diff(i, j) = noise.g1(i, j) - noise.g2(i, j);
    }
    const Tensor perturbed = add(logit(theta), Tensor::constant(diff));
    const Tensor soft = mul(sigmoid(scale(perturbed, 1.0 / tau)), Tensor::constant(off_diagonal));
    return {soft, Matrix(), tau};
}

Matrix harden(const Matrix& soft) {
    Matrix hard(soft.rows(), soft.cols());
    for (std::size_t i = 0; i < soft.size(); ++i) hard.values()[i] = soft.values()[i] >= 0.5 ? 1.0 : 0.0;
    for (std::size_t i = 0; i < std::min(hard.rows(), hard.cols()); ++i) hard(i, i) = 0.0;
    return hard;
}

OptimalAdjacency harden(const OptimalAdjacency& adj) {
    OptimalAdjacency out = adj;
    out.hard = harden(adj.soft.to_matrix());
    return out;
}

}  // namespace bargrain
