#pragma once

#include <cstddef>
#include <vector>

#include "bargrain/layers.hpp"
#include "bargrain/matrix.hpp"
#include "bargrain/preprocess.hpp"
#include "bargrain/rng.hpp"
#include "bargrain/tensor.hpp"

namespace bargrain {

// Thresholded correlation graph. Symmetric, zero diagonal, binary.
struct FilteredAdjacency {
    Matrix values;
    double threshold_c = 0.6;
};

/// Edge (i, j), i != j, is present iff V_ij > c (strict). The diagonal is
/// always 0: self-loops are added once, during normalization.
FilteredAdjacency build_filtered(const CorrMatrix& v, double c);

/// Learnable pairwise edge scorer.
///
/// Each ROI series x_i (length T) is embedded as h_i = ReLU(x_i W_e + b_e)
/// with d_h outputs. A pair (i, j) is scored by two fully connected layers
/// over the concatenation h_i || h_j:
///
///     theta_ij = sigmoid(FC_2(ReLU(FC_1(h_i || h_j))))
///
/// FC_1 maps 2*d_h -> d_h and FC_2 maps d_h -> 1, so theta_ij lies in (0,1).
struct EdgeScorer {
    Linear extractor;  // T -> d_h
    Linear pair_hidden;  // 2*d_h -> d_h
    Linear pair_out;     // d_h -> 1

    static EdgeScorer initialize(std::size_t t_steps, std::size_t d_h, Rng& rng);

    std::size_t t_steps() const { return extractor.in_features(); }
    std::size_t embedding_size() const { return extractor.out_features(); }
    std::vector<Tensor> parameters() const;
};

/// N x N matrix of theta_ij for a subject's N x T series (a constant tensor).
/// Row i is the source node. Differentiable w.r.t. the scorer parameters.
Tensor edge_probabilities(const Tensor& series, const EdgeScorer& scorer);

// Two independent standard Gumbel draws per ordered node pair.
struct GumbelNoise {
    Matrix g1;
    Matrix g2;

    static GumbelNoise sample(std::size_t n, Rng& rng);
    static GumbelNoise zero(std::size_t n);
};

struct OptimalAdjacency {
    Tensor soft;  // relaxed sample in [0,1], zero diagonal, carries gradient to theta
    Matrix hard;  // 0/1 indicator of soft >= 0.5; empty until harden()
    double tau = 1.0;
};

/// Relaxed Bernoulli sample of the directed graph:
///
///     soft_ij = sigmoid((log(theta_ij / (1 - theta_ij)) + g1_ij - g2_ij) / tau)
///
/// with the diagonal zeroed afterwards. Noise is passed in explicitly so
/// that a frozen draw makes the map deterministic.
OptimalAdjacency gumbel_sample(const Tensor& theta, double tau, const GumbelNoise& noise);

Matrix harden(const Matrix& soft);
OptimalAdjacency harden(const OptimalAdjacency& adj);

}  // namespace bargrain
