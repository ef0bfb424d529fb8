#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bargrain/graphgen.hpp"
#include "bargrain/layers.hpp"
#include "bargrain/preprocess.hpp"
#include "bargrain/tensor.hpp"

namespace bargrain {

// Which graph components the network uses.
//   full      both branches
//   no_corr   optimal-graph branch only
//   no_optim  filtered-graph branch only
//   no_gconv  no graph convolution: raw correlation rows pooled in both slots
enum class AblationMode { full, no_corr, no_optim, no_gconv };

inline constexpr AblationMode kAllModes[] = {AblationMode::full, AblationMode::no_corr, AblationMode::no_optim,
                                             AblationMode::no_gconv};

// "full", "no-corr", "no-optim", "no-gconv"
std::string_view to_string(AblationMode mode);
// Accepts the dashed names above and their underscore spellings.
AblationMode parse_mode(std::string_view name);

bool uses_filtered_branch(AblationMode mode);
bool uses_optimal_branch(AblationMode mode);

struct ModelConfig {
    std::size_t n_rois = 0;
    std::size_t t_steps = 0;
    std::size_t d_h = 32;                // node embedding size of the edge scorer
    std::size_t hidden = 32;             // H, first GCN layer width
    std::size_t out = 16;                // F, second GCN layer width
    std::size_t classifier_hidden = 32;  // H_c
    double threshold_c = 0.6;
    double tau = 1.0;
    AblationMode mode = AblationMode::full;
    std::uint64_t seed = 0;

    void validate() const;
    std::size_t classifier_input() const;

    bool operator==(const ModelConfig&) const = default;
};

// Two-layer GCN weights (no biases).
struct GcnStack {
    Tensor w0;  // N x H
    Tensor w1;  // H x F
};

struct ClassifierHead {
    Linear fc_a;  // pooled -> H_c
    Linear fc_b;  // H_c -> 1
};

/// Every learnable parameter of the network. Components a mode does not use
/// are absent. Copies share parameter storage; use clone() for a deep copy.
struct ModelState {
    ModelConfig config;
    std::optional<EdgeScorer> scorer;
    std::optional<GcnStack> gcn_filtered;
    std::optional<GcnStack> gcn_optimal;
    ClassifierHead head;

    /// Seeded Glorot-uniform weights and zero biases, drawn in declaration order.
    static ModelState initialize(const ModelConfig& config);

    // Scorer, filtered GCN, optimal GCN, head; the checkpoint order.
    std::vector<Tensor> parameters() const;
    std::size_t parameter_count() const;
    ModelState clone() const;
};

// Closed-form parameter count for a configuration.
std::size_t parameter_count(const ModelConfig& config);

/// A_norm = D^-1/2 (A + I) D^-1/2 with D the row sums of A + I. Applied as
/// written to directed (asymmetric) inputs. Gradients flow through the soft
/// adjacency when it requires them.
Tensor normalize_adjacency(const Tensor& a);
Matrix normalize_adjacency(const Matrix& a);

/// ReLU(A_norm ReLU(A_norm V W0) W1): row i is node i's F-dimensional embedding.
Tensor gcn_forward(const Tensor& features, const Tensor& a_norm, const GcnStack& stack);

// Row-major flattening of node embeddings, node 0 first.
Tensor concat_pool(const Tensor& node_embeddings);

/// Everything about a subject that does not depend on parameters. Built once
/// per subject and reused across epochs.
struct SubjectInput {
    std::string subject_id;
    int label = 0;
    Tensor series;         // N x T constant
    Tensor features;       // correlation rows, N x N constant
    Matrix filtered;       // binary filtered adjacency
    Tensor filtered_norm;  // its normalized form, constant

    static SubjectInput prepare(const BoldMatrix& subject, double threshold_c);
};

std::vector<SubjectInput> prepare_subjects(const Dataset& dataset, double threshold_c);

/// Scalar logit for one subject.
///
/// With noise, the optimal branch runs on the relaxed soft sample and the
/// result is differentiable through theta. Without noise (evaluation), the
/// optimal adjacency is the hardened noise-free graph, theta_ij >= 0.5.
Tensor forward(const SubjectInput& input, const ModelState& state, const GumbelNoise* noise);

// Noise-free hardened optimal adjacency used at evaluation time.
Matrix evaluation_optimal_graph(const SubjectInput& input, const ModelState& state);

// sigma(logit) on the evaluation path.
double predict_probability(const SubjectInput& input, const ModelState& state);

}  // namespace bargrain
