#include "bargrain/model.hpp"

#include <cmath>

#include "bargrain/errors.hpp"
#include "bargrain/rng.hpp"

namespace bargrain {

std::string_view to_string(AblationMode mode) {
    switch (mode) {
        case AblationMode::full: return "full";
        case AblationMode::no_corr: return "no-corr";
        case AblationMode::no_optim: return "no-optim";
        case AblationMode::no_gconv: return "no-gconv";
    }
    return "unknown";
}

AblationMode parse_mode(std::string_view name) {
    if (name == "full") return AblationMode::full;
    if (name == "no-corr" || name == "no_corr") return AblationMode::no_corr;
    if (name == "no-optim" || name == "no_optim") return AblationMode::no_optim;
    if (name == "no-gconv" || name == "no_gconv") return AblationMode::no_gconv;
    throw ValidationError("unknown mode '" + std::string(name) + "' (expected full|no-corr|no-optim|no-gconv)");
}

bool uses_filtered_branch(AblationMode mode) { return mode == AblationMode::full || mode == AblationMode::no_optim; }
bool uses_optimal_branch(AblationMode mode) { return mode == AblationMode::full || mode == AblationMode::no_corr; }

void ModelConfig::validate() const {
    if (n_rois < 2 || t_steps < 3) {
        throw ValidationError("model config: need n_rois >= 2 and t_steps >= 3, got " +
                              shape_string(n_rois, t_steps));
    }
    if (d_h == 0 || hidden == 0 || out == 0 || classifier_hidden == 0) {
        throw ValidationError("model config: layer sizes must be positive");
    }
    if (!(threshold_c > 0.0 && threshold_c < 1.0)) throw ValidationError("model config: threshold_c must lie in (0,1)");
    if (!(tau > 0.0)) throw ValidationError("model config: tau must be positive");
}

std::size_t ModelConfig::classifier_input() const {
    switch (mode) {
        case AblationMode::full: return 2 * n_rois * out;
        case AblationMode::no_corr:
        case AblationMode::no_optim: return n_rois * out;
        case AblationMode::no_gconv: return 2 * n_rois * n_rois;
    }
    return 0;
}

ModelState ModelState::initialize(const ModelConfig& config) {
    config.validate();
    Rng rng(derive_seed(config.seed, 0x1417));
    ModelState s;
    s.config = config;
    if (uses_optimal_branch(config.mode)) s.scorer = EdgeScorer::initialize(config.t_steps, config.d_h, rng);
    auto make_stack = [&] {
        GcnStack g;
        g.w0 = glorot_uniform(config.n_rois, config.hidden, rng);
        g.w1 = glorot_uniform(config.hidden, config.out, rng);
        return g;
    };
    if (uses_filtered_branch(config.mode)) s.gcn_filtered = make_stack();
    if (uses_optimal_branch(config.mode)) s.gcn_optimal = make_stack();
    s.head.fc_a = Linear::initialize(config.classifier_input(), config.classifier_hidden, rng);
    s.head.fc_b = Linear::initialize(config.classifier_hidden, 1, rng);
    return s;
}

std::vector<Tensor> ModelState::parameters() const {
    std::vector<Tensor> p;
    if (scorer) {
        for (auto& t : scorer->parameters()) p.push_back(t);
    }
    if (gcn_filtered) {
        p.push_back(gcn_filtered->w0);
        p.push_back(gcn_filtered->w1);
    }
    if (gcn_optimal) {
        p.push_back(gcn_optimal->w0);
        p.push_back(gcn_optimal->w1);
    }
    p.push_back(head.fc_a.weight);
    p.push_back(head.fc_a.bias);
    p.push_back(head.fc_b.weight);
    p.push_back(head.fc_b.bias);
    return p;
}

std::size_t ModelState::parameter_count() const {
    std::size_t total = 0;
    for (const auto& t : parameters()) total += t.size();
    return total;
}

ModelState ModelState::clone() const {
    auto copy_tensor = [](const Tensor& t) {
        return Tensor::from_values(t.rows(), t.cols(), {t.values().begin(), t.values().end()}, t.requires_grad());
    };
    auto copy_linear = [&](const Linear& l) { return Linear{copy_tensor(l.weight), copy_tensor(l.bias)}; };
    ModelState c;
    c.config = config;
    if (scorer) {
        c.scorer = EdgeScorer{copy_linear(scorer->extractor), copy_linear(scorer->pair_hidden),
                              copy_linear(scorer->pair_out)};
    }
    if (gcn_filtered) c.gcn_filtered = GcnStack{copy_tensor(gcn_filtered->w0), copy_tensor(gcn_filtered->w1)};
    if (gcn_optimal) c.gcn_optimal = GcnStack{copy_tensor(gcn_optimal->w0), copy_tensor(gcn_optimal->w1)};
    c.head = ClassifierHead{copy_linear(head.fc_a), copy_linear(head.fc_b)};
    return c;
}

std::size_t parameter_count(const ModelConfig& c) {
    const std::size_t scorer = c.t_steps * c.d_h + c.d_h + 2 * c.d_h * c.d_h + c.d_h + c.d_h + 1;
    const std::size_t gcn = c.n_rois * c.hidden + c.hidden * c.out;
    const std::size_t head = c.classifier_input() * c.classifier_hidden + c.classifier_hidden + c.classifier_hidden + 1;
    std::size_t total = head;
    if (uses_optimal_branch(c.mode)) total += scorer + gcn;
    if (uses_filtered_branch(c.mode)) total += gcn;
    return total;
}

Tensor normalize_adjacency(const Tensor& a) {
    if (a.rows() != a.cols()) throw DimensionError("normalize_adjacency: adjacency must be square");
    const Tensor with_loops = add(a, Tensor::constant(Matrix::identity(a.rows())));
    const Tensor inv_sqrt_degree = pow(row_sum(with_loops), -0.5);  // N x 1
    return mul(with_loops, matmul(inv_sqrt_degree, transpose(inv_sqrt_degree)));
}

Matrix normalize_adjacency(const Matrix& a) { return normalize_adjacency(Tensor::constant(a)).to_matrix(); }

Tensor gcn_forward(const Tensor& features, const Tensor& a_norm, const GcnStack& stack) {
    if (a_norm.rows() != features.rows() || a_norm.cols() != features.rows()) {
        throw ContractError("gcn_forward: adjacency " + shape_string(a_norm.rows(), a_norm.cols()) +
                            " does not match " + std::to_string(features.rows()) + " nodes");
    }
    const Tensor first = relu(matmul(matmul(a_norm, features), stack.w0));
    return relu(matmul(matmul(a_norm, first), stack.w1));
}

Tensor concat_pool(const Tensor& node_embeddings) { return flatten(node_embeddings); }

SubjectInput SubjectInput::prepare(const BoldMatrix& subject, double threshold_c) {
    const CorrMatrix v = pearson_correlation(subject);
    const FilteredAdjacency filtered = build_filtered(v, threshold_c);
    SubjectInput in;
    in.subject_id = subject.subject_id;
    in.label = static_cast<int>(subject.label);
    in.series = Tensor::constant(subject.series);
    in.features = Tensor::constant(v.values);
    in.filtered = filtered.values;
    in.filtered_norm = Tensor::constant(normalize_adjacency(filtered.values));
    return in;
}

std::vector<SubjectInput> prepare_subjects(const Dataset& dataset, double threshold_c) {
    std::vector<SubjectInput> out;
    out.reserve(dataset.size());
    for (const auto& s : dataset.subjects) out.push_back(SubjectInput::prepare(s, threshold_c));
    return out;
}

namespace {

void check_dimensions(const SubjectInput& input, const ModelState& state) {
    const auto& c = state.config;
    if (input.series.rows() != c.n_rois || input.series.cols() != c.t_steps) {
        throw ContractError("forward: subject '" + input.subject_id + "' has shape " +
                            shape_string(input.series.rows(), input.series.cols()) + ", model expects " +
                            shape_string(c.n_rois, c.t_steps));
    }
    const bool consistent = state.scorer.has_value() == uses_optimal_branch(c.mode) &&
                            state.gcn_optimal.has_value() == uses_optimal_branch(c.mode) &&
                            state.gcn_filtered.has_value() == uses_filtered_branch(c.mode) &&
                            state.head.fc_a.in_features() == c.classifier_input();
    if (!consistent) {
        throw ContractError("forward: model components do not match mode '" + std::string(to_string(c.mode)) + "'");
    }
}

}  // namespace

Matrix evaluation_optimal_graph(const SubjectInput& input, const ModelState& state) {
    if (!state.scorer) throw ContractError("evaluation_optimal_graph: model has no edge scorer");
    const Tensor theta = edge_probabilities(input.series, *state.scorer);
    return harden(gumbel_sample(theta, state.config.tau, GumbelNoise::zero(theta.rows()))).hard;
}

Tensor forward(const SubjectInput& input, const ModelState& state, const GumbelNoise* noise) {
    check_dimensions(input, state);
    const auto mode = state.config.mode;

    Tensor pooled;
    if (mode == AblationMode::no_gconv) {
        const Tensor raw = concat_pool(input.features);
        pooled = concat_vec(raw, raw);
    } else {
        Tensor z_filtered, z_optimal;
        if (uses_filtered_branch(mode)) {
            z_filtered = concat_pool(gcn_forward(input.features, input.filtered_norm, *state.gcn_filtered));
        }
        if (uses_optimal_branch(mode)) {
            Tensor a_norm;
            if (noise) {
                const Tensor theta = edge_probabilities(input.series, *state.scorer);
                a_norm = normalize_adjacency(gumbel_sample(theta, state.config.tau, *noise).soft);
            } else {
                a_norm = Tensor::constant(normalize_adjacency(evaluation_optimal_graph(input, state)));
            }
            z_optimal = concat_pool(gcn_forward(input.features, a_norm, *state.gcn_optimal));
        }
        if (z_filtered.defined() && z_optimal.defined()) {
            pooled = concat_vec(z_filtered, z_optimal);
        } else {
            pooled = z_filtered.defined() ? z_filtered : z_optimal;
        }
    }
    return state.head.fc_b(relu(state.head.fc_a(pooled)));
}

double predict_probability(const SubjectInput& input, const ModelState& state) {
    const double z = forward(input, state, nullptr).item();
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace bargrain
