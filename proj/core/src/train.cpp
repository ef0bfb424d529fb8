#include "bargrain/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bargrain/errors.hpp"
#include "bargrain/optimizer.hpp"
#include "bargrain/rng.hpp"

namespace bargrain {

namespace {

constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kTrainStream = 2;

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double bce_value(double z, int y) { return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z))); }

double sigmoid_value(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

struct EvalPass {
    std::vector<double> probabilities;
    std::vector<int> labels;
    double mean_loss = 0.0;
};

EvalPass evaluation_pass(const ModelState& state, const std::vector<SubjectInput>& subjects,
                         std::span<const std::size_t> indices) {
    EvalPass pass;
    for (std::size_t i : indices) {
        const double z = forward(subjects.at(i), state, nullptr).item();
        pass.probabilities.push_back(sigmoid_value(z));
        pass.labels.push_back(subjects[i].label);
        pass.mean_loss += bce_value(z, subjects[i].label);
    }
    if (!indices.empty()) pass.mean_loss /= static_cast<double>(indices.size());
    return pass;
}

void copy_parameters(const ModelState& from, ModelState& to) {
    const auto src = from.parameters();
    auto dst = to.parameters();
    for (std::size_t k = 0; k < src.size(); ++k) {
        std::copy(src[k].values().begin(), src[k].values().end(), dst[k].mutable_values().begin());
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ValidationError("train config: learning_rate must be finite and non-negative");
    }
    if (hidden_H == 0 || out_F == 0 || classifier_H_c == 0 || d_h == 0) {
        throw ValidationError("train config: layer sizes must be positive");
    }
    if (!(threshold_c > 0.0 && threshold_c < 1.0)) throw ValidationError("train config: threshold_c must lie in (0,1)");
    if (!(tau > 0.0)) throw ValidationError("train config: tau must be positive");
    if (epochs <= 0 || patience <= 0 || batch_size == 0) {
        throw ValidationError("train config: epochs, patience and batch_size must be positive");
    }
}

ModelConfig TrainConfig::model_config(std::size_t n_rois, std::size_t t_steps) const {
    ModelConfig m;
    m.n_rois = n_rois;
    m.t_steps = t_steps;
    m.d_h = d_h;
    m.hidden = hidden_H;
    m.out = out_F;
    m.classifier_hidden = classifier_H_c;
    m.threshold_c = threshold_c;
    m.tau = tau;
    m.mode = mode;
    m.seed = seed;
    return m;
}

TrainConfig parse_train_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw LoadError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw LoadError("config: expected a JSON object");

    TrainConfig c;
    auto read_size = [](const nlohmann::json& v, const std::string& key) {
        if (!v.is_number_unsigned()) throw LoadError("config: '" + key + "' must be a non-negative integer");
        return v.get<std::size_t>();
    };
    auto read_int = [](const nlohmann::json& v, const std::string& key) {
        if (!v.is_number_integer()) throw LoadError("config: '" + key + "' must be an integer");
        return v.get<int>();
    };
    auto read_real = [](const nlohmann::json& v, const std::string& key) {
        if (!v.is_number()) throw LoadError("config: '" + key + "' must be a number");
        return v.get<double>();
    };
    for (const auto& [key, v] : j.items()) {
        if (key == "learning_rate") c.learning_rate = read_real(v, key);
        else if (key == "hidden_H") c.hidden_H = read_size(v, key);
        else if (key == "out_F") c.out_F = read_size(v, key);
        else if (key == "classifier_H_c") c.classifier_H_c = read_size(v, key);
        else if (key == "d_h") c.d_h = read_size(v, key);
        else if (key == "threshold_c") c.threshold_c = read_real(v, key);
        else if (key == "tau") c.tau = read_real(v, key);
        else if (key == "epochs") c.epochs = read_int(v, key);
        else if (key == "patience") c.patience = read_int(v, key);
        else if (key == "batch_size") c.batch_size = read_size(v, key);
        else if (key == "seed") c.seed = read_size(v, key);
        else if (key == "mode") {
            if (!v.is_string()) throw LoadError("config: 'mode' must be a string");
            try {
                c.mode = parse_mode(v.get<std::string>());
            } catch (const ValidationError& e) {
                throw LoadError(std::string("config: ") + e.what());
            }
        } else {
            throw LoadError("config: unknown key '" + key + "'");
        }
    }
    try {
        c.validate();
    } catch (const ValidationError& e) {
        throw LoadError(e.what());
    }
    return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_train_config(ss.str());
}

std::string train_config_to_json(const TrainConfig& c) {
    nlohmann::ordered_json j;
    j["learning_rate"] = c.learning_rate;
    j["hidden_H"] = c.hidden_H;
    j["out_F"] = c.out_F;
    j["classifier_H_c"] = c.classifier_H_c;
    j["d_h"] = c.d_h;
    j["threshold_c"] = c.threshold_c;
    j["tau"] = c.tau;
    j["epochs"] = c.epochs;
    j["patience"] = c.patience;
    j["batch_size"] = c.batch_size;
    j["seed"] = c.seed;
    j["mode"] = std::string(to_string(c.mode));
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Splits

SplitIndices split_labels(std::span<const int> labels, std::uint64_t seed) {
    const std::size_t n = labels.size();
    if (n < 5) throw ValidationError("split: need at least 5 subjects, got " + std::to_string(n));
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < n; ++i) (labels[i] == 1 ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty()) throw ValidationError("split: both classes must be present");

    Rng rng(derive_seed(seed, kSplitStream));
    rng.shuffle(std::span(pos));
    rng.shuffle(std::span(neg));

    const auto n_test = static_cast<std::size_t>(std::llround(0.20 * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::llround(0.15 * static_cast<double>(n - n_test)));

    // Share of `total` that goes to the positive class, kept feasible for both classes.
    auto positive_share = [](std::size_t total, std::size_t pos_left, std::size_t neg_left) {
        const double all = static_cast<double>(pos_left + neg_left);
        auto k = static_cast<std::size_t>(std::llround(static_cast<double>(total) * static_cast<double>(pos_left) / all));
        k = std::min(k, pos_left);
        if (total - k > neg_left) k = total - neg_left;
        return k;
    };

    SplitIndices out;
    std::size_t p = 0, q = 0;
    auto take = [&](std::vector<std::size_t>& dst, std::size_t total) {
        const std::size_t kp = positive_share(total, pos.size() - p, neg.size() - q);
        dst.insert(dst.end(), pos.begin() + static_cast<std::ptrdiff_t>(p), pos.begin() + static_cast<std::ptrdiff_t>(p + kp));
        dst.insert(dst.end(), neg.begin() + static_cast<std::ptrdiff_t>(q),
                   neg.begin() + static_cast<std::ptrdiff_t>(q + total - kp));
        p += kp;
        q += total - kp;
        std::sort(dst.begin(), dst.end());
    };
    take(out.test, n_test);
    take(out.val, n_val);
    take(out.train, n - n_test - n_val);
    return out;
}

SplitIndices split_dataset(const Dataset& dataset, std::uint64_t seed) {
    std::vector<int> labels;
    for (const auto& s : dataset.subjects) labels.push_back(static_cast<int>(s.label));
    return split_labels(labels, seed);
}

// ---------------------------------------------------------------------------
// Training

FitResult fit(const std::vector<SubjectInput>& subjects, std::span<const std::size_t> train,
              std::span<const std::size_t> val, const TrainConfig& config) {
    config.validate();
    if (subjects.empty() || train.empty()) throw ValidationError("fit: empty training set");
    const std::size_t n_rois = subjects.front().series.rows();
    const std::size_t t_steps = subjects.front().series.cols();

    ModelState state = ModelState::initialize(config.model_config(n_rois, t_steps));
    Adam adam(state.parameters(), AdamOptions{config.learning_rate});
    Rng rng(derive_seed(config.seed, kTrainStream));
    const bool sample_noise = uses_optimal_branch(config.mode);

    FitResult result{state.clone(), {}, 0};
    double best_f1 = -1.0;
    double best_loss = 0.0;
    int since_improvement = 0;

    std::vector<std::size_t> order(train.begin(), train.end());
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(std::span(order));
        double loss_total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const double weight = 1.0 / static_cast<double>(end - start);
            adam.zero_grad();
            for (std::size_t k = start; k < end; ++k) {
                const SubjectInput& s = subjects.at(order[k]);
                Tensor loss;
                if (sample_noise) {
                    const GumbelNoise noise = GumbelNoise::sample(n_rois, rng);
                    loss = bce_with_logits(forward(s, state, &noise), s.label);
                } else {
                    loss = bce_with_logits(forward(s, state, nullptr), s.label);
                }
                if (!std::isfinite(loss.item())) {
                    throw DivergenceError("non-finite training loss at epoch " + std::to_string(epoch) +
                                              " (subject '" + s.subject_id + "')",
                                          epoch);
                }
                loss_total += loss.item();
                scale(loss, weight).backward();
            }
            adam.step();
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_total / static_cast<double>(order.size());
        if (!val.empty()) {
            const EvalPass pass = evaluation_pass(state, subjects, val);
            rec.val_f1 = f1_score(confusion(pass.probabilities, pass.labels));
            rec.val_loss = pass.mean_loss;
        }
        if (!std::isfinite(rec.val_loss)) {
            throw DivergenceError("non-finite validation loss at epoch " + std::to_string(epoch), epoch);
        }
        result.log.push_back(rec);

        if (rec.val_f1 > best_f1 || (rec.val_f1 == best_f1 && rec.val_loss < best_loss)) {
            best_f1 = rec.val_f1;
            best_loss = rec.val_loss;
            result.best_epoch = epoch;
            copy_parameters(state, result.model);
            since_improvement = 0;
        } else if (++since_improvement >= config.patience) {
            break;
        }
    }
    return result;
}

TrainResult train_model(const Dataset& dataset, const TrainConfig& config) {
    config.validate();
    const auto subjects = prepare_subjects(dataset, config.threshold_c);
    SplitIndices split = split_dataset(dataset, config.seed);
    FitResult fitted = fit(subjects, split.train, split.val, config);
    Metrics test = evaluate(fitted.model, subjects, split.test);
    return {std::move(fitted.model), test, std::move(fitted.log), std::move(split), fitted.best_epoch};
}

Metrics evaluate(const ModelState& state, const std::vector<SubjectInput>& subjects,
                 std::span<const std::size_t> indices) {
    if (indices.empty()) throw ValidationError("evaluate: empty index list");
    const EvalPass pass = evaluation_pass(state, subjects, indices);
    return compute_metrics(pass.probabilities, pass.labels);
}

Metrics evaluate(const ModelState& state, const Dataset& dataset, std::span<const std::size_t> indices) {
    return evaluate(state, prepare_subjects(dataset, state.config.threshold_c), indices);
}

std::vector<AblationRow> run_ablation(const Dataset& dataset, const TrainConfig& config) {
    std::vector<std::future<TrainResult>> runs;
    for (AblationMode mode : kAllModes) {
        TrainConfig c = config;
        c.mode = mode;
        runs.push_back(std::async(std::launch::async, [&dataset, c] { return train_model(dataset, c); }));
    }
    std::vector<AblationRow> rows;
    for (std::size_t k = 0; k < runs.size(); ++k) rows.push_back({kAllModes[k], runs[k].get().test});
    return rows;
}

// ---------------------------------------------------------------------------
// Reports

std::string training_log_csv(const std::vector<EpochRecord>& log) {
    std::string out = "epoch,train_loss,val_f1,val_loss\n";
    for (const auto& r : log) {
        out += std::to_string(r.epoch) + ',' + format_real(r.train_loss) + ',' + format_real(r.val_f1) + ',' +
               format_real(r.val_loss) + '\n';
    }
    return out;
}

std::vector<EpochRecord> parse_training_log_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "epoch,train_loss,val_f1,val_loss") {
        throw LoadError("training log: missing header");
    }
    std::vector<EpochRecord> log;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        EpochRecord r;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf", &r.epoch, &r.train_loss, &r.val_f1, &r.val_loss) != 4) {
            throw LoadError("training log: malformed row '" + line + "'");
        }
        log.push_back(r);
    }
    return log;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::string out = "mode,f1,sensitivity,specificity,auc,tp,fp,tn,fn\n";
    for (const auto& r : rows) {
        const auto& m = r.metrics;
        out += std::string(to_string(r.mode)) + ',' + format_real(m.f1) + ',' + format_real(m.sensitivity) + ',' +
               format_real(m.specificity) + ',' + format_real(m.auc) + ',' + std::to_string(m.counts.tp) + ',' +
               std::to_string(m.counts.fp) + ',' + std::to_string(m.counts.tn) + ',' + std::to_string(m.counts.fn) +
               '\n';
    }
    return out;
}

}  // namespace bargrain
