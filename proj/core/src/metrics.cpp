#include "bargrain/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include <nlohmann/json.hpp>

#include "bargrain/errors.hpp"

namespace bargrain {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
    if (a != b) throw DimensionError("metrics: " + std::to_string(a) + " scores vs " + std::to_string(b) + " labels");
}

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionCounts confusion(std::span<const double> probabilities, std::span<const int> labels) {
    check_lengths(probabilities.size(), labels.size());
    ConfusionCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool predicted = probabilities[i] >= 0.5;
        if (labels[i] == 1) {
            predicted ? ++c.tp : ++c.fn;
        } else {
            predicted ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

double f1_score(const ConfusionCounts& c) { return ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn); }
double sensitivity(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fn); }
double specificity(const ConfusionCounts& c) { return ratio(c.tn, c.tn + c.fp); }

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    check_lengths(scores.size(), labels.size());
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Midranks (1-based) for runs of equal scores.
    std::vector<double> rank(n);
    for (std::size_t start = 0; start < n;) {
        std::size_t end = start + 1;
        while (end < n && scores[order[end]] == scores[order[start]]) ++end;
        const double mid = 0.5 * static_cast<double>(start + 1 + end);
        for (std::size_t k = start; k < end; ++k) rank[order[k]] = mid;
        start = end;
    }

    double positive_rank_sum = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] == 1) {
            positive_rank_sum += rank[i];
            ++n_pos;
        }
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw ValidationError("roc_auc: both classes must be present");
    const double np = static_cast<double>(n_pos);
    return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

Metrics compute_metrics(std::span<const double> probabilities, std::span<const int> labels) {
    Metrics m;
    m.counts = confusion(probabilities, labels);
    m.f1 = f1_score(m.counts);
    m.sensitivity = sensitivity(m.counts);
    m.specificity = specificity(m.counts);
    m.auc = roc_auc(probabilities, labels);
    return m;
}

std::string metrics_to_json(const Metrics& m) {
    nlohmann::ordered_json j;
    j["f1"] = m.f1;
    j["sensitivity"] = m.sensitivity;
    j["specificity"] = m.specificity;
    j["auc"] = m.auc;
    j["tp"] = m.counts.tp;
    j["fp"] = m.counts.fp;
    j["tn"] = m.counts.tn;
    j["fn"] = m.counts.fn;
    return j.dump(2) + "\n";
}

Metrics metrics_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        Metrics m;
        m.f1 = j.at("f1").get<double>();
        m.sensitivity = j.at("sensitivity").get<double>();
        m.specificity = j.at("specificity").get<double>();
        m.auc = j.at("auc").get<double>();
        m.counts.tp = j.at("tp").get<std::size_t>();
        m.counts.fp = j.at("fp").get<std::size_t>();
        m.counts.tn = j.at("tn").get<std::size_t>();
        m.counts.fn = j.at("fn").get<std::size_t>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("metrics JSON: ") + e.what());
    }
}

}  // namespace bargrain
