#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace bargrain {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;
};

// Positive class is label 1 (disease). Degenerate denominators give 0.
struct Metrics {
    double f1 = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double auc = 0.0;
    ConfusionCounts counts;
};

// Predicted positive iff probability >= 0.5.
ConfusionCounts confusion(std::span<const double> probabilities, std::span<const int> labels);

double f1_score(const ConfusionCounts& c);
double sensitivity(const ConfusionCounts& c);
double specificity(const ConfusionCounts& c);

/// Area under the ROC curve via the rank-sum (Mann-Whitney) statistic with
/// midranks for tied scores, which equals the trapezoidal ROC area.
/// Throws ValidationError when either class is absent.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

Metrics compute_metrics(std::span<const double> probabilities, std::span<const int> labels);

// {"f1":..,"sensitivity":..,"specificity":..,"auc":..,"tp":..,"fp":..,"tn":..,"fn":..}
std::string metrics_to_json(const Metrics& m);
Metrics metrics_from_json(const std::string& text);

}  // namespace bargrain
