#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bargrain/metrics.hpp"
#include "bargrain/model.hpp"
#include "bargrain/preprocess.hpp"

namespace bargrain {

struct TrainConfig {
    double learning_rate = 1e-4;
    std::size_t hidden_H = 32;
    std::size_t out_F = 16;
    std::size_t classifier_H_c = 32;
    std::size_t d_h = 32;
    double threshold_c = 0.6;
    double tau = 1.0;
    int epochs = 200;
    int patience = 30;
    std::size_t batch_size = 16;
    std::uint64_t seed = 0;
    AblationMode mode = AblationMode::full;

    void validate() const;
    ModelConfig model_config(std::size_t n_rois, std::size_t t_steps) const;
};

/// Parses a flat JSON object whose keys are the TrainConfig field names.
/// Missing keys keep their defaults; unknown keys and wrong types throw
/// LoadError. `mode` is a string (full|no-corr|no-optim|no-gconv).
TrainConfig parse_train_config(const std::string& json_text);
TrainConfig load_train_config(const std::filesystem::path& path);
std::string train_config_to_json(const TrainConfig& config);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

/// Stratified, seeded split. |test| = round(0.2 n) and
/// |val| = round(0.15 (n - |test|)); each part takes its share of every
/// class in proportion to the class sizes. Requires n >= 5 and both classes.
SplitIndices split_labels(std::span<const int> labels, std::uint64_t seed);
SplitIndices split_dataset(const Dataset& dataset, std::uint64_t seed);

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_f1 = 0.0;
    double val_loss = 0.0;
};

struct FitResult {
    ModelState model;  // parameters of the selected epoch
    std::vector<EpochRecord> log;
    int best_epoch = 0;
};

/// Mini-batch Adam on the mean BCE loss with a fresh Gumbel draw per
/// forward pass. After every epoch the noise-free evaluation path is scored
/// on `val`; the parameters with the best validation F1 are kept (ties go
/// to lower validation loss, then to the earlier epoch). Training stops
/// after `patience` epochs without improvement. Throws DivergenceError on a
/// non-finite loss.
FitResult fit(const std::vector<SubjectInput>& subjects, std::span<const std::size_t> train,
              std::span<const std::size_t> val, const TrainConfig& config);

struct TrainResult {
    ModelState model;
    Metrics test;
    std::vector<EpochRecord> log;
    SplitIndices split;
    int best_epoch = 0;
};

TrainResult train_model(const Dataset& dataset, const TrainConfig& config);

/// Metrics of the evaluation path (hardened noise-free graph) on `indices`.
Metrics evaluate(const ModelState& state, const std::vector<SubjectInput>& subjects,
                 std::span<const std::size_t> indices);
Metrics evaluate(const ModelState& state, const Dataset& dataset, std::span<const std::size_t> indices);

struct AblationRow {
    AblationMode mode;
    Metrics metrics;
};

/// Trains every mode in kAllModes with the same seed and split; the four runs
/// execute concurrently. Rows are returned in kAllModes order.
std::vector<AblationRow> run_ablation(const Dataset& dataset, const TrainConfig& config);

// epoch,train_loss,val_f1,val_loss
std::string training_log_csv(const std::vector<EpochRecord>& log);
std::vector<EpochRecord> parse_training_log_csv(const std::string& text);

// mode,f1,sensitivity,specificity,auc,tp,fp,tn,fn
std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace bargrain
