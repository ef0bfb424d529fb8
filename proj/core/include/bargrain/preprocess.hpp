#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bargrain/matrix.hpp"

namespace bargrain {

enum class Label : int { control = 0, disease = 1 };

// One subject's ROI time series: N rows (regions) by T columns (time steps).
struct BoldMatrix {
    std::string subject_id;
    Matrix series;
    Label label = Label::control;

    std::size_t n_rois() const noexcept { return series.rows(); }
    std::size_t t_steps() const noexcept { return series.cols(); }

    // Throws ValidationError unless N >= 2, T >= 3 and every value is finite.
    void validate() const;
};

// N x N Pearson correlation matrix.
struct CorrMatrix {
    Matrix values;
    std::size_t size() const noexcept { return values.rows(); }
};

struct Dataset {
    std::string name;
    std::vector<BoldMatrix> subjects;

    std::size_t size() const noexcept { return subjects.size(); }
    std::size_t n_rois() const { return subjects.empty() ? 0 : subjects.front().n_rois(); }
    std::size_t t_steps() const { return subjects.empty() ? 0 : subjects.front().t_steps(); }
    std::size_t count(Label label) const;
};

/// Pearson product-moment correlation between every pair of rows, with
/// population (1/T) moments. A zero-variance row correlates 0 with every
/// other row and 1 with itself.
CorrMatrix pearson_correlation(const BoldMatrix& x);
CorrMatrix pearson_correlation(const Matrix& series);

/// Reads `labels.csv` (header `subject_id,label`) plus one `<subject_id>.csv`
/// per subject. Subjects are returned sorted by id; all must share N and T.
Dataset load_dataset(const std::filesystem::path& dir);

/// Writes the layout read by load_dataset, values printed with 17
/// significant digits so load(save(d)) reproduces d bit for bit.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

/// Two-block latent-factor dataset with balanced labels.
///
/// Each ROI follows its block's shared Gaussian factor with weight 0.8 plus
/// independent Gaussian noise with weight 0.6 (unit variance overall, so
/// within-block correlation is about 0.64). Class 0 splits ROIs into
/// [0, N/2) and [N/2, N). Class 1 uses the same split rotated by N/4.
/// Subject i gets label i % 2. Output is a pure function of the arguments.
Dataset generate_synthetic(std::size_t n_subjects, std::size_t n_rois, std::size_t t_steps,
                           std::uint64_t seed);

// Block index (0 or 1) of an ROI under the class-specific partition.
int synthetic_block(std::size_t roi, std::size_t n_rois, Label label);

inline constexpr double kSyntheticFactorWeight = 0.8;

}  // namespace bargrain
