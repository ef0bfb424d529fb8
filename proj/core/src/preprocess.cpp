#include "bargrain/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bargrain/errors.hpp"
#include "bargrain/rng.hpp"

namespace bargrain {

void BoldMatrix::validate() const {
    if (n_rois() < 2 || t_steps() < 3) {
        throw ValidationError("subject '" + subject_id + "': need at least 2 ROIs and 3 time steps, got " +
                              shape_string(n_rois(), t_steps()));
    }
    for (std::size_t i = 0; i < series.rows(); ++i) {
        for (std::size_t t = 0; t < series.cols(); ++t) {
            if (!std::isfinite(series(i, t))) {
                throw ValidationError("subject '" + subject_id + "': non-finite value at ROI " +
                                      std::to_string(i) + ", step " + std::to_string(t));
            }
        }
    }
}

std::size_t Dataset::count(Label label) const {
    return static_cast<std::size_t>(std::count_if(subjects.begin(), subjects.end(),
                                                  [label](const BoldMatrix& s) { return s.label == label; }));
}

CorrMatrix pearson_correlation(const BoldMatrix& x) {
    x.validate();
    return pearson_correlation(x.series);
}

CorrMatrix pearson_correlation(const Matrix& series) {
    const std::size_t n = series.rows();
    const std::size_t t = series.cols();
    if (t < 3) throw ValidationError("pearson_correlation: need at least 3 time steps");

    // Center each row and record its norm; a zero norm marks a constant row.
    Matrix centered(n, t);
    std::vector<double> norm(n);
    for (std::size_t i = 0; i < n; ++i) {
        double mu = 0.0;
        for (std::size_t k = 0; k < t; ++k) {
            if (!std::isfinite(series(i, k))) {
                throw ValidationError("pearson_correlation: non-finite value at ROI " + std::to_string(i) +
                                      ", step " + std::to_string(k));
            }
            mu += series(i, k);
        }
        mu /= static_cast<double>(t);
        double ss = 0.0;
        for (std::size_t k = 0; k < t; ++k) {
            const double d = series(i, k) - mu;
            centered(i, k) = d;
            ss += d * d;
        }
        norm[i] = std::sqrt(ss);
    }

    CorrMatrix out{Matrix(n, n)};
    for (std::size_t i = 0; i < n; ++i) {
        out.values(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double r = 0.0;
            if (norm[i] > 0.0 && norm[j] > 0.0) {
                double dot = 0.0;
                for (std::size_t k = 0; k < t; ++k) dot += centered(i, k) * centered(j, k);
                r = std::clamp(dot / (norm[i] * norm[j]), -1.0, 1.0);
            }
            out.values(i, j) = r;
            out.values(j, i) = r;
        }
    }
    return out;
}

int synthetic_block(std::size_t roi, std::size_t n_rois, Label label) {
    const std::size_t shift = label == Label::disease ? n_rois / 4 : 0;
    const std::size_t rotated = (roi + n_rois - shift) % n_rois;
    return rotated < n_rois / 2 ? 0 : 1;
}

Dataset generate_synthetic(std::size_t n_subjects, std::size_t n_rois, std::size_t t_steps,
                           std::uint64_t seed) {
    if (n_subjects < 4 || n_subjects % 2 != 0) {
        throw ValidationError("generate_synthetic: subject count must be even and at least 4");
    }
    if (n_rois < 8) throw ValidationError("generate_synthetic: need at least 8 ROIs");
    if (t_steps < 32) throw ValidationError("generate_synthetic: need at least 32 time steps");

    const double w = kSyntheticFactorWeight;
    const double noise_w = std::sqrt(1.0 - w * w);
    const std::size_t width = std::to_string(n_subjects - 1).size();

    Dataset ds;
    ds.name = "synthetic";
    ds.subjects.reserve(n_subjects);
    for (std::size_t s = 0; s < n_subjects; ++s) {
        Rng rng(derive_seed(seed, s));
        BoldMatrix subject;
        std::string idx = std::to_string(s);
        subject.subject_id = "sub" + std::string(std::max<std::size_t>(width, 3) - idx.size(), '0') + idx;
        subject.label = s % 2 == 0 ? Label::control : Label::disease;

        Matrix factors(2, t_steps);
        for (double& f : factors.values()) f = rng.normal();
        subject.series = Matrix(n_rois, t_steps);
        for (std::size_t i = 0; i < n_rois; ++i) {
            const int b = synthetic_block(i, n_rois, subject.label);
            for (std::size_t t = 0; t < t_steps; ++t) {
                subject.series(i, t) = w * factors(b, t) + noise_w * rng.normal();
            }
        }
        ds.subjects.push_back(std::move(subject));
    }
    return ds;
}

}  // namespace bargrain
