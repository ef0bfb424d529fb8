#include <gtest/gtest.h>

#include <vector>

#include "bargrain/errors.hpp"
#include "bargrain/metrics.hpp"
#include "bargrain/rng.hpp"
#include "oracles.hpp"

using namespace bargrain;

TEST(Metrics, PerfectSeparation) {
    const std::vector<double> p = {0.9, 0.9, 0.1, 0.1};
    const std::vector<int> y = {1, 1, 0, 0};
    const Metrics m = compute_metrics(p, y);
    EXPECT_EQ(m.f1, 1.0);
    EXPECT_EQ(m.auc, 1.0);
    EXPECT_EQ(m.sensitivity, 1.0);
    EXPECT_EQ(m.specificity, 1.0);
}

TEST(Metrics, AllOneHalfPredictsPositive) {
    const std::vector<double> p = {0.5, 0.5, 0.5, 0.5};
    const std::vector<int> y = {1, 0, 1, 0};
    const Metrics m = compute_metrics(p, y);
    EXPECT_EQ(m.sensitivity, 1.0);
    EXPECT_EQ(m.specificity, 0.0);
    EXPECT_EQ(m.auc, 0.5);
}

TEST(Metrics, MixedSixSampleCase) {
    const std::vector<double> p = {0.8, 0.7, 0.55, 0.45, 0.3, 0.2};
    const std::vector<int> y = {1, 1, 0, 1, 0, 0};
    const Metrics m = compute_metrics(p, y);
    EXPECT_NEAR(m.auc, 8.0 / 9.0, 1e-15);
    EXPECT_EQ(m.counts.tp, 2u);
    EXPECT_EQ(m.counts.fn, 1u);
    EXPECT_EQ(m.counts.fp, 1u);
    EXPECT_EQ(m.counts.tn, 2u);
    EXPECT_NEAR(m.f1, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(m.sensitivity, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(m.specificity, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(oracle::pairwise_auc(p, y), 8.0 / 9.0, 1e-15);
}

TEST(Metrics, DegenerateDenominatorsAreZero) {
    ConfusionCounts c;
    EXPECT_EQ(f1_score(c), 0.0);
    EXPECT_EQ(sensitivity(c), 0.0);
    EXPECT_EQ(specificity(c), 0.0);
}

TEST(Metrics, AucNeedsBothClasses) {
    const std::vector<double> p = {0.2, 0.7};
    EXPECT_THROW(roc_auc(p, std::vector<int>{1, 1}), ValidationError);
    EXPECT_THROW(roc_auc(p, std::vector<int>{0, 0}), ValidationError);
}

TEST(Metrics, AucEqualsPairCountingWithTies) {
    Rng rng(61);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(30);
        std::vector<double> p(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = static_cast<double>(rng.below(6)) / 5.0;  // coarse grid forces ties
            y[i] = static_cast<int>(rng.below(2));
        }
        y[0] = 0;
        y[1] = 1;
        EXPECT_NEAR(roc_auc(p, y), oracle::pairwise_auc(p, y), 1e-12);
    }
}

TEST(Metrics, IdentitiesOnRandomConfusionTables) {
    Rng rng(62);
    for (int trial = 0; trial < 200; ++trial) {
        ConfusionCounts c{rng.below(20), rng.below(20), rng.below(20), rng.below(20)};
        const double tp = c.tp, fp = c.fp, tn = c.tn, fn = c.fn;
        EXPECT_EQ(f1_score(c), 2 * tp + fp + fn == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn));
        EXPECT_EQ(sensitivity(c), tp + fn == 0 ? 0.0 : tp / (tp + fn));
        EXPECT_EQ(specificity(c), tn + fp == 0 ? 0.0 : tn / (tn + fp));
    }
}

TEST(Metrics, JsonKeysInOrderAndRoundTrip) {
    Metrics m;
    m.f1 = 0.75;
    m.sensitivity = 2.0 / 3.0;
    m.specificity = 1.0;
    m.auc = 0.8125;
    m.counts = {2, 0, 3, 1};
    const std::string json = metrics_to_json(m);
    const std::vector<std::string> keys = {"\"f1\"", "\"sensitivity\"", "\"specificity\"", "\"auc\"",
                                           "\"tp\"", "\"fp\"", "\"tn\"", "\"fn\""};
    std::size_t pos = 0;
    for (const auto& k : keys) {
        const auto at = json.find(k, pos);
        ASSERT_NE(at, std::string::npos) << k;
        pos = at;
    }
    const Metrics back = metrics_from_json(json);
    EXPECT_EQ(back.f1, m.f1);
    EXPECT_EQ(back.sensitivity, m.sensitivity);
    EXPECT_EQ(back.counts.tn, 3u);
}
