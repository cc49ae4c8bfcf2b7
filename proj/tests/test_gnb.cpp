#include "ancillary/gnb.hpp"
#include "ancillary/kmeans.hpp"
#include "ancillary/metrics.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace ancillary;

namespace {

FeatureVector fv(std::vector<double> v) { return FeatureVector{std::move(v), 0}; }

/// Dataset of raw rows with a fixed price column, for tests that do not go
/// through session encoding.
EncodedDataset dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
                       double price = 10.0) {
    EncodedDataset d;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        d.rows.push_back(fv(rows[i]));
        d.prices.push_back(price);
        d.labels.push_back(labels[i]);
    }
    return d;
}

/// Posterior straight from Bayes' rule with densities (no logs), in long
/// double.
long double bayes_oracle(const GnbModel& m, const std::vector<double>& z) {
    long double joint[2];
    for (int c = 0; c < 2; ++c) {
        long double p = m.priors[c];
        for (std::size_t k = 0; k < z.size(); ++k) {
            const long double v = m.variances[c][k];
            const long double r = static_cast<long double>(z[k]) - m.means[c][k];
            p *= std::exp(-r * r / (2.0L * v)) / std::sqrt(2.0L * std::numbers::pi_v<long double> * v);
        }
        joint[c] = p;
    }
    return joint[1] / (joint[0] + joint[1]);
}

}  // namespace

TEST(FitGnb, ClassMeanPriorsAndFloor) {
    const std::vector<std::vector<double>> rows{{0.0, 5.0}, {2.0, 5.0}, {7.0, 1.0}, {9.0, 3.0}};
    const std::vector<int> labels{1, 1, 0, 0};
    const auto m = fit_gnb_rows(rows, labels, 1e-6);
    EXPECT_DOUBLE_EQ(m.means[1][0], 1.0);
    EXPECT_DOUBLE_EQ(m.priors[0], 0.5);
    EXPECT_DOUBLE_EQ(m.priors[1], 0.5);
    EXPECT_DOUBLE_EQ(m.variances[1][1], 1e-6);  // constant within class 1
    EXPECT_DOUBLE_EQ(m.variances[0][1], 1.0);    // (1-2)^2 + (3-2)^2 over n = 2
    EXPECT_DOUBLE_EQ(m.priors[0] + m.priors[1], 1.0);
}

TEST(FitGnb, PriceAppendedNormalizedByScale) {
    auto d = dataset({{0.0}, {1.0}, {2.0}, {3.0}}, {0, 1, 0, 1}, 20.0);
    d.prices = {10.0, 20.0, 30.0, 40.0};
    const auto m = fit_gnb(d, 40.0);
    ASSERT_EQ(m.input_dimension(), 2u);
    EXPECT_DOUBLE_EQ(m.means[1][1], (0.5 + 1.0) / 2.0);
    EXPECT_DOUBLE_EQ(m.means[0][1], (0.25 + 0.75) / 2.0);
}

TEST(FitGnb, SingleClassRejected) {
    const auto d = dataset({{0.0}, {1.0}}, {1, 1});
    try {
        fit_gnb(d, 10.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::SingleClassDataset);
    }
}

TEST(PredictGnb, SymmetricClassesGiveOneHalf) {
    GnbModel m;
    m.means = {std::vector<double>{-1.0}, std::vector<double>{1.0}};
    m.variances = {std::vector<double>{1.0}, std::vector<double>{1.0}};
    EXPECT_DOUBLE_EQ(m.posterior(std::vector<double>{0.0}), 0.5);
}

TEST(PredictGnb, SeparatedClasses) {
    GnbModel m;
    m.means = {std::vector<double>{0.0}, std::vector<double>{6.0}};
    m.variances = {std::vector<double>{1.0}, std::vector<double>{1.0}};
    EXPECT_GE(m.posterior(std::vector<double>{6.0}), 0.99);
}

TEST(PredictGnb, MatchesHighPrecisionBayes) {
    GnbModel m;
    m.priors = {0.7, 0.3};
    m.means = {std::vector<double>{0.2, -1.0}, std::vector<double>{1.1, 0.4}};
    m.variances = {std::vector<double>{0.8, 2.0}, std::vector<double>{0.5, 1.3}};
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> z{rng.uniform(-3, 3), rng.uniform(-3, 3)};
        EXPECT_NEAR(m.posterior(z), static_cast<double>(bayes_oracle(m, z)), 1e-9);
    }
}

TEST(PredictGnb, FittedModelMatchesOracleOnTrainingData) {
    const auto sessions = fixtures::random_sessions(400, 12);
    const auto schema = fit_schema(sessions);
    const auto data = encode_dataset(sessions, schema);
    const auto m = fit_gnb(data, 40.0);
    for (std::size_t i = 0; i < 50; ++i) {
        const auto z = augment_with_price(data.rows[i].values, data.prices[i], 40.0);
        const long double oracle = bayes_oracle(m, z);
        // The oracle underflows where the log-odds are large; compare there
        // only when it is representable.
        if (oracle > 1e-12L && oracle < 1.0L - 1e-12L) {
            EXPECT_NEAR(predict_proba(m, data.rows[i], data.prices[i]), static_cast<double>(oracle), 1e-9);
        }
    }
}

TEST(PredictGnb, FiniteAndInsideUnitInterval) {
    GnbModel m;
    m.priors = {0.9, 0.1};
    m.means = {std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 1.0}};
    m.variances = {std::vector<double>{1e-6, 1.0}, std::vector<double>{1e-6, 1.0}};
    for (double x : {-1e6, -50.0, 0.0, 0.5, 1.0, 50.0, 1e6}) {
        const double p = m.posterior(std::vector<double>{x, x});
        ASSERT_TRUE(std::isfinite(p));
        ASSERT_GT(p, 0.0);
        ASSERT_LT(p, 1.0);
    }
}

TEST(PredictGnb, MonotoneInOrderedFeature) {
    GnbModel m;
    m.priors = {0.8, 0.2};
    m.means = {std::vector<double>{-0.5, 0.3}, std::vector<double>{1.5, 0.1}};
    m.variances = {std::vector<double>{0.7, 1.0}, std::vector<double>{0.7, 2.0}};
    double prev = 0.0;
    for (double x = -5.0; x <= 5.0; x += 0.05) {
        const double p = m.posterior(std::vector<double>{x, 0.4});
        ASSERT_GE(p, prev);
        prev = p;
    }
}

TEST(PredictGnb, DimensionAndSchemaChecks) {
    const auto d = dataset({{0.0, 1.0}, {1.0, 0.0}}, {0, 1});
    auto m = fit_gnb(d, 10.0);
    try {
        predict_proba(m, fv({1.0}), 10.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::DimensionMismatch);
    }
    m.schema_hash = 99;
    FeatureVector x = fv({0.0, 1.0});
    x.schema_hash = 100;
    try {
        predict_proba(m, x, 10.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::SchemaMismatch);
    }
}

TEST(PredictGnb, GridMatchesPointwise) {
    const auto sessions = fixtures::random_sessions(300, 4);
    const auto schema = fit_schema(sessions);
    const auto data = encode_dataset(sessions, schema);
    const auto m = fit_gnb(data, 40.0);
    const std::vector<double> prices{15.0, 20.0, 25.0, 30.0, 35.0};
    for (std::size_t i = 0; i < 20; ++i) {
        const auto grid = predict_proba_grid(m, data.rows[i], prices);
        for (std::size_t j = 0; j < prices.size(); ++j)
            ASSERT_EQ(grid[j], predict_proba(m, data.rows[i], prices[j]));
    }
}

TEST(KMeans, OnePointPerCluster) {
    const std::vector<std::vector<double>> pts{{0.0, 0.0}, {5.0, 1.0}, {-3.0, 2.0}};
    const auto km = fit_kmeans(pts, 3, 1);
    auto sorted = km.centroids;
    auto expected = pts;
    std::sort(sorted.begin(), sorted.end());
    std::sort(expected.begin(), expected.end());
    EXPECT_EQ(sorted, expected);
}

TEST(KMeans, SeparatedBlobs) {
    Rng rng(8);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 100; ++i) pts.push_back({rng.normal(-10, 1), rng.normal(0, 1)});
    for (int i = 0; i < 100; ++i) pts.push_back({rng.normal(10, 1), rng.normal(0, 1)});
    const auto km = fit_kmeans(pts, 2, 21);
    ASSERT_EQ(km.k(), 2u);
    // Each centroid lies inside the bounding box of exactly one blob, and
    // every point is assigned to the centroid of its own blob.
    const double x0 = km.centroids[0][0], x1 = km.centroids[1][0];
    EXPECT_LT(std::min(x0, x1), -5.0);
    EXPECT_GT(std::max(x0, x1), 5.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::size_t c = km.assign(pts[i]);
        // brute force nearest centroid
        const std::size_t b = squared_distance(pts[i], km.centroids[0]) <= squared_distance(pts[i], km.centroids[1]) ? 0 : 1;
        ASSERT_EQ(c, b);
        ASSERT_EQ(km.centroids[c][0] < 0.0, i < 100);
    }
    EXPECT_TRUE(km.converged);
}

TEST(KMeans, DeterministicPerSeed) {
    const auto sessions = fixtures::random_sessions(200, 2);
    const auto schema = fit_schema(sessions);
    const auto data = encode_dataset(sessions, schema);
    const auto a = fit_kmeans(data.rows, 5, 77);
    const auto b = fit_kmeans(data.rows, 5, 77);
    EXPECT_EQ(a.centroids, b.centroids);
    EXPECT_EQ(a.iterations_run, b.iterations_run);
}

TEST(KMeans, Errors) {
    const std::vector<std::vector<double>> pts{{0.0}, {1.0}};
    try {
        fit_kmeans(pts, 3, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::TooFewSamples);
    }
    EXPECT_THROW(fit_kmeans(pts, 0, 1), Error);
}

TEST(KMeans, DuplicatePointsKeepEveryClusterPopulated) {
    std::vector<std::vector<double>> pts(20, std::vector<double>{1.0, 1.0});
    pts.push_back({50.0, 50.0});
    pts.push_back({-50.0, 0.0});
    const auto km = fit_kmeans(pts, 3, 4);
    std::vector<int> counts(3, 0);
    for (const auto& p : pts) ++counts[km.assign(p)];
    for (int c : counts) EXPECT_GT(c, 0);
}

TEST(Gnbc, SingleClusterEqualsGnb) {
    const auto sessions = fixtures::random_sessions(500, 31);
    const auto schema = fit_schema(sessions);
    const auto data = encode_dataset(sessions, schema);
    const auto gnb = fit_gnb(data, 40.0);
    const auto gnbc = fit_gnbc(data, 1, 9, 40.0);
    for (std::size_t i = 0; i < data.size(); ++i)
        for (double p : {15.0, 25.0, 40.0})
            ASSERT_EQ(predict_proba(gnbc, data.rows[i], p), predict_proba(gnb, data.rows[i], p));
}

TEST(Gnbc, DeterministicUnderSeed) {
    const auto sessions = fixtures::random_sessions(300, 5);
    const auto schema = fit_schema(sessions);
    const auto data = encode_dataset(sessions, schema);
    const auto a = fit_gnbc(data, 4, 3, 40.0);
    const auto b = fit_gnbc(data, 4, 3, 40.0);
    EXPECT_EQ(a.clusters.centroids, b.clusters.centroids);
    EXPECT_EQ(a.gnb.means, b.gnb.means);
    EXPECT_EQ(a.gnb.variances, b.gnb.variances);
}

TEST(Gnbc, BeatsGnbWhenPurchaseDependsOnCluster) {
    // Four blobs on the corners of a square; purchases in two opposite
    // corners. The class-conditional marginals are identical, so plain GNB
    // sees nothing, while the cluster id separates the classes.
    Rng rng(6);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 800; ++i) {
        const int cx = static_cast<int>(rng.below(2)), cy = static_cast<int>(rng.below(2));
        rows.push_back({(cx ? 5.0 : -5.0) + rng.normal(0, 0.5), (cy ? 5.0 : -5.0) + rng.normal(0, 0.5)});
        const double p = (cx == cy) ? 0.8 : 0.1;
        labels.push_back(rng.uniform() < p ? 1 : 0);
    }
    const auto data = dataset(rows, labels);
    const auto gnb = fit_gnb(data, 10.0);
    const auto gnbc = fit_gnbc(data, 4, 2, 10.0);
    std::vector<double> s_gnb, s_gnbc;
    for (std::size_t i = 0; i < data.size(); ++i) {
        s_gnb.push_back(predict_proba(gnb, data.rows[i], 10.0));
        s_gnbc.push_back(predict_proba(gnbc, data.rows[i], 10.0));
    }
    const double auc_gnb = auc_roc(s_gnb, labels);
    const double auc_gnbc = auc_roc(s_gnbc, labels);
    EXPECT_GT(auc_gnbc, auc_gnb);
    EXPECT_GT(auc_gnbc, 0.8);
}
