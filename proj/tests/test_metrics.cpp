#include "ancillary/metrics.hpp"
#include "ancillary/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace ancillary;

namespace {

/// O(n²) pair count: concordant positive/negative pairs score 1, ties 1/2.
double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
    double hits = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[i] != 1 || y[j] != 0) continue;
            pairs += 1.0;
            hits += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
        }
    return hits / pairs;
}

EvalRecord rec(double offered, double recommended, int y, std::optional<double> score = {}) {
    return {offered, recommended, y, score};
}

std::vector<Outcome> outcomes(std::size_t n, std::size_t buys, double price) {
    std::vector<Outcome> out(n, Outcome{price, 0, true});
    for (std::size_t i = 0; i < buys; ++i) out[i].purchased = 1;
    return out;
}

}  // namespace

TEST(Auc, Examples) {
    EXPECT_EQ(auc_roc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}), 1.0);
    EXPECT_EQ(auc_roc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<int>{0, 0, 1, 1}), 0.0);
    EXPECT_EQ(auc_roc(std::vector<double>(6, 0.3), std::vector<int>{0, 1, 0, 1, 1, 0}), 0.5);
}

TEST(Auc, MatchesPairwiseOracle) {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(199);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng.below(trial % 2 ? 10 : 100000));  // with and without ties
            y[i] = rng.uniform() < 0.3 ? 1 : 0;
        }
        y[0] = 1;
        y[1] = 0;
        ASSERT_EQ(auc_roc(s, y), pairwise_auc(s, y)) << "trial " << trial;
    }
}

TEST(Auc, NegatedScoresComplement) {
    Rng rng(4);
    std::vector<double> s(300), neg(300);
    std::vector<int> y(300);
    for (std::size_t i = 0; i < 300; ++i) {
        s[i] = rng.normal();
        neg[i] = -s[i];
        y[i] = i % 3 == 0;
    }
    EXPECT_NEAR(auc_roc(s, y) + auc_roc(neg, y), 1.0, 1e-12);
}

TEST(Auc, Errors) {
    try {
        auc_roc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::SingleClassInput);
    }
    EXPECT_THROW(auc_roc(std::vector<double>{0.1}, std::vector<int>{1, 0}), Error);
}

TEST(RegretScore, ExamplePrices) {
    const std::vector<EvalRecord> r{rec(10, 8, 1), rec(15, 12, 1), rec(10, 15, 1), rec(25, 35, 1),
                                    rec(40, 37, 1)};
    EXPECT_NEAR(regret_score(r), 0.095, 1e-12);
}

TEST(RegretScore, EdgeCases) {
    EXPECT_EQ(regret_score(std::vector<EvalRecord>{rec(10, 12, 1), rec(20, 20, 1)}), 0.0);
    EXPECT_DOUBLE_EQ(regret_score(std::vector<EvalRecord>{rec(10, 5, 1)}), 0.5);
    // non-purchases are ignored
    EXPECT_DOUBLE_EQ(regret_score(std::vector<EvalRecord>{rec(10, 5, 1), rec(10, 1, 0)}), 0.5);
    try {
        regret_score(std::vector<EvalRecord>{rec(10, 5, 0)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NoPurchases);
    }
}

TEST(RegretScore, ScaleInvariant) {
    Rng rng(5);
    std::vector<EvalRecord> r, scaled;
    for (int i = 0; i < 100; ++i) {
        const double p = rng.uniform(5, 50), q = rng.uniform(5, 50);
        r.push_back(rec(p, q, 1));
        scaled.push_back(rec(3.7 * p, 3.7 * q, 1));
    }
    EXPECT_NEAR(regret_score(r), regret_score(scaled), 1e-12);
}

TEST(PriceDecrease, Examples) {
    const std::vector<EvalRecord> all_discounted{rec(10, 8, 0), rec(20, 15, 0), rec(30, 35, 1)};
    EXPECT_EQ(pdr(all_discounted), 1.0);

    const std::vector<EvalRecord> none_below{rec(10, 10, 0), rec(20, 25, 0), rec(30, 35, 1)};
    EXPECT_EQ(pdr(none_below), 0.0);
    EXPECT_FALSE(pdp(none_below).has_value());

    // Hand count. Not purchased: #1 (discounted), #3 (not). Discounted: #1, #2.
    // PDR = 1/2, PDP = 1/2.
    const std::vector<EvalRecord> mixed{rec(20, 15, 0), rec(20, 18, 1), rec(20, 25, 0), rec(20, 30, 1)};
    EXPECT_EQ(pdr(mixed), 0.5);
    EXPECT_EQ(pdp(mixed), 0.5);

    // Equal prices are not a decrease.
    EXPECT_EQ(pdr(std::vector<EvalRecord>{rec(20, 20, 0)}), 0.0);
    EXPECT_FALSE(pdr(std::vector<EvalRecord>{rec(20, 10, 1)}).has_value());
}

TEST(PriceDecrease, RandomEnumeration) {
    Rng rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<EvalRecord> r;
        int not_bought = 0, discounted = 0, both = 0;
        for (int i = 0; i < 30; ++i) {
            const double p = 10.0 + static_cast<double>(rng.below(4)) * 5.0;
            const double q = 10.0 + static_cast<double>(rng.below(4)) * 5.0;
            const int y = static_cast<int>(rng.below(2));
            r.push_back(rec(p, q, y));
            not_bought += y == 0;
            discounted += q < p;
            both += y == 0 && q < p;
        }
        if (not_bought) {
            ASSERT_EQ(*pdr(r), static_cast<double>(both) / not_bought);
        }
        if (discounted) {
            ASSERT_EQ(*pdp(r), static_cast<double>(both) / discounted);
        }
    }
}

TEST(Pdf1, Examples) {
    EXPECT_DOUBLE_EQ(pdf1(0.5, 0.5), 0.5);
    EXPECT_NEAR(pdf1(0.6366, 0.9276), 0.7550, 5e-4);
    EXPECT_NEAR(pdf1(0.8294, 0.9230), 0.8737, 5e-4);
    EXPECT_EQ(pdf1(0.0, 0.0), 0.0);
}

TEST(Pdf1, BetweenMinAndMax) {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double a = rng.uniform(), b = rng.uniform();
        const double f = pdf1(a, b);
        ASSERT_GE(f, std::min(a, b) - 1e-15);
        ASSERT_LE(f, std::max(a, b) + 1e-15);
        if (a != b) {
            ASSERT_GT(f, std::min(a, b));
            ASSERT_LT(f, std::max(a, b));
        }
    }
}

TEST(Online, ConversionExamples) {
    EXPECT_DOUBLE_EQ(conversion_score(outcomes(10000, 1392, 30.0)), 0.1392);
    EXPECT_EQ(conversion_score(outcomes(10, 0, 30.0)), 0.0);
    EXPECT_EQ(conversion_score(outcomes(10, 10, 30.0)), 1.0);
    try {
        conversion_score(std::vector<Outcome>{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::EmptyInput);
    }
}

TEST(Online, RevenueExamples) {
    EXPECT_EQ(revenue_per_offer(outcomes(1, 1, 10.0)), 10.0);
    EXPECT_EQ(revenue_per_offer(outcomes(2, 1, 10.0)), 5.0);
    EXPECT_DOUBLE_EQ(normalize_to_baseline(11.0, 10.0), 1.10);
    EXPECT_THROW(normalize_to_baseline(11.0, 0.0), Error);

    // Sessions that never saw the offer count for per-session revenue only.
    auto o = outcomes(4, 2, 10.0);
    o[3].offered = false;
    EXPECT_DOUBLE_EQ(revenue_per_offer(o), 20.0 / 3.0);
    EXPECT_DOUBLE_EQ(revenue_per_session(o), 5.0);
    EXPECT_THROW(revenue_per_session(std::vector<Outcome>{}), Error);
    EXPECT_THROW(revenue_per_offer(std::vector<Outcome>{{10.0, 0, false}}), Error);
}

TEST(Online, PermutationInvariant) {
    Rng rng(8);
    std::vector<Outcome> o;
    for (int i = 0; i < 500; ++i)
        o.push_back({rng.uniform(10, 40), rng.uniform() < 0.2 ? 1 : 0, rng.uniform() < 0.9});
    auto shuffled = o;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(1));
    EXPECT_EQ(conversion_score(o), conversion_score(shuffled));
    EXPECT_NEAR(revenue_per_offer(o), revenue_per_offer(shuffled), 1e-12);
    EXPECT_NEAR(revenue_per_session(o), revenue_per_session(shuffled), 1e-12);
}

TEST(Report, RowsAbsentValuesAndBaseline) {
    std::vector<NamedRecords> models{
        {"scored", {rec(20, 15, 0, 0.2), rec(20, 18, 1, 0.9), rec(20, 25, 0, 0.1), rec(20, 30, 1, 0.6)}},
        {"unscored", {rec(20, 25, 0), rec(20, 30, 0)}},
    };
    std::vector<NamedOutcomes> arms{{"HUMAN", "HUMAN", outcomes(10, 1, 10.0)},
                                    {"APP-LM", "APP_LM", outcomes(10, 1, 11.0)}};
    const auto report = build_report(models, arms, {42, "ds", "1970-01-01T00:00:00Z"});
    ASSERT_EQ(report.models.size(), 2u);
    EXPECT_EQ(report.models[0].name, "scored");
    EXPECT_EQ(report.models[0].auc, 1.0);
    EXPECT_EQ(report.models[0].pdr, 0.5);
    EXPECT_EQ(report.models[0].pdf1, 0.5);
    EXPECT_FALSE(report.models[1].auc.has_value());
    EXPECT_FALSE(report.models[1].rs.has_value());
    EXPECT_FALSE(report.models[1].pdp.has_value());
    EXPECT_FALSE(report.models[1].pdf1.has_value());
    ASSERT_EQ(report.arms.size(), 2u);
    EXPECT_EQ(report.arms[0].relative_revenue_per_offer, 1.0);
    EXPECT_DOUBLE_EQ(*report.arms[1].relative_revenue_per_offer, 1.10);

    const auto j = to_json(report);
    EXPECT_TRUE(j["models"][1]["auc"].is_null());
    EXPECT_EQ(j["metadata"]["seed"], 42);
    EXPECT_NE(to_text(report).find("APP-LM"), std::string::npos);
}

TEST(Report, AucColumnMatchesOracle) {
    Rng rng(9);
    std::vector<EvalRecord> r;
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 150; ++i) {
        s.push_back(static_cast<double>(rng.below(20)) / 20.0);
        y.push_back(rng.uniform() < 0.4);
        r.push_back(rec(20, 20, y.back(), s.back()));
    }
    std::vector<NamedRecords> models{{"m", r}};
    EXPECT_EQ(build_report(models, {}, {}).models[0].auc, pairwise_auc(s, y));
}

TEST(Report, ByteIdenticalForSameInputs) {
    Rng rng(10);
    std::vector<EvalRecord> r;
    for (int i = 0; i < 200; ++i)
        r.push_back(rec(rng.uniform(10, 40), rng.uniform(10, 40), rng.uniform() < 0.3, rng.uniform()));
    std::vector<NamedRecords> models{{"a", r}, {"b", r}};
    std::vector<NamedOutcomes> arms{{"HUMAN", "HUMAN", outcomes(50, 7, 30.0)}};
    const ReportMeta meta{7, "abc", "1970-01-01T00:00:00Z"};
    const auto a = to_json(build_report(models, arms, meta)).dump(2);
    const auto b = to_json(build_report(models, arms, meta)).dump(2);
    EXPECT_EQ(a, b);
    EXPECT_EQ(to_text(build_report(models, arms, meta)), to_text(build_report(models, arms, meta)));
}
