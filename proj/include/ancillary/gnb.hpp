#pragma once
// Gaussian Naive Bayes purchase-probability models: plain (GNB) and with a
// one-hot k-means cluster id appended to the features (GNBC).

#include "ancillary/core.hpp"
#include "ancillary/kmeans.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace ancillary {

inline constexpr double kDefaultVarFloor = 1e-6;

/// Posterior log-odds are clamped to this magnitude so probabilities stay
/// strictly inside (0, 1).
inline constexpr double kMaxLogOdds = 35.0;

inline double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct GnbModel {
    std::array<double, 2> priors{0.5, 0.5};
    std::array<std::vector<double>, 2> means;      // per class, over x ⊕ price/price_scale
    std::array<std::vector<double>, 2> variances;
    double var_floor = kDefaultVarFloor;
    double price_scale = 1.0;
    std::uint64_t schema_hash = 0;

    std::size_t input_dimension() const { return means[0].size(); }

    double log_odds(std::span<const double> z) const {
        if (z.size() != input_dimension())
            throw Error(Errc::DimensionMismatch, "GNB input dimension mismatch");
        double d = std::log(priors[1]) - std::log(priors[0]);
        for (std::size_t k = 0; k < z.size(); ++k) {
            double ll[2];
            for (int c = 0; c < 2; ++c) {
                const double v = variances[c][k];
                const double r = z[k] - means[c][k];
                ll[c] = -0.5 * std::log(2.0 * std::numbers::pi * v) - r * r / (2.0 * v);
            }
            d += ll[1] - ll[0];
        }
        return std::clamp(d, -kMaxLogOdds, kMaxLogOdds);
    }

    double posterior(std::span<const double> z) const { return logistic(log_odds(z)); }
};

/// Fit class priors and per-class Gaussian parameters on already-augmented
/// rows. Variances use the maximum-likelihood (n) denominator, then the floor.
template <class Rows>
GnbModel fit_gnb_rows(const Rows& rows, std::span<const int> labels, double var_floor) {
    if (!(var_floor > 0.0)) throw Error(Errc::InvalidArgument, "variance floor must be > 0");
    const std::size_t n = std::size(rows);
    if (n == 0 || n != labels.size())
        throw Error(Errc::EmptyDataset, "GNB needs a non-empty labeled dataset");
    const std::size_t dim = row_view(rows[0]).size();

    std::array<std::size_t, 2> count{0, 0};
    GnbModel m;
    m.var_floor = var_floor;
    for (int c = 0; c < 2; ++c) {
        m.means[c].assign(dim, 0.0);
        m.variances[c].assign(dim, 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const int c = labels[i];
        if (c != 0 && c != 1) throw Error(Errc::InvalidArgument, "labels must be 0 or 1");
        const auto z = row_view(rows[i]);
        if (z.size() != dim) throw Error(Errc::DimensionMismatch, "ragged GNB rows");
        ++count[c];
        for (std::size_t k = 0; k < dim; ++k) m.means[c][k] += z[k];
    }
    if (count[0] == 0 || count[1] == 0)
        throw Error(Errc::SingleClassDataset, "GNB needs both classes present");
    for (int c = 0; c < 2; ++c)
        for (auto& v : m.means[c]) v /= static_cast<double>(count[c]);
    for (std::size_t i = 0; i < n; ++i) {
        const int c = labels[i];
        const auto z = row_view(rows[i]);
        for (std::size_t k = 0; k < dim; ++k) {
            const double r = z[k] - m.means[c][k];
            m.variances[c][k] += r * r;
        }
    }
    for (int c = 0; c < 2; ++c)
        for (auto& v : m.variances[c]) v = std::max(v / static_cast<double>(count[c]), var_floor);
    m.priors[1] = static_cast<double>(count[1]) / static_cast<double>(n);
    m.priors[0] = 1.0 - m.priors[1];
    return m;
}

inline std::vector<double> augment_with_price(std::span<const double> x, double price,
                                              double price_scale) {
    std::vector<double> z(x.begin(), x.end());
    z.push_back(price / price_scale);
    return z;
}

/// GNB over the encoded features plus the offered price divided by
/// `price_scale` (normally P_max of the price grid).
inline GnbModel fit_gnb(const EncodedDataset& data, double price_scale,
                        double var_floor = kDefaultVarFloor) {
    if (!(price_scale > 0.0)) throw Error(Errc::InvalidArgument, "price scale must be > 0");
    std::vector<std::vector<double>> rows;
    rows.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        rows.push_back(augment_with_price(data.rows[i].values, data.prices[i], price_scale));
    auto m = fit_gnb_rows(rows, data.labels, var_floor);
    m.price_scale = price_scale;
    m.schema_hash = data.size() ? data.rows[0].schema_hash : 0;
    return m;
}

inline void check_schema(std::uint64_t expected, const FeatureVector& x) {
    if (expected != 0 && x.schema_hash != 0 && expected != x.schema_hash)
        throw Error(Errc::SchemaMismatch, "feature vector was encoded with a different schema");
}

inline double predict_proba(const GnbModel& m, const FeatureVector& x, double price) {
    check_schema(m.schema_hash, x);
    if (x.size() + 1 != m.input_dimension())
        throw Error(Errc::DimensionMismatch, "GNB feature dimension mismatch");
    return m.posterior(augment_with_price(x.values, price, m.price_scale));
}

/// One evaluation per grid price; the feature part is shared.
inline std::vector<double> predict_proba_grid(const GnbModel& m, const FeatureVector& x,
                                              std::span<const double> prices) {
    check_schema(m.schema_hash, x);
    if (x.size() + 1 != m.input_dimension())
        throw Error(Errc::DimensionMismatch, "GNB feature dimension mismatch");
    auto z = augment_with_price(x.values, 0.0, m.price_scale);
    std::vector<double> out;
    out.reserve(prices.size());
    for (double p : prices) {
        z.back() = p / m.price_scale;
        out.push_back(m.posterior(z));
    }
    return out;
}

// ---------------------------------------------------------------------------
// GNBC

struct GnbcModel {
    KMeansModel clusters;
    GnbModel gnb;  // over x ⊕ onehot(cluster) ⊕ price/price_scale

    std::vector<double> augment(std::span<const double> x, double price) const {
        const std::size_t c = clusters.assign(x);
        std::vector<double> z(x.begin(), x.end());
        z.resize(x.size() + clusters.k(), 0.0);
        z[x.size() + c] = 1.0;
        z.push_back(price / gnb.price_scale);
        return z;
    }
};

inline GnbcModel fit_gnbc(const EncodedDataset& data, std::size_t k, std::uint64_t seed,
                          double price_scale, double var_floor = kDefaultVarFloor,
                          std::size_t max_iters = 100) {
    if (!(price_scale > 0.0)) throw Error(Errc::InvalidArgument, "price scale must be > 0");
    if (data.size() > 0 && (data.positives() == 0 || data.positives() == data.size()))
        throw Error(Errc::SingleClassDataset, "GNBC needs both classes present");
    GnbcModel m;
    m.clusters = fit_kmeans(data.rows, k, seed, max_iters);
    m.gnb.price_scale = price_scale;
    std::vector<std::vector<double>> rows;
    rows.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        rows.push_back(m.augment(data.rows[i].values, data.prices[i]));
    m.gnb = fit_gnb_rows(rows, data.labels, var_floor);
    m.gnb.price_scale = price_scale;
    m.gnb.schema_hash = data.size() ? data.rows[0].schema_hash : 0;
    return m;
}

inline double predict_proba(const GnbcModel& m, const FeatureVector& x, double price) {
    check_schema(m.gnb.schema_hash, x);
    return m.gnb.posterior(m.augment(x.values, price));
}

inline std::vector<double> predict_proba_grid(const GnbcModel& m, const FeatureVector& x,
                                              std::span<const double> prices) {
    check_schema(m.gnb.schema_hash, x);
    auto z = m.augment(x.values, 0.0);
    std::vector<double> out;
    out.reserve(prices.size());
    for (double p : prices) {
        z.back() = p / m.gnb.price_scale;
        out.push_back(m.gnb.posterior(z));
    }
    return out;
}

}  // namespace ancillary
