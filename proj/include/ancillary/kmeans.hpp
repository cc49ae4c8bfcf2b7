#pragma once

#include "ancillary/core.hpp"
#include "ancillary/rng.hpp"

#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace ancillary {

inline std::span<const double> row_view(const FeatureVector& v) { return v.values; }
inline std::span<const double> row_view(const std::vector<double>& v) { return v; }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        d += t * t;
    }
    return d;
}

struct KMeansModel {
    std::vector<std::vector<double>> centroids;
    std::uint64_t seed = 0;
    std::size_t iterations_run = 0;
    bool converged = false;  // false means max_iters was hit

    std::size_t k() const { return centroids.size(); }
    std::size_t dimension() const { return centroids.empty() ? 0 : centroids.front().size(); }

    /// Nearest centroid; ties go to the lowest index.
    std::size_t assign(std::span<const double> x) const {
        if (x.size() != dimension())
            throw Error(Errc::DimensionMismatch, "k-means input has wrong dimension");
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            const double d = squared_distance(x, centroids[c]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        return best;
    }
};

/// Lloyd's algorithm. Initial centroids are k distinct points drawn without
/// replacement; an emptied cluster is re-seeded at the point farthest from
/// its current centroid.
template <class Rows>
KMeansModel fit_kmeans(const Rows& points, std::size_t k, std::uint64_t seed,
                       std::size_t max_iters = 100) {
    const std::size_t n = std::size(points);
    if (k == 0) throw Error(Errc::InvalidArgument, "k must be >= 1");
    if (n < k) throw Error(Errc::TooFewSamples, "k-means needs at least k points");
    const std::size_t dim = row_view(points[0]).size();

    // partial Fisher-Yates
    Rng rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(order[i], order[j]);
    }

    KMeansModel model;
    model.seed = seed;
    for (std::size_t i = 0; i < k; ++i) {
        const auto row = row_view(points[order[i]]);
        model.centroids.emplace_back(row.begin(), row.end());
    }

    std::vector<std::size_t> assignment(n, k);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = model.assign(row_view(points[i]));
            if (c != assignment[i]) {
                assignment[i] = c;
                changed = true;
            }
        }
        model.iterations_run = iter + 1;
        if (!changed) {
            model.converged = true;
            break;
        }

        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = row_view(points[i]);
            auto& s = sums[assignment[i]];
            for (std::size_t d = 0; d < dim; ++d) s[d] += row[d];
            ++counts[assignment[i]];
        }
        std::vector<bool> taken(n, false);
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                for (std::size_t d = 0; d < dim; ++d)
                    model.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
                continue;
            }
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i]) continue;
                const double d =
                    squared_distance(row_view(points[i]), model.centroids[assignment[i]]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            taken[far] = true;
            const auto row = row_view(points[far]);
            model.centroids[c].assign(row.begin(), row.end());
        }
    }
    return model;
}

}  // namespace ancillary
