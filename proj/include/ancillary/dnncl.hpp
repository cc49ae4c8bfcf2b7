#pragma once
// End-to-end pricer: a network whose sigmoid output is mapped affinely onto
// [P_min, P_max], trained with the willingness-to-pay bound loss.
//
// Grid indices j, j* in the loss terms are 1-based.

#include "ancillary/core.hpp"
#include "ancillary/mlp.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace ancillary {

inline constexpr double kDefaultC1 = 0.8;
inline constexpr double kDefaultC2 = 1.2;

/// σ = (j - j*) · (-1)^y
inline double wtp_factor(std::size_t j, std::size_t j_star, int y) {
    const double diff = static_cast<double>(j) - static_cast<double>(j_star);
    return y == 1 ? -diff : diff;
}

/// δ = y when σ >= 0, else 0.
inline int latent_delta(int y, double sigma) { return sigma >= 0.0 ? y : 0; }

struct PriceBounds {
    double lower;
    double upper;
};

/// L = δP + (1-δ)c₁P,  U = (1-δ)P + δc₂P
inline PriceBounds bounds(double price, int delta, double c1, double c2) {
    const double d = static_cast<double>(delta);
    return {d * price + (1.0 - d) * (c1 * price), (1.0 - d) * price + d * (c2 * price)};
}

inline void check_bound_constants(double c1, double c2) {
    if (!(c1 > 0.0 && c1 < 1.0 && c2 > 1.0))
        throw Error(Errc::InvalidArgument, "bound constants need 0 < c1 < 1 < c2");
}

struct LossTerm {
    double sigma = 0.0;
    int delta = 0;
    double phi_lb = 0.0;
    double phi_ub = 0.0;
    bool active = false;  // sigma > 0
};

using LossTermBreakdown = std::vector<LossTerm>;  // one entry per grid index

struct CustomLoss {
    double loss = 0.0;
    double grad = 0.0;  // subgradient with respect to F
    LossTermBreakdown terms;
};

/// Sum over active grid points (σ > 0) of max(0, L - F) + max(0, F - U).
/// j* = snap_to_grid(F); j*, δ and the active set are constant in F, and the
/// hinge derivative at a kink is 0.
inline CustomLoss custom_loss(double F, int y, const PriceGrid& grid, double c1, double c2) {
    const std::size_t j_star = snap_to_grid(F, grid) + 1;
    CustomLoss out;
    out.terms.resize(grid.size());
    for (std::size_t j = 1; j <= grid.size(); ++j) {
        LossTerm& t = out.terms[j - 1];
        t.sigma = wtp_factor(j, j_star, y);
        t.delta = latent_delta(y, t.sigma);
        const auto [lower, upper] = bounds(grid[j - 1], t.delta, c1, c2);
        t.phi_lb = std::max(0.0, lower - F);
        t.phi_ub = std::max(0.0, F - upper);
        t.active = t.sigma > 0.0;
        if (!t.active) continue;
        out.loss += t.phi_lb + t.phi_ub;
        if (lower - F > 0.0) out.grad -= 1.0;
        if (F - upper > 0.0) out.grad += 1.0;
    }
    return out;
}

/// The same loss read off the case table: a grid price below the served
/// price contributes max(0, F - c₂P) when purchased, a grid price above it
/// contributes max(0, c₁P - F) when not purchased, the served price itself
/// contributes 0. The served price is F snapped to the grid.
inline double table2_loss(double F, int y, const PriceGrid& grid, double c1, double c2) {
    const double served = grid[snap_to_grid(F, grid)];
    double loss = 0.0;
    for (double p : grid.prices()) {
        if (p < served && y == 1) loss += std::max(0.0, F - c2 * p);
        if (p > served && y == 0) loss += std::max(0.0, c1 * p - F);
    }
    return loss;
}

struct DnnClModel {
    MlpModel net;  // input: encoded features only
    PriceGrid grid;
    double c1 = kDefaultC1;
    double c2 = kDefaultC2;
    std::uint64_t schema_hash = 0;

    /// F = P_min + s (P_max - P_min)
    double price_from_output(double s) const { return grid.min() + s * (grid.max() - grid.min()); }
};

struct DnnClTrainResult {
    DnnClModel model;
    std::vector<double> epoch_loss;
};

inline DnnClTrainResult train_dnncl(const EncodedDataset& data, const PriceGrid& grid,
                                    std::span<const std::size_t> hidden, const TrainConfig& cfg,
                                    double c1 = kDefaultC1, double c2 = kDefaultC2) {
    check_bound_constants(c1, c2);
    if (data.size() == 0) throw Error(Errc::EmptyDataset, "no training data");

    DnnClModel model;
    model.grid = grid;
    model.c1 = c1;
    model.c2 = c2;
    model.schema_hash = data.rows.front().schema_hash;
    const double range = grid.max() - grid.min();

    auto trained = sgd_train(
        init_mlp(data.rows.front().size(), hidden, cfg.seed), data.size(),
        [&](std::size_t i) { return data.rows[i].span(); },
        [&](std::size_t i, double s) {
            const auto cl = custom_loss(model.price_from_output(s), data.labels[i], grid, c1, c2);
            return LossGrad{cl.loss, cl.grad * range};
        },
        cfg);
    model.net = std::move(trained.model);
    return {std::move(model), std::move(trained.epoch_loss)};
}

/// Continuous recommended price F in [P_min, P_max].
inline double dnncl_price(const DnnClModel& m, const FeatureVector& x) {
    check_schema(m.schema_hash, x);
    return m.price_from_output(forward(m.net, x.values, Mode::Infer));
}

/// Served quote: F snapped to the grid.
inline Quote recommend_price_dnncl(const DnnClModel& m, const FeatureVector& x,
                                   std::string model_version = {}) {
    const double F = dnncl_price(m, x);
    Quote q;
    q.recommended_price = m.grid[snap_to_grid(F, m.grid)];
    q.policy = PolicyTag::DnnCl;
    q.model_version = std::move(model_version);
    return q;
}

}  // namespace ancillary
