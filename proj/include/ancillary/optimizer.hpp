#pragma once
// Price selection: logistic probability-to-price mapping (APP-LM), discrete
// exhaustive search over the grid (APP-DES), epsilon-greedy composition and
// the HUMAN / RANDOM baselines.

#include "ancillary/core.hpp"

#include <cmath>
#include <concepts>
#include <span>
#include <string>
#include <vector>

namespace ancillary {

/// A purchase-probability model f(x, P). Grid evaluation must be a single
/// call over all candidate prices.
template <class M>
concept DemandModel = requires(const M& m, const FeatureVector& x, double price,
                               std::span<const double> prices) {
    { predict_proba(m, x, price) } -> std::convertible_to<double>;
    { predict_proba_grid(m, x, prices) } -> std::same_as<std::vector<double>>;
};

struct LogisticMapParams {
    double max_price = 1.0;  // L
    double shape = 10.0;     // k
    double midpoint = 0.5;   // x₀, a probability

    void validate() const {
        if (!(max_price > 0.0)) throw Error(Errc::InvalidArgument, "logistic L must be > 0");
        if (!(shape > 0.0)) throw Error(Errc::InvalidArgument, "logistic k must be > 0");
        if (!(midpoint > 0.0 && midpoint < 1.0))
            throw Error(Errc::InvalidArgument, "logistic x0 must be in (0, 1)");
    }
};

/// L / (1 + exp(-k (prob - x₀))), unclamped.
inline double logistic_price(double prob, const LogisticMapParams& p) {
    return p.max_price / (1.0 + std::exp(-p.shape * (prob - p.midpoint)));
}

inline double logistic_map(double prob, const LogisticMapParams& p, const PriceGrid& grid) {
    return grid.clamp(logistic_price(prob, p));
}

/// Ê = P · f(x, P)
template <DemandModel M>
double expected_revenue(const M& model, const FeatureVector& x, double price) {
    if (!(price > 0.0)) throw Error(Errc::InvalidArgument, "price must be > 0");
    return price * predict_proba(model, x, price);
}

/// Index of the largest P·f over the grid; ties go to the lowest price.
inline std::size_t argmax_revenue(std::span<const double> prices, std::span<const double> probs) {
    if (prices.size() != probs.size() || prices.empty())
        throw Error(Errc::DimensionMismatch, "one probability per grid price required");
    std::size_t best = 0;
    double best_rev = prices[0] * probs[0];
    for (std::size_t j = 1; j < prices.size(); ++j) {
        const double rev = prices[j] * probs[j];
        if (rev > best_rev) {
            best_rev = rev;
            best = j;
        }
    }
    return best;
}

template <DemandModel M>
Quote des_recommend(const M& model, const FeatureVector& x, const PriceGrid& grid,
                    std::string model_version = {}) {
    const auto probs = predict_proba_grid(model, x, grid.prices());
    const std::size_t j = argmax_revenue(grid.prices(), probs);
    Quote q;
    q.recommended_price = grid[j];
    q.policy = PolicyTag::AppDes;
    q.purchase_prob = probs[j];
    q.expected_revenue = grid[j] * probs[j];
    q.model_version = std::move(model_version);
    return q;
}

/// Probability at the reference price, then the logistic map.
template <DemandModel M>
Quote app_lm_recommend(const M& model, const FeatureVector& x, double reference_price,
                       const LogisticMapParams& params, const PriceGrid& grid,
                       std::string model_version = {}) {
    const double prob = predict_proba(model, x, reference_price);
    Quote q;
    q.recommended_price = logistic_map(prob, params, grid);
    q.policy = PolicyTag::AppLm;
    q.purchase_prob = prob;
    q.model_version = std::move(model_version);
    return q;
}

/// P_log when u < ε, otherwise P_rm.
inline double epsilon_greedy(double epsilon, double u, double logistic_price,
                             double revenue_max_price) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw Error(Errc::InvalidArgument, "epsilon must be in [0, 1]");
    return u < epsilon ? logistic_price : revenue_max_price;
}

struct RandomDiscountParams {
    double mean = 0.0;    // μ_d, currency
    double stddev = 0.0;  // σ_d, currency
    double static_price = 0.0;

    void validate(const PriceGrid& grid) const {
        if (!(stddev >= 0.0)) throw Error(Errc::InvalidArgument, "discount stddev must be >= 0");
        if (!grid.contains(static_price))
            throw Error(Errc::InvalidArgument, "static price outside the grid range");
    }
};

/// clamp(P_static - |μ_d + σ_d g|) for a standard normal draw g. The
/// discount is never negative.
inline double random_discount(const RandomDiscountParams& p, double g, const PriceGrid& grid) {
    return grid.clamp(p.static_price - std::abs(p.mean + p.stddev * g));
}

inline Quote static_price(double price, const PriceGrid& grid) {
    if (!grid.contains(price))
        throw Error(Errc::InvalidArgument, "static price outside the grid range");
    Quote q;
    q.recommended_price = price;
    q.policy = PolicyTag::Human;
    return q;
}

}  // namespace ancillary
