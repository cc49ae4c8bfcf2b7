#pragma once
// Concrete pricing policies for the A/B harness and the service.

#include "ancillary/core.hpp"
#include "ancillary/dnncl.hpp"
#include "ancillary/optimizer.hpp"
#include "ancillary/simulator.hpp"

#include <memory>
#include <string>

namespace ancillary {

class HumanPolicy final : public PricingPolicy {
public:
    HumanPolicy(double price, PriceGrid grid) : grid_(std::move(grid)), price_(price) {
        static_price(price_, grid_);  // range check
    }
    Quote quote(const SessionRecord&, Rng&) const override { return static_price(price_, grid_); }
    PolicyTag tag() const override { return PolicyTag::Human; }

private:
    PriceGrid grid_;
    double price_;
};

class RandomDiscountPolicy final : public PricingPolicy {
public:
    RandomDiscountPolicy(RandomDiscountParams params, PriceGrid grid)
        : params_(params), grid_(std::move(grid)) {
        params_.validate(grid_);
    }
    Quote quote(const SessionRecord&, Rng& rng) const override {
        Quote q;
        q.recommended_price = random_discount(params_, rng.normal(), grid_);
        q.policy = PolicyTag::Random;
        return q;
    }
    PolicyTag tag() const override { return PolicyTag::Random; }

private:
    RandomDiscountParams params_;
    PriceGrid grid_;
};

template <DemandModel M>
class AppLmPolicy final : public PricingPolicy {
public:
    AppLmPolicy(EncodingSchema schema, std::shared_ptr<const M> model, double reference_price,
                LogisticMapParams params, PriceGrid grid, std::string version = {})
        : schema_(std::move(schema)), model_(std::move(model)), reference_price_(reference_price),
          params_(params), grid_(std::move(grid)), version_(std::move(version)) {
        params_.validate();
    }
    Quote quote(const SessionRecord& s, Rng&) const override {
        return app_lm_recommend(*model_, encode(s, schema_), reference_price_, params_, grid_, version_);
    }
    PolicyTag tag() const override { return PolicyTag::AppLm; }

private:
    EncodingSchema schema_;
    std::shared_ptr<const M> model_;
    double reference_price_;
    LogisticMapParams params_;
    PriceGrid grid_;
    std::string version_;
};

template <DemandModel M>
class AppDesPolicy final : public PricingPolicy {
public:
    AppDesPolicy(EncodingSchema schema, std::shared_ptr<const M> model, PriceGrid grid,
                 std::string version = {})
        : schema_(std::move(schema)), model_(std::move(model)), grid_(std::move(grid)),
          version_(std::move(version)) {}
    Quote quote(const SessionRecord& s, Rng&) const override {
        return des_recommend(*model_, encode(s, schema_), grid_, version_);
    }
    PolicyTag tag() const override { return PolicyTag::AppDes; }

private:
    EncodingSchema schema_;
    std::shared_ptr<const M> model_;
    PriceGrid grid_;
    std::string version_;
};

class DnnClPolicy final : public PricingPolicy {
public:
    DnnClPolicy(EncodingSchema schema, std::shared_ptr<const DnnClModel> model, std::string version = {})
        : schema_(std::move(schema)), model_(std::move(model)), version_(std::move(version)) {}
    Quote quote(const SessionRecord& s, Rng&) const override {
        return recommend_price_dnncl(*model_, encode(s, schema_), version_);
    }
    PolicyTag tag() const override { return PolicyTag::DnnCl; }

private:
    EncodingSchema schema_;
    std::shared_ptr<const DnnClModel> model_;
    std::string version_;
};

/// Logistic exploration with probability ε, revenue maximization otherwise.
template <DemandModel Lm, DemandModel Des>
class EpsilonGreedyPolicy final : public PricingPolicy {
public:
    EpsilonGreedyPolicy(double epsilon, AppLmPolicy<Lm> explore, AppDesPolicy<Des> exploit)
        : epsilon_(epsilon), explore_(std::move(explore)), exploit_(std::move(exploit)) {
        epsilon_greedy(epsilon_, 0.0, 0.0, 0.0);  // range check
    }
    Quote quote(const SessionRecord& s, Rng& rng) const override {
        const double u = rng.uniform();
        const Quote log_q = explore_.quote(s, rng);
        const Quote rm_q = exploit_.quote(s, rng);
        Quote q = u < epsilon_ ? log_q : rm_q;
        q.recommended_price =
            epsilon_greedy(epsilon_, u, log_q.recommended_price, rm_q.recommended_price);
        q.policy = PolicyTag::EpsGreedy;
        return q;
    }
    PolicyTag tag() const override { return PolicyTag::EpsGreedy; }

private:
    double epsilon_;
    AppLmPolicy<Lm> explore_;
    AppDesPolicy<Des> exploit_;
};

}  // namespace ancillary
