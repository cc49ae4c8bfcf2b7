#pragma once
// Glue between the library pieces: train any of the four models from a
// session log, turn checkpoints into A/B policies, and read the run
// configuration documents used by `simulate` and `abtest`.

#include "ancillary/io.hpp"
#include "ancillary/policy.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ancillary {

/// 15.00, 17.50, ..., 45.00 around the default static price of 30.
inline PriceGrid default_price_grid() { return PriceGrid::linspace(15.0, 45.0, 13); }

inline constexpr std::size_t kDefaultClusters = 8;

struct TrainOptions {
    ModelType type = ModelType::Gnbc;
    PriceGrid grid = default_price_grid();
    std::uint64_t seed = 0;
    double c1 = kDefaultC1;
    double c2 = kDefaultC2;
    std::size_t clusters = kDefaultClusters;
    double var_floor = kDefaultVarFloor;
    std::vector<std::size_t> hidden = kDefaultHiddenLayers;
    TrainConfig net;
    std::optional<LogisticMapParams> logistic;  // default: L = P_max, k = 10, x₀ = 0.5
    std::optional<double> reference_price;      // default: median offered price
};

namespace detail {

inline double median_offered(std::span<const SessionRecord> sessions) {
    std::vector<double> p;
    p.reserve(sessions.size());
    for (const auto& s : sessions) p.push_back(s.price_offered);
    std::sort(p.begin(), p.end());
    return p[p.size() / 2];
}

}  // namespace detail

/// Fits the encoding schema and the requested model on a labeled log.
inline Checkpoint train_checkpoint(std::span<const SessionRecord> sessions, const TrainOptions& opt) {
    if (sessions.empty()) throw Error(Errc::EmptyDataset, "no training sessions");
    Checkpoint ck;
    ck.schema = fit_schema(sessions);
    const EncodedDataset data = encode_dataset(sessions, ck.schema);
    ck.pricing.grid = opt.grid;
    ck.pricing.logistic = opt.logistic.value_or(LogisticMapParams{opt.grid.max(), 10.0, 0.5});
    ck.pricing.logistic.validate();
    ck.pricing.reference_price = opt.grid.clamp(opt.reference_price.value_or(detail::median_offered(sessions)));

    TrainConfig net = opt.net;
    net.seed = opt.seed;
    const double scale = opt.grid.max();
    switch (opt.type) {
        case ModelType::Gnb: ck.model = fit_gnb(data, scale, opt.var_floor); break;
        case ModelType::Gnbc:
            ck.model = fit_gnbc(data, opt.clusters, opt.seed, scale, opt.var_floor);
            break;
        case ModelType::AppDnn: ck.model = train_app(data, scale, opt.hidden, net).model; break;
        case ModelType::DnnCl:
            ck.model = train_dnncl(data, opt.grid, opt.hidden, net, opt.c1, opt.c2).model;
            break;
    }
    ck.model_version = std::string(to_string(opt.type)) + "-s" + std::to_string(opt.seed) + "-" +
                       dataset_id(sessions).substr(0, 8);
    return ck;
}

// ---------------------------------------------------------------------------
// Policies backed by checkpoints

/// APP-LM or APP-DES for probability models, the direct price for DNN-CL.
inline std::shared_ptr<const PricingPolicy> make_policy(const Checkpoint& ck, PolicyTag mode) {
    return std::visit(
        [&](const auto& m) -> std::shared_ptr<const PricingPolicy> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DnnClModel>) {
                if (mode != PolicyTag::DnnCl)
                    throw Error(Errc::InvalidArgument, "a dnn-cl checkpoint can only serve DNN_CL");
                return std::make_shared<DnnClPolicy>(ck.schema, std::make_shared<const T>(m),
                                                     ck.model_version);
            } else {
                auto model = std::make_shared<const T>(m);
                if (mode == PolicyTag::AppLm)
                    return std::make_shared<AppLmPolicy<T>>(ck.schema, model, ck.pricing.reference_price,
                                                            ck.pricing.logistic, ck.pricing.grid,
                                                            ck.model_version);
                if (mode == PolicyTag::AppDes)
                    return std::make_shared<AppDesPolicy<T>>(ck.schema, model, ck.pricing.grid,
                                                             ck.model_version);
                throw Error(Errc::InvalidArgument,
                            std::string(to_string(mode)) + " cannot be served by a " +
                                std::string(to_string(ck.type())) + " checkpoint");
            }
        },
        ck.model);
}

inline PolicyTag default_policy(ModelType t) {
    switch (t) {
        case ModelType::Gnb:
        case ModelType::Gnbc: return PolicyTag::AppLm;
        case ModelType::AppDnn: return PolicyTag::AppDes;
        case ModelType::DnnCl: return PolicyTag::DnnCl;
    }
    return PolicyTag::AppLm;
}

inline std::shared_ptr<const PricingPolicy> make_epsilon_policy(double epsilon, const Checkpoint& explore,
                                                               const Checkpoint& exploit) {
    return std::visit(
        [&](const auto& lm, const auto& des) -> std::shared_ptr<const PricingPolicy> {
            using L = std::decay_t<decltype(lm)>;
            using D = std::decay_t<decltype(des)>;
            if constexpr (std::is_same_v<L, DnnClModel> || std::is_same_v<D, DnnClModel>) {
                throw Error(Errc::InvalidArgument, "epsilon-greedy needs probability models");
            } else {
                AppLmPolicy<L> a(explore.schema, std::make_shared<const L>(lm), explore.pricing.reference_price,
                                 explore.pricing.logistic, explore.pricing.grid, explore.model_version);
                AppDesPolicy<D> b(exploit.schema, std::make_shared<const D>(des), exploit.pricing.grid,
                                  exploit.model_version);
                return std::make_shared<EpsilonGreedyPolicy<L, D>>(epsilon, std::move(a), std::move(b));
            }
        },
        explore.model, exploit.model);
}

// ---------------------------------------------------------------------------
// Evaluation of checkpoints on a labeled log

/// Offered price, model recommendation, label and (for probability models)
/// the predicted purchase probability at the offered price.
inline std::vector<EvalRecord> evaluation_records(const Checkpoint& ck,
                                                  std::span<const SessionRecord> sessions) {
    std::vector<EvalRecord> out;
    out.reserve(sessions.size());
    for (const auto& s : sessions) {
        if (!s.purchased) throw Error(Errc::InvalidArgument, "evaluation needs labeled sessions: " + s.session_id);
        const FeatureVector x = encode(s, ck.schema);
        EvalRecord r;
        r.offered = s.price_offered;
        r.recommended = recommend(ck, s).recommended_price;
        r.purchased = *s.purchased;
        r.score = purchase_probability(ck, x, s.price_offered);
        out.push_back(r);
    }
    return out;
}

/// Reports carry a fixed timestamp unless SOURCE_DATE_EPOCH is set, so equal
/// inputs give equal bytes.
inline std::string report_timestamp() {
    std::int64_t epoch = 0;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) epoch = std::strtoll(env, nullptr, 10);
    const std::time_t t = static_cast<std::time_t>(epoch);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------------------
// Run configuration documents

namespace detail {

inline PriceGrid grid_from_json(const ojson& j) {
    if (j.is_array()) return PriceGrid(j.get<std::vector<double>>());
    return PriceGrid::linspace(j.at("min").get<double>(), j.at("max").get<double>(),
                               j.at("count").get<std::size_t>());
}

inline RandomDiscountParams discount_from_json(const ojson& j, double static_price) {
    RandomDiscountParams d;
    d.mean = j.value("mean", 0.0);
    d.stddev = j.value("stddev", 0.0);
    d.static_price = j.value("static_price", static_price);
    return d;
}

}  // namespace detail

/// Market section of a run document: the MarketSpec itself plus optional
/// calibration `{ "target": 0.06, "sessions": 100000, "seed": 1 }`.
inline MarketSpec market_from_config(const ojson& doc) {
    MarketSpec spec = doc.contains("market") ? market_spec_from_json(doc.at("market")) : default_market_spec();
    if (doc.contains("calibration") && !doc.at("calibration").is_null()) {
        const auto& c = doc.at("calibration");
        spec = calibrate(spec, c.value("target", spec.target_conversion),
                         c.value("static_price", spec.static_price),
                         c.value("sessions", std::size_t{100000}), c.value("seed", std::uint64_t{1}));
    }
    return spec;
}

struct SimulateConfig {
    MarketSpec market;
    std::size_t sessions = 20000;
    std::optional<PriceExposure> exposure;
};

inline SimulateConfig simulate_config_from_json(const ojson& doc) {
    try {
        SimulateConfig cfg;
        cfg.market = market_from_config(doc);
        cfg.sessions = doc.value("sessions", cfg.sessions);
        if (doc.contains("exposure") && !doc.at("exposure").is_null()) {
            const auto& e = doc.at("exposure");
            PriceExposure x{detail::grid_from_json(e.at("grid")),
                            detail::discount_from_json(e.at("discount"), cfg.market.static_price),
                            e.value("share", 1.0)};
            x.discount.validate(x.grid);
            if (!(x.share >= 0.0 && x.share <= 1.0))
                throw Error(Errc::InvalidArgument, "exposure share must be in [0, 1]");
            cfg.exposure = std::move(x);
        }
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("simulate config: ") + e.what());
    }
}

inline std::vector<SessionRecord> run_simulation(const SimulateConfig& cfg, std::uint64_t seed) {
    return export_sessions(cfg.market, cfg.sessions, seed, cfg.market.static_price, cfg.exposure);
}

struct AbRun {
    MarketSpec market;
    AbConfig config;
};

namespace detail {

/// A model source is either `{ "checkpoint": path }` or `{ "train": {...} }`.
/// Training data comes from the run's own market, so in-process arms need
/// no files.
inline Checkpoint model_from_json(const ojson& j, const MarketSpec& market, const std::string& base_dir) {
    if (j.contains("checkpoint")) {
        std::string path = j.at("checkpoint").get<std::string>();
        if (!path.empty() && path.front() != '/' && !base_dir.empty()) path = base_dir + "/" + path;
        return load_checkpoint(path);
    }
    const auto& t = j.at("train");
    SimulateConfig sim;
    sim.market = market;
    sim.sessions = t.value("sessions", std::size_t{20000});
    const auto grid = grid_from_json(t.at("grid"));
    if (t.contains("exposure")) {
        const auto& e = t.at("exposure");
        sim.exposure = PriceExposure{grid, discount_from_json(e, market.static_price), e.value("share", 1.0)};
    }
    const auto seed = t.value("seed", std::uint64_t{0});
    const auto sessions = run_simulation(sim, seed);

    TrainOptions opt;
    opt.type = parse_model_type(t.value("model", std::string("gnbc")));
    opt.grid = grid;
    opt.seed = seed;
    opt.c1 = t.value("c1", opt.c1);
    opt.c2 = t.value("c2", opt.c2);
    opt.clusters = t.value("clusters", opt.clusters);
    if (t.contains("hidden")) opt.hidden = t.at("hidden").get<std::vector<std::size_t>>();
    opt.net.epochs = t.value("epochs", opt.net.epochs);
    opt.net.learning_rate = t.value("learning_rate", opt.net.learning_rate);
    opt.net.batch_size = t.value("batch_size", opt.net.batch_size);
    opt.net.dropout_rate = t.value("dropout", opt.net.dropout_rate);
    if (t.contains("logistic")) {
        const auto& l = t.at("logistic");
        opt.logistic = LogisticMapParams{l.value("L", grid.max()), l.value("k", 10.0), l.value("x0", 0.5)};
    }
    if (t.contains("reference_price")) opt.reference_price = t.at("reference_price").get<double>();
    return train_checkpoint(sessions, opt);
}

}  // namespace detail

/// `{ "seed", "days", "sessions_per_day", "baseline", "market", "calibration",
///    "grid", "arms": [ { "name", "policy", "split", ... } ] }`
inline AbRun abtest_config_from_json(const ojson& doc, const std::string& base_dir = {}) {
    try {
        AbRun run;
        run.market = market_from_config(doc);
        auto& cfg = run.config;
        cfg.seed = doc.value("seed", cfg.seed);
        cfg.days = doc.value("days", cfg.days);
        cfg.sessions_per_day = doc.value("sessions_per_day", cfg.sessions_per_day);
        cfg.baseline_arm = doc.value("baseline", cfg.baseline_arm);
        const PriceGrid grid = doc.contains("grid") ? detail::grid_from_json(doc.at("grid")) : default_price_grid();
        const double static_p = run.market.static_price;

        for (const auto& a : doc.at("arms")) {
            AbArm arm;
            arm.name = a.at("name").get<std::string>();
            arm.split = a.at("split").get<double>();
            const PolicyTag tag = parse_policy_tag(a.at("policy").get<std::string>());
            switch (tag) {
                case PolicyTag::Human:
                    arm.policy = std::make_shared<HumanPolicy>(a.value("price", static_p), grid);
                    break;
                case PolicyTag::Random:
                    arm.policy = std::make_shared<RandomDiscountPolicy>(
                        detail::discount_from_json(a.at("discount"), static_p), grid);
                    break;
                case PolicyTag::AppLm:
                case PolicyTag::AppDes:
                case PolicyTag::DnnCl:
                    arm.policy = make_policy(detail::model_from_json(a.at("model"), run.market, base_dir), tag);
                    break;
                case PolicyTag::EpsGreedy:
                    arm.policy = make_epsilon_policy(
                        a.at("epsilon").get<double>(),
                        detail::model_from_json(a.at("explore"), run.market, base_dir),
                        detail::model_from_json(a.at("exploit"), run.market, base_dir));
                    break;
            }
            cfg.arms.push_back(std::move(arm));
        }
        cfg.validate();
        return run;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("abtest config: ") + e.what());
    }
}

}  // namespace ancillary
