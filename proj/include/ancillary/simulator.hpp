#pragma once
// Synthetic ancillary market with a latent, lognormal willingness to pay.
//
// log WTP = submarket base
//         + days-to-departure slope · (1 - dtd / max_dtd)
//         + LOS bump                 (normalized LOS inside the window)
//         + group slope · (group_size - 1)
//         + price-comparison slope · score
//         + interaction · ctx_a · ctx_b
//         + submarket noise std · z
//
// A session purchases iff WTP >= offered price.

#include "ancillary/core.hpp"
#include "ancillary/metrics.hpp"
#include "ancillary/optimizer.hpp"
#include "ancillary/rng.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace ancillary {

struct SubMarket {
    std::string name;
    double weight = 1.0;
    std::vector<Market> markets;  // sampled uniformly
    double log_wtp_mean = 0.0;
    double log_wtp_std = 0.5;
    double days_to_departure_slope = 0.0;  // WTP rises as departure approaches
    double los_bump = 0.0;
    double group_slope = 0.0;
    double price_comparison_slope = 0.0;

    bool operator==(const SubMarket&) const = default;
};

struct CovariateLaws {
    int max_days_to_departure = 180;
    double one_way_share = 0.3;
    int max_length_of_stay = 28;
    std::vector<double> group_size_probs{0.55, 0.25, 0.12, 0.08};  // sizes 1, 2, ...
    std::vector<std::string> booking_classes{"Y", "B", "M", "Q"};
    std::vector<double> stop_probs{0.6, 0.3, 0.1};  // 0, 1, 2 stops
    std::int64_t start_epoch = 1704067200;          // 2024-01-01T00:00:00Z

    bool operator==(const CovariateLaws&) const = default;
};

struct MarketSpec {
    std::vector<SubMarket> submarkets;
    CovariateLaws covariates;
    double los_window_lo = 0.05;  // normalized LOS (LOS / max LOS)
    double los_window_hi = 0.3;
    double interaction_strength = 0.0;
    double static_price = 30.0;
    double target_conversion = 0.06;

    bool operator==(const MarketSpec&) const = default;

    void validate() const {
        if (submarkets.empty()) throw Error(Errc::InvalidArgument, "market needs a sub-market");
        double w = 0.0;
        for (const auto& s : submarkets) {
            if (!(s.weight >= 0.0)) throw Error(Errc::InvalidArgument, "negative sub-market weight");
            if (!(s.log_wtp_std > 0.0))
                throw Error(Errc::InvalidArgument, "sub-market log-WTP std must be > 0");
            if (s.markets.empty())
                throw Error(Errc::InvalidArgument, "sub-market " + s.name + " has no markets");
            w += s.weight;
        }
        if (std::abs(w - 1.0) > 1e-9)
            throw Error(Errc::InvalidArgument, "sub-market weights must sum to 1");
        if (!(0.0 <= los_window_lo && los_window_lo <= los_window_hi && los_window_hi <= 1.0))
            throw Error(Errc::InvalidArgument, "LOS window must lie within [0, 1]");
        if (!(static_price > 0.0)) throw Error(Errc::InvalidArgument, "static price must be > 0");
        if (!(target_conversion > 0.0 && target_conversion < 1.0))
            throw Error(Errc::InvalidArgument, "target conversion must be in (0, 1)");
        const auto& c = covariates;
        if (c.max_days_to_departure < 1 || c.max_length_of_stay < 1 || c.group_size_probs.empty() ||
            c.booking_classes.empty() || c.stop_probs.empty() ||
            !(c.one_way_share >= 0.0 && c.one_way_share <= 1.0))
            throw Error(Errc::InvalidArgument, "invalid covariate laws");
    }

    /// Shift every sub-market's base log-WTP mean.
    MarketSpec shifted(double delta) const {
        MarketSpec s = *this;
        for (auto& m : s.submarkets) m.log_wtp_mean += delta;
        return s;
    }
};

/// Four sub-markets. A small business segment values the product well above
/// the default static price and buys almost regardless of discounts; the
/// leisure segments sit below it and only convert when prices drop. Blanket
/// discounts therefore raise conversion but give away revenue, while a
/// model that can tell the segments apart can discount selectively.
inline MarketSpec default_market_spec() {
    MarketSpec spec;
    spec.submarkets = {
        {"business", 0.08, {{"LHR", "JFK"}, {"FRA", "ORD"}, {"CDG", "BOS"}}, 3.75, 0.20, 0.20,
         0.05, 0.03, 0.05},
        {"leisure-long", 0.22, {{"LHR", "MCO"}, {"MAN", "LAS"}, {"DUB", "MIA"}}, 2.85, 0.25, 0.20,
         0.15, 0.05, 0.05},
        {"leisure-short", 0.30, {{"LGW", "BCN"}, {"STN", "FAO"}, {"BHX", "PMI"}}, 2.55, 0.25, 0.15,
         0.15, 0.05, 0.05},
        {"budget", 0.40, {{"LTN", "KRK"}, {"STN", "BUD"}, {"EMA", "RIX"}}, 2.00, 0.25, 0.10,
         0.05, 0.03, 0.03},
    };
    spec.interaction_strength = 0.10;
    spec.static_price = 30.0;
    spec.target_conversion = 0.06;
    return spec;
}

struct SimSession {
    SessionRecord record;  // label unset
    double wtp = 0.0;      // latent; never part of the record
};

inline std::size_t draw_categorical(Rng& rng, std::span<const double> probs) {
    double total = 0.0;
    for (double p : probs) total += p;
    double u = rng.uniform() * total;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (u < probs[i]) return i;
        u -= probs[i];
    }
    return probs.size() - 1;
}

inline bool los_in_window(const MarketSpec& spec, int los) {
    const double norm = static_cast<double>(los) / spec.covariates.max_length_of_stay;
    return los > 0 && norm >= spec.los_window_lo && norm <= spec.los_window_hi;
}

/// Deterministic part plus noise of log WTP for a generated record.
inline double log_wtp(const MarketSpec& spec, const SubMarket& sm, const SessionRecord& r,
                      double ctx_a, double ctx_b, double noise) {
    const double dtd = static_cast<double>(r.days_to_departure) / spec.covariates.max_days_to_departure;
    double v = sm.log_wtp_mean;
    v += sm.days_to_departure_slope * (1.0 - dtd);
    if (los_in_window(spec, r.length_of_stay)) v += sm.los_bump;
    v += sm.group_slope * static_cast<double>(r.group_size - 1);
    v += sm.price_comparison_slope * r.price_comparison_score;
    v += spec.interaction_strength * ctx_a * ctx_b;
    v += sm.log_wtp_std * noise;
    return v;
}

/// One session; `rng` should be the session's own stream.
inline SimSession gen_session(const MarketSpec& spec, Rng& rng, std::size_t index = 0,
                              int day = 0) {
    std::vector<double> weights;
    for (const auto& s : spec.submarkets) weights.push_back(s.weight);
    const auto& sm = spec.submarkets[draw_categorical(rng, weights)];
    const auto& laws = spec.covariates;

    SimSession out;
    auto& r = out.record;
    r.session_id = "s" + std::to_string(index);
    r.market = sm.markets[rng.below(sm.markets.size())];
    r.days_to_departure = static_cast<int>(rng.below(static_cast<std::uint64_t>(laws.max_days_to_departure) + 1));
    const int hour = static_cast<int>(rng.below(24));
    r.departure_epoch = laws.start_epoch + static_cast<std::int64_t>(day + r.days_to_departure) * 86400 +
                        static_cast<std::int64_t>(hour) * 3600;
    r.length_of_stay = rng.bernoulli(laws.one_way_share)
                           ? 0
                           : 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(laws.max_length_of_stay)));
    r.group_size = 1 + static_cast<int>(draw_categorical(rng, laws.group_size_probs));
    r.booking_class = laws.booking_classes[rng.below(laws.booking_classes.size())];
    r.num_stops = static_cast<int>(draw_categorical(rng, laws.stop_probs));
    r.price_comparison_score = rng.normal();
    const double ctx_a = rng.normal();
    const double ctx_b = rng.normal();
    r.extra_features["ctx_a"] = ctx_a;
    r.extra_features["ctx_b"] = ctx_b;
    r.price_offered = spec.static_price;
    out.wtp = std::exp(log_wtp(spec, sm, r, ctx_a, ctx_b, rng.normal()));
    return out;
}

/// Threshold purchase: buys iff WTP >= offered.
inline int simulate_decision(const SimSession& s, double offered) {
    if (!(offered > 0.0)) throw Error(Errc::InvalidArgument, "offered price must be > 0");
    return s.wtp >= offered ? 1 : 0;
}

/// Sessions 0..n-1 of a run, each from its own (seed, index) stream, so the
/// result does not depend on `threads`.
inline std::vector<SimSession> generate_sessions(const MarketSpec& spec, std::size_t n,
                                                 std::uint64_t seed, unsigned threads = 1,
                                                 int sessions_per_day = 1500) {
    std::vector<SimSession> out(n);
    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            Rng rng = Rng::stream(seed, i);
            out[i] = gen_session(spec, rng, i, static_cast<int>(i / static_cast<std::size_t>(sessions_per_day)));
        }
    };
    threads = std::max(1u, threads);
    if (threads == 1 || n < 2 * threads) {
        work(0, n);
        return out;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
    return out;
}

inline double conversion_at(std::span<const SimSession> sessions, double price) {
    if (sessions.empty()) throw Error(Errc::EmptyInput, "no sessions");
    std::size_t buys = 0;
    for (const auto& s : sessions) buys += simulate_decision(s, price);
    return static_cast<double>(buys) / static_cast<double>(sessions.size());
}

inline constexpr double kCalibrationTolerance = 0.005;

/// Shift every base log-WTP mean by bisection until the simulated conversion
/// at `static_price` is within ±0.005 of `target_rate`. The same `n`
/// sessions (fixed by `seed`) are reused at every step.
inline MarketSpec calibrate(const MarketSpec& spec, double target_rate, double static_price,
                            std::size_t n = 100000, std::uint64_t seed = 1) {
    spec.validate();
    if (!(target_rate > 0.0 && target_rate < 1.0))
        throw Error(Errc::InvalidArgument, "target rate must be in (0, 1)");
    if (n == 0) throw Error(Errc::EmptyInput, "calibration needs sessions");
    const auto sessions = generate_sessions(spec, n, seed);
    std::vector<double> log_wtp_base;
    log_wtp_base.reserve(n);
    for (const auto& s : sessions) log_wtp_base.push_back(std::log(s.wtp));

    const double threshold = std::log(static_price);
    auto conversion = [&](double delta) {
        std::size_t buys = 0;
        for (double v : log_wtp_base) buys += (v + delta >= threshold);
        return static_cast<double>(buys) / static_cast<double>(n);
    };

    double lo = -20.0, hi = 20.0;
    if (conversion(lo) > target_rate || conversion(hi) < target_rate)
        throw Error(Errc::CalibrationDiverged, "target conversion outside the search bracket");
    double mid = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        mid = 0.5 * (lo + hi);
        if (conversion(mid) < target_rate) lo = mid;
        else hi = mid;
    }
    mid = 0.5 * (lo + hi);
    if (std::abs(conversion(mid) - target_rate) > kCalibrationTolerance)
        throw Error(Errc::CalibrationDiverged, "bisection ended outside tolerance");
    MarketSpec out = spec.shifted(mid);
    out.static_price = static_price;
    out.target_conversion = target_rate;
    return out;
}

/// Price variation to expose in exported logs: a share of sessions see a
/// folded-normal discount off the static price, snapped to the grid.
struct PriceExposure {
    PriceGrid grid;
    RandomDiscountParams discount;
    double share = 1.0;
};

/// Labeled session log with latent WTP stripped.
inline std::vector<SessionRecord> export_sessions(const MarketSpec& spec, std::size_t n,
                                                  std::uint64_t seed, double static_price,
                                                  const std::optional<PriceExposure>& exposure = {}) {
    const auto sims = generate_sessions(spec, n, seed);
    std::vector<SessionRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        SessionRecord r = sims[i].record;
        double price = static_price;
        if (exposure) {
            Rng rng = Rng::stream(seed, i, 7);
            if (rng.uniform() < exposure->share) {
                const double p = random_discount(exposure->discount, rng.normal(), exposure->grid);
                price = exposure->grid[snap_to_grid(p, exposure->grid)];
            }
        }
        r.price_offered = price;
        r.purchased = simulate_decision(sims[i], price);
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// A/B harness

/// Maps a session (features only, never WTP) to a quote.
class PricingPolicy {
public:
    virtual ~PricingPolicy() = default;
    virtual Quote quote(const SessionRecord& session, Rng& rng) const = 0;
    virtual PolicyTag tag() const = 0;
};

struct AbArm {
    std::string name;
    std::shared_ptr<const PricingPolicy> policy;
    double split = 0.0;
};

struct AbConfig {
    std::vector<AbArm> arms;
    int days = 120;
    double sessions_per_day = 1500.0;  // mean; daily counts are drawn around it
    std::uint64_t seed = 1;
    std::string baseline_arm = "HUMAN";

    void validate() const {
        if (arms.size() < 2) throw Error(Errc::InvalidArgument, "A/B test needs at least 2 arms");
        double total = 0.0;
        for (const auto& a : arms) {
            if (!a.policy) throw Error(Errc::InvalidArgument, "arm " + a.name + " has no policy");
            if (!(a.split > 0.0)) throw Error(Errc::InvalidArgument, "arm splits must be > 0");
            total += a.split;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw Error(Errc::InvalidArgument, "arm splits must sum to 1");
        if (days < 1) throw Error(Errc::InvalidArgument, "days must be >= 1");
        if (!(sessions_per_day > 0.0)) throw Error(Errc::InvalidArgument, "sessions per day must be > 0");
    }
};

struct DailyStats {
    std::size_t offers = 0;
    std::size_t conversions = 0;
    double revenue = 0.0;
};

struct ArmSeries {
    std::string name;
    PolicyTag policy = PolicyTag::Human;
    std::vector<DailyStats> daily;
};

struct AbResult {
    std::vector<ArmSeries> series;
    MetricReport report;
};

inline std::size_t route_arm(const AbConfig& cfg, double u) {
    double acc = 0.0;
    for (std::size_t a = 0; a < cfg.arms.size(); ++a) {
        acc += cfg.arms[a].split;
        if (u < acc) return a;
    }
    return cfg.arms.size() - 1;
}

/// Each session is generated from (seed, index), routed by its own uniform
/// draw, priced by its arm, and resolved against its latent WTP.
inline AbResult run_abtest(const MarketSpec& spec, const AbConfig& cfg) {
    spec.validate();
    cfg.validate();
    const std::size_t n_arms = cfg.arms.size();
    AbResult result;
    std::vector<NamedOutcomes> outcomes(n_arms);
    for (std::size_t a = 0; a < n_arms; ++a) {
        result.series.push_back({cfg.arms[a].name, cfg.arms[a].policy->tag(), {}});
        result.series[a].daily.resize(static_cast<std::size_t>(cfg.days));
        outcomes[a].name = cfg.arms[a].name;
        outcomes[a].policy = std::string(to_string(cfg.arms[a].policy->tag()));
    }

    std::size_t index = 0;
    for (int day = 0; day < cfg.days; ++day) {
        Rng day_rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(day), 3);
        const double mean = cfg.sessions_per_day;
        const double draw = std::round(mean + std::sqrt(mean) * day_rng.normal());
        const auto count = static_cast<std::size_t>(std::max(0.0, draw));
        for (std::size_t k = 0; k < count; ++k, ++index) {
            Rng session_rng = Rng::stream(cfg.seed, index, 1);
            const SimSession sim = gen_session(spec, session_rng, index, day);
            Rng route_rng = Rng::stream(cfg.seed, index, 4);
            const std::size_t a = route_arm(cfg, route_rng.uniform());
            Rng policy_rng = Rng::stream(cfg.seed, index, 2);
            Quote q;
            try {
                q = cfg.arms[a].policy->quote(sim.record, policy_rng);
            } catch (const Error& e) {
                throw Error(e.code(), "arm " + cfg.arms[a].name + ": " + e.what());
            }
            const int y = simulate_decision(sim, q.recommended_price);
            auto& d = result.series[a].daily[static_cast<std::size_t>(day)];
            ++d.offers;
            d.conversions += static_cast<std::size_t>(y);
            d.revenue += y ? q.recommended_price : 0.0;
            outcomes[a].outcomes.push_back({q.recommended_price, y, true});
        }
    }

    ReportMeta meta;
    meta.seed = cfg.seed;
    meta.dataset_id = "abtest-" + std::to_string(index) + "-sessions";
    result.report = build_report({}, outcomes, meta, cfg.baseline_arm);
    return result;
}

inline nlohmann::ordered_json to_json(const AbResult& r) {
    nlohmann::ordered_json j = to_json(r.report);
    j["daily"] = nlohmann::ordered_json::array();
    for (const auto& s : r.series) {
        nlohmann::ordered_json arm;
        arm["name"] = s.name;
        arm["policy"] = to_string(s.policy);
        arm["offers"] = nlohmann::ordered_json::array();
        arm["conversions"] = nlohmann::ordered_json::array();
        arm["revenue"] = nlohmann::ordered_json::array();
        for (const auto& d : s.daily) {
            arm["offers"].push_back(d.offers);
            arm["conversions"].push_back(d.conversions);
            arm["revenue"].push_back(d.revenue);
        }
        j["daily"].push_back(std::move(arm));
    }
    return j;
}

}  // namespace ancillary
