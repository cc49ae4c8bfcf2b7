#pragma once
// Domain types shared by every module: session records, the price grid,
// the feature encoding schema and price quotes.

#include "ancillary/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <ctime>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ancillary {

/// FNV-1a 64-bit, used for schema hashes, dataset ids and checkpoint checksums.
class Fnv1a {
public:
    void update(std::string_view bytes) {
        for (unsigned char c : bytes) {
            state_ ^= c;
            state_ *= 0x100000001b3ULL;
        }
    }
    void update(double v) {
        unsigned char raw[sizeof(double)];
        std::memcpy(raw, &v, sizeof(double));
        update(std::string_view(reinterpret_cast<const char*>(raw), sizeof(double)));
    }
    void update(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            state_ ^= (v >> (8 * i)) & 0xffU;
            state_ *= 0x100000001b3ULL;
        }
    }
    std::uint64_t digest() const { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv1a(std::string_view bytes) {
    Fnv1a h;
    h.update(bytes);
    return h.digest();
}

using FeatureValue = std::variant<double, std::string>;

struct Market {
    std::string origin;
    std::string destination;

    std::string code() const { return origin + "-" + destination; }
    bool operator==(const Market&) const = default;
};

struct SessionRecord {
    std::string session_id;
    int days_to_departure = 0;
    std::int64_t departure_epoch = 0;  // seconds since the Unix epoch, UTC
    int length_of_stay = 0;            // days, 0 = one-way
    Market market;
    int group_size = 1;
    std::string booking_class;
    int num_stops = 0;
    double price_comparison_score = 0.0;
    std::map<std::string, FeatureValue> extra_features;
    double price_offered = 0.0;
    std::optional<int> purchased;  // absent on unlabeled (inference) records

    bool operator==(const SessionRecord&) const = default;
};

inline void validate(const SessionRecord& s) {
    if (!(s.price_offered > 0.0) || !std::isfinite(s.price_offered))
        throw Error(Errc::InvalidArgument, "price_offered must be positive: " + s.session_id);
    if (s.days_to_departure < 0)
        throw Error(Errc::InvalidArgument, "days_to_departure must be >= 0: " + s.session_id);
    if (s.length_of_stay < 0)
        throw Error(Errc::InvalidArgument, "length_of_stay must be >= 0: " + s.session_id);
    if (s.group_size < 1)
        throw Error(Errc::InvalidArgument, "group_size must be >= 1: " + s.session_id);
    if (s.num_stops < 0)
        throw Error(Errc::InvalidArgument, "num_stops must be >= 0: " + s.session_id);
    if (s.purchased && *s.purchased != 0 && *s.purchased != 1)
        throw Error(Errc::InvalidArgument, "purchased must be 0 or 1: " + s.session_id);
}

// ---------------------------------------------------------------------------
// Price grid

/// Ordered set of legal prices. Indices are 0-based in storage.
class PriceGrid {
public:
    PriceGrid() = default;

    explicit PriceGrid(std::vector<double> prices) : prices_(std::move(prices)) {
        if (prices_.size() < 2)
            throw Error(Errc::InvalidArgument, "price grid needs at least 2 prices");
        for (std::size_t i = 0; i < prices_.size(); ++i) {
            if (!(prices_[i] > 0.0) || !std::isfinite(prices_[i]))
                throw Error(Errc::InvalidArgument, "price grid entries must be positive");
            if (i > 0 && !(prices_[i] > prices_[i - 1]))
                throw Error(Errc::InvalidArgument, "price grid must be strictly ascending");
        }
    }

    /// `n` evenly spaced prices from lo to hi, rounded to cents.
    static PriceGrid linspace(double lo, double hi, std::size_t n) {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) {
            double v = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
            p[i] = std::round(v * 100.0) / 100.0;
        }
        return PriceGrid(std::move(p));
    }

    std::span<const double> prices() const { return prices_; }
    std::size_t size() const { return prices_.size(); }
    double operator[](std::size_t i) const { return prices_[i]; }
    double min() const { return prices_.front(); }
    double max() const { return prices_.back(); }
    double clamp(double p) const { return std::clamp(p, min(), max()); }
    bool contains(double p) const { return p >= min() && p <= max(); }

    bool operator==(const PriceGrid&) const = default;

private:
    std::vector<double> prices_;
};

/// Index of the grid price nearest to `price` after clamping to the grid
/// range. An exact tie between two neighbours resolves to the lower index.
inline std::size_t snap_to_grid(double price, const PriceGrid& grid) {
    const double p = grid.clamp(price);
    const auto prices = grid.prices();
    auto it = std::lower_bound(prices.begin(), prices.end(), p);
    if (it == prices.begin()) return 0;
    if (it == prices.end()) return prices.size() - 1;
    const auto hi = static_cast<std::size_t>(it - prices.begin());
    const std::size_t lo = hi - 1;
    return (p - prices[lo] <= prices[hi] - p) ? lo : hi;
}

// ---------------------------------------------------------------------------
// Feature encoding

enum class FeatureKind { Numeric, Categorical };

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::Numeric;
    double mean = 0.0;
    double stddev = 1.0;
    std::vector<std::string> levels;  // categorical only; the unknown bucket is implicit
    bool missing_flag = false;        // numeric: extra indicator column; both: absence allowed

    std::size_t width() const {
        if (kind == FeatureKind::Numeric) return missing_flag ? 2 : 1;
        return levels.size() + 1;
    }
    bool operator==(const FeatureSpec&) const = default;
};

struct EncodingSchema {
    std::vector<FeatureSpec> features;

    std::size_t dimension() const {
        std::size_t d = 0;
        for (const auto& f : features) d += f.width();
        return d;
    }

    std::uint64_t hash() const {
        Fnv1a h;
        for (const auto& f : features) {
            h.update(f.name);
            h.update(static_cast<std::uint64_t>(f.kind));
            h.update(f.mean);
            h.update(f.stddev);
            h.update(static_cast<std::uint64_t>(f.missing_flag));
            for (const auto& l : f.levels) {
                h.update(l);
                h.update(std::string_view("\x1f", 1));
            }
            h.update(std::string_view("\x1e", 1));
        }
        return h.digest();
    }

    std::vector<std::string> column_names() const {
        std::vector<std::string> cols;
        for (const auto& f : features) {
            if (f.kind == FeatureKind::Numeric) {
                cols.push_back(f.name);
                if (f.missing_flag) cols.push_back(f.name + "#missing");
            } else {
                for (const auto& l : f.levels) cols.push_back(f.name + "=" + l);
                cols.push_back(f.name + "=<unknown>");
            }
        }
        return cols;
    }

    bool operator==(const EncodingSchema&) const = default;
};

struct FeatureVector {
    std::vector<double> values;
    std::uint64_t schema_hash = 0;

    std::size_t size() const { return values.size(); }
    std::span<const double> span() const { return values; }
    bool operator==(const FeatureVector&) const = default;
};

/// Named raw attributes of a session: core fields plus derived calendar
/// features plus `extra_features`. Price and label are not features.
inline std::map<std::string, FeatureValue> raw_features(const SessionRecord& s) {
    std::map<std::string, FeatureValue> out;
    out["days_to_departure"] = static_cast<double>(s.days_to_departure);
    out["length_of_stay"] = static_cast<double>(s.length_of_stay);
    out["group_size"] = static_cast<double>(s.group_size);
    out["num_stops"] = static_cast<double>(s.num_stops);
    out["price_comparison_score"] = s.price_comparison_score;

    const std::time_t t = static_cast<std::time_t>(s.departure_epoch);
    std::tm tm{};
    gmtime_r(&t, &tm);
    out["departure_hour"] = static_cast<double>(tm.tm_hour);
    out["departure_month"] = static_cast<double>(tm.tm_mon + 1);
    out["departure_weekday"] = std::string(1, static_cast<char>('0' + tm.tm_wday));

    out["origin"] = s.market.origin;
    out["destination"] = s.market.destination;
    out["market"] = s.market.code();
    out["booking_class"] = s.booking_class;

    for (const auto& [name, value] : s.extra_features) {
        if (out.contains(name))
            throw Error(Errc::InvalidArgument, "extra feature shadows a core attribute: " + name);
        out[name] = value;
    }
    return out;
}

/// Fit z-score statistics and categorical level lists. Numeric features that
/// are constant over the input are dropped.
inline EncodingSchema fit_schema(std::span<const SessionRecord> sessions) {
    if (sessions.size() < 2)
        throw Error(Errc::EmptyDataset, "fit_schema needs at least 2 sessions");

    std::map<std::string, std::vector<FeatureValue>> columns;
    for (const auto& s : sessions)
        for (auto& [name, value] : raw_features(s)) columns[name].push_back(std::move(value));

    const std::size_t n = sessions.size();
    EncodingSchema schema;
    std::size_t numeric_kept = 0;
    for (const auto& [name, values] : columns) {
        const bool numeric = std::holds_alternative<double>(values.front());
        for (const auto& v : values)
            if (std::holds_alternative<double>(v) != numeric)
                throw Error(Errc::SchemaMismatch, "feature mixes numeric and categorical values: " + name);

        FeatureSpec spec;
        spec.name = name;
        spec.missing_flag = values.size() < n;
        if (numeric) {
            spec.kind = FeatureKind::Numeric;
            const double first = std::get<double>(values.front());
            bool constant = true;
            double sum = 0.0;
            for (const auto& v : values) {
                const double x = std::get<double>(v);
                if (!std::isfinite(x))
                    throw Error(Errc::InvalidArgument, "non-finite value for feature " + name);
                constant = constant && x == first;
                sum += x;
            }
            if (constant) continue;
            spec.mean = sum / static_cast<double>(values.size());
            double ss = 0.0;
            for (const auto& v : values) {
                const double d = std::get<double>(v) - spec.mean;
                ss += d * d;
            }
            spec.stddev = std::sqrt(ss / static_cast<double>(values.size()));
            if (!(spec.stddev > 0.0)) continue;
            ++numeric_kept;
        } else {
            spec.kind = FeatureKind::Categorical;
            std::set<std::string> levels;
            for (const auto& v : values) levels.insert(std::get<std::string>(v));
            spec.levels.assign(levels.begin(), levels.end());
            spec.mean = 0.0;
            spec.stddev = 1.0;
        }
        schema.features.push_back(std::move(spec));
    }
    if (numeric_kept == 0)
        throw Error(Errc::AllFeaturesDegenerate, "every numeric feature is constant");
    return schema;
}

inline FeatureVector encode(const SessionRecord& session, const EncodingSchema& schema) {
    const auto raw = raw_features(session);
    FeatureVector out;
    out.values.reserve(schema.dimension());
    out.schema_hash = schema.hash();
    for (const auto& f : schema.features) {
        const auto it = raw.find(f.name);
        const bool present = it != raw.end();
        if (!present && !f.missing_flag)
            throw Error(Errc::SchemaMismatch, "required feature absent: " + f.name);

        if (f.kind == FeatureKind::Numeric) {
            if (!present) {
                out.values.push_back(0.0);
                out.values.push_back(1.0);
                continue;
            }
            const auto* x = std::get_if<double>(&it->second);
            if (!x) throw Error(Errc::SchemaMismatch, "expected numeric value for " + f.name);
            if (!std::isfinite(*x))
                throw Error(Errc::InvalidArgument, "non-finite value for feature " + f.name);
            out.values.push_back((*x - f.mean) / f.stddev);
            if (f.missing_flag) out.values.push_back(0.0);
        } else {
            const std::size_t base = out.values.size();
            out.values.resize(base + f.levels.size() + 1, 0.0);
            std::size_t slot = f.levels.size();
            if (present) {
                const auto* level = std::get_if<std::string>(&it->second);
                if (!level) throw Error(Errc::SchemaMismatch, "expected categorical value for " + f.name);
                auto lv = std::lower_bound(f.levels.begin(), f.levels.end(), *level);
                if (lv != f.levels.end() && *lv == *level)
                    slot = static_cast<std::size_t>(lv - f.levels.begin());
            }
            out.values[base + slot] = 1.0;
        }
    }
    return out;
}

/// Encoded, labeled training or evaluation data.
struct EncodedDataset {
    std::vector<FeatureVector> rows;
    std::vector<double> prices;
    std::vector<int> labels;

    std::size_t size() const { return rows.size(); }
    std::size_t positives() const {
        return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    }
};

inline EncodedDataset encode_dataset(std::span<const SessionRecord> sessions,
                                     const EncodingSchema& schema) {
    EncodedDataset data;
    data.rows.reserve(sessions.size());
    for (const auto& s : sessions) {
        if (!s.purchased)
            throw Error(Errc::InvalidArgument, "training data needs labels: " + s.session_id);
        data.rows.push_back(encode(s, schema));
        data.prices.push_back(s.price_offered);
        data.labels.push_back(*s.purchased);
    }
    return data;
}

// ---------------------------------------------------------------------------
// Quotes

enum class PolicyTag { Human, Random, AppLm, AppDes, DnnCl, EpsGreedy };

inline std::string_view to_string(PolicyTag tag) {
    switch (tag) {
        case PolicyTag::Human: return "HUMAN";
        case PolicyTag::Random: return "RANDOM";
        case PolicyTag::AppLm: return "APP_LM";
        case PolicyTag::AppDes: return "APP_DES";
        case PolicyTag::DnnCl: return "DNN_CL";
        case PolicyTag::EpsGreedy: return "EPS_GREEDY";
    }
    return "UNKNOWN";
}

inline PolicyTag parse_policy_tag(std::string_view s) {
    for (auto t : {PolicyTag::Human, PolicyTag::Random, PolicyTag::AppLm, PolicyTag::AppDes,
                   PolicyTag::DnnCl, PolicyTag::EpsGreedy})
        if (to_string(t) == s) return t;
    throw Error(Errc::InvalidArgument, "unknown policy tag: " + std::string(s));
}

struct Quote {
    double recommended_price = 0.0;
    PolicyTag policy = PolicyTag::Human;
    std::optional<double> purchase_prob;
    std::optional<double> expected_revenue;
    std::string model_version;

    bool operator==(const Quote&) const = default;
};

}  // namespace ancillary
