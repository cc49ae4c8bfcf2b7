#pragma once
// Session logs (one JSON object per line), model checkpoints and market
// configuration documents.

#include "ancillary/core.hpp"
#include "ancillary/dnncl.hpp"
#include "ancillary/gnb.hpp"
#include "ancillary/mlp.hpp"
#include "ancillary/optimizer.hpp"
#include "ancillary/simulator.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace ancillary {

using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Session records

inline ojson session_to_json(const SessionRecord& s) {
    ojson j;
    j["session_id"] = s.session_id;
    j["days_to_departure"] = s.days_to_departure;
    j["departure_epoch"] = s.departure_epoch;
    j["length_of_stay"] = s.length_of_stay;
    j["market"] = ojson::array({s.market.origin, s.market.destination});
    j["group_size"] = s.group_size;
    j["booking_class"] = s.booking_class;
    j["num_stops"] = s.num_stops;
    j["price_comparison_score"] = s.price_comparison_score;
    ojson extra = ojson::object();
    for (const auto& [name, value] : s.extra_features) {
        if (const auto* d = std::get_if<double>(&value)) extra[name] = *d;
        else extra[name] = std::get<std::string>(value);
    }
    j["extra_features"] = std::move(extra);
    j["price_offered"] = s.price_offered;
    if (s.purchased) j["purchased"] = *s.purchased;
    return j;
}

namespace detail {

template <class J>
const J& require(const J& j, const char* name, std::optional<std::size_t> line) {
    const auto it = j.find(name);
    if (it == j.end()) throw Error(Errc::MissingRequiredField, name, line);
    return *it;
}

template <class J>
std::int64_t as_int(const J& v, const char* name, std::optional<std::size_t> line) {
    if (!v.is_number_integer())
        throw Error(Errc::ParseError, std::string(name) + " must be an integer", line);
    return v.template get<std::int64_t>();
}

template <class J>
double as_number(const J& v, const char* name, std::optional<std::size_t> line) {
    if (!v.is_number()) throw Error(Errc::ParseError, std::string(name) + " must be a number", line);
    return v.template get<double>();
}

template <class J>
std::string as_string(const J& v, const char* name, std::optional<std::size_t> line) {
    if (!v.is_string()) throw Error(Errc::ParseError, std::string(name) + " must be a string", line);
    return v.template get<std::string>();
}

}  // namespace detail

/// Strict conversion; `line` is attached to every error.
template <class J>
SessionRecord session_from_json(const J& j, std::optional<std::size_t> line = std::nullopt) {
    using namespace detail;
    if (!j.is_object()) throw Error(Errc::ParseError, "session must be a JSON object", line);
    SessionRecord s;
    s.session_id = as_string(require(j, "session_id", line), "session_id", line);
    s.days_to_departure = static_cast<int>(as_int(require(j, "days_to_departure", line), "days_to_departure", line));
    s.departure_epoch = as_int(require(j, "departure_epoch", line), "departure_epoch", line);
    s.length_of_stay = static_cast<int>(as_int(require(j, "length_of_stay", line), "length_of_stay", line));
    const auto& market = require(j, "market", line);
    if (!market.is_array() || market.size() != 2)
        throw Error(Errc::ParseError, "market must be an [origin, destination] pair", line);
    s.market.origin = as_string(market[0], "market[0]", line);
    s.market.destination = as_string(market[1], "market[1]", line);
    s.group_size = static_cast<int>(as_int(require(j, "group_size", line), "group_size", line));
    s.booking_class = as_string(require(j, "booking_class", line), "booking_class", line);
    s.num_stops = static_cast<int>(as_int(require(j, "num_stops", line), "num_stops", line));
    s.price_comparison_score =
        as_number(require(j, "price_comparison_score", line), "price_comparison_score", line);
    if (const auto it = j.find("extra_features"); it != j.end()) {
        if (!it->is_object()) throw Error(Errc::ParseError, "extra_features must be an object", line);
        for (auto e = it->begin(); e != it->end(); ++e) {
            if (e->is_number()) s.extra_features[e.key()] = e->template get<double>();
            else if (e->is_string()) s.extra_features[e.key()] = e->template get<std::string>();
            else throw Error(Errc::ParseError, "extra feature " + e.key() + " must be a number or string", line);
        }
    }
    s.price_offered = as_number(require(j, "price_offered", line), "price_offered", line);
    if (const auto it = j.find("purchased"); it != j.end() && !it->is_null()) {
        if (it->is_boolean()) s.purchased = it->template get<bool>() ? 1 : 0;
        else s.purchased = static_cast<int>(as_int(*it, "purchased", line));
    }
    try {
        validate(s);
    } catch (const Error& e) {
        throw Error(Errc::ParseError, e.what(), line);
    }
    return s;
}

inline std::vector<SessionRecord> read_sessions(std::istream& in) {
    std::vector<SessionRecord> out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        ojson j;
        try {
            j = ojson::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(Errc::ParseError, e.what(), line);
        }
        out.push_back(session_from_json(j, line));
    }
    return out;
}

inline std::vector<SessionRecord> read_sessions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open " + path);
    return read_sessions(in);
}

inline void write_sessions(std::ostream& out, std::span<const SessionRecord> sessions) {
    for (const auto& s : sessions) out << session_to_json(s).dump() << '\n';
}

inline void write_sessions(const std::string& path, std::span<const SessionRecord> sessions) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path);
    write_sessions(out, sessions);
}

/// Content id of a session list.
inline std::string dataset_id(std::span<const SessionRecord> sessions) {
    Fnv1a h;
    for (const auto& s : sessions) {
        h.update(session_to_json(s).dump());
        h.update(std::string_view("\n"));
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.digest()));
    return buf;
}

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr int kCheckpointFormatVersion = 1;

enum class ModelType { Gnb, Gnbc, AppDnn, DnnCl };

inline std::string_view to_string(ModelType t) {
    switch (t) {
        case ModelType::Gnb: return "gnb";
        case ModelType::Gnbc: return "gnbc";
        case ModelType::AppDnn: return "app-dnn";
        case ModelType::DnnCl: return "dnn-cl";
    }
    return "unknown";
}

inline ModelType parse_model_type(std::string_view s) {
    for (auto t : {ModelType::Gnb, ModelType::Gnbc, ModelType::AppDnn, ModelType::DnnCl})
        if (to_string(t) == s) return t;
    throw Error(Errc::InvalidArgument, "unknown model type: " + std::string(s));
}

/// How a probability model turns into a price when served.
struct PricingSettings {
    PriceGrid grid;
    LogisticMapParams logistic;
    double reference_price = 0.0;  // APP-LM evaluates the probability here
};

using AnyModel = std::variant<GnbModel, GnbcModel, AppDnnModel, DnnClModel>;

struct Checkpoint {
    std::string model_version;
    EncodingSchema schema;
    PricingSettings pricing;
    AnyModel model;

    ModelType type() const { return static_cast<ModelType>(model.index()); }
};

inline ojson schema_to_json(const EncodingSchema& schema) {
    ojson arr = ojson::array();
    for (const auto& f : schema.features) {
        ojson j;
        j["name"] = f.name;
        j["kind"] = f.kind == FeatureKind::Numeric ? "numeric" : "categorical";
        if (f.kind == FeatureKind::Numeric) {
            j["mean"] = f.mean;
            j["stddev"] = f.stddev;
        } else {
            j["levels"] = f.levels;
        }
        j["missing_flag"] = f.missing_flag;
        arr.push_back(std::move(j));
    }
    return arr;
}

inline EncodingSchema schema_from_json(const ojson& arr) {
    if (!arr.is_array()) throw Error(Errc::ParseError, "schema must be an array");
    EncodingSchema schema;
    for (const auto& j : arr) {
        FeatureSpec f;
        f.name = j.at("name").get<std::string>();
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "numeric") {
            f.kind = FeatureKind::Numeric;
            f.mean = j.at("mean").get<double>();
            f.stddev = j.at("stddev").get<double>();
            if (!(f.stddev > 0.0)) throw Error(Errc::ParseError, "stddev must be > 0 for " + f.name);
        } else if (kind == "categorical") {
            f.kind = FeatureKind::Categorical;
            f.levels = j.at("levels").get<std::vector<std::string>>();
            if (f.levels.empty()) throw Error(Errc::ParseError, "empty level list for " + f.name);
        } else {
            throw Error(Errc::ParseError, "unknown feature kind " + kind);
        }
        f.missing_flag = j.at("missing_flag").get<bool>();
        schema.features.push_back(std::move(f));
    }
    return schema;
}

namespace detail {

class ParamWriter {
public:
    void add(const std::string& name, std::vector<std::size_t> shape, std::span<const double> data) {
        ojson p;
        p["name"] = name;
        p["shape"] = shape;
        p["data"] = std::vector<double>(data.begin(), data.end());
        arr_.push_back(std::move(p));
    }
    ojson take() { return std::move(arr_); }

private:
    ojson arr_ = ojson::array();
};

class ParamReader {
public:
    explicit ParamReader(const ojson& arr) {
        if (!arr.is_array()) throw Error(Errc::ParseError, "parameters must be an array");
        for (const auto& p : arr) by_name_.emplace(p.at("name").get<std::string>(), &p);
    }

    std::vector<double> get(const std::string& name, std::vector<std::size_t> expected_shape = {}) const {
        const auto it = by_name_.find(name);
        if (it == by_name_.end()) throw Error(Errc::ParseError, "missing parameter array " + name);
        const auto& p = *it->second;
        const auto shape = p.at("shape").get<std::vector<std::size_t>>();
        auto data = p.at("data").get<std::vector<double>>();
        std::size_t count = 1;
        for (auto d : shape) count *= d;
        if (count != data.size())
            throw Error(Errc::ParseError, "parameter " + name + " does not match its declared shape");
        if (!expected_shape.empty() && shape != expected_shape)
            throw Error(Errc::ParseError, "parameter " + name + " has an unexpected shape");
        return data;
    }

private:
    std::map<std::string, const ojson*> by_name_;
};

inline void write_gnb(ParamWriter& w, const std::string& prefix, const GnbModel& m) {
    const std::size_t d = m.input_dimension();
    w.add(prefix + "priors", {2}, m.priors);
    for (int c = 0; c < 2; ++c) {
        w.add(prefix + "mean" + std::to_string(c), {d}, m.means[c]);
        w.add(prefix + "variance" + std::to_string(c), {d}, m.variances[c]);
    }
}

inline GnbModel read_gnb(const ParamReader& r, const std::string& prefix, const ojson& hyper) {
    GnbModel m;
    const auto priors = r.get(prefix + "priors", {2});
    m.priors = {priors[0], priors[1]};
    for (int c = 0; c < 2; ++c) {
        m.means[c] = r.get(prefix + "mean" + std::to_string(c));
        m.variances[c] = r.get(prefix + "variance" + std::to_string(c), {m.means[c].size()});
    }
    if (m.means[0].size() != m.means[1].size())
        throw Error(Errc::ParseError, "GNB class parameter sizes differ");
    m.var_floor = hyper.at("var_floor").get<double>();
    m.price_scale = hyper.at("price_scale").get<double>();
    return m;
}

inline void write_mlp(ParamWriter& w, const std::string& prefix, const MlpModel& m) {
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        const auto& l = m.layers[i];
        w.add(prefix + "layer" + std::to_string(i) + ".weights", {l.outputs, l.inputs}, l.weights);
        w.add(prefix + "layer" + std::to_string(i) + ".bias", {l.outputs}, l.bias);
    }
}

inline MlpModel read_mlp(const ParamReader& r, const std::string& prefix, const ojson& hyper) {
    MlpModel m;
    const auto arch = hyper.at("architecture").get<std::vector<std::size_t>>();
    if (arch.size() < 3 || arch.back() != 1)
        throw Error(Errc::ParseError, "invalid network architecture in checkpoint");
    m.seed = hyper.at("init_seed").get<std::uint64_t>();
    for (std::size_t i = 0; i + 1 < arch.size(); ++i) {
        DenseLayer l;
        l.inputs = arch[i];
        l.outputs = arch[i + 1];
        l.weights = r.get(prefix + "layer" + std::to_string(i) + ".weights", {l.outputs, l.inputs});
        l.bias = r.get(prefix + "layer" + std::to_string(i) + ".bias", {l.outputs});
        m.layers.push_back(std::move(l));
    }
    return m;
}

inline std::string hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace detail

/// Self-describing document; "checksum" is FNV-1a of the compact dump of
/// everything else.
inline ojson checkpoint_to_json(const Checkpoint& ck) {
    ojson doc;
    doc["format_version"] = kCheckpointFormatVersion;
    doc["model_type"] = to_string(ck.type());
    doc["model_version"] = ck.model_version;
    doc["schema"] = schema_to_json(ck.schema);

    ojson hyper;
    hyper["grid"] = std::vector<double>(ck.pricing.grid.prices().begin(), ck.pricing.grid.prices().end());
    hyper["logistic"] = {{"L", ck.pricing.logistic.max_price},
                         {"k", ck.pricing.logistic.shape},
                         {"x0", ck.pricing.logistic.midpoint}};
    hyper["reference_price"] = ck.pricing.reference_price;

    detail::ParamWriter w;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, GnbModel>) {
                hyper["var_floor"] = m.var_floor;
                hyper["price_scale"] = m.price_scale;
                detail::write_gnb(w, "gnb.", m);
            } else if constexpr (std::is_same_v<T, GnbcModel>) {
                hyper["var_floor"] = m.gnb.var_floor;
                hyper["price_scale"] = m.gnb.price_scale;
                hyper["k"] = m.clusters.k();
                hyper["kmeans_seed"] = m.clusters.seed;
                hyper["kmeans_iterations"] = m.clusters.iterations_run;
                hyper["kmeans_converged"] = m.clusters.converged;
                std::vector<double> flat;
                for (const auto& c : m.clusters.centroids) flat.insert(flat.end(), c.begin(), c.end());
                w.add("kmeans.centroids", {m.clusters.k(), m.clusters.dimension()}, flat);
                detail::write_gnb(w, "gnb.", m.gnb);
            } else if constexpr (std::is_same_v<T, AppDnnModel>) {
                hyper["architecture"] = m.net.architecture();
                hyper["init_seed"] = m.net.seed;
                hyper["price_scale"] = m.price_scale;
                detail::write_mlp(w, "mlp.", m.net);
            } else {
                hyper["architecture"] = m.net.architecture();
                hyper["init_seed"] = m.net.seed;
                hyper["c1"] = m.c1;
                hyper["c2"] = m.c2;
                hyper["model_grid"] = std::vector<double>(m.grid.prices().begin(), m.grid.prices().end());
                detail::write_mlp(w, "mlp.", m.net);
            }
        },
        ck.model);
    doc["hyperparameters"] = std::move(hyper);
    doc["parameters"] = w.take();
    doc["checksum"] = detail::hex64(fnv1a(doc.dump()));
    return doc;
}

inline Checkpoint checkpoint_from_json(ojson doc) {
    if (!doc.is_object() || !doc.contains("format_version"))
        throw Error(Errc::ChecksumMismatch, "not a checkpoint document");
    const auto& version = doc.at("format_version");
    if (!version.is_number_integer()) throw Error(Errc::ChecksumMismatch, "corrupt format_version");
    if (version.get<int>() != kCheckpointFormatVersion)
        throw Error(Errc::UnsupportedVersion,
                    "checkpoint format " + std::to_string(version.get<int>()) + ", this build reads " +
                        std::to_string(kCheckpointFormatVersion));
    if (!doc.contains("checksum") || !doc.at("checksum").is_string())
        throw Error(Errc::ChecksumMismatch, "checksum missing");
    const auto stored = doc.at("checksum").get<std::string>();
    doc.erase("checksum");
    if (detail::hex64(fnv1a(doc.dump())) != stored)
        throw Error(Errc::ChecksumMismatch, "checkpoint content does not match its checksum");

    try {
        Checkpoint ck;
        ck.model_version = doc.at("model_version").get<std::string>();
        ck.schema = schema_from_json(doc.at("schema"));
        const auto& hyper = doc.at("hyperparameters");
        ck.pricing.grid = PriceGrid(hyper.at("grid").get<std::vector<double>>());
        ck.pricing.logistic.max_price = hyper.at("logistic").at("L").get<double>();
        ck.pricing.logistic.shape = hyper.at("logistic").at("k").get<double>();
        ck.pricing.logistic.midpoint = hyper.at("logistic").at("x0").get<double>();
        ck.pricing.reference_price = hyper.at("reference_price").get<double>();
        const detail::ParamReader params(doc.at("parameters"));
        const std::uint64_t schema_hash = ck.schema.hash();

        switch (parse_model_type(doc.at("model_type").get<std::string>())) {
            case ModelType::Gnb: {
                auto m = detail::read_gnb(params, "gnb.", hyper);
                m.schema_hash = schema_hash;
                ck.model = std::move(m);
                break;
            }
            case ModelType::Gnbc: {
                GnbcModel m;
                const auto k = hyper.at("k").get<std::size_t>();
                const auto flat = params.get("kmeans.centroids");
                if (k == 0 || flat.size() % k != 0)
                    throw Error(Errc::ParseError, "centroid array does not match k");
                const std::size_t dim = flat.size() / k;
                for (std::size_t c = 0; c < k; ++c)
                    m.clusters.centroids.emplace_back(flat.begin() + static_cast<long>(c * dim),
                                                      flat.begin() + static_cast<long>((c + 1) * dim));
                m.clusters.seed = hyper.at("kmeans_seed").get<std::uint64_t>();
                m.clusters.iterations_run = hyper.at("kmeans_iterations").get<std::size_t>();
                m.clusters.converged = hyper.at("kmeans_converged").get<bool>();
                m.gnb = detail::read_gnb(params, "gnb.", hyper);
                m.gnb.schema_hash = schema_hash;
                ck.model = std::move(m);
                break;
            }
            case ModelType::AppDnn: {
                AppDnnModel m;
                m.net = detail::read_mlp(params, "mlp.", hyper);
                m.price_scale = hyper.at("price_scale").get<double>();
                m.schema_hash = schema_hash;
                ck.model = std::move(m);
                break;
            }
            case ModelType::DnnCl: {
                DnnClModel m;
                m.net = detail::read_mlp(params, "mlp.", hyper);
                m.c1 = hyper.at("c1").get<double>();
                m.c2 = hyper.at("c2").get<double>();
                m.grid = PriceGrid(hyper.at("model_grid").get<std::vector<double>>());
                m.schema_hash = schema_hash;
                ck.model = std::move(m);
                break;
            }
        }
        return ck;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("malformed checkpoint: ") + e.what());
    }
}

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path);
    out << checkpoint_to_json(ck).dump(1) << '\n';
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    ojson doc;
    try {
        doc = ojson::parse(buf.str());
    } catch (const nlohmann::json::parse_error&) {
        throw Error(Errc::ChecksumMismatch, "checkpoint " + path + " is not valid JSON");
    }
    return checkpoint_from_json(std::move(doc));
}

/// Purchase probability at `price`, or nothing for DNN-CL.
inline std::optional<double> purchase_probability(const Checkpoint& ck, const FeatureVector& x,
                                                  double price) {
    return std::visit(
        [&](const auto& m) -> std::optional<double> {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, DnnClModel>) return std::nullopt;
            else return predict_proba(m, x, price);
        },
        ck.model);
}

/// Served quote: APP-LM for the Bayes models, APP-DES for the APP-DNN,
/// the direct price for DNN-CL.
inline Quote recommend(const Checkpoint& ck, const SessionRecord& session) {
    const FeatureVector x = encode(session, ck.schema);
    return std::visit(
        [&](const auto& m) -> Quote {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DnnClModel>)
                return recommend_price_dnncl(m, x, ck.model_version);
            else if constexpr (std::is_same_v<T, AppDnnModel>)
                return des_recommend(m, x, ck.pricing.grid, ck.model_version);
            else
                return app_lm_recommend(m, x, ck.pricing.reference_price, ck.pricing.logistic,
                                        ck.pricing.grid, ck.model_version);
        },
        ck.model);
}

// ---------------------------------------------------------------------------
// Market configuration

inline ojson market_spec_to_json(const MarketSpec& spec) {
    ojson j;
    j["submarkets"] = ojson::array();
    for (const auto& s : spec.submarkets) {
        ojson m;
        m["name"] = s.name;
        m["weight"] = s.weight;
        m["markets"] = ojson::array();
        for (const auto& mk : s.markets) m["markets"].push_back({mk.origin, mk.destination});
        m["log_wtp_mean"] = s.log_wtp_mean;
        m["log_wtp_std"] = s.log_wtp_std;
        m["days_to_departure_slope"] = s.days_to_departure_slope;
        m["los_bump"] = s.los_bump;
        m["group_slope"] = s.group_slope;
        m["price_comparison_slope"] = s.price_comparison_slope;
        j["submarkets"].push_back(std::move(m));
    }
    const auto& c = spec.covariates;
    j["covariates"] = {{"max_days_to_departure", c.max_days_to_departure},
                       {"one_way_share", c.one_way_share},
                       {"max_length_of_stay", c.max_length_of_stay},
                       {"group_size_probs", c.group_size_probs},
                       {"booking_classes", c.booking_classes},
                       {"stop_probs", c.stop_probs},
                       {"start_epoch", c.start_epoch}};
    j["los_window"] = {spec.los_window_lo, spec.los_window_hi};
    j["interaction_strength"] = spec.interaction_strength;
    j["static_price"] = spec.static_price;
    j["target_conversion"] = spec.target_conversion;
    return j;
}

/// Missing keys take the defaults of `MarketSpec` / `default_market_spec`.
template <class J>
MarketSpec market_spec_from_json(const J& j) {
    MarketSpec spec = default_market_spec();
    try {
        if (j.contains("submarkets")) {
            spec.submarkets.clear();
            for (const auto& m : j.at("submarkets")) {
                SubMarket s;
                s.name = m.value("name", std::string("submarket"));
                s.weight = m.at("weight").template get<double>();
                for (const auto& mk : m.at("markets"))
                    s.markets.push_back({mk.at(0).template get<std::string>(), mk.at(1).template get<std::string>()});
                s.log_wtp_mean = m.at("log_wtp_mean").template get<double>();
                s.log_wtp_std = m.at("log_wtp_std").template get<double>();
                s.days_to_departure_slope = m.value("days_to_departure_slope", 0.0);
                s.los_bump = m.value("los_bump", 0.0);
                s.group_slope = m.value("group_slope", 0.0);
                s.price_comparison_slope = m.value("price_comparison_slope", 0.0);
                spec.submarkets.push_back(std::move(s));
            }
        }
        if (j.contains("covariates")) {
            const auto& c = j.at("covariates");
            auto& out = spec.covariates;
            out.max_days_to_departure = c.value("max_days_to_departure", out.max_days_to_departure);
            out.one_way_share = c.value("one_way_share", out.one_way_share);
            out.max_length_of_stay = c.value("max_length_of_stay", out.max_length_of_stay);
            out.group_size_probs = c.value("group_size_probs", out.group_size_probs);
            out.booking_classes = c.value("booking_classes", out.booking_classes);
            out.stop_probs = c.value("stop_probs", out.stop_probs);
            out.start_epoch = c.value("start_epoch", out.start_epoch);
        }
        if (j.contains("los_window")) {
            spec.los_window_lo = j.at("los_window").at(0).template get<double>();
            spec.los_window_hi = j.at("los_window").at(1).template get<double>();
        }
        spec.interaction_strength = j.value("interaction_strength", spec.interaction_strength);
        spec.static_price = j.value("static_price", spec.static_price);
        spec.target_conversion = j.value("target_conversion", spec.target_conversion);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("market spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

inline ojson read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open " + path);
    try {
        return ojson::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::ParseError, path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path);
    out << text;
}

}  // namespace ancillary
