#pragma once
// Offline metrics (AUC, regret score, price-decrease recall/precision/F1)
// and online metrics (conversion, revenue per offer and per session), plus
// the report document that collects them.

#include "ancillary/core.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ancillary {

struct EvalRecord {
    double offered = 0.0;      // P
    double recommended = 0.0;  // P_rec
    int purchased = 0;
    std::optional<double> score;  // model purchase probability, if any

    double revenue() const { return purchased ? recommended : 0.0; }
};

/// Mann-Whitney form of the ROC AUC with average ranks for ties, so tied
/// positive/negative pairs count 1/2.
inline double auc_roc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw Error(Errc::DimensionMismatch, "scores and labels differ in length");
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += (y == 1);
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw Error(Errc::SingleClassInput, "AUC needs both classes present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double pos_rank_sum = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
        i = j + 1;
    }
    const double np = static_cast<double>(n_pos);
    const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
    return u / (np * static_cast<double>(n_neg));
}

/// Mean over purchased records of max(0, 1 - P_rec / P).
inline double regret_score(std::span<const EvalRecord> records) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
        if (r.purchased != 1) continue;
        sum += std::max(0.0, 1.0 - r.recommended / r.offered);
        ++n;
    }
    if (n == 0) throw Error(Errc::NoPurchases, "regret score needs at least one purchase");
    return sum / static_cast<double>(n);
}

/// #(not purchased and P_rec < P) / #(not purchased). Absent when undefined.
inline std::optional<double> pdr(std::span<const EvalRecord> records) {
    std::size_t hits = 0, denom = 0;
    for (const auto& r : records) {
        if (r.purchased != 0) continue;
        ++denom;
        hits += r.recommended < r.offered;
    }
    if (denom == 0) return std::nullopt;
    return static_cast<double>(hits) / static_cast<double>(denom);
}

/// #(not purchased and P_rec < P) / #(P_rec < P). Absent when undefined.
inline std::optional<double> pdp(std::span<const EvalRecord> records) {
    std::size_t hits = 0, denom = 0;
    for (const auto& r : records) {
        if (!(r.recommended < r.offered)) continue;
        ++denom;
        hits += r.purchased == 0;
    }
    if (denom == 0) return std::nullopt;
    return static_cast<double>(hits) / static_cast<double>(denom);
}

/// Harmonic mean of PDR and PDP; 0 when both are 0.
inline double pdf1(double pdr_value, double pdp_value) {
    const double s = pdr_value + pdp_value;
    return s > 0.0 ? 2.0 * pdr_value * pdp_value / s : 0.0;
}

// ---------------------------------------------------------------------------
// Online metrics

struct Outcome {
    double price = 0.0;  // price quoted to the session
    int purchased = 0;
    bool offered = true;  // false for a session that never saw the offer

    double revenue() const { return purchased ? price : 0.0; }
};

inline double conversion_score(std::span<const Outcome> outcomes) {
    if (outcomes.empty()) throw Error(Errc::EmptyInput, "conversion needs at least one session");
    std::size_t buys = 0;
    for (const auto& o : outcomes) buys += o.purchased == 1;
    return static_cast<double>(buys) / static_cast<double>(outcomes.size());
}

inline double revenue_per_offer(std::span<const Outcome> outcomes) {
    std::size_t offers = 0;
    double revenue = 0.0;
    for (const auto& o : outcomes) {
        if (!o.offered) continue;
        ++offers;
        revenue += o.revenue();
    }
    if (offers == 0) throw Error(Errc::EmptyInput, "revenue per offer needs at least one offer");
    return revenue / static_cast<double>(offers);
}

inline double revenue_per_session(std::span<const Outcome> outcomes) {
    if (outcomes.empty()) throw Error(Errc::EmptyInput, "revenue per session needs sessions");
    double revenue = 0.0;
    for (const auto& o : outcomes) revenue += o.revenue();
    return revenue / static_cast<double>(outcomes.size());
}

/// Arm value relative to a baseline arm (the baseline itself maps to 1).
inline double normalize_to_baseline(double value, double baseline) {
    if (!(baseline > 0.0)) throw Error(Errc::UndefinedMetric, "baseline value must be > 0");
    return value / baseline;
}

// ---------------------------------------------------------------------------
// Report

struct ModelMetrics {
    std::string name;
    std::size_t records = 0;
    std::optional<double> auc;
    std::optional<double> rs;
    std::optional<double> pdr;
    std::optional<double> pdp;
    std::optional<double> pdf1;
};

/// Metrics that cannot be computed on the given records are left absent.
inline ModelMetrics evaluate_records(std::string name, std::span<const EvalRecord> records) {
    ModelMetrics m;
    m.name = std::move(name);
    m.records = records.size();

    std::vector<double> scores;
    std::vector<int> labels;
    bool all_scored = !records.empty();
    for (const auto& r : records) {
        if (!r.score) {
            all_scored = false;
            break;
        }
        scores.push_back(*r.score);
        labels.push_back(r.purchased);
    }
    if (all_scored) {
        const auto pos = std::count(labels.begin(), labels.end(), 1);
        if (pos > 0 && pos < static_cast<long>(labels.size())) m.auc = auc_roc(scores, labels);
    }
    if (std::any_of(records.begin(), records.end(), [](const auto& r) { return r.purchased == 1; }))
        m.rs = regret_score(records);
    m.pdr = pdr(records);
    m.pdp = pdp(records);
    if (m.pdr && m.pdp) m.pdf1 = pdf1(*m.pdr, *m.pdp);
    return m;
}

struct ArmMetrics {
    std::string name;
    std::string policy;
    std::size_t sessions = 0;
    std::size_t offers = 0;
    std::size_t purchases = 0;
    double revenue = 0.0;
    double conversion = 0.0;
    double revenue_per_offer = 0.0;
    double revenue_per_session = 0.0;
    std::optional<double> relative_revenue_per_offer;  // vs the baseline arm
    std::optional<double> relative_conversion;
};

inline ArmMetrics summarize_arm(std::string name, std::string policy,
                                std::span<const Outcome> outcomes) {
    ArmMetrics a;
    a.name = std::move(name);
    a.policy = std::move(policy);
    a.sessions = outcomes.size();
    for (const auto& o : outcomes) {
        a.offers += o.offered;
        a.purchases += o.purchased == 1;
        a.revenue += o.revenue();
    }
    if (!outcomes.empty()) {
        a.conversion = conversion_score(outcomes);
        a.revenue_per_session = revenue_per_session(outcomes);
    }
    if (a.offers > 0) a.revenue_per_offer = revenue_per_offer(outcomes);
    return a;
}

struct ReportMeta {
    std::uint64_t seed = 0;
    std::string dataset_id;
    std::string timestamp;
};

struct MetricReport {
    ReportMeta meta;
    std::vector<ModelMetrics> models;
    std::vector<ArmMetrics> arms;
};

struct NamedRecords {
    std::string name;
    std::vector<EvalRecord> records;
};

struct NamedOutcomes {
    std::string name;
    std::string policy;
    std::vector<Outcome> outcomes;
};

/// One row per model and per arm, in input order. Arm values are also
/// expressed relative to `baseline_arm` when that arm exists.
inline MetricReport build_report(std::span<const NamedRecords> models,
                                 std::span<const NamedOutcomes> arms, ReportMeta meta,
                                 const std::string& baseline_arm = "HUMAN") {
    MetricReport report;
    report.meta = std::move(meta);
    for (const auto& m : models) report.models.push_back(evaluate_records(m.name, m.records));
    for (const auto& a : arms) report.arms.push_back(summarize_arm(a.name, a.policy, a.outcomes));
    const auto base = std::find_if(report.arms.begin(), report.arms.end(),
                                   [&](const auto& a) { return a.name == baseline_arm; });
    if (base != report.arms.end() && base->revenue_per_offer > 0.0 && base->conversion > 0.0) {
        const double rpo = base->revenue_per_offer;
        const double conv = base->conversion;
        for (auto& a : report.arms) {
            a.relative_revenue_per_offer = normalize_to_baseline(a.revenue_per_offer, rpo);
            a.relative_conversion = normalize_to_baseline(a.conversion, conv);
        }
    }
    return report;
}

inline nlohmann::ordered_json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

/// Structured form. Absent metrics serialize as null.
inline nlohmann::ordered_json to_json(const MetricReport& r) {
    nlohmann::ordered_json j;
    j["metadata"] = {{"seed", r.meta.seed},
                     {"dataset_id", r.meta.dataset_id},
                     {"timestamp", r.meta.timestamp}};
    j["models"] = nlohmann::ordered_json::array();
    for (const auto& m : r.models) {
        j["models"].push_back({{"name", m.name},
                               {"records", m.records},
                               {"auc", optional_json(m.auc)},
                               {"rs", optional_json(m.rs)},
                               {"pdr", optional_json(m.pdr)},
                               {"pdp", optional_json(m.pdp)},
                               {"pdf1", optional_json(m.pdf1)}});
    }
    j["arms"] = nlohmann::ordered_json::array();
    for (const auto& a : r.arms) {
        j["arms"].push_back({{"name", a.name},
                             {"policy", a.policy},
                             {"sessions", a.sessions},
                             {"offers", a.offers},
                             {"purchases", a.purchases},
                             {"revenue", a.revenue},
                             {"conversion", a.conversion},
                             {"revenue_per_offer", a.revenue_per_offer},
                             {"revenue_per_session", a.revenue_per_session},
                             {"relative_revenue_per_offer", optional_json(a.relative_revenue_per_offer)},
                             {"relative_conversion", optional_json(a.relative_conversion)}});
    }
    return j;
}

inline std::string format_cell(const std::optional<double>& v, int precision = 4) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
    return buf;
}

/// Plain-text tables for terminals.
inline std::string to_text(const MetricReport& r) {
    std::string out;
    char line[256];
    if (!r.models.empty()) {
        std::snprintf(line, sizeof line, "%-16s %8s %8s %8s %8s %8s %8s\n", "model", "records",
                      "AUC", "RS", "PDR", "PDP", "PDF1");
        out += line;
        for (const auto& m : r.models) {
            std::snprintf(line, sizeof line, "%-16s %8zu %8s %8s %8s %8s %8s\n", m.name.c_str(),
                          m.records, format_cell(m.auc).c_str(), format_cell(m.rs).c_str(),
                          format_cell(m.pdr).c_str(), format_cell(m.pdp).c_str(),
                          format_cell(m.pdf1).c_str());
            out += line;
        }
    }
    if (!r.arms.empty()) {
        if (!out.empty()) out += "\n";
        std::snprintf(line, sizeof line, "%-16s %9s %10s %10s %10s %9s\n", "arm", "sessions",
                      "conversion", "rev/offer", "rev/sess", "rel.rpo");
        out += line;
        for (const auto& a : r.arms) {
            std::snprintf(line, sizeof line, "%-16s %9zu %9.2f%% %10.4f %10.4f %9s\n",
                          a.name.c_str(), a.sessions, 100.0 * a.conversion, a.revenue_per_offer,
                          a.revenue_per_session,
                          format_cell(a.relative_revenue_per_offer, 2).c_str());
            out += line;
        }
    }
    return out;
}

}  // namespace ancillary
