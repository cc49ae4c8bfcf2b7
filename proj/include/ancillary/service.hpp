#pragma once
// HTTP front end: POST /v1/price, GET /healthz.

#include "ancillary/io.hpp"

#include <httplib.h>

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <string>

namespace ancillary {

/// Holds the served checkpoint. Readers take a shared_ptr copy and keep it
/// for the whole request, so a concurrent `replace` never disturbs them.
class ModelSnapshot {
public:
    explicit ModelSnapshot(std::shared_ptr<const Checkpoint> ck) : current_(std::move(ck)) {}

    std::shared_ptr<const Checkpoint> get() const {
        std::lock_guard lock(mu_);
        return current_;
    }

    void replace(std::shared_ptr<const Checkpoint> ck) {
        std::lock_guard lock(mu_);
        current_.swap(ck);
    }

private:
    mutable std::mutex mu_;
    std::shared_ptr<const Checkpoint> current_;
};

struct PriceResponse {
    int status = 200;
    std::string body;  // JSON
};

inline ojson quote_to_json(const Quote& q) {
    ojson j;
    j["recommended_price"] = q.recommended_price;
    j["policy"] = to_string(q.policy);
    j["model_version"] = q.model_version;
    j["purchase_prob"] = q.purchase_prob ? ojson(*q.purchase_prob) : ojson(nullptr);
    return j;
}

inline std::string error_body(std::string_view code, std::string_view reason) {
    ojson j;
    j["error"] = code;
    j["reason"] = reason;
    return j.dump();
}

using InternalErrorSink = std::function<void(const std::string&, const std::string&)>;
using Quoter = std::function<Quote(const SessionRecord&)>;

/// Request handling without the transport, so it can be tested directly.
/// `on_internal` receives (id, message) for 500s; the client sees only the id.
inline PriceResponse handle_price_request(const Quoter& quoter, const std::string& body,
                                          const InternalErrorSink& on_internal = {}) {
    ojson doc;
    try {
        doc = ojson::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        return {400, error_body("ParseError", e.what())};
    }
    static std::atomic<std::uint64_t> counter{0};
    auto internal = [&](const std::string& what) -> PriceResponse {
        const std::string id = "req-" + std::to_string(++counter);
        if (on_internal) on_internal(id, what);
        return {500, error_body("Internal", id)};
    };
    try {
        const SessionRecord session = session_from_json(doc);
        return {200, quote_to_json(quoter(session)).dump()};
    } catch (const Error& e) {
        switch (e.code()) {
            case Errc::ParseError:
            case Errc::MissingRequiredField:
            case Errc::InvalidArgument: return {400, error_body(errc_name(e.code()), e.what())};
            case Errc::SchemaMismatch:
            case Errc::DimensionMismatch: return {422, error_body(errc_name(e.code()), e.what())};
            default: return internal(e.what());
        }
    } catch (const std::exception& e) {
        return internal(e.what());
    }
}

inline PriceResponse handle_price_request(const Checkpoint& ck, const std::string& body,
                                          const InternalErrorSink& on_internal = {}) {
    return handle_price_request([&ck](const SessionRecord& s) { return recommend(ck, s); }, body,
                                on_internal);
}

/// Registers the routes on `server`. The caller owns `snapshot` and must
/// keep it alive while the server runs.
inline void install_routes(httplib::Server& server, const ModelSnapshot& snapshot,
                           InternalErrorSink on_internal = {}) {
    server.set_tcp_nodelay(true);
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"status":"ok"})", "application/json");
    });
    server.Post("/v1/price", [&snapshot, on_internal](const httplib::Request& req, httplib::Response& res) {
        const auto ck = snapshot.get();
        const auto r = handle_price_request(*ck, req.body, on_internal);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    });
}

/// "host:port" with the port required.
inline std::pair<std::string, int> parse_address(const std::string& addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos || colon + 1 == addr.size())
        throw Error(Errc::InvalidArgument, "address must be host:port, got " + addr);
    int port = 0;
    try {
        std::size_t used = 0;
        port = std::stoi(addr.substr(colon + 1), &used);
        if (used != addr.size() - colon - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw Error(Errc::InvalidArgument, "bad port in " + addr);
    }
    if (port < 0 || port > 65535) throw Error(Errc::InvalidArgument, "port out of range in " + addr);
    std::string host = addr.substr(0, colon);
    if (host.empty()) host = "0.0.0.0";
    return {host, port};
}

}  // namespace ancillary
