#include "ancillary/experiment.hpp"
#include "ancillary/service.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <thread>

using namespace ancillary;

namespace {

const std::vector<SessionRecord>& log_2k() {
    static const auto log = [] {
        const auto market = calibrate(default_market_spec(), 0.06, 30.0, 20000, 1);
        const PriceGrid grid = PriceGrid::linspace(15, 45, 13);
        return export_sessions(market, 2000, 2, 30.0, PriceExposure{grid, {0.0, 8.0, 30.0}, 0.5});
    }();
    return log;
}

std::shared_ptr<const Checkpoint> checkpoint(ModelType type, std::uint64_t seed = 1) {
    TrainOptions opt;
    opt.type = type;
    opt.seed = seed;
    opt.hidden = {8};
    opt.net.epochs = 1;
    return std::make_shared<const Checkpoint>(train_checkpoint(log_2k(), opt));
}

std::string body_of(const SessionRecord& s) { return session_to_json(s).dump(); }

/// A real server on an ephemeral loopback port for the lifetime of the object.
class LiveServer {
public:
    explicit LiveServer(const ModelSnapshot& snapshot) {
        install_routes(server_, snapshot);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LiveServer() {
        server_.stop();
        thread_.join();
    }
    int port() const { return port_; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace

TEST(PriceHandler, ValidSessionGivesQuoteInsideGrid) {
    for (auto type : {ModelType::Gnb, ModelType::Gnbc, ModelType::AppDnn, ModelType::DnnCl}) {
        const auto ck = checkpoint(type);
        for (std::size_t i = 0; i < 20; ++i) {
            const auto r = handle_price_request(*ck, body_of(log_2k()[i]));
            ASSERT_EQ(r.status, 200) << r.body;
            const auto j = ojson::parse(r.body);
            const double price = j["recommended_price"].get<double>();
            EXPECT_GE(price, ck->pricing.grid.min());
            EXPECT_LE(price, ck->pricing.grid.max());
            EXPECT_EQ(j["model_version"], ck->model_version);
            EXPECT_EQ(j["policy"], to_string(default_policy(type)));
            EXPECT_EQ(j["purchase_prob"].is_null(), type == ModelType::DnnCl);
        }
    }
}

TEST(PriceHandler, MatchesInProcessRecommend) {
    const auto ck = checkpoint(ModelType::AppDnn);
    for (std::size_t i = 0; i < 200; ++i) {
        const auto& s = log_2k()[i];
        const auto r = handle_price_request(*ck, body_of(s));
        ASSERT_EQ(r.body, quote_to_json(recommend(*ck, s)).dump());
    }
}

TEST(PriceHandler, MalformedBodiesAre400) {
    const auto ck = checkpoint(ModelType::Gnb);
    const auto full = body_of(log_2k()[0]);
    for (const std::string& body : {full.substr(0, full.size() / 2), std::string("[]"), std::string("")}) {
        const auto r = handle_price_request(*ck, body);
        EXPECT_EQ(r.status, 400) << body;
        EXPECT_TRUE(ojson::parse(r.body).contains("reason"));
    }
    auto missing = session_to_json(log_2k()[0]);
    missing.erase("market");
    const auto r = handle_price_request(*ck, missing.dump());
    EXPECT_EQ(r.status, 400);
    EXPECT_EQ(ojson::parse(r.body)["error"], "MissingRequiredField");
}

TEST(PriceHandler, SchemaMismatchIs422) {
    const auto ck = checkpoint(ModelType::Gnb);
    auto j = session_to_json(log_2k()[0]);
    j["extra_features"]["ctx_a"] = "high";
    const auto r = handle_price_request(*ck, j.dump());
    EXPECT_EQ(r.status, 422);
    EXPECT_EQ(ojson::parse(r.body)["error"], "SchemaMismatch");
}

TEST(PriceHandler, InternalFailuresAreOpaque) {
    std::string seen_id, seen_what;
    const auto sink = [&](const std::string& id, const std::string& what) {
        seen_id = id;
        seen_what = what;
    };
    const Quoter broken = [](const SessionRecord&) -> Quote {
        throw Error(Errc::CalibrationDiverged, "secret detail");
    };
    const auto r = handle_price_request(broken, body_of(log_2k()[0]), sink);
    EXPECT_EQ(r.status, 500);
    EXPECT_EQ(r.body.find("secret"), std::string::npos);
    EXPECT_EQ(ojson::parse(r.body)["reason"], seen_id);
    EXPECT_EQ(seen_id.rfind("req-", 0), 0u);
    EXPECT_NE(seen_what.find("secret detail"), std::string::npos);

    const Quoter throws_std = [](const SessionRecord&) -> Quote { throw std::runtime_error("boom"); };
    EXPECT_EQ(handle_price_request(throws_std, body_of(log_2k()[0]), sink).status, 500);
    EXPECT_EQ(seen_what, "boom");
}

TEST(ParseAddress, Forms) {
    EXPECT_EQ(parse_address("127.0.0.1:8080"), (std::pair<std::string, int>{"127.0.0.1", 8080}));
    EXPECT_EQ(parse_address(":9000"), (std::pair<std::string, int>{"0.0.0.0", 9000}));
    for (const char* bad : {"localhost", "host:", "host:http", "host:70000", "host:80x"})
        EXPECT_THROW(parse_address(bad), Error) << bad;
}

TEST(Snapshot, ReplaceKeepsReadersValid) {
    ModelSnapshot snap(checkpoint(ModelType::Gnb, 1));
    const auto held = snap.get();
    const auto version = held->model_version;
    snap.replace(checkpoint(ModelType::Gnb, 2));
    EXPECT_EQ(held->model_version, version);
    EXPECT_NE(snap.get()->model_version, version);
}

TEST(LiveService, HealthAndPricingOverHttp) {
    ModelSnapshot snap(checkpoint(ModelType::Gnb));
    LiveServer server(snap);
    httplib::Client client("127.0.0.1", server.port());
    client.set_keep_alive(true);
    client.set_tcp_nodelay(true);

    auto health = client.Get("/healthz");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    EXPECT_EQ(ojson::parse(health->body)["status"], "ok");

    const auto& log = log_2k();
    for (std::size_t i = 0; i < 10000; ++i) {
        const auto& s = log[i % log.size()];
        auto res = client.Post("/v1/price", body_of(s), "application/json");
        ASSERT_TRUE(res) << "request " << i << " " << httplib::to_string(res.error());
        ASSERT_EQ(res->status, 200);
        if (i < 100) {
            ASSERT_EQ(res->body, quote_to_json(recommend(*snap.get(), s)).dump());
        }
    }

    health = client.Get("/healthz");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);

    auto bad = client.Post("/v1/price", std::string("{\"session_id\": "), "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
}

TEST(LiveService, HotSwapChangesModelVersion) {
    ModelSnapshot snap(checkpoint(ModelType::Gnb, 1));
    LiveServer server(snap);
    httplib::Client client("127.0.0.1", server.port());
    const auto body = body_of(log_2k()[0]);
    auto before = client.Post("/v1/price", body, "application/json");
    ASSERT_TRUE(before);
    const auto replacement = checkpoint(ModelType::AppDnn, 4);
    snap.replace(replacement);
    auto after = client.Post("/v1/price", body, "application/json");
    ASSERT_TRUE(after);
    EXPECT_EQ(ojson::parse(after->body)["model_version"], replacement->model_version);
    EXPECT_NE(ojson::parse(before->body)["model_version"], replacement->model_version);
}
