// ancillary: simulate markets, train pricing models, evaluate, run A/B tests
// and serve recommendations.

#include "ancillary/experiment.hpp"
#include "ancillary/service.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace {

using namespace ancillary;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

/// Raised for argument problems that CLI11 cannot see (bad grid strings,
/// invalid combinations).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

PriceGrid parse_grid(const std::string& text) {
    std::vector<double> prices;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            prices.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("--grid: not a number: '" + item + "'");
        }
    }
    try {
        return PriceGrid(std::move(prices));
    } catch (const Error& e) {
        throw UsageError(std::string("--grid: ") + e.what());
    }
}

std::string parent_dir(const std::string& path) {
    const auto p = std::filesystem::path(path).parent_path();
    return p.empty() ? std::string() : p.string();
}

struct SimulateArgs {
    std::string config, out;
    std::uint64_t seed = 0;
};

int run_simulate(const SimulateArgs& a) {
    const auto cfg = simulate_config_from_json(read_json_file(a.config));
    const auto sessions = run_simulation(cfg, a.seed);
    write_sessions(a.out, sessions);
    std::size_t buys = 0;
    for (const auto& s : sessions) buys += s.purchased.value_or(0);
    spdlog::info("wrote {} sessions ({} purchases) to {}", sessions.size(), buys, a.out);
    return kExitOk;
}

struct TrainArgs {
    std::string model, data, out, grid;
    std::uint64_t seed = 0;
    double c1 = kDefaultC1, c2 = kDefaultC2;
    int epochs = 0;
    std::size_t clusters = kDefaultClusters;
};

int run_train(const TrainArgs& a) {
    TrainOptions opt;
    try {
        opt.type = parse_model_type(a.model);
        check_bound_constants(a.c1, a.c2);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    if (!a.grid.empty()) opt.grid = parse_grid(a.grid);
    opt.seed = a.seed;
    opt.c1 = a.c1;
    opt.c2 = a.c2;
    opt.clusters = a.clusters;
    if (a.epochs > 0) opt.net.epochs = static_cast<std::size_t>(a.epochs);

    const auto sessions = read_sessions(a.data);
    spdlog::info("training {} on {} sessions", a.model, sessions.size());
    const auto ck = train_checkpoint(sessions, opt);
    save_checkpoint(ck, a.out);
    spdlog::info("saved {} to {}", ck.model_version, a.out);
    return kExitOk;
}

struct EvaluateArgs {
    std::vector<std::string> ckpts;
    std::string data, report;
    std::uint64_t seed = 0;
};

int run_evaluate(const EvaluateArgs& a) {
    const auto sessions = read_sessions(a.data);
    std::vector<NamedRecords> models;
    for (const auto& path : a.ckpts) {
        const auto ck = load_checkpoint(path);
        spdlog::info("evaluating {} ({})", path, ck.model_version);
        models.push_back({std::string(to_string(ck.type())), evaluation_records(ck, sessions)});
    }
    ReportMeta meta{a.seed, dataset_id(sessions), report_timestamp()};
    const auto report = build_report(models, {}, meta);
    write_text_file(a.report, to_json(report).dump(2) + "\n");
    std::cout << to_text(report);
    return kExitOk;
}

struct AbtestArgs {
    std::string config, out;
};

int run_abtest_cmd(const AbtestArgs& a) {
    const auto run = abtest_config_from_json(read_json_file(a.config), parent_dir(a.config));
    spdlog::info("running {} arms for {} days", run.config.arms.size(), run.config.days);
    auto result = run_abtest(run.market, run.config);
    result.report.meta.timestamp = report_timestamp();
    write_text_file(a.out, to_json(result).dump(2) + "\n");
    std::cout << to_text(result.report);
    return kExitOk;
}

struct RecommendArgs {
    std::string ckpt, session;
};

int run_recommend(const RecommendArgs& a) {
    const auto ck = load_checkpoint(a.ckpt);
    ojson doc;
    try {
        doc = ojson::parse(a.session);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::ParseError, std::string("--session: ") + e.what());
    }
    std::cout << quote_to_json(recommend(ck, session_from_json(doc))).dump() << "\n";
    return kExitOk;
}

struct ServeArgs {
    std::string ckpt, addr = "127.0.0.1:8080";
};

httplib::Server* g_server = nullptr;

int run_serve(const ServeArgs& a) {
    std::string addr = a.addr;
    if (const char* env = std::getenv("ANCILLARY_ADDR"); env && *env) addr = env;
    std::pair<std::string, int> hp;
    try {
        hp = parse_address(addr);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    ModelSnapshot snapshot(std::make_shared<const Checkpoint>(load_checkpoint(a.ckpt)));
    httplib::Server server;
    install_routes(server, snapshot, [](const std::string& id, const std::string& what) {
        spdlog::error("{}: {}", id, what);
    });
    g_server = &server;
    std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
    std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
    spdlog::info("serving {} on {}:{}", snapshot.get()->model_version, hp.first, hp.second);
    if (!server.listen(hp.first, hp.second)) {
        spdlog::error("cannot listen on {}", addr);
        return kExitData;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ancillary pricing toolkit", "ancillary"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "generate a labeled session log");
    c_sim->add_option("--config", sim.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    c_sim->add_option("--out", sim.out, "output session log (JSONL)")->required();
    c_sim->add_option("--seed", sim.seed, "master seed");

    TrainArgs tr;
    auto* c_train = app.add_subcommand("train", "fit a model and write a checkpoint");
    c_train->add_option("--model", tr.model, "gnb|gnbc|app-dnn|dnn-cl")
        ->required()
        ->check(CLI::IsMember({"gnb", "gnbc", "app-dnn", "dnn-cl"}));
    c_train->add_option("--data", tr.data, "labeled session log")->required()->check(CLI::ExistingFile);
    c_train->add_option("--out", tr.out, "checkpoint path")->required();
    c_train->add_option("--seed", tr.seed, "training seed");
    c_train->add_option("--grid", tr.grid, "comma-separated ascending prices");
    c_train->add_option("--c1", tr.c1, "DNN-CL lower bound factor, 0 < c1 < 1");
    c_train->add_option("--c2", tr.c2, "DNN-CL upper bound factor, c2 > 1");
    c_train->add_option("--epochs", tr.epochs, "network training epochs");
    c_train->add_option("--clusters", tr.clusters, "GNBC cluster count");

    EvaluateArgs ev;
    auto* c_eval = app.add_subcommand("evaluate", "offline metrics for one or more checkpoints");
    c_eval->add_option("--ckpt", ev.ckpts, "checkpoint (repeatable)")->required()->check(CLI::ExistingFile);
    c_eval->add_option("--data", ev.data, "labeled session log")->required()->check(CLI::ExistingFile);
    c_eval->add_option("--report", ev.report, "report path (JSON)")->required();
    c_eval->add_option("--seed", ev.seed, "seed recorded in the report");

    AbtestArgs ab;
    auto* c_ab = app.add_subcommand("abtest", "simulate an online A/B test");
    c_ab->add_option("--config", ab.config, "A/B configuration (JSON)")->required()->check(CLI::ExistingFile);
    c_ab->add_option("--out", ab.out, "report path (JSON)")->required();

    RecommendArgs rec;
    auto* c_rec = app.add_subcommand("recommend", "price one session");
    c_rec->add_option("--ckpt", rec.ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
    c_rec->add_option("--session", rec.session, "session record as inline JSON")->required();

    ServeArgs srv;
    auto* c_srv = app.add_subcommand("serve", "HTTP price service (ANCILLARY_ADDR overrides --addr)");
    c_srv->add_option("--ckpt", srv.ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
    c_srv->add_option("--addr", srv.addr, "host:port");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    auto logger = spdlog::stderr_color_mt("ancillary");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (*c_sim) return run_simulate(sim);
        if (*c_train) return run_train(tr);
        if (*c_eval) return run_evaluate(ev);
        if (*c_ab) return run_abtest_cmd(ab);
        if (*c_rec) return run_recommend(rec);
        if (*c_srv) return run_serve(srv);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        spdlog::error("unexpected failure: {}", e.what());
        return kExitData;
    }
    return kExitUsage;
}
