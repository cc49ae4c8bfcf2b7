#pragma once
// Small fixtures shared by the unit suites.

#include "ancillary/core.hpp"
#include "ancillary/rng.hpp"

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace ancillary::fixtures {

inline SessionRecord make_session(std::string id, int dtd, int los, double score, int y,
                                  double price = 30.0) {
    SessionRecord s;
    s.session_id = std::move(id);
    s.days_to_departure = dtd;
    s.departure_epoch = 1704067200 + static_cast<std::int64_t>(dtd) * 86400;
    s.length_of_stay = los;
    s.market = {"LHR", "JFK"};
    s.group_size = 1;
    s.booking_class = "Y";
    s.num_stops = 0;
    s.price_comparison_score = score;
    s.price_offered = price;
    s.purchased = y;
    return s;
}

/// Labeled sessions whose purchase odds rise with price_comparison_score.
inline std::vector<SessionRecord> random_sessions(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    const char* classes[] = {"Y", "B", "M"};
    const Market markets[] = {{"LHR", "JFK"}, {"LGW", "BCN"}, {"STN", "BUD"}};
    std::vector<SessionRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        SessionRecord s;
        s.session_id = "r" + std::to_string(i);
        s.days_to_departure = static_cast<int>(rng.below(120));
        s.departure_epoch = 1704067200 + static_cast<std::int64_t>(rng.below(365 * 24)) * 3600;
        s.length_of_stay = static_cast<int>(rng.below(15));
        s.market = markets[rng.below(3)];
        s.group_size = 1 + static_cast<int>(rng.below(4));
        s.booking_class = classes[rng.below(3)];
        s.num_stops = static_cast<int>(rng.below(3));
        s.price_comparison_score = rng.normal();
        s.extra_features["ctx_a"] = rng.normal();
        s.price_offered = 20.0 + 5.0 * static_cast<double>(rng.below(4));
        const double z = 1.5 * s.price_comparison_score - 0.1 * (s.price_offered - 25.0) - 1.0;
        s.purchased = rng.uniform() < 1.0 / (1.0 + std::exp(-z)) ? 1 : 0;
        out.push_back(std::move(s));
    }
    return out;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        const auto stamp = std::to_string(std::chrono::steady_clock::now().time_since_epoch().count());
        path_ = std::filesystem::temp_directory_path() /
                ("ancillary-test-" + stamp + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

}  // namespace ancillary::fixtures
