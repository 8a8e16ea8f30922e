#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "amsod/model.hpp"
#include "amsod/scenario_io.hpp"
#include "amsod/units.hpp"

using namespace amsod;

namespace {

const std::filesystem::path kScenarios = std::filesystem::path(AMSOD_SOURCE_DIR) / "scenarios";

bool has_issue(const std::vector<ValidationIssue>& issues, const std::string& field, const std::string& rule) {
    return std::any_of(issues.begin(), issues.end(),
                       [&](const ValidationIssue& i) { return i.field == field && i.rule == rule; });
}

Scenario model1() {
    Scenario sc;
    sc.grid.gl_y = {4.0 * 8.0 / 60.0};
    sc.grid.stop_chainages = even_stop_chainages(10.0, 0.4);
    sc.grid.stop_weights.assign(25, 1.0 / 25.0);
    sc.service.v_d = 35.0;
    sc.service.s_o = units::minutes(8);
    return sc;
}

const char* kMinimal = R"({
  "cost": {},
  "grid": {"gl_x_km": 10, "gl_y_km": 0.5, "d_xs_km": 0.4},
  "service": {"headway_min": 15},
  "run": {}
})";

} // namespace

TEST_CASE("default Model 1 parameters validate cleanly") {
    const auto issues = validate_scenario(model1());
    CHECK_FALSE(has_errors(issues));
    CHECK(issues.empty());
}

TEST_CASE("negative operator cost is a non-positive parameter") {
    auto sc = model1();
    sc.cost.gamma_o = -1.0;
    const auto issues = validate_scenario(sc);
    CHECK(has_errors(issues));
    CHECK(has_issue(issues, "cost.gamma_o", rules::non_positive));
}

TEST_CASE("weights that do not sum to one are rejected") {
    auto sc = model1();
    sc.grid.stop_chainages = {1.0, 2.0};
    sc.grid.stop_weights = {0.5, 0.4};
    CHECK(has_issue(validate_scenario(sc), "grid.stop_weights", rules::weights_not_normalized));
}

TEST_CASE("validation collects every violation at once") {
    auto sc = model1();
    sc.service.headway = 0.0;
    sc.service.capacity = 0;
    sc.grid.stop_chainages = {3.0, 1.0};
    sc.grid.stop_weights = {0.5, 0.5};
    const auto issues = validate_scenario(sc);
    CHECK(has_issue(issues, "service.headway", rules::non_positive));
    CHECK(has_issue(issues, "service.capacity", rules::count_below_one));
    CHECK(has_issue(issues, "grid.stop_chainages[1]", rules::unsorted_stops));
    CHECK_THROWS_AS(require_valid(sc), ValidationError);
}

TEST_CASE("grid and service invariants") {
    auto sc = model1();
    SUBCASE("stop beyond the route end") {
        sc.grid.stop_chainages.back() = 10.5;
        CHECK(has_issue(validate_scenario(sc), "grid.stop_chainages[24]", rules::stop_outside_route));
    }
    SUBCASE("negative weight") {
        sc.grid.stop_weights[0] = -0.04;
        sc.grid.stop_weights[1] = 0.12;
        CHECK(has_issue(validate_scenario(sc), "grid.stop_weights[0]", rules::negative_weight));
    }
    SUBCASE("per-stop widths must match the stop count") {
        sc.grid.gl_y = {0.2, 0.3};
        CHECK(has_issue(validate_scenario(sc), "grid.gl_y", rules::length_mismatch));
    }
    SUBCASE("walking must be slower than driving") {
        sc.service.v_d = 3.0;
        CHECK(has_issue(validate_scenario(sc), "service.v_d", rules::speed_ordering));
    }
    SUBCASE("zones need a highway speed") {
        sc.service.n_zones = 2;
        CHECK(has_issue(validate_scenario(sc), "service.v_h", rules::missing_highway_speed));
        sc.service.v_h = 20.0;
        CHECK(has_issue(validate_scenario(sc), "service.v_h", rules::speed_ordering));
    }
    SUBCASE("warm-up window inside the horizon") {
        sc.service.warmup_window = {2.0, 4.0};
        CHECK(has_issue(validate_scenario(sc), "service.warmup_window", rules::bad_window));
    }
    SUBCASE("catchment beyond walk reach is only a warning") {
        sc.service.s_o = units::minutes(5);
        const auto issues = validate_scenario(sc);
        CHECK(has_issue(issues, "service.s_o", rules::walk_reach));
        CHECK_FALSE(has_errors(issues));
    }
}

TEST_CASE("even stops sit at cell centres") {
    const auto stops = even_stop_chainages(10.0, 0.4);
    REQUIRE(stops.size() == 25);
    CHECK(stops.front() == doctest::Approx(0.2));
    CHECK(stops.back() == doctest::Approx(9.8));
}

TEST_CASE("unit suffixes convert to km and hours") {
    const auto sc = parse_scenario_text(R"({
      "cost": {"gamma_o_per_m": 0.002, "vot_per_min": 0.5},
      "grid": {"gl_x_m": 8000, "gl_y_km": 0.8, "d_xs_m": 400, "l_x_m": 200},
      "service": {"headway_s": 1200, "t_s_min": 0.33, "v_d_kmh": 30, "lambda_per_min": 1},
      "run": {"seed": 7}
    })");
    CHECK(sc.cost.gamma_o == doctest::Approx(2.0));
    CHECK(sc.cost.vot == doctest::Approx(30.0));
    CHECK(sc.grid.gl_x == doctest::Approx(8.0));
    CHECK(sc.grid.l_x == doctest::Approx(0.2));
    CHECK(sc.service.headway == doctest::Approx(1.0 / 3.0));
    CHECK(sc.service.t_s == doctest::Approx(0.33 / 60.0));
    CHECK(sc.service.lambda == doctest::Approx(60.0));
    CHECK(sc.run.seed == 7);
    CHECK(sc.grid.stop_count() == 20);
    CHECK(sc.grid.stop_weights.front() == doctest::Approx(0.05));
}

TEST_CASE("bundled model1 file is the Model 1 scenario") {
    const auto sc = parse_config(kScenarios / "model1.json");
    CHECK(sc.name == "model1");
    CHECK(sc.grid.gl_x == 10.0);
    CHECK(sc.grid.gl_y.front() == doctest::Approx(0.5333).epsilon(1e-3));
    CHECK(sc.grid.stop_count() == 25);
    CHECK(sc.service.headway == doctest::Approx(0.25));
    CHECK(sc.service.v_d == 35.0);
    CHECK(sc.service.lambda == 60.0);
    CHECK(sc.service.capacity == 30);
    CHECK(sc.service.t_s_prime == doctest::Approx(0.4 / 60.0));
    CHECK(sc.run.replications == 10000);
}

TEST_CASE("every bundled scenario parses and validates") {
    for (const char* name : {"model1", "model2", "cta126", "cta84", "model1_zonal"}) {
        CAPTURE(name);
        CHECK_NOTHROW(parse_config(kScenarios / (std::string(name) + ".json")));
    }
}

TEST_CASE("missing service object names the object") {
    try {
        parse_scenario_text(R"({"cost": {}, "grid": {}, "run": {}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.where() == "service");
        CHECK(std::string(e.what()).find("\"service\"") != std::string::npos);
    }
}

TEST_CASE("zero headway fails validation as a non-positive parameter") {
    const auto dir = std::filesystem::temp_directory_path() / "amsod_test_model";
    std::filesystem::create_directories(dir);
    const auto path = dir / "zero_headway.json";
    std::string text = kMinimal;
    text.replace(text.find("\"headway_min\": 15"), 17, "\"headway_min\": 0");
    std::ofstream(path) << text;
    try {
        parse_config(path);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        REQUIRE_FALSE(e.issues().empty());
        CHECK(has_issue(e.issues(), "service.headway", rules::non_positive));
    }
}

TEST_CASE("malformed files are config errors with a location") {
    SUBCASE("bad JSON reports its line") {
        try {
            parse_scenario_text("{\n  \"cost\": {},\n  \"grid\": {,\n}");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.where() == "line 3");
        }
    }
    SUBCASE("unknown field") {
        std::string text = kMinimal;
        text.replace(text.find("\"cost\": {}"), 10, "\"cost\": {\"gamma_x\": 1}");
        CHECK_THROWS_WITH_AS(parse_scenario_text(text), doctest::Contains("cost.gamma_x"), ConfigError);
    }
    SUBCASE("the same field in two units") {
        std::string text = kMinimal;
        text.replace(text.find("\"headway_min\": 15"), 17, "\"headway_min\": 15, \"headway_h\": 0.25");
        CHECK_THROWS_AS(parse_scenario_text(text), ConfigError);
    }
    SUBCASE("dimensioned field without a unit") {
        std::string text = kMinimal;
        text.replace(text.find("\"headway_min\": 15"), 17, "\"headway\": 15");
        CHECK_THROWS_AS(parse_scenario_text(text), ConfigError);
    }
}

TEST_CASE("scenario JSON round-trips exactly") {
    auto sc = model1();
    sc.name = "round trip";
    sc.grid.gl_y = std::vector<double>(25, 0.3);
    sc.grid.gl_y[3] = 0.1234567890123;
    sc.service.v_h = 55.5;
    sc.service.n_zones = 3;
    sc.service.t_s_prime = units::seconds(17);
    sc.run.seed = 18446744073709551557ULL;
    const auto back = scenario_from_json(scenario_to_json(sc));
    CHECK(back == sc);
    CHECK(parse_scenario_text(scenario_to_json(sc).dump()) == sc);
}
