#ifndef AMSOD_MODEL_HPP
#define AMSOD_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace amsod {

/// Monetised cost parameters. Riding time is the numeraire (gamma_r = 1).
struct CostParams {
    double gamma_a = 2.0;  ///< access-time penalty multiplier
    double gamma_w = 1.5;  ///< waiting-time penalty multiplier
    double gamma_r = 1.0;  ///< riding-time penalty multiplier
    double gamma_o = 1.0;  ///< operator cost, $/vehicle-km
    double vot = 16.5;     ///< value of time, $/h

    bool operator==(const CostParams&) const = default;
};

/// Suburb grid and the existing fixed route laid along its x axis.
///
/// `gl_y` holds either a single catchment half-width shared by every stop or
/// one value per stop. Stop weights are the share of demand generated around
/// each stop.
struct GridGeometry {
    double l_x = 0.2;   ///< x block length, km
    double l_y = 0.1;   ///< y block length, km
    double gl_x = 10.0; ///< route length through the suburb, km
    std::vector<double> gl_y{0.5};
    std::vector<double> stop_chainages;
    std::vector<double> stop_weights;
    double d_xs = 0.4;  ///< fixed-route stop spacing, km

    std::size_t stop_count() const { return stop_chainages.size(); }
    double catchment(std::size_t stop) const {
        return gl_y.size() == 1 ? gl_y.front() : gl_y.at(stop);
    }
    double max_catchment() const;

    bool operator==(const GridGeometry&) const = default;
};

/// Evenly spaced stops at the centre of each d_xs cell along [0, gl_x].
std::vector<double> even_stop_chainages(double gl_x, double d_xs);

/// Half-open interval [begin, end) on the scenario clock, in hours.
struct TimeWindow {
    double begin = 1.0;
    double end = 2.0;

    bool contains(double t) const { return t >= begin && t < end; }
    double length() const { return end - begin; }
    bool operator==(const TimeWindow&) const = default;
};

struct ServiceConfig {
    double headway = 0.25;           ///< h
    int capacity = 30;
    int n_parallel = 1;
    int n_zones = 1;
    double v_d = 35.0;               ///< street speed excluding dwell, km/h
    double v_w = 4.0;                ///< walking speed, km/h
    std::optional<double> v_h;       ///< highway speed for zonal legs, km/h
    double t_s = 0.4 / 60.0;         ///< fixed-route dwell per stop, h
    double t_s_prime = 0.4 / 60.0;   ///< semi-on-demand dwell per pickup point, h
    double lambda = 60.0;            ///< passengers/h
    double s_o = 8.0 / 60.0;         ///< maximum access time, h
    double horizon = 3.0;            ///< h
    TimeWindow warmup_window{};

    bool operator==(const ServiceConfig&) const = default;
};

struct RunConfig {
    std::uint64_t seed = 20220615;
    int replications = 10000;
    int sensitivity_replications = 1000;

    bool operator==(const RunConfig&) const = default;
};

struct Scenario {
    std::string name = "scenario";
    CostParams cost;
    GridGeometry grid;
    ServiceConfig service;
    RunConfig run;

    bool operator==(const Scenario&) const = default;
};

/// One passenger request. `y` is signed, 0 on the route axis.
struct Request {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;           ///< request / ready time, h
    std::size_t home_stop = 0;

    bool operator==(const Request&) const = default;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

enum class Severity { error, warning };

struct ValidationIssue {
    std::string field;
    std::string rule;
    Severity severity = Severity::error;
};

/// Checks every domain invariant and returns all violations (errors and
/// warnings). An empty result, or warnings only, means the scenario is usable.
std::vector<ValidationIssue> validate_scenario(const Scenario& scenario);

bool has_errors(const std::vector<ValidationIssue>& issues);

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<ValidationIssue> issues);
    const std::vector<ValidationIssue>& issues() const { return issues_; }

private:
    std::vector<ValidationIssue> issues_;
};

/// Returns the scenario unchanged, or throws ValidationError listing every
/// error-class issue.
const Scenario& require_valid(const Scenario& scenario);

namespace rules {
inline constexpr const char* non_positive = "non-positive parameter";
inline constexpr const char* unsorted_stops = "unsorted stops";
inline constexpr const char* weights_not_normalized = "weights not normalized";
inline constexpr const char* walk_reach = "catchment exceeds walk reach";
inline constexpr const char* stop_outside_route = "stop outside route";
inline constexpr const char* negative_weight = "negative weight";
inline constexpr const char* length_mismatch = "length mismatch";
inline constexpr const char* speed_ordering = "speed ordering";
inline constexpr const char* missing_highway_speed = "missing highway speed";
inline constexpr const char* bad_window = "warm-up window outside horizon";
inline constexpr const char* count_below_one = "count below one";
inline constexpr const char* no_stops = "no stops";
} // namespace rules

} // namespace amsod

#endif // AMSOD_MODEL_HPP
