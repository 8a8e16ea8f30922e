#ifndef AMSOD_SIMULATOR_HPP
#define AMSOD_SIMULATOR_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "amsod/model.hpp"

namespace amsod::sim {

/// Thrown when a routing or evaluation precondition is broken by the caller.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// ---------------------------------------------------------------- demand

/// Poisson request stream of rate lambda on [0, horizon]. Each request picks
/// a stop by weight, then x ~ U(stop +- d_xs/2) and y ~ U(-gl_y, gl_y),
/// redrawn until |x - stop| + |y| <= gl_y and 0 <= x <= gl_x.
std::vector<Request> sample_requests(const GridGeometry& grid, const ServiceConfig& svc, std::uint64_t seed);

/// Nearest stop by chainage; a tie goes to the downstream stop.
std::size_t nearest_stop(const GridGeometry& grid, double x);

/// Rectilinear walk to the nearest stop at v_w, h.
double access_time(const GridGeometry& grid, const ServiceConfig& svc, double x, double y);

/// Mean fixed-route access time over the demand distribution, from
/// `samples` draws of the request sampler.
double estimate_mean_access(const GridGeometry& grid, const ServiceConfig& svc, std::size_t samples = 1'000'000,
                            std::uint64_t seed = 20220615);

/// Nearest street intersection. Midpoint ties go toward the route axis in y
/// and backward in x; x is kept on the lattice inside [0, gl_x].
Point snap_to_streets(Point p, const GridGeometry& grid);

bool on_lattice(Point p, const GridGeometry& grid);

// ---------------------------------------------------------- fixed route

struct FixedSchedule {
    std::vector<double> departures;
    std::vector<double> stop_offsets; ///< time from terminal departure to arrival at each stop

    double stop_arrival(std::size_t stop, double departure) const { return departure + stop_offsets.at(stop); }
};

/// Departures every H over [0, horizon); each stop is reached after the
/// running time to its chainage plus one dwell at every earlier stop.
FixedSchedule make_fixed_schedule(const GridGeometry& grid, const ServiceConfig& svc);

/// Departure times t0 + k * spacing inside [0, horizon).
std::vector<double> departure_times(double first, double spacing, double horizon);

struct PassengerRecord {
    int request_id = 0;
    double request_time = 0.0;
    double wait = 0.0;   ///< h
    double ivtt = 0.0;   ///< h
    double access = 0.0; ///< h, zero for semi-on-demand
};

struct TripCosts {
    double c_a = 0.0;
    double c_w = 0.0;
    double c_r = 0.0;
    double c_o = 0.0;
    std::vector<PassengerRecord> per_passenger;
    int k_j = 0;

    double total() const { return c_a + c_w + c_r + c_o; }
};

/// Costs of one fixed-route departure. Each rider must board at its nearest
/// stop no earlier than t + access; otherwise ContractViolation.
TripCosts evaluate_fixed_trip(std::span<const Request> riders, const FixedSchedule& schedule, double departure,
                              const CostParams& cost, const GridGeometry& grid, const ServiceConfig& svc);

// ------------------------------------------------------- semi-on-demand

enum class WaypointEvent { move, pickup, dwell, express };

struct Waypoint {
    double time = 0.0;
    Point at;
    WaypointEvent event = WaypointEvent::move;
};

struct Pickup {
    int request_id = 0;
    double request_time = 0.0;
    double time = 0.0;       ///< bus arrival at the pickup point
    Point at;
    int remaining_stops = 0; ///< distinct pickup points after this one
};

struct ExpressLeg {
    double length = 0.0; ///< km
    double speed = 0.0;  ///< km/h
};

struct RoutePlan {
    std::vector<Waypoint> waypoints;
    double d_x = 0.0;
    double d_y = 0.0;
    std::vector<Pickup> pickups;
    std::vector<ExpressLeg> express_legs;
    double start_time = 0.0;
    double end_time = 0.0;
};

/// Local stretch of the route served by one bus, and where it ends.
struct RouteSegment {
    double x_begin = 0.0;
    double x_end = 0.0;
    double route_end = 0.0; ///< gl_x; anything past x_end is an express leg
};

RouteSegment full_route(const GridGeometry& grid);

/// Incremental street routing: from the current point the bus turns onto the
/// cross-street, moves in y, then moves in x to the next pickup. It never
/// moves back more than one block in x.
class RouteBuilder {
public:
    RouteBuilder(const GridGeometry& grid, const ServiceConfig& svc, double departure, RouteSegment segment);

    /// Arrival time at `p` if it were the next pickup.
    double arrival_time_at(Point p) const;
    bool can_reach(Point p) const;
    void add_pickup(int request_id, double request_time, Point p);
    int load() const { return static_cast<int>(plan_.pickups.size()); }
    Point position() const { return here_; }

    RoutePlan finish() &&;

private:
    double travel_distance_to(Point p) const;
    bool at_pickup_point(Point p) const;

    const GridGeometry& grid_;
    const ServiceConfig& svc_;
    RouteSegment segment_;
    RoutePlan plan_;
    Point here_;
    double clock_;
    bool dwelling_here_ = false;
    double arrival_here_ = 0.0;
};

/// Routes one departure through every request, visited in x order (ties
/// keep input order). Requests must already lie on street intersections.
RoutePlan plan_amsod_route(std::span<const Request> requests, const GridGeometry& grid, const ServiceConfig& svc,
                           double departure = 0.0, std::optional<RouteSegment> segment = std::nullopt);

/// Costs of one semi-on-demand trip; access is always zero.
TripCosts evaluate_amsod_trip(const RoutePlan& plan, const CostParams& cost, const ServiceConfig& svc);

// ----------------------------------------------------------- partitions

struct Band {
    double y_low = 0.0;
    double y_high = 0.0;
    std::vector<Request> requests;
};

/// Splits [-gl_y, gl_y] into n_p equal bands, lowest first. A request on a
/// band boundary joins the band nearer the axis.
std::vector<Band> partition_parallel(std::span<const Request> requests, const GridGeometry& grid, int n_p);

struct Zone {
    RouteSegment segment;
    std::vector<Request> requests;
    std::vector<ExpressLeg> express_legs;
};

/// Splits [0, gl_x] into n zones with lattice-aligned boundaries, by snapped
/// pickup x. Each zone's bus runs express at v_h from the zone end to gl_x.
std::vector<Zone> partition_zonal(std::span<const Request> requests, const GridGeometry& grid,
                                  const ServiceConfig& svc, int n);

// ------------------------------------------------------------- timeline

enum class Mode { fixed, amsod };

struct TripLog {
    int trip = 0;
    Mode mode = Mode::fixed;
    int line = 0; ///< band/zone served; 0 for a single route
    double departure = 0.0;
    std::optional<RoutePlan> plan;
    TripCosts costs;
    std::vector<int> served;
    std::vector<int> spilled;
};

struct Timeline {
    std::vector<Request> requests;
    std::vector<TripLog> trips;
    std::vector<int> unserved; ///< still waiting when the horizon closed
};

/// Runs every departure in [0, horizon) on the requests drawn from `seed`.
Timeline run_timeline(const Scenario& scenario, Mode mode, std::uint64_t seed);

/// Same, on a given request set.
Timeline run_timeline(const Scenario& scenario, Mode mode, std::vector<Request> requests);

/// One CSV row per waypoint: trip,time_h,x_km,y_km,event
void write_trace(std::ostream& out, const Timeline& timeline);

} // namespace amsod::sim

#endif // AMSOD_SIMULATOR_HPP
