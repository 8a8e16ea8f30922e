#include "amsod/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>

#include "amsod/rng.hpp"

namespace amsod::sim {

namespace {

constexpr double kEps = 1e-9;

std::vector<double> cumulative_weights(const GridGeometry& grid) {
    std::vector<double> cum(grid.stop_weights.size());
    std::partial_sum(grid.stop_weights.begin(), grid.stop_weights.end(), cum.begin());
    return cum;
}

// Draws one request location around a weighted stop. Shares its stream with
// the caller so the whole request set is reproducible from one seed.
Request draw_location(Rng& rng, const GridGeometry& grid, std::span<const double> cumulative) {
    const std::size_t stop = rng.discrete(cumulative);
    const double xs = grid.stop_chainages[stop];
    const double g = grid.catchment(stop);
    const double half = grid.d_xs / 2.0;
    Request r;
    r.home_stop = stop;
    do {
        r.x = rng.uniform(xs - half, xs + half);
        r.y = rng.uniform(-g, g);
    } while (std::abs(r.x - xs) + std::abs(r.y) > g || r.x < 0.0 || r.x > grid.gl_x);
    return r;
}

double max_lattice_x(const GridGeometry& grid) { return std::floor(grid.gl_x / grid.l_x + kEps) * grid.l_x; }

double snap_down(double v, double step) { return std::floor(v / step + kEps) * step; }

bool same_point(Point a, Point b) { return std::abs(a.x - b.x) < kEps && std::abs(a.y - b.y) < kEps; }

} // namespace

// ---------------------------------------------------------------- demand

std::vector<Request> sample_requests(const GridGeometry& grid, const ServiceConfig& svc, std::uint64_t seed) {
    std::vector<Request> out;
    if (!(svc.lambda > 0.0)) {
        return out;
    }
    const auto cumulative = cumulative_weights(grid);
    Rng rng(seed);
    double t = 0.0;
    for (int id = 0;; ++id) {
        t += rng.exponential(svc.lambda);
        if (t > svc.horizon) {
            break;
        }
        Request r = draw_location(rng, grid, cumulative);
        r.id = id;
        r.t = t;
        out.push_back(r);
    }
    return out;
}

std::size_t nearest_stop(const GridGeometry& grid, double x) {
    const auto& stops = grid.stop_chainages;
    auto it = std::lower_bound(stops.begin(), stops.end(), x);
    if (it == stops.end()) {
        return stops.size() - 1;
    }
    const auto hi = static_cast<std::size_t>(it - stops.begin());
    if (hi == 0) {
        return 0;
    }
    // downstream stop wins a tie
    return (x - stops[hi - 1] < stops[hi] - x) ? hi - 1 : hi;
}

double access_time(const GridGeometry& grid, const ServiceConfig& svc, double x, double y) {
    const double xs = grid.stop_chainages[nearest_stop(grid, x)];
    return (std::abs(x - xs) + std::abs(y)) / svc.v_w;
}

double estimate_mean_access(const GridGeometry& grid, const ServiceConfig& svc, std::size_t samples,
                            std::uint64_t seed) {
    const auto cumulative = cumulative_weights(grid);
    Rng rng(seed);
    double sum = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const Request r = draw_location(rng, grid, cumulative);
        sum += access_time(grid, svc, r.x, r.y);
    }
    return samples > 0 ? sum / static_cast<double>(samples) : 0.0;
}

Point snap_to_streets(Point p, const GridGeometry& grid) {
    auto snap = [](double v, double step, bool toward_zero) {
        const double q = v / step;
        const double f = std::floor(q);
        const double frac = q - f;
        double k;
        if (std::abs(frac - 0.5) < kEps) {
            k = (toward_zero && v < 0.0) ? f + 1.0 : f;
        } else {
            k = frac < 0.5 ? f : f + 1.0;
        }
        return k * step;
    };
    Point out{snap(p.x, grid.l_x, false), snap(p.y, grid.l_y, true)};
    out.x = std::clamp(out.x, 0.0, max_lattice_x(grid));
    if (out.y == 0.0) {
        out.y = 0.0; // drop the sign of -0
    }
    return out;
}

bool on_lattice(Point p, const GridGeometry& grid) { return same_point(snap_to_streets(p, grid), p); }

// ---------------------------------------------------------- fixed route

std::vector<double> departure_times(double first, double spacing, double horizon) {
    std::vector<double> out;
    for (int k = 0;; ++k) {
        const double t = first + k * spacing;
        if (t >= horizon - kEps) {
            break;
        }
        out.push_back(t);
    }
    return out;
}

FixedSchedule make_fixed_schedule(const GridGeometry& grid, const ServiceConfig& svc) {
    FixedSchedule sched;
    sched.departures = departure_times(0.0, svc.headway, svc.horizon);
    sched.stop_offsets.reserve(grid.stop_count());
    for (std::size_t s = 0; s < grid.stop_count(); ++s) {
        sched.stop_offsets.push_back(grid.stop_chainages[s] / svc.v_d + svc.t_s * static_cast<double>(s));
    }
    return sched;
}

TripCosts evaluate_fixed_trip(std::span<const Request> riders, const FixedSchedule& schedule, double departure,
                              const CostParams& cost, const GridGeometry& grid, const ServiceConfig& svc) {
    TripCosts out;
    const auto n_stops = grid.stop_count();
    double access_sum = 0.0;
    double wait_sum = 0.0;
    double ivtt_sum = 0.0;
    for (const auto& r : riders) {
        const std::size_t stop = nearest_stop(grid, r.x);
        const double access = access_time(grid, svc, r.x, r.y);
        const double wait = schedule.stop_arrival(stop, departure) - (r.t + access);
        if (wait < -kEps) {
            throw ContractViolation("request " + std::to_string(r.id) + " boards before reaching its stop");
        }
        const double ivtt = (grid.gl_x - grid.stop_chainages[stop]) / svc.v_d +
                            svc.t_s * static_cast<double>(n_stops - stop - 1);
        out.per_passenger.push_back({r.id, r.t, std::max(0.0, wait), ivtt, access});
        access_sum += access;
        wait_sum += std::max(0.0, wait);
        ivtt_sum += ivtt;
    }
    out.k_j = static_cast<int>(riders.size());
    out.c_a = cost.gamma_a * cost.vot * access_sum;
    out.c_w = cost.gamma_w * cost.vot * wait_sum;
    out.c_r = cost.gamma_r * cost.vot * ivtt_sum;
    out.c_o = cost.gamma_o * grid.gl_x;
    return out;
}

// ------------------------------------------------------- semi-on-demand

RouteSegment full_route(const GridGeometry& grid) { return {0.0, grid.gl_x, grid.gl_x}; }

RouteBuilder::RouteBuilder(const GridGeometry& grid, const ServiceConfig& svc, double departure,
                           RouteSegment segment)
    : grid_(grid), svc_(svc), segment_(segment), here_{segment.x_begin, 0.0}, clock_(departure) {
    plan_.start_time = departure;
    plan_.waypoints.push_back({departure, here_, WaypointEvent::move});
}

double RouteBuilder::travel_distance_to(Point p) const {
    return std::abs(p.y - here_.y) + std::abs(p.x - here_.x);
}

bool RouteBuilder::at_pickup_point(Point p) const { return dwelling_here_ && same_point(p, here_); }

double RouteBuilder::arrival_time_at(Point p) const {
    if (at_pickup_point(p)) {
        return arrival_here_;
    }
    return clock_ + travel_distance_to(p) / svc_.v_d;
}

bool RouteBuilder::can_reach(Point p) const {
    return p.x >= here_.x - grid_.l_x - kEps && p.x <= segment_.x_end + kEps;
}

void RouteBuilder::add_pickup(int request_id, double request_time, Point p) {
    if (!can_reach(p)) {
        throw ContractViolation("pickup at x = " + std::to_string(p.x) + " needs more than one block of backtracking");
    }
    if (at_pickup_point(p)) {
        plan_.pickups.push_back({request_id, request_time, arrival_here_, p, 0});
        return;
    }
    const double dy = std::abs(p.y - here_.y);
    const double dx = std::abs(p.x - here_.x);
    if (dy > 0.0) {
        clock_ += dy / svc_.v_d;
        plan_.waypoints.push_back({clock_, {here_.x, p.y}, WaypointEvent::move});
    }
    clock_ += dx / svc_.v_d;
    plan_.d_y += dy;
    plan_.d_x += dx;
    plan_.waypoints.push_back({clock_, p, WaypointEvent::pickup});
    plan_.pickups.push_back({request_id, request_time, clock_, p, 0});
    arrival_here_ = clock_;
    clock_ += svc_.t_s_prime;
    plan_.waypoints.push_back({clock_, p, WaypointEvent::dwell});
    here_ = p;
    dwelling_here_ = true;
}

RoutePlan RouteBuilder::finish() && {
    if (here_.y != 0.0) {
        const double dy = std::abs(here_.y);
        clock_ += dy / svc_.v_d;
        plan_.d_y += dy;
        here_.y = 0.0;
        plan_.waypoints.push_back({clock_, here_, WaypointEvent::move});
    }
    const double dx = std::abs(segment_.x_end - here_.x);
    clock_ += dx / svc_.v_d;
    plan_.d_x += dx;
    here_.x = segment_.x_end;
    plan_.waypoints.push_back({clock_, here_, WaypointEvent::move});

    const double express = segment_.route_end - segment_.x_end;
    if (express > kEps) {
        if (!svc_.v_h) {
            throw ContractViolation("express leg without a highway speed");
        }
        clock_ += express / *svc_.v_h;
        plan_.express_legs.push_back({express, *svc_.v_h});
        here_.x = segment_.route_end;
        plan_.waypoints.push_back({clock_, here_, WaypointEvent::express});
    }
    plan_.end_time = clock_;

    // distinct pickup points still ahead of each passenger
    int remaining = 0;
    for (std::size_t i = plan_.pickups.size(); i-- > 0;) {
        plan_.pickups[i].remaining_stops = remaining;
        const bool starts_group = i == 0 || !same_point(plan_.pickups[i - 1].at, plan_.pickups[i].at);
        if (starts_group) {
            ++remaining;
        }
    }
    return std::move(plan_);
}

RoutePlan plan_amsod_route(std::span<const Request> requests, const GridGeometry& grid, const ServiceConfig& svc,
                           double departure, std::optional<RouteSegment> segment) {
    std::vector<Request> ordered(requests.begin(), requests.end());
    for (const auto& r : ordered) {
        if (!on_lattice({r.x, r.y}, grid)) {
            throw ContractViolation("request " + std::to_string(r.id) + " is not on a street intersection");
        }
    }
    std::stable_sort(ordered.begin(), ordered.end(), [](const Request& a, const Request& b) { return a.x < b.x; });
    RouteBuilder builder(grid, svc, departure, segment.value_or(full_route(grid)));
    for (const auto& r : ordered) {
        builder.add_pickup(r.id, r.t, {r.x, r.y});
    }
    return std::move(builder).finish();
}

TripCosts evaluate_amsod_trip(const RoutePlan& plan, const CostParams& cost, const ServiceConfig& svc) {
    TripCosts out;
    double wait_sum = 0.0;
    double ivtt_sum = 0.0;
    for (const auto& p : plan.pickups) {
        const double wait = p.time - p.request_time;
        if (wait < -kEps) {
            throw ContractViolation("request " + std::to_string(p.request_id) + " picked up before it was ready");
        }
        const double ivtt = std::max(0.0, plan.end_time - p.time - svc.t_s_prime);
        out.per_passenger.push_back({p.request_id, p.request_time, std::max(0.0, wait), ivtt, 0.0});
        wait_sum += std::max(0.0, wait);
        ivtt_sum += ivtt;
    }
    double distance = plan.d_x + plan.d_y;
    for (const auto& leg : plan.express_legs) {
        distance += leg.length;
    }
    out.k_j = static_cast<int>(plan.pickups.size());
    out.c_a = 0.0;
    out.c_w = cost.gamma_w * cost.vot * wait_sum;
    out.c_r = cost.gamma_r * cost.vot * ivtt_sum;
    out.c_o = cost.gamma_o * distance;
    return out;
}

// ----------------------------------------------------------- partitions

std::vector<Band> partition_parallel(std::span<const Request> requests, const GridGeometry& grid, int n_p) {
    if (n_p < 1) {
        throw std::invalid_argument("n_p must be at least 1");
    }
    const double g = grid.max_catchment();
    const double width = 2.0 * g / n_p;
    std::vector<Band> bands(static_cast<std::size_t>(n_p));
    for (int b = 0; b < n_p; ++b) {
        bands[b].y_low = -g + b * width;
        bands[b].y_high = -g + (b + 1) * width;
    }
    for (const auto& r : requests) {
        const double q = (r.y + g) / width;
        int b = static_cast<int>(std::floor(q));
        const double frac = q - std::floor(q);
        if (frac < kEps && b > 0 && b < n_p) {
            // on the boundary between bands b - 1 and b: take the one nearer the axis
            const double boundary = -g + b * width;
            if (boundary >= 0.0) {
                b -= 1;
            }
        }
        bands[static_cast<std::size_t>(std::clamp(b, 0, n_p - 1))].requests.push_back(r);
    }
    return bands;
}

std::vector<Zone> partition_zonal(std::span<const Request> requests, const GridGeometry& grid,
                                  const ServiceConfig& svc, int n) {
    if (n < 1) {
        throw std::invalid_argument("zone count must be at least 1");
    }
    if (n > 1 && !svc.v_h) {
        throw std::invalid_argument("missing v_h for zonal express");
    }
    std::vector<double> bounds{0.0};
    for (int i = 1; i < n; ++i) {
        bounds.push_back(snap_down(i * grid.gl_x / n, grid.l_x));
    }
    bounds.push_back(grid.gl_x);

    std::vector<Zone> zones(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& z = zones[static_cast<std::size_t>(i)];
        z.segment = {bounds[i], bounds[i + 1], grid.gl_x};
        if (grid.gl_x - bounds[i + 1] > kEps) {
            z.express_legs.push_back({grid.gl_x - bounds[i + 1], *svc.v_h});
        }
    }
    for (const auto& r : requests) {
        const double x = snap_to_streets({r.x, r.y}, grid).x;
        int i = 0;
        while (i + 1 < n && x > bounds[i + 1] + kEps) {
            ++i;
        }
        zones[static_cast<std::size_t>(i)].requests.push_back(r);
    }
    return zones;
}

// ------------------------------------------------------------- timeline

namespace {

int trip_index(double departure, double headway) { return static_cast<int>(std::lround(departure / headway)); }

Timeline run_fixed(const Scenario& sc, std::vector<Request> requests) {
    const auto& grid = sc.grid;
    const auto& svc = sc.service;
    const auto sched = make_fixed_schedule(grid, svc);
    const auto n_stops = grid.stop_count();

    std::vector<double> ready(requests.size());
    std::vector<std::vector<std::size_t>> upcoming(n_stops);
    for (std::size_t i = 0; i < requests.size(); ++i) {
        const auto& r = requests[i];
        ready[i] = r.t + access_time(grid, svc, r.x, r.y);
        upcoming[nearest_stop(grid, r.x)].push_back(i);
    }
    for (auto& list : upcoming) {
        std::stable_sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) { return ready[a] < ready[b]; });
    }
    std::vector<std::size_t> next(n_stops, 0);
    std::vector<std::deque<std::size_t>> waiting(n_stops);

    Timeline out;
    for (double dep : sched.departures) {
        TripLog log;
        log.trip = trip_index(dep, svc.headway);
        log.mode = Mode::fixed;
        log.departure = dep;
        std::vector<Request> riders;
        for (std::size_t s = 0; s < n_stops; ++s) {
            const double arrival = sched.stop_arrival(s, dep);
            while (next[s] < upcoming[s].size() && ready[upcoming[s][next[s]]] <= arrival + kEps) {
                waiting[s].push_back(upcoming[s][next[s]++]);
            }
            while (!waiting[s].empty() && static_cast<int>(riders.size()) < svc.capacity) {
                riders.push_back(requests[waiting[s].front()]);
                waiting[s].pop_front();
            }
            for (std::size_t i : waiting[s]) {
                log.spilled.push_back(requests[i].id);
            }
        }
        for (const auto& r : riders) {
            log.served.push_back(r.id);
        }
        log.costs = evaluate_fixed_trip(riders, sched, dep, sc.cost, grid, svc);
        out.trips.push_back(std::move(log));
    }
    for (std::size_t s = 0; s < n_stops; ++s) {
        for (std::size_t i : waiting[s]) {
            out.unserved.push_back(requests[i].id);
        }
        for (std::size_t k = next[s]; k < upcoming[s].size(); ++k) {
            out.unserved.push_back(requests[upcoming[s][k]].id);
        }
    }
    std::sort(out.unserved.begin(), out.unserved.end());
    out.requests = std::move(requests);
    return out;
}

struct PendingRequest {
    Request request;
    Point pickup;
    bool deferred = false;
    bool served = false;
};

// One semi-on-demand line (a band, a zone, or the whole route) dispatched
// over its own departures.
void run_amsod_line(const Scenario& sc, int line, std::span<const Request> requests,
                    const std::vector<double>& departures, RouteSegment segment, Timeline& out) {
    const auto& grid = sc.grid;
    const auto& svc = sc.service;

    std::vector<PendingRequest> pending;
    pending.reserve(requests.size());
    for (const auto& r : requests) {
        pending.push_back({r, snap_to_streets({r.x, r.y}, grid)});
    }
    std::stable_sort(pending.begin(), pending.end(), [](const PendingRequest& a, const PendingRequest& b) {
        if (a.pickup.x != b.pickup.x) {
            return a.pickup.x < b.pickup.x;
        }
        return a.request.x < b.request.x;
    });

    for (double dep : departures) {
        TripLog log;
        log.trip = trip_index(dep, svc.headway);
        log.mode = Mode::amsod;
        log.line = line;
        log.departure = dep;

        RouteBuilder bus(grid, svc, dep, segment);
        int deferred_ahead = static_cast<int>(
            std::count_if(pending.begin(), pending.end(), [](const auto& p) { return p.deferred && !p.served; }));
        for (auto& p : pending) {
            if (p.served) {
                continue;
            }
            const bool was_deferred = p.deferred;
            if (was_deferred) {
                --deferred_ahead;
            }
            const bool ready = p.request.t <= bus.arrival_time_at(p.pickup) + kEps;
            if (!ready || !bus.can_reach(p.pickup)) {
                continue;
            }
            // spilled passengers from earlier trips keep their reserved seats
            const int committed = bus.load() + (was_deferred ? 0 : deferred_ahead);
            if (committed < svc.capacity) {
                bus.add_pickup(p.request.id, p.request.t, p.pickup);
                p.served = true;
                p.deferred = false;
                log.served.push_back(p.request.id);
            } else {
                p.deferred = true;
                log.spilled.push_back(p.request.id);
            }
        }
        RoutePlan plan = std::move(bus).finish();
        log.costs = evaluate_amsod_trip(plan, sc.cost, svc);
        log.plan = std::move(plan);
        out.trips.push_back(std::move(log));
    }
    for (const auto& p : pending) {
        if (!p.served) {
            out.unserved.push_back(p.request.id);
        }
    }
}

Timeline run_amsod(const Scenario& sc, std::vector<Request> requests) {
    const auto& grid = sc.grid;
    const auto& svc = sc.service;
    const int n_p = svc.n_parallel;
    const int n_z = svc.n_zones;
    const int lines = n_p * n_z;

    Timeline out;
    const auto bands = partition_parallel(requests, grid, n_p);
    for (int b = 0; b < n_p; ++b) {
        const auto zones = partition_zonal(bands[static_cast<std::size_t>(b)].requests, grid, svc, n_z);
        for (int z = 0; z < n_z; ++z) {
            const int line = b * n_z + z;
            const auto departures = departure_times(line * svc.headway, lines * svc.headway, svc.horizon);
            const auto& zone = zones[static_cast<std::size_t>(z)];
            run_amsod_line(sc, line, zone.requests, departures, zone.segment, out);
        }
    }
    std::stable_sort(out.trips.begin(), out.trips.end(),
                     [](const TripLog& a, const TripLog& b) { return a.departure < b.departure; });
    std::sort(out.unserved.begin(), out.unserved.end());
    out.requests = std::move(requests);
    return out;
}

const char* event_name(WaypointEvent e) {
    switch (e) {
    case WaypointEvent::move: return "move";
    case WaypointEvent::pickup: return "pickup";
    case WaypointEvent::dwell: return "dwell";
    case WaypointEvent::express: return "express";
    }
    return "move";
}

} // namespace

Timeline run_timeline(const Scenario& scenario, Mode mode, std::uint64_t seed) {
    return run_timeline(scenario, mode, sample_requests(scenario.grid, scenario.service, seed));
}

Timeline run_timeline(const Scenario& scenario, Mode mode, std::vector<Request> requests) {
    return mode == Mode::fixed ? run_fixed(scenario, std::move(requests)) : run_amsod(scenario, std::move(requests));
}

void write_trace(std::ostream& out, const Timeline& timeline) {
    out << "trip,time_h,x_km,y_km,event\n";
    for (const auto& trip : timeline.trips) {
        if (!trip.plan) {
            continue;
        }
        for (const auto& w : trip.plan->waypoints) {
            out << trip.trip << ',' << w.time << ',' << w.at.x << ',' << w.at.y << ',' << event_name(w.event)
                << '\n';
        }
    }
}

} // namespace amsod::sim
