#include "amsod/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace amsod::analytic {

namespace {

struct MeanAbsDiff {
    double operator()(const Uniform& u) const {
        if (!(u.a < u.b)) {
            throw std::invalid_argument("uniform dispersion requires a < b");
        }
        return (u.b - u.a) / 3.0;
    }
    double operator()(const Normal& n) const {
        if (!(n.sigma > 0.0)) {
            throw std::invalid_argument("normal dispersion requires sigma > 0");
        }
        return 2.0 * n.sigma / std::sqrt(std::numbers::pi);
    }
    double operator()(const Empirical& e) const {
        const auto n = e.samples.size();
        if (n < 2) {
            throw std::invalid_argument("empirical dispersion requires at least two samples");
        }
        std::vector<double> sorted = e.samples;
        std::sort(sorted.begin(), sorted.end());
        // sum over i < j of (x_j - x_i), from the sorted order statistics
        double pairs = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            pairs += sorted[k] * (2.0 * static_cast<double>(k) - static_cast<double>(n) + 1.0);
        }
        return 2.0 * pairs / (static_cast<double>(n) * static_cast<double>(n - 1));
    }
};

// E|X - Y| for independent X ~ U(-a, a), Y ~ U(-b, b).
double symmetric_uniform_mad(double a, double b) {
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    return hi / 2.0 + lo * lo / (6.0 * hi);
}

// Numerator of the selection indicator for n_p parallel bands, per passenger
// and in hours of riding-time equivalent.
double added_cost_per_passenger(const CostParams& cost, const ServiceConfig& svc, double md, int n_p) {
    const double band_headway = n_p * svc.headway;
    const double band_md = md / n_p;
    const double k = svc.lambda * svc.headway;
    const double detour = cost.gamma_r * k * band_md / (2.0 * svc.v_d);
    const double split_wait = cost.gamma_w * (n_p - 1) * svc.headway / 2.0;
    const double ratio = band_md / svc.v_d;
    const double variance =
        cost.gamma_w / (2.0 * band_headway) *
        (ratio * ratio * (k * k + 6.0 * k + 2.0) / 12.0 + k / 2.0 * svc.t_s_prime * svc.t_s_prime);
    const double operating = cost.gamma_o / cost.vot * band_md;
    return detour + split_wait + variance + operating;
}

std::optional<double> band_demand_bound(const CostParams& cost, const ServiceConfig& svc, double md,
                                        double mean_access, int n_p) {
    if (!(md > 0.0)) {
        return std::nullopt;
    }
    const double band_md = md / n_p;
    const double split_wait = cost.gamma_w * (n_p - 1) * svc.headway / 2.0;
    const double k_bound = 2.0 * svc.v_d * (cost.gamma_a * mean_access - split_wait) / (cost.gamma_r * band_md) -
                           2.0 * cost.gamma_o * svc.v_d / (cost.gamma_r * cost.vot);
    return std::max(0.0, k_bound / svc.headway);
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0)) {
        throw std::invalid_argument(std::string(what) + " must be positive");
    }
}

} // namespace

double mean_abs_diff(const Dispersion& d) { return std::visit(MeanAbsDiff{}, d); }

double catchment_mean_abs_diff(const GridGeometry& grid) {
    if (grid.gl_y.size() == 1) {
        return mean_abs_diff(Uniform{-grid.gl_y.front(), grid.gl_y.front()});
    }
    double md = 0.0;
    for (std::size_t i = 0; i < grid.stop_count(); ++i) {
        for (std::size_t j = 0; j < grid.stop_count(); ++j) {
            md += grid.stop_weights[i] * grid.stop_weights[j] *
                  symmetric_uniform_mad(grid.catchment(i), grid.catchment(j));
        }
    }
    return md;
}

double expected_wait(double headway, double headway_variance) {
    require_positive(headway, "headway");
    if (headway_variance < 0.0) {
        throw std::invalid_argument("headway variance must be non-negative");
    }
    return headway / 2.0 + headway_variance / (2.0 * headway);
}

double expected_ivtt_fixed(double route_length, double v_d, double t_s, double n_stops) {
    require_positive(v_d, "v_d");
    return route_length / (2.0 * v_d) + t_s * n_stops / 2.0;
}

double expected_ivtt_amsod(double route_length, double v_d, double t_s_prime, double k_j, double md) {
    require_positive(v_d, "v_d");
    return route_length / (2.0 * v_d) + k_j * md / (2.0 * v_d) + t_s_prime * k_j / 2.0;
}

double amsod_headway_variance(double k_j, double md, double v_d, double t_s_prime) {
    require_positive(v_d, "v_d");
    const double ratio = md / v_d;
    return ratio * ratio * (k_j * k_j + 6.0 * k_j + 2.0) / 12.0 + k_j / 2.0 * t_s_prime * t_s_prime;
}

CostSummary hourly_cost_fixed(const CostParams& cost, const GridGeometry& grid, const ServiceConfig& svc,
                              double mean_access, double headway_variance) {
    const double flow = cost.vot * svc.lambda;
    CostSummary out;
    out.expected_wait = expected_wait(svc.headway, headway_variance);
    out.expected_ivtt =
        expected_ivtt_fixed(grid.gl_x, svc.v_d, svc.t_s, static_cast<double>(grid.stop_count()));
    out.access = cost.gamma_a * flow * mean_access;
    out.waiting = cost.gamma_w * flow * out.expected_wait;
    out.riding = cost.gamma_r * flow * out.expected_ivtt;
    out.operating = cost.gamma_o * grid.gl_x / svc.headway;
    out.total = out.access + out.waiting + out.riding + out.operating;
    return out;
}

CostSummary hourly_cost_amsod(const CostParams& cost, const GridGeometry& grid, const ServiceConfig& svc,
                              double md) {
    return zonal_hourly_cost(cost, grid, svc, md, 1);
}

double delta_tc_hourly(const CostParams& cost, const GridGeometry& /*grid*/, const ServiceConfig& svc, double md,
                       double mean_access) {
    const double k = svc.lambda * svc.headway;
    const double ratio = md / svc.v_d;
    const double inner = -cost.gamma_a * k * mean_access +
                         cost.gamma_w * svc.lambda / 2.0 *
                             (ratio * ratio * (k * k + 6.0 * k + 2.0) / 12.0 + k / 2.0 * svc.t_s_prime * svc.t_s_prime) +
                         cost.gamma_r * k * k * md / (2.0 * svc.v_d);
    return cost.vot / svc.headway * inner + cost.gamma_o * svc.lambda * md;
}

double selection_indicator(const CostParams& cost, const ServiceConfig& svc, double md, double mean_access) {
    return parallel_metrics(cost, svc, md, mean_access, 1).selection_indicator;
}

std::optional<double> demand_upper_bound(const CostParams& cost, const ServiceConfig& svc, double md,
                                         double mean_access) {
    return parallel_metrics(cost, svc, md, mean_access, 1).demand_bound;
}

ParallelMetrics parallel_metrics(const CostParams& cost, const ServiceConfig& svc, double md, double mean_access,
                                 int n_p) {
    if (n_p < 1) {
        throw std::invalid_argument("n_p must be at least 1");
    }
    if (!(mean_access > 0.0)) {
        throw std::invalid_argument("selection indicator needs a positive mean access time");
    }
    ParallelMetrics out;
    out.selection_indicator = added_cost_per_passenger(cost, svc, md, n_p) / (cost.gamma_a * mean_access);
    out.demand_bound = band_demand_bound(cost, svc, md, mean_access, n_p);
    return out;
}

CostSummary zonal_hourly_cost(const CostParams& cost, const GridGeometry& grid, const ServiceConfig& svc, double md,
                              int n) {
    if (n < 1) {
        throw std::invalid_argument("zone count must be at least 1");
    }
    if (n > 1 && !svc.v_h) {
        throw std::invalid_argument("missing v_h for zonal express");
    }
    const double k = svc.lambda * svc.headway;
    const double zone_headway = n * svc.headway;
    const double variance = amsod_headway_variance(k, md, svc.v_d, svc.t_s_prime);
    // Express ride from the zone end to gl_x, averaged over zones.
    const double express = n > 1 ? (n - 1) * grid.gl_x / (2.0 * n * *svc.v_h) : 0.0;
    const double flow = cost.vot * svc.lambda;

    CostSummary out;
    out.expected_wait = expected_wait(zone_headway, variance);
    out.expected_ivtt = expected_ivtt_amsod(grid.gl_x / n, svc.v_d, svc.t_s_prime, k, md) + express;
    out.access = 0.0;
    out.waiting = cost.gamma_w * flow * out.expected_wait;
    out.riding = cost.gamma_r * flow * out.expected_ivtt;
    // Zone z buses cover gl_x - (z - 1) gl_x / n of x-distance.
    out.operating = cost.gamma_o * (grid.gl_x * (n + 1) / (2.0 * n * svc.headway) + svc.lambda * md);
    out.total = out.access + out.waiting + out.riding + out.operating;
    return out;
}

ZonalPlan zonal_plan(const CostParams& cost, const GridGeometry& grid, const ServiceConfig& svc, double md,
                     int n_max) {
    if (n_max < 1) {
        throw std::invalid_argument("n_max must be at least 1");
    }
    if (n_max > 1 && !svc.v_h) {
        throw std::invalid_argument("missing v_h for zonal express");
    }
    ZonalPlan plan;
    for (int n = 1; n <= n_max; ++n) {
        plan.table.push_back({n, zonal_hourly_cost(cost, grid, svc, md, n)});
    }
    plan.brute_force = std::min_element(plan.table.begin(), plan.table.end(),
                                        [](const ZonalRow& a, const ZonalRow& b) {
                                            return a.cost.total < b.cost.total;
                                        })
                           ->n;
    if (n_max == 1) {
        return plan;
    }

    // TC(n) = A n + B / n + const; the optimum solves A = B / n^2.
    const double flow = cost.vot * svc.lambda;
    const double k = svc.lambda * svc.headway;
    const double variance = amsod_headway_variance(k, md, svc.v_d, svc.t_s_prime);
    const double a = cost.gamma_w * flow * svc.headway / 2.0;
    const double b = cost.gamma_w * flow * variance / (2.0 * svc.headway) +
                     cost.gamma_r * flow * grid.gl_x / 2.0 * (1.0 / svc.v_d - 1.0 / *svc.v_h) +
                     cost.gamma_o * grid.gl_x / (2.0 * svc.headway);
    plan.continuous_optimum = a > 0.0 ? std::sqrt(b / a) : static_cast<double>(n_max);

    // A n + B/n is unimodal; n beats n + 1 exactly when n* <= sqrt(n (n + 1)).
    const double opt = plan.continuous_optimum;
    int n = std::max(1, static_cast<int>(std::floor(opt)));
    if (opt * opt > static_cast<double>(n) * (n + 1)) {
        ++n;
    }
    plan.closed_form = std::clamp(n, 1, n_max);
    return plan;
}

} // namespace amsod::analytic
