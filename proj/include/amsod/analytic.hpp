#ifndef AMSOD_ANALYTIC_HPP
#define AMSOD_ANALYTIC_HPP

#include <optional>
#include <variant>
#include <vector>

#include "amsod/model.hpp"

// Closed-form generalized-cost model. All route-length terms use the suburb
// route length gl_x; times are hours, costs $/h.

namespace amsod::analytic {

struct Uniform {
    double a = 0.0;
    double b = 1.0;
};
struct Normal {
    double sigma = 1.0;
};
struct Empirical {
    std::vector<double> samples;
};

/// Distribution of the perpendicular (y) position of demand.
using Dispersion = std::variant<Uniform, Normal, Empirical>;

/// Mean absolute difference E|Y1 - Y2| of two independent draws, km.
/// The empirical form averages over all ordered pairs i != j.
double mean_abs_diff(const Dispersion& d);

/// Mean absolute difference of y for demand spread as U(-gl_y, gl_y) around
/// each stop, mixed by stop weight. Equals 2 gl_y / 3 for a constant width.
double catchment_mean_abs_diff(const GridGeometry& grid);

/// H/2 + variance/(2H).
double expected_wait(double headway, double headway_variance);

double expected_ivtt_fixed(double route_length, double v_d, double t_s, double n_stops);

double expected_ivtt_amsod(double route_length, double v_d, double t_s_prime, double k_j, double md);

/// Variance of the residual pickup-time offset of a semi-on-demand trip
/// carrying k_j passengers: (md/v_d)^2 (k^2 + 6k + 2)/12 + (k/2) t_s'^2.
double amsod_headway_variance(double k_j, double md, double v_d, double t_s_prime);

struct CostSummary {
    double access = 0.0;
    double waiting = 0.0;
    double riding = 0.0;
    double operating = 0.0;
    double total = 0.0;
    double expected_wait = 0.0; ///< h
    double expected_ivtt = 0.0; ///< h
};

/// Hourly cost of the fixed route. `mean_access` is the mean walk time to
/// the boarding stop, h.
CostSummary hourly_cost_fixed(const CostParams& cost, const GridGeometry& grid, const ServiceConfig& svc,
                              double mean_access, double headway_variance = 0.0);

/// Hourly cost of a single semi-on-demand route; the wait uses the
/// amsod_headway_variance at k_j = lambda H.
CostSummary hourly_cost_amsod(const CostParams& cost, const GridGeometry& grid, const ServiceConfig& svc,
                              double md);

/// Hourly generalized cost difference (semi-on-demand minus fixed) assuming
/// equal stopping times. Negative favours conversion.
double delta_tc_hourly(const CostParams& cost, const GridGeometry& grid, const ServiceConfig& svc, double md,
                       double mean_access);

/// Added waiting, riding and operator cost per unit of access cost saved.
/// Below 1 the route is a conversion candidate.
double selection_indicator(const CostParams& cost, const ServiceConfig& svc, double md, double mean_access);

/// Largest hourly demand for which conversion stays favourable at the
/// configured headway, ignoring the random part of waiting time. Returns
/// nullopt when md = 0 (no bound); clamps at 0 when never favourable.
std::optional<double> demand_upper_bound(const CostParams& cost, const ServiceConfig& svc, double md,
                                         double mean_access);

struct ParallelMetrics {
    double selection_indicator = 0.0;
    std::optional<double> demand_bound;
};

/// Splits the catchment into n_p equal y-bands, each served by its own route
/// at headway n_p H with dispersion md / n_p. n_p = 1 reproduces
/// selection_indicator and demand_upper_bound exactly.
ParallelMetrics parallel_metrics(const CostParams& cost, const ServiceConfig& svc, double md, double mean_access,
                                 int n_p);

/// Hourly cost with the route split into n equal zones. Each zone is served
/// every nH by buses that enter at the zone start and run express at v_h
/// from the zone end to gl_x. n = 1 equals hourly_cost_amsod.
CostSummary zonal_hourly_cost(const CostParams& cost, const GridGeometry& grid, const ServiceConfig& svc, double md,
                              int n);

struct ZonalRow {
    int n = 1;
    CostSummary cost;
};

struct ZonalPlan {
    std::vector<ZonalRow> table;
    double continuous_optimum = 1.0; ///< sqrt(B/A) from dTC/dn = 0
    int closed_form = 1;             ///< integer rounding of the continuous optimum
    int brute_force = 1;             ///< argmin over the table, ties to fewer zones
};

/// Throws std::invalid_argument when n_max < 1, or n_max > 1 without v_h.
ZonalPlan zonal_plan(const CostParams& cost, const GridGeometry& grid, const ServiceConfig& svc, double md,
                     int n_max);

} // namespace amsod::analytic

#endif // AMSOD_ANALYTIC_HPP
