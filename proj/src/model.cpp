#include "amsod/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace amsod {

double GridGeometry::max_catchment() const {
    if (gl_y.empty()) {
        return 0.0;
    }
    return *std::max_element(gl_y.begin(), gl_y.end());
}

std::vector<double> even_stop_chainages(double gl_x, double d_xs) {
    std::vector<double> stops;
    if (gl_x <= 0.0 || d_xs <= 0.0) {
        return stops;
    }
    // Stops sit at the centre of each d_xs cell; a small slack keeps a cell
    // that ends exactly at gl_x from being lost to rounding.
    for (int i = 0;; ++i) {
        const double x = (i + 0.5) * d_xs;
        if (x > gl_x + 1e-9) {
            break;
        }
        stops.push_back(std::min(x, gl_x));
    }
    return stops;
}

namespace {

class Collector {
public:
    void error(std::string field, const char* rule) {
        issues_.push_back({std::move(field), rule, Severity::error});
    }
    void warning(std::string field, const char* rule) {
        issues_.push_back({std::move(field), rule, Severity::warning});
    }
    void positive(const std::string& field, double value) {
        if (!(value > 0.0)) {
            error(field, rules::non_positive);
        }
    }
    std::vector<ValidationIssue> take() { return std::move(issues_); }

private:
    std::vector<ValidationIssue> issues_;
};

void check_cost(const CostParams& c, Collector& out) {
    out.positive("cost.gamma_a", c.gamma_a);
    out.positive("cost.gamma_w", c.gamma_w);
    out.positive("cost.gamma_r", c.gamma_r);
    out.positive("cost.gamma_o", c.gamma_o);
    out.positive("cost.vot", c.vot);
}

void check_grid(const GridGeometry& g, Collector& out) {
    out.positive("grid.l_x", g.l_x);
    out.positive("grid.l_y", g.l_y);
    out.positive("grid.gl_x", g.gl_x);
    out.positive("grid.d_xs", g.d_xs);

    const auto& stops = g.stop_chainages;
    if (stops.empty()) {
        out.error("grid.stop_chainages", rules::no_stops);
    }
    for (std::size_t i = 0; i < stops.size(); ++i) {
        if (stops[i] < 0.0 || stops[i] > g.gl_x) {
            out.error("grid.stop_chainages[" + std::to_string(i) + "]", rules::stop_outside_route);
        }
        if (i > 0 && !(stops[i] > stops[i - 1])) {
            out.error("grid.stop_chainages[" + std::to_string(i) + "]", rules::unsorted_stops);
        }
    }

    if (g.gl_y.empty() || (g.gl_y.size() != 1 && g.gl_y.size() != stops.size())) {
        out.error("grid.gl_y", rules::length_mismatch);
    }
    for (std::size_t i = 0; i < g.gl_y.size(); ++i) {
        out.positive("grid.gl_y[" + std::to_string(i) + "]", g.gl_y[i]);
    }

    if (g.stop_weights.size() != stops.size()) {
        out.error("grid.stop_weights", rules::length_mismatch);
    }
    bool negative = false;
    for (std::size_t i = 0; i < g.stop_weights.size(); ++i) {
        if (g.stop_weights[i] < 0.0) {
            out.error("grid.stop_weights[" + std::to_string(i) + "]", rules::negative_weight);
            negative = true;
        }
    }
    const double total = std::accumulate(g.stop_weights.begin(), g.stop_weights.end(), 0.0);
    if (!negative && !g.stop_weights.empty() && std::abs(total - 1.0) > 1e-9) {
        out.error("grid.stop_weights", rules::weights_not_normalized);
    }
}

void check_service(const ServiceConfig& s, const GridGeometry& g, Collector& out) {
    out.positive("service.headway", s.headway);
    out.positive("service.v_d", s.v_d);
    out.positive("service.v_w", s.v_w);
    out.positive("service.s_o", s.s_o);
    out.positive("service.horizon", s.horizon);
    if (s.t_s < 0.0) {
        out.error("service.t_s", rules::non_positive);
    }
    if (s.t_s_prime < 0.0) {
        out.error("service.t_s_prime", rules::non_positive);
    }
    if (s.lambda < 0.0) {
        out.error("service.lambda", rules::non_positive);
    }
    if (s.capacity < 1) {
        out.error("service.capacity", rules::count_below_one);
    }
    if (s.n_parallel < 1) {
        out.error("service.n_parallel", rules::count_below_one);
    }
    if (s.n_zones < 1) {
        out.error("service.n_zones", rules::count_below_one);
    }
    if (s.v_d > 0.0 && s.v_w > 0.0 && !(s.v_d > s.v_w)) {
        out.error("service.v_d", rules::speed_ordering);
    }
    if (s.v_h) {
        out.positive("service.v_h", *s.v_h);
        if (*s.v_h < s.v_d) {
            out.error("service.v_h", rules::speed_ordering);
        }
    } else if (s.n_zones > 1) {
        out.error("service.v_h", rules::missing_highway_speed);
    }
    const auto& w = s.warmup_window;
    if (w.begin < 0.0 || !(w.end > w.begin) || w.end > s.horizon) {
        out.error("service.warmup_window", rules::bad_window);
    }
    if (s.s_o > 0.0 && s.v_w > 0.0 && s.s_o * s.v_w < g.max_catchment() - 1e-9) {
        out.warning("service.s_o", rules::walk_reach);
    }
}

} // namespace

std::vector<ValidationIssue> validate_scenario(const Scenario& scenario) {
    Collector out;
    check_cost(scenario.cost, out);
    check_grid(scenario.grid, out);
    check_service(scenario.service, scenario.grid, out);
    if (scenario.run.replications < 1) {
        out.error("run.replications", rules::count_below_one);
    }
    if (scenario.run.sensitivity_replications < 1) {
        out.error("run.sensitivity_replications", rules::count_below_one);
    }
    return out.take();
}

bool has_errors(const std::vector<ValidationIssue>& issues) {
    return std::any_of(issues.begin(), issues.end(),
                       [](const ValidationIssue& i) { return i.severity == Severity::error; });
}

namespace {
std::string describe(const std::vector<ValidationIssue>& issues) {
    std::string text = "invalid scenario:";
    for (const auto& i : issues) {
        if (i.severity == Severity::error) {
            text += " [" + i.field + ": " + i.rule + "]";
        }
    }
    return text;
}
} // namespace

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : std::runtime_error(describe(issues)), issues_(std::move(issues)) {}

const Scenario& require_valid(const Scenario& scenario) {
    auto issues = validate_scenario(scenario);
    if (has_errors(issues)) {
        throw ValidationError(std::move(issues));
    }
    return scenario;
}

} // namespace amsod
