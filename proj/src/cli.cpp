#include "amsod/cli.hpp"

#include <algorithm>
#include <fstream>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/ostream.h>

#include "amsod/analytic.hpp"
#include "amsod/rng.hpp"
#include "amsod/scenario_io.hpp"
#include "amsod/simulator.hpp"
#include "amsod/units.hpp"

namespace amsod::cli {

namespace {

constexpr std::size_t kAccessSamples = 1'000'000;
constexpr int kMaxZones = 6;
constexpr int kMaxParallel = 4;

std::string sig4(double v) { return fmt::format("{:.4g}", v); }

std::string bound_text(const std::optional<double>& b) { return b ? sig4(*b) : std::string("none"); }

struct Screened {
    std::string name;
    double md = 0.0;
    double mean_access = 0.0;
    double si = 0.0;
    std::optional<double> bound;
};

Screened screen_one(const Scenario& sc, std::uint64_t seed) {
    Screened s;
    s.name = sc.name;
    s.md = analytic::catchment_mean_abs_diff(sc.grid);
    s.mean_access = sim::estimate_mean_access(sc.grid, sc.service, kAccessSamples, seed);
    s.si = analytic::selection_indicator(sc.cost, sc.service, s.md, s.mean_access);
    s.bound = analytic::demand_upper_bound(sc.cost, sc.service, s.md, s.mean_access);
    return s;
}

int do_analytic(const Command& cmd, std::ostream& out) {
    for (const auto& path : cmd.scenarios) {
        const Scenario sc = parse_config(path);
        const auto seed = cmd.seed.value_or(sc.run.seed);
        const auto s = screen_one(sc, seed);
        const auto fixed = analytic::hourly_cost_fixed(sc.cost, sc.grid, sc.service, s.mean_access);
        const auto amsod = analytic::hourly_cost_amsod(sc.cost, sc.grid, sc.service, s.md);

        fmt::print(out, "scenario {}\n", sc.name);
        fmt::print(out, "  MD(Y) km                 {}\n", sig4(s.md));
        fmt::print(out, "  mean access min          {}\n", sig4(units::to_minutes(s.mean_access)));
        fmt::print(out, "  SI                       {}\n", sig4(s.si));
        fmt::print(out, "  demand bound pax/h       {}\n", bound_text(s.bound));
        fmt::print(out, "  hourly cost fixed $      {}\n", sig4(fixed.total));
        fmt::print(out, "  hourly cost amsod $      {}\n", sig4(amsod.total));
        fmt::print(out, "  delta TC $/h             {}\n",
                   sig4(analytic::delta_tc_hourly(sc.cost, sc.grid, sc.service, s.md, s.mean_access)));
        fmt::print(out, "  parallel routes\n    n_p  SI_p    bound\n");
        for (int n_p = 1; n_p <= kMaxParallel; ++n_p) {
            const auto m = analytic::parallel_metrics(sc.cost, sc.service, s.md, s.mean_access, n_p);
            fmt::print(out, "    {:<4} {:<7} {}\n", n_p, sig4(m.selection_indicator), bound_text(m.demand_bound));
        }
        if (sc.service.v_h) {
            const auto plan = analytic::zonal_plan(sc.cost, sc.grid, sc.service, s.md, kMaxZones);
            fmt::print(out, "  zonal express (v_h {} km/h)\n    n    TC $/h\n", sig4(*sc.service.v_h));
            for (const auto& row : plan.table) {
                fmt::print(out, "    {:<4} {}\n", row.n, sig4(row.cost.total));
            }
            fmt::print(out, "  n_o continuous {}  closed form {}  brute force {}\n", sig4(plan.continuous_optimum),
                       plan.closed_form, plan.brute_force);
        }
    }
    return ok;
}

int do_screen(const Command& cmd, std::ostream& out) {
    std::vector<Screened> rows;
    for (const auto& path : cmd.scenarios) {
        const Scenario sc = parse_config(path);
        rows.push_back(screen_one(sc, cmd.seed.value_or(sc.run.seed)));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Screened& a, const Screened& b) { return a.si < b.si; });
    fmt::print(out, "rank,scenario,si,md_km,mean_access_min,demand_bound,candidate\n");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        fmt::print(out, "{},{},{},{},{},{},{}\n", i + 1, r.name, sig4(r.si), sig4(r.md),
                   sig4(units::to_minutes(r.mean_access)), bound_text(r.bound), r.si < 1.0 ? "yes" : "no");
    }
    return ok;
}

int do_simulate(const Command& cmd, std::ostream& out) {
    for (const auto& path : cmd.scenarios) {
        const Scenario sc = parse_config(path);
        const auto seed = cmd.seed.value_or(sc.run.seed);
        const int reps = cmd.replications.value_or(sc.run.replications);
        const auto stats = exp::run_scenario(sc, reps, seed, cmd.workers);
        for (const auto& file : exp::emit_report(stats, cmd.out, cmd.format)) {
            fmt::print(out, "wrote {}\n", file.string());
        }
        const auto d = exp::summarize(stats.delta_tc);
        fmt::print(out, "{}: {} replications, delta TC {}\n", sc.name, reps, exp::format_cell(d));
        if (cmd.trace) {
            const auto requests = sim::sample_requests(sc.grid, sc.service, substream_seed(seed, 0));
            std::ofstream trace(*cmd.trace);
            if (!trace) {
                throw std::runtime_error("cannot write " + cmd.trace->string());
            }
            sim::write_trace(trace, sim::run_timeline(sc, sim::Mode::amsod, requests));
            fmt::print(out, "wrote {}\n", cmd.trace->string());
        }
    }
    return ok;
}

int do_sweep(const Command& cmd, std::ostream& out) {
    for (const auto& path : cmd.scenarios) {
        exp::SweepSpec spec;
        spec.base = parse_config(path);
        spec.dimension = cmd.dimension;
        spec.values = cmd.values;
        spec.replications = cmd.replications.value_or(spec.base.run.sensitivity_replications);
        try {
            exp::validate_sweep(spec);
        } catch (const std::invalid_argument& e) {
            throw ValidationError(std::vector<ValidationIssue>{{"values", e.what()}});
        }
        const auto rows = exp::sweep(spec, cmd.seed.value_or(spec.base.run.seed), cmd.workers);
        fmt::print(out, "{} sweep over {}\n", spec.base.name, exp::dimension_name(spec.dimension));
        fmt::print(out, "  value   delta TC                      amsod wait  amsod IVTT\n");
        for (const auto& r : rows) {
            fmt::print(out, "  {:<7} {:<29} {:<11} {}\n", sig4(r.value), exp::format_cell(r.delta_tc),
                       sig4(units::to_minutes(r.amsod_wait)), sig4(units::to_minutes(r.amsod_ivtt)));
        }
        fmt::print(out, "wrote {}\n", exp::emit_sweep(rows, spec, cmd.out).string());
    }
    return ok;
}

int do_ingest(const Command& cmd, std::ostream& out) {
    const std::string case_name = cmd.case_name.empty() ? "cta" + cmd.route_id : cmd.case_name;
    auto defaults = ingest::case_preset(case_name);
    if (!defaults) {
        throw ValidationError(std::vector<ValidationIssue>{{"case", "unknown case \"" + case_name + "\""}});
    }
    const auto records = ingest::parse_boardings(cmd.data, cmd.route_id, cmd.axis);
    Scenario sc = ingest::build_route_model(records, *defaults);
    if (cmd.seed) {
        sc.run.seed = *cmd.seed;
    }
    if (cmd.replications) {
        sc.run.replications = *cmd.replications;
    }
    require_valid(sc);
    auto target = cmd.out;
    if (target.extension() != ".json") {
        std::filesystem::create_directories(target);
        target /= sc.name + ".json";
    }
    write_scenario(sc, target);
    fmt::print(out, "wrote {} ({} stops, gl_x {} km)\n", target.string(), sc.grid.stop_count(), sig4(sc.grid.gl_x));
    return ok;
}

void print_issues(const ValidationError& e, std::ostream& err) {
    for (const auto& issue : e.issues()) {
        fmt::print(err, "validation error: {}: {}\n", issue.field, issue.rule);
    }
}

} // namespace

int execute(const Command& cmd, std::ostream& out, std::ostream& err) {
    try {
        if (cmd.verb == "analytic") {
            return do_analytic(cmd, out);
        }
        if (cmd.verb == "screen") {
            return do_screen(cmd, out);
        }
        if (cmd.verb == "simulate") {
            return do_simulate(cmd, out);
        }
        if (cmd.verb == "sweep") {
            return do_sweep(cmd, out);
        }
        if (cmd.verb == "ingest") {
            return do_ingest(cmd, out);
        }
        fmt::print(err, "unknown verb \"{}\"\n", cmd.verb);
        return invalid;
    } catch (const ValidationError& e) {
        print_issues(e, err);
        return invalid;
    } catch (const ConfigError& e) {
        fmt::print(err, "config error: {}\n", e.what());
        return invalid;
    } catch (const ingest::IngestError& e) {
        fmt::print(err, "data error: {}\n", e.what());
        return invalid;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return failure;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fixed-route versus semi-on-demand minibus cost model and simulator", "amsod"};
    app.require_subcommand(1, 1);

    Command cmd;
    std::string format = "csv";
    std::string dimension = "capacity";
    std::vector<double> axis;
    std::uint64_t seed = 0;
    int replications = 0;

    auto add_common = [&](CLI::App* sub, bool needs_scenario) {
        auto* opt = sub->add_option("--scenario", cmd.scenarios, "scenario JSON file (repeatable)")
                        ->check(CLI::ExistingFile);
        if (needs_scenario) {
            opt->required();
        }
        sub->add_option("--out", cmd.out, "output directory");
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--replications", replications, "replication count")->check(CLI::PositiveNumber);
        sub->add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--workers", cmd.workers, "worker threads, 0 = all cores");
    };

    auto* analytic = app.add_subcommand("analytic", "closed-form costs and indicators");
    add_common(analytic, true);
    auto* screen = app.add_subcommand("screen", "rank scenarios by selection indicator");
    add_common(screen, true);
    auto* simulate = app.add_subcommand("simulate", "paired Monte Carlo run and report");
    add_common(simulate, true);
    simulate->add_option("--trace", cmd.trace, "waypoint CSV of the first replication");
    auto* sweep = app.add_subcommand("sweep", "capacity or demand sensitivity");
    add_common(sweep, true);
    sweep->add_option("--dimension", dimension, "capacity or lambda")
        ->check(CLI::IsMember({"capacity", "lambda"}));
    sweep->add_option("--values", cmd.values, "comma separated values")->delimiter(',')->required();
    auto* ingest_cmd = app.add_subcommand("ingest", "build a scenario from stop boardings");
    add_common(ingest_cmd, false);
    ingest_cmd->add_option("--data", cmd.data, "boardings CSV")->required()->check(CLI::ExistingFile);
    ingest_cmd->add_option("--route-id", cmd.route_id, "route to keep")->required();
    ingest_cmd->add_option("--case", cmd.case_name, "case preset (cta126, cta84)");
    ingest_cmd->add_option("--axis", axis, "lat0,lon0,lat1,lon1 for lat/lon input")->delimiter(',')->expected(4);

    try {
        std::vector<std::string> args;
        for (int i = argc - 1; i > 0; --i) {
            args.emplace_back(argv[i]);
        }
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        fmt::print(err, "{}\n", e.what());
        err << app.help();
        return invalid;
    }

    cmd.verb = app.get_subcommands().front()->get_name();
    const auto* sub = app.get_subcommands().front();
    if (sub->count("--seed") > 0) {
        cmd.seed = seed;
    }
    if (sub->count("--replications") > 0) {
        cmd.replications = replications;
    }
    cmd.format = format == "json" ? exp::ReportFormat::json : exp::ReportFormat::csv;
    cmd.dimension = dimension == "lambda" ? exp::SweepDimension::lambda : exp::SweepDimension::capacity;
    if (axis.size() == 4) {
        cmd.axis = ingest::RouteAxis{axis[0], axis[1], axis[2], axis[3]};
    }
    return execute(cmd, out, err);
}

} // namespace amsod::cli
