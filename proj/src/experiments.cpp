#include "amsod/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <fmt/core.h>

#include "amsod/rng.hpp"
#include "amsod/units.hpp"

namespace amsod::exp {

ReplicationMetrics measure(const sim::Timeline& timeline, const Scenario& scenario) {
    const auto& cost = scenario.cost;
    const auto& window = scenario.service.warmup_window;
    ReplicationMetrics m;
    double access = 0.0;
    double wait = 0.0;
    double ivtt = 0.0;
    for (const auto& trip : timeline.trips) {
        m.c_o += trip.costs.c_o;
        for (const auto& p : trip.costs.per_passenger) {
            if (!window.contains(p.request_time)) {
                continue;
            }
            ++m.passengers;
            access += p.access;
            wait += p.wait;
            ivtt += p.ivtt;
        }
    }
    for (int id : timeline.unserved) {
        const auto it = std::find_if(timeline.requests.begin(), timeline.requests.end(),
                                     [id](const Request& r) { return r.id == id; });
        if (it != timeline.requests.end() && window.contains(it->t)) {
            ++m.unserved;
        }
    }
    if (m.passengers > 0) {
        m.avg_wait = wait / m.passengers;
        m.avg_ivtt = ivtt / m.passengers;
    }
    m.c_a = cost.gamma_a * cost.vot * access;
    m.c_w = cost.gamma_w * cost.vot * wait;
    m.c_r = cost.gamma_r * cost.vot * ivtt;
    m.total = m.c_a + m.c_w + m.c_r + m.c_o;
    return m;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) {
        throw std::invalid_argument("percentile of an empty list");
    }
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

Summary summarize(const std::vector<double>& values) {
    if (values.empty()) {
        throw std::invalid_argument("cannot summarize an empty list");
    }
    return {percentile(values, 0.5), percentile(values, 0.025), percentile(values, 0.975)};
}

std::vector<double> column(const std::vector<ReplicationMetrics>& runs, double ReplicationMetrics::*field) {
    std::vector<double> out;
    out.reserve(runs.size());
    for (const auto& r : runs) {
        out.push_back(r.*field);
    }
    return out;
}

ScenarioStats run_pair(Arm baseline, Arm alternative, int replications, std::uint64_t seed, unsigned workers) {
    if (replications < 1) {
        throw std::invalid_argument("replications must be at least 1");
    }
    const Scenario& base = *baseline.scenario;
    const Scenario& alt = *alternative.scenario;
    const auto n = static_cast<std::size_t>(replications);

    ScenarioStats stats;
    stats.scenario = base.name;
    stats.seed = seed;
    stats.fixed.resize(n);
    stats.amsod.resize(n);
    stats.delta_tc.resize(n);

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            const auto requests = sim::sample_requests(base.grid, base.service, substream_seed(seed, i));
            stats.fixed[i] = measure(sim::run_timeline(base, baseline.mode, requests), base);
            stats.amsod[i] = measure(sim::run_timeline(alt, alternative.mode, requests), alt);
            stats.delta_tc[i] = stats.amsod[i].total - stats.fixed[i].total;
        }
    };

    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        work();
        return stats;
    }
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back(work);
    }
    pool.clear();
    return stats;
}

ScenarioStats run_scenario(const Scenario& scenario, int replications, std::uint64_t seed, unsigned workers) {
    return run_pair({&scenario, sim::Mode::fixed}, {&scenario, sim::Mode::amsod}, replications, seed, workers);
}

const char* dimension_name(SweepDimension d) { return d == SweepDimension::capacity ? "capacity" : "lambda"; }

void validate_sweep(const SweepSpec& spec) {
    if (spec.values.empty()) {
        throw std::invalid_argument("sweep needs at least one value");
    }
    if (std::adjacent_find(spec.values.begin(), spec.values.end(), std::greater_equal<>()) != spec.values.end()) {
        throw std::invalid_argument("sweep values must be strictly increasing");
    }
    if (spec.replications < 1) {
        throw std::invalid_argument("sweep replications must be at least 1");
    }
}

namespace {

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

} // namespace

std::vector<SweepRow> sweep(const SweepSpec& spec, std::uint64_t seed, unsigned workers) {
    validate_sweep(spec);
    std::vector<SweepRow> rows;
    for (double value : spec.values) {
        Scenario fixed = spec.base;
        Scenario amsod = spec.base;
        if (spec.dimension == SweepDimension::capacity) {
            amsod.service.capacity = static_cast<int>(std::lround(value));
        } else {
            fixed.service.lambda = value;
            amsod.service.lambda = value;
        }
        require_valid(fixed);
        require_valid(amsod);
        const auto stats =
            run_pair({&fixed, sim::Mode::fixed}, {&amsod, sim::Mode::amsod}, spec.replications, seed, workers);
        SweepRow row;
        row.value = value;
        row.delta_tc = summarize(stats.delta_tc);
        row.fixed_wait = mean(column(stats.fixed, &ReplicationMetrics::avg_wait));
        row.fixed_ivtt = mean(column(stats.fixed, &ReplicationMetrics::avg_ivtt));
        row.amsod_wait = mean(column(stats.amsod, &ReplicationMetrics::avg_wait));
        row.amsod_ivtt = mean(column(stats.amsod, &ReplicationMetrics::avg_ivtt));
        rows.push_back(row);
    }
    return rows;
}

std::vector<HistogramBin> histogram(const std::vector<double>& values, int bins) {
    if (values.empty()) {
        throw std::invalid_argument("cannot bin an empty list");
    }
    if (bins < 1) {
        throw std::invalid_argument("histogram needs at least one bin");
    }
    double lo = percentile(values, 0.005);
    double hi = percentile(values, 0.995);
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double width = (hi - lo) / bins;
    std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b) {
        out[b].low = lo + b * width;
        out[b].high = b + 1 == bins ? hi : lo + (b + 1) * width;
    }
    for (double v : values) {
        const int b = std::clamp(static_cast<int>(std::floor((v - lo) / width)), 0, bins - 1);
        ++out[static_cast<std::size_t>(b)].count;
    }
    return out;
}

// ------------------------------------------------------------------ JSON

namespace {

nlohmann::json metrics_to_json(const std::vector<ReplicationMetrics>& runs) {
    nlohmann::json out = nlohmann::json::object();
    out["passengers"] = nlohmann::json::array();
    out["unserved"] = nlohmann::json::array();
    for (const auto& r : runs) {
        out["passengers"].push_back(r.passengers);
        out["unserved"].push_back(r.unserved);
    }
    out["avg_wait_h"] = column(runs, &ReplicationMetrics::avg_wait);
    out["avg_ivtt_h"] = column(runs, &ReplicationMetrics::avg_ivtt);
    out["c_a"] = column(runs, &ReplicationMetrics::c_a);
    out["c_w"] = column(runs, &ReplicationMetrics::c_w);
    out["c_r"] = column(runs, &ReplicationMetrics::c_r);
    out["c_o"] = column(runs, &ReplicationMetrics::c_o);
    out["total"] = column(runs, &ReplicationMetrics::total);
    return out;
}

std::vector<ReplicationMetrics> metrics_from_json(const nlohmann::json& doc) {
    const auto& passengers = doc.at("passengers");
    std::vector<ReplicationMetrics> runs(passengers.size());
    auto fill = [&](const char* key, double ReplicationMetrics::*field) {
        const auto& arr = doc.at(key);
        if (arr.size() != runs.size()) {
            throw std::invalid_argument(std::string("length mismatch in ") + key);
        }
        for (std::size_t i = 0; i < runs.size(); ++i) {
            runs[i].*field = arr[i].get<double>();
        }
    };
    for (std::size_t i = 0; i < runs.size(); ++i) {
        runs[i].passengers = passengers[i].get<int>();
        runs[i].unserved = doc.at("unserved").at(i).get<int>();
    }
    fill("avg_wait_h", &ReplicationMetrics::avg_wait);
    fill("avg_ivtt_h", &ReplicationMetrics::avg_ivtt);
    fill("c_a", &ReplicationMetrics::c_a);
    fill("c_w", &ReplicationMetrics::c_w);
    fill("c_r", &ReplicationMetrics::c_r);
    fill("c_o", &ReplicationMetrics::c_o);
    fill("total", &ReplicationMetrics::total);
    return runs;
}

nlohmann::json summary_to_json(const Summary& s) {
    return {{"median", s.median}, {"p2_5", s.p2_5}, {"p97_5", s.p97_5}};
}

struct TableRow {
    const char* label;
    double ReplicationMetrics::*field;
    double scale;
};

constexpr TableRow kCostRows[] = {
    {"average waiting time (min)", &ReplicationMetrics::avg_wait, 60.0},
    {"average IVTT (min)", &ReplicationMetrics::avg_ivtt, 60.0},
    {"access cost ($)", &ReplicationMetrics::c_a, 1.0},
    {"waiting cost ($)", &ReplicationMetrics::c_w, 1.0},
    {"riding cost ($)", &ReplicationMetrics::c_r, 1.0},
    {"operator cost ($)", &ReplicationMetrics::c_o, 1.0},
    {"generalized cost ($)", &ReplicationMetrics::total, 1.0},
};

Summary scaled_summary(const std::vector<ReplicationMetrics>& runs, const TableRow& row) {
    auto values = column(runs, row.field);
    for (double& v : values) {
        v *= row.scale;
    }
    return summarize(values);
}

std::vector<double> passenger_counts(const std::vector<ReplicationMetrics>& runs) {
    std::vector<double> out;
    for (const auto& r : runs) {
        out.push_back(r.passengers);
    }
    return out;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

void write_replications(const std::vector<ReplicationMetrics>& runs, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    out << "replication,passengers,unserved,avg_wait_min,avg_ivtt_min,c_a,c_w,c_r,c_o,total\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i];
        out << fmt::format("{},{},{},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g}\n", i, r.passengers,
                           r.unserved, units::to_minutes(r.avg_wait), units::to_minutes(r.avg_ivtt), r.c_a, r.c_w,
                           r.c_r, r.c_o, r.total);
    }
}

} // namespace

nlohmann::json stats_to_json(const ScenarioStats& stats) {
    nlohmann::json doc;
    doc["scenario"] = stats.scenario;
    doc["seed"] = stats.seed;
    doc["replications"] = stats.delta_tc.size();
    nlohmann::json summary = nlohmann::json::object();
    if (!stats.delta_tc.empty()) {
        for (const auto& row : kCostRows) {
            summary[row.label] = {{"fixed", summary_to_json(scaled_summary(stats.fixed, row))},
                                  {"amsod", summary_to_json(scaled_summary(stats.amsod, row))}};
        }
        summary["generalized cost difference ($)"] = summary_to_json(summarize(stats.delta_tc));
        summary["passengers included"] = summary_to_json(summarize(passenger_counts(stats.fixed)));
    }
    doc["summary"] = summary;
    doc["fixed"] = metrics_to_json(stats.fixed);
    doc["amsod"] = metrics_to_json(stats.amsod);
    doc["delta_tc"] = stats.delta_tc;
    return doc;
}

ScenarioStats stats_from_json(const nlohmann::json& doc) {
    ScenarioStats stats;
    stats.scenario = doc.at("scenario").get<std::string>();
    stats.seed = doc.at("seed").get<std::uint64_t>();
    stats.fixed = metrics_from_json(doc.at("fixed"));
    stats.amsod = metrics_from_json(doc.at("amsod"));
    stats.delta_tc = doc.at("delta_tc").get<std::vector<double>>();
    return stats;
}

std::string format_cell(const Summary& s) {
    return fmt::format("{:.4g} ({:.4g} – {:.4g})", s.median, s.p2_5, s.p97_5);
}

std::vector<std::filesystem::path> emit_report(const ScenarioStats& stats, const std::filesystem::path& out_dir,
                                               ReportFormat format) {
    if (stats.delta_tc.empty()) {
        throw std::invalid_argument("no replications to report");
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
    }
    const std::string stem = stats.scenario;
    std::vector<std::filesystem::path> written;

    const auto json_path = out_dir / (stem + "_paired_stats.json");
    open_for_write(json_path) << stats_to_json(stats).dump(2) << '\n';
    written.push_back(json_path);
    if (format == ReportFormat::json) {
        return written;
    }

    const auto table_path = out_dir / (stem + "_paired_summary.csv");
    {
        auto out = open_for_write(table_path);
        out << "metric,fixed,amsod,paired\n";
        for (const auto& row : kCostRows) {
            out << fmt::format("{},\"{}\",\"{}\",\n", row.label, format_cell(scaled_summary(stats.fixed, row)),
                               format_cell(scaled_summary(stats.amsod, row)));
        }
        out << fmt::format("generalized cost difference ($),,,\"{}\"\n", format_cell(summarize(stats.delta_tc)));
        out << fmt::format("passengers included,,,\"{}\"\n", format_cell(summarize(passenger_counts(stats.fixed))));
    }
    written.push_back(table_path);

    const auto hist_path = out_dir / (stem + "_paired_delta_tc_histogram.csv");
    {
        auto out = open_for_write(hist_path);
        out << "bin_low,bin_high,count\n";
        for (const auto& bin : histogram(stats.delta_tc)) {
            out << fmt::format("{:.10g},{:.10g},{}\n", bin.low, bin.high, bin.count);
        }
    }
    written.push_back(hist_path);

    const auto fixed_path = out_dir / (stem + "_fixed_replications.csv");
    write_replications(stats.fixed, fixed_path);
    written.push_back(fixed_path);
    const auto amsod_path = out_dir / (stem + "_amsod_replications.csv");
    write_replications(stats.amsod, amsod_path);
    written.push_back(amsod_path);
    return written;
}

std::filesystem::path emit_sweep(const std::vector<SweepRow>& rows, const SweepSpec& spec,
                                 const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
    }
    const auto path = out_dir / fmt::format("{}_sweep_{}.csv", spec.base.name, dimension_name(spec.dimension));
    auto out = open_for_write(path);
    out << fmt::format("{},delta_tc_median,delta_tc_p2_5,delta_tc_p97_5,fixed_wait_min,fixed_ivtt_min,"
                       "amsod_wait_min,amsod_ivtt_min\n",
                       dimension_name(spec.dimension));
    for (const auto& r : rows) {
        out << fmt::format("{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g}\n", r.value,
                           r.delta_tc.median, r.delta_tc.p2_5, r.delta_tc.p97_5, units::to_minutes(r.fixed_wait),
                           units::to_minutes(r.fixed_ivtt), units::to_minutes(r.amsod_wait),
                           units::to_minutes(r.amsod_ivtt));
    }
    return path;
}

} // namespace amsod::exp
