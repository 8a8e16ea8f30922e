#ifndef AMSOD_EXPERIMENTS_HPP
#define AMSOD_EXPERIMENTS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "amsod/model.hpp"
#include "amsod/simulator.hpp"

namespace amsod::exp {

/// Counted-window results of one replication in one mode. Passenger terms
/// cover requests made inside the warm-up window; the operator term covers
/// every departure in the horizon.
struct ReplicationMetrics {
    int passengers = 0;       ///< counted and served
    int unserved = 0;         ///< counted but still waiting at the horizon
    double avg_wait = 0.0;    ///< h
    double avg_ivtt = 0.0;    ///< h
    double c_a = 0.0;
    double c_w = 0.0;
    double c_r = 0.0;
    double c_o = 0.0;
    double total = 0.0;

    bool operator==(const ReplicationMetrics&) const = default;
};

ReplicationMetrics measure(const sim::Timeline& timeline, const Scenario& scenario);

struct Summary {
    double median = 0.0;
    double p2_5 = 0.0;
    double p97_5 = 0.0;

    bool operator==(const Summary&) const = default;
};

/// Linear interpolation between order statistics at q (n - 1).
double percentile(std::vector<double> values, double q);

/// Throws std::invalid_argument on an empty list.
Summary summarize(const std::vector<double>& values);

struct ScenarioStats {
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<ReplicationMetrics> fixed;
    std::vector<ReplicationMetrics> amsod;
    std::vector<double> delta_tc; ///< amsod total minus fixed total, per replication

    bool operator==(const ScenarioStats&) const = default;
};

/// Column of ScenarioStats::fixed or ::amsod as a plain list.
std::vector<double> column(const std::vector<ReplicationMetrics>& runs, double ReplicationMetrics::*field);

/// One side of a paired comparison.
struct Arm {
    const Scenario* scenario = nullptr;
    sim::Mode mode = sim::Mode::fixed;
};

/// Runs `replications` pairs on common random numbers: replication i draws
/// one request set from substream i of `seed` (using the baseline scenario's
/// demand) and feeds it to both arms. `workers` = 0 uses every core.
ScenarioStats run_pair(Arm baseline, Arm alternative, int replications, std::uint64_t seed, unsigned workers = 0);

/// Fixed route against semi-on-demand on the same scenario.
ScenarioStats run_scenario(const Scenario& scenario, int replications, std::uint64_t seed, unsigned workers = 0);

enum class SweepDimension { capacity, lambda };

struct SweepSpec {
    SweepDimension dimension = SweepDimension::capacity;
    std::vector<double> values;
    int replications = 1000;
    Scenario base;
};

/// Throws std::invalid_argument unless values are nonempty and strictly
/// increasing and replications >= 1.
void validate_sweep(const SweepSpec& spec);

struct SweepRow {
    double value = 0.0;
    Summary delta_tc;
    double fixed_wait = 0.0;  ///< mean over replications, h
    double fixed_ivtt = 0.0;
    double amsod_wait = 0.0;
    double amsod_ivtt = 0.0;
};

/// One run_pair per value, every value on the same seed. A capacity sweep
/// changes the semi-on-demand fleet only; the fixed route keeps the base
/// capacity. A demand sweep changes lambda for both.
std::vector<SweepRow> sweep(const SweepSpec& spec, std::uint64_t seed, unsigned workers = 0);

enum class ReportFormat { csv, json };

struct HistogramBin {
    double low = 0.0;
    double high = 0.0;
    int count = 0;
};

/// Equal bins across the 0.5-99.5 percentile range; values outside it land
/// in the edge bins.
std::vector<HistogramBin> histogram(const std::vector<double>& values, int bins = 30);

nlohmann::json stats_to_json(const ScenarioStats& stats);
ScenarioStats stats_from_json(const nlohmann::json& doc);

/// Writes the JSON record and, for csv, the summary table, the delta-TC
/// histogram and per-replication tables. Returns the paths written.
/// Throws std::invalid_argument for empty stats and std::runtime_error when
/// a file cannot be written.
std::vector<std::filesystem::path> emit_report(const ScenarioStats& stats, const std::filesystem::path& out_dir,
                                               ReportFormat format);

/// Writes `<scenario>_sweep_<dimension>.csv`.
std::filesystem::path emit_sweep(const std::vector<SweepRow>& rows, const SweepSpec& spec,
                                 const std::filesystem::path& out_dir);

/// "median (p2.5 – p97.5)" with 4 significant digits.
std::string format_cell(const Summary& s);

const char* dimension_name(SweepDimension d);

} // namespace amsod::exp

#endif // AMSOD_EXPERIMENTS_HPP
