#ifndef AMSOD_INGEST_HPP
#define AMSOD_INGEST_HPP

#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "amsod/model.hpp"

namespace amsod::ingest {

/// Malformed boardings data. `line()` is the 1-based physical line, 0 when
/// the problem is not tied to a row.
class IngestError : public std::runtime_error {
public:
    IngestError(int line, const std::string& what)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

struct CsvRow {
    int line = 0; ///< physical line the record starts on
    std::vector<std::string> fields;
};

/// RFC 4180: comma separated, double-quoted fields may hold commas, quotes
/// ("" escapes) and line breaks. Blank lines are skipped.
std::vector<CsvRow> read_csv(std::istream& in);

struct StopRecord {
    std::string stop_id;
    std::vector<std::string> routes;
    double chainage = 0.0;  ///< km along the route axis
    double boardings = 0.0; ///< average weekday boardings
    std::optional<double> gl_y; ///< km
    int line = 0;
};

/// Straight route axis for projecting geographic positions, from `start`
/// toward `end`. Chainage is measured from `start`.
struct RouteAxis {
    double lat0 = 0.0;
    double lon0 = 0.0;
    double lat1 = 0.0;
    double lon1 = 0.0;
};

// Required columns: stop_id, routes, boardings, and either chainage_km or
// lat + lon. Optional: gl_y_km. Other columns are ignored. `routes` is a
// comma list, quoted when it holds more than one id.
//
// Rows whose routes do not include `route_id` are dropped. With lat/lon and
// no axis, the axis runs from the first to the last kept row.
std::vector<StopRecord> parse_boardings(std::istream& in, const std::string& route_id,
                                        std::optional<RouteAxis> axis = std::nullopt);
std::vector<StopRecord> parse_boardings(const std::filesystem::path& path, const std::string& route_id,
                                        std::optional<RouteAxis> axis = std::nullopt);

/// Chainage of a point on a local equirectangular projection, km.
double project_chainage(const RouteAxis& axis, double lat, double lon);

/// Route-level settings that do not come from the boardings file.
struct CaseDefaults {
    std::string name = "route";
    CostParams cost;
    ServiceConfig service;
    double gl_y = 0.2;  ///< km, used where a stop has no override
    double l_x = 0.2;
    double l_y = 0.1;
};

std::optional<CaseDefaults> case_preset(const std::string& name);

/// Sorts by chainage, merges stops sharing a chainage, sets gl_x to the last
/// chainage, stop weights proportional to boardings and d_xs to the mean
/// spacing gl_x / stop count. Throws IngestError for fewer than two stops or
/// zero total boardings.
Scenario build_route_model(std::vector<StopRecord> records, const CaseDefaults& defaults);

} // namespace amsod::ingest

#endif // AMSOD_INGEST_HPP
