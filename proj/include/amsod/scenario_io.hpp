#ifndef AMSOD_SCENARIO_IO_HPP
#define AMSOD_SCENARIO_IO_HPP

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "amsod/model.hpp"

namespace amsod {

/// Malformed scenario file: bad JSON, a missing object, an unknown field or
/// an unrecognised unit suffix. `where()` names the line or field path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string where, const std::string& what)
        : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

// Scenario files carry the objects "cost", "grid", "service" and "run".
// Dimensioned fields declare their unit through a suffix:
//   time      _h _min _s          e.g. "headway_min": 15
//   length    _km _m              e.g. "d_xs_m": 400
//   speed     _kmh
//   rates     _per_h _per_min     ("lambda_per_h", "vot_per_h")
//   unit cost _per_km _per_m      ("gamma_o_per_km")
// Missing fields keep their defaults; unknown fields are rejected.
// Stop chainages default to evenly spaced stops and weights to uniform.

Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& scenario);

/// Parses without validating.
Scenario parse_scenario_text(const std::string& text);

/// Reads, parses and validates a scenario file. Throws ConfigError or
/// ValidationError.
Scenario parse_config(const std::filesystem::path& path);

void write_scenario(const Scenario& scenario, const std::filesystem::path& path);

} // namespace amsod

#endif // AMSOD_SCENARIO_IO_HPP
