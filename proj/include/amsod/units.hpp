#ifndef AMSOD_UNITS_HPP
#define AMSOD_UNITS_HPP

// Internal unit system: kilometres, hours, dollars. Everything else is
// converted at the boundary through these helpers.

namespace amsod::units {

constexpr double minutes(double m) { return m / 60.0; }
constexpr double seconds(double s) { return s / 3600.0; }
constexpr double metres(double m) { return m / 1000.0; }

constexpr double to_minutes(double hours) { return hours * 60.0; }

} // namespace amsod::units

#endif // AMSOD_UNITS_HPP
