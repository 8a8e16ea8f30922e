#include "amsod/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

#include "amsod/units.hpp"

namespace amsod::ingest {

std::vector<CsvRow> read_csv(std::istream& in) {
    std::vector<CsvRow> rows;
    CsvRow row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    int line = 1;
    row.line = 1;

    auto end_field = [&] {
        row.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        const bool blank = row.fields.empty() && !field_started;
        if (!blank) {
            end_field();
            rows.push_back(std::move(row));
        }
        row = CsvRow{};
        row.line = line;
    };

    char c;
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') {
                    ++line;
                }
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"':
            quoted = true;
            field_started = true;
            break;
        case ',':
            end_field();
            field_started = true;
            break;
        case '\r':
            break;
        case '\n':
            ++line;
            end_row();
            break;
        default:
            field += c;
            field_started = true;
        }
    }
    if (quoted) {
        throw IngestError(row.line, "unterminated quoted field");
    }
    end_row();
    return rows;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& raw, const char* column, int line) {
    const std::string s = trim(raw);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw IngestError(line, std::string("non-numeric ") + column + " \"" + raw + "\"");
    }
    return v;
}

std::vector<std::string> split_routes(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            if (auto t = trim(cur); !t.empty()) {
                out.push_back(t);
            }
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

struct Columns {
    std::map<std::string, std::size_t> index;

    std::optional<std::size_t> find(const std::string& name) const {
        auto it = index.find(name);
        return it == index.end() ? std::nullopt : std::optional(it->second);
    }
    std::size_t require(const std::string& name) const {
        if (auto i = find(name)) {
            return *i;
        }
        throw IngestError(1, "missing required column \"" + name + "\"");
    }
};

} // namespace

double project_chainage(const RouteAxis& axis, double lat, double lon) {
    constexpr double earth_radius_km = 6371.0;
    constexpr double deg = std::numbers::pi / 180.0;
    const double cos_lat = std::cos(axis.lat0 * deg);
    auto local = [&](double la, double lo) {
        return std::pair{(lo - axis.lon0) * deg * cos_lat * earth_radius_km, (la - axis.lat0) * deg * earth_radius_km};
    };
    const auto [ex, ey] = local(axis.lat1, axis.lon1);
    const double len = std::hypot(ex, ey);
    if (!(len > 0.0)) {
        throw IngestError(0, "route axis has zero length");
    }
    const auto [px, py] = local(lat, lon);
    return (px * ex + py * ey) / len;
}

std::vector<StopRecord> parse_boardings(std::istream& in, const std::string& route_id, std::optional<RouteAxis> axis) {
    const auto rows = read_csv(in);
    if (rows.empty()) {
        throw IngestError(0, "no stops for route " + route_id);
    }
    Columns cols;
    for (std::size_t i = 0; i < rows.front().fields.size(); ++i) {
        cols.index[trim(rows.front().fields[i])] = i;
    }
    const auto id_col = cols.require("stop_id");
    const auto routes_col = cols.require("routes");
    const auto boardings_col = cols.require("boardings");
    const auto chainage_col = cols.find("chainage_km");
    const auto lat_col = cols.find("lat");
    const auto lon_col = cols.find("lon");
    const auto gl_y_col = cols.find("gl_y_km");
    if (!chainage_col && !(lat_col && lon_col)) {
        throw IngestError(1, "missing required column \"chainage_km\" (or \"lat\" and \"lon\")");
    }

    struct Raw {
        StopRecord rec;
        double lat = 0.0;
        double lon = 0.0;
    };
    std::vector<Raw> kept;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto field = [&](std::size_t i) -> const std::string& {
            if (i >= row.fields.size()) {
                throw IngestError(row.line, "expected " + std::to_string(rows.front().fields.size()) + " fields, got " +
                                                std::to_string(row.fields.size()));
            }
            return row.fields[i];
        };
        Raw raw;
        raw.rec.line = row.line;
        raw.rec.stop_id = trim(field(id_col));
        raw.rec.routes = split_routes(field(routes_col));
        if (std::find(raw.rec.routes.begin(), raw.rec.routes.end(), route_id) == raw.rec.routes.end()) {
            continue;
        }
        raw.rec.boardings = parse_number(field(boardings_col), "boardings", row.line);
        if (raw.rec.boardings < 0.0) {
            throw IngestError(row.line, "negative boardings");
        }
        if (chainage_col) {
            raw.rec.chainage = parse_number(field(*chainage_col), "chainage_km", row.line);
        } else {
            raw.lat = parse_number(field(*lat_col), "lat", row.line);
            raw.lon = parse_number(field(*lon_col), "lon", row.line);
        }
        if (gl_y_col && !trim(field(*gl_y_col)).empty()) {
            raw.rec.gl_y = parse_number(field(*gl_y_col), "gl_y_km", row.line);
        }
        kept.push_back(std::move(raw));
    }
    if (kept.empty()) {
        throw IngestError(0, "no stops for route " + route_id);
    }
    if (!chainage_col) {
        const RouteAxis ax = axis.value_or(RouteAxis{kept.front().lat, kept.front().lon, kept.back().lat, kept.back().lon});
        for (auto& raw : kept) {
            raw.rec.chainage = project_chainage(ax, raw.lat, raw.lon);
        }
    }
    std::vector<StopRecord> out;
    out.reserve(kept.size());
    for (auto& raw : kept) {
        out.push_back(std::move(raw.rec));
    }
    return out;
}

std::vector<StopRecord> parse_boardings(const std::filesystem::path& path, const std::string& route_id,
                                        std::optional<RouteAxis> axis) {
    std::ifstream in(path);
    if (!in) {
        throw IngestError(0, "cannot read " + path.string());
    }
    return parse_boardings(in, route_id, axis);
}

std::optional<CaseDefaults> case_preset(const std::string& name) {
    CaseDefaults d;
    d.name = name;
    d.service.v_d = 30.0;
    d.service.t_s = units::minutes(0.33);
    d.service.t_s_prime = units::minutes(0.4);
    if (name == "cta126") {
        d.service.lambda = 80.0;
        d.service.headway = units::minutes(15);
        d.service.s_o = units::minutes(3);
        d.gl_y = 0.2;
        return d;
    }
    if (name == "cta84") {
        d.service.lambda = 50.0;
        d.service.headway = units::minutes(20);
        d.service.s_o = units::minutes(12);
        d.gl_y = 0.8;
        return d;
    }
    return std::nullopt;
}

Scenario build_route_model(std::vector<StopRecord> records, const CaseDefaults& defaults) {
    std::stable_sort(records.begin(), records.end(),
                     [](const StopRecord& a, const StopRecord& b) { return a.chainage < b.chainage; });
    std::vector<StopRecord> merged;
    for (auto& r : records) {
        if (!merged.empty() && std::abs(merged.back().chainage - r.chainage) < 1e-9) {
            merged.back().boardings += r.boardings;
            if (!merged.back().gl_y) {
                merged.back().gl_y = r.gl_y;
            }
            continue;
        }
        merged.push_back(std::move(r));
    }
    if (merged.size() < 2) {
        throw IngestError(0, "a route model needs at least two stops");
    }
    if (merged.front().chainage < 0.0) {
        throw IngestError(merged.front().line, "stop before the route start");
    }
    double total = 0.0;
    for (const auto& r : merged) {
        total += r.boardings;
    }
    if (!(total > 0.0)) {
        throw IngestError(0, "all boardings are zero");
    }

    Scenario sc;
    sc.name = defaults.name;
    sc.cost = defaults.cost;
    sc.service = defaults.service;
    auto& g = sc.grid;
    g.l_x = defaults.l_x;
    g.l_y = defaults.l_y;
    g.gl_x = merged.back().chainage;
    g.d_xs = g.gl_x / static_cast<double>(merged.size());
    const bool per_stop = std::any_of(merged.begin(), merged.end(), [](const StopRecord& r) { return r.gl_y.has_value(); });
    g.gl_y.clear();
    for (const auto& r : merged) {
        g.stop_chainages.push_back(r.chainage);
        g.stop_weights.push_back(r.boardings / total);
        if (per_stop) {
            g.gl_y.push_back(r.gl_y.value_or(defaults.gl_y));
        }
    }
    if (!per_stop) {
        g.gl_y = {defaults.gl_y};
    }
    return sc;
}

} // namespace amsod::ingest
