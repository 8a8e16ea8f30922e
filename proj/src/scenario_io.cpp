#include "amsod/scenario_io.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

namespace amsod {

using nlohmann::json;

namespace {

enum class Dim { none, time, length, speed, rate, unit_cost };

struct Unit {
    const char* suffix;
    double factor; // multiply file value by this to get internal units
};

std::vector<Unit> units_of(Dim dim) {
    switch (dim) {
    case Dim::time: return {{"h", 1.0}, {"min", 1.0 / 60.0}, {"s", 1.0 / 3600.0}};
    case Dim::length: return {{"km", 1.0}, {"m", 1e-3}};
    case Dim::speed: return {{"kmh", 1.0}};
    case Dim::rate: return {{"per_h", 1.0}, {"per_min", 60.0}};
    case Dim::unit_cost: return {{"per_km", 1.0}, {"per_m", 1000.0}};
    case Dim::none: break;
    }
    return {};
}

const char* canonical_suffix(Dim dim) {
    switch (dim) {
    case Dim::time: return "_h";
    case Dim::length: return "_km";
    case Dim::speed: return "_kmh";
    case Dim::rate: return "_per_h";
    case Dim::unit_cost: return "_per_km";
    case Dim::none: break;
    }
    return "";
}

class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) {
            throw ConfigError(path_, "expected an object");
        }
    }

    std::optional<double> number(const std::string& base, Dim dim) {
        auto found = find(base, dim);
        if (!found) {
            return std::nullopt;
        }
        const auto& [key, factor] = *found;
        return to_double(obj_.at(key), key) * factor;
    }

    std::optional<std::vector<double>> numbers(const std::string& base, Dim dim) {
        auto found = find(base, dim);
        if (!found) {
            return std::nullopt;
        }
        const auto& [key, factor] = *found;
        const auto& value = obj_.at(key);
        std::vector<double> out;
        if (value.is_array()) {
            for (std::size_t i = 0; i < value.size(); ++i) {
                out.push_back(to_double(value[i], key + "[" + std::to_string(i) + "]") * factor);
            }
        } else {
            out.push_back(to_double(value, key) * factor);
        }
        return out;
    }

    std::optional<long long> integer(const std::string& key) {
        if (!obj_.contains(key)) {
            return std::nullopt;
        }
        used_.insert(key);
        const auto& v = obj_.at(key);
        if (!v.is_number_integer()) {
            throw ConfigError(path_ + "." + key, "expected an integer");
        }
        return v.get<long long>();
    }

    std::optional<std::uint64_t> unsigned_integer(const std::string& key) {
        if (!obj_.contains(key)) {
            return std::nullopt;
        }
        used_.insert(key);
        const auto& v = obj_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            throw ConfigError(path_ + "." + key, "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::optional<std::string> string(const std::string& key) {
        if (!obj_.contains(key)) {
            return std::nullopt;
        }
        used_.insert(key);
        if (!obj_.at(key).is_string()) {
            throw ConfigError(path_ + "." + key, "expected a string");
        }
        return obj_.at(key).get<std::string>();
    }

    void reject_unknown() const {
        for (const auto& item : obj_.items()) {
            if (!used_.count(item.key())) {
                throw ConfigError(path_ + "." + item.key(), "unknown field");
            }
        }
    }

private:
    std::optional<std::pair<std::string, double>> find(const std::string& base, Dim dim) {
        std::optional<std::pair<std::string, double>> hit;
        auto consider = [&](const std::string& key, double factor) {
            if (!obj_.contains(key)) {
                return;
            }
            if (hit) {
                throw ConfigError(path_ + "." + key, "conflicts with " + hit->first);
            }
            hit = std::make_pair(key, factor);
        };
        if (dim == Dim::none) {
            consider(base, 1.0);
        } else {
            for (const auto& u : units_of(dim)) {
                consider(base + "_" + u.suffix, u.factor);
            }
        }
        if (hit) {
            used_.insert(hit->first);
        }
        return hit;
    }

    double to_double(const json& v, const std::string& key) const {
        if (!v.is_number()) {
            throw ConfigError(path_ + "." + key, "expected a number");
        }
        return v.get<double>();
    }

    const json& obj_;
    std::string path_;
    std::set<std::string> used_;
};

const json& required_object(const json& doc, const char* name) {
    if (!doc.contains(name)) {
        throw ConfigError(name, "missing object \"" + std::string(name) + "\"");
    }
    return doc.at(name);
}

int to_int(long long v, const std::string& where) {
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ConfigError(where, "integer out of range");
    }
    return static_cast<int>(v);
}

CostParams read_cost(const json& obj) {
    ObjectReader r(obj, "cost");
    CostParams c;
    if (auto v = r.number("gamma_a", Dim::none)) c.gamma_a = *v;
    if (auto v = r.number("gamma_w", Dim::none)) c.gamma_w = *v;
    if (auto v = r.number("gamma_r", Dim::none)) c.gamma_r = *v;
    if (auto v = r.number("gamma_o", Dim::unit_cost)) c.gamma_o = *v;
    if (auto v = r.number("vot", Dim::rate)) c.vot = *v;
    r.reject_unknown();
    return c;
}

GridGeometry read_grid(const json& obj) {
    ObjectReader r(obj, "grid");
    GridGeometry g;
    if (auto v = r.number("l_x", Dim::length)) g.l_x = *v;
    if (auto v = r.number("l_y", Dim::length)) g.l_y = *v;
    if (auto v = r.number("gl_x", Dim::length)) g.gl_x = *v;
    if (auto v = r.numbers("gl_y", Dim::length)) g.gl_y = *v;
    if (auto v = r.number("d_xs", Dim::length)) g.d_xs = *v;
    if (auto v = r.numbers("stop_chainages", Dim::length)) {
        g.stop_chainages = *v;
    } else {
        g.stop_chainages = even_stop_chainages(g.gl_x, g.d_xs);
    }
    if (auto v = r.numbers("stop_weights", Dim::none)) {
        g.stop_weights = *v;
    } else if (!g.stop_chainages.empty()) {
        g.stop_weights.assign(g.stop_chainages.size(), 1.0 / static_cast<double>(g.stop_chainages.size()));
    }
    r.reject_unknown();
    return g;
}

ServiceConfig read_service(const json& obj) {
    ObjectReader r(obj, "service");
    ServiceConfig s;
    if (auto v = r.number("headway", Dim::time)) s.headway = *v;
    if (auto v = r.integer("capacity")) s.capacity = to_int(*v, "service.capacity");
    if (auto v = r.integer("n_parallel")) s.n_parallel = to_int(*v, "service.n_parallel");
    if (auto v = r.integer("n_zones")) s.n_zones = to_int(*v, "service.n_zones");
    if (auto v = r.number("v_d", Dim::speed)) s.v_d = *v;
    if (auto v = r.number("v_w", Dim::speed)) s.v_w = *v;
    if (auto v = r.number("v_h", Dim::speed)) s.v_h = *v;
    if (auto v = r.number("t_s", Dim::time)) s.t_s = *v;
    if (auto v = r.number("t_s_prime", Dim::time)) s.t_s_prime = *v;
    if (auto v = r.number("lambda", Dim::rate)) s.lambda = *v;
    if (auto v = r.number("s_o", Dim::time)) s.s_o = *v;
    if (auto v = r.number("horizon", Dim::time)) s.horizon = *v;
    if (auto v = r.numbers("warmup_window", Dim::time)) {
        if (v->size() != 2) {
            throw ConfigError("service.warmup_window", "expected [begin, end]");
        }
        s.warmup_window = {(*v)[0], (*v)[1]};
    }
    r.reject_unknown();
    return s;
}

RunConfig read_run(const json& obj) {
    ObjectReader r(obj, "run");
    RunConfig run;
    if (auto v = r.unsigned_integer("seed")) run.seed = *v;
    if (auto v = r.integer("replications")) run.replications = to_int(*v, "run.replications");
    if (auto v = r.integer("sensitivity_replications")) {
        run.sensitivity_replications = to_int(*v, "run.sensitivity_replications");
    }
    r.reject_unknown();
    return run;
}

std::string key(const char* base, Dim dim) { return std::string(base) + canonical_suffix(dim); }

} // namespace

Scenario scenario_from_json(const json& doc) {
    if (!doc.is_object()) {
        throw ConfigError("document", "expected a JSON object");
    }
    Scenario sc;
    for (const auto& item : doc.items()) {
        static const std::set<std::string> known{"name", "cost", "grid", "service", "run"};
        if (!known.count(item.key())) {
            throw ConfigError(item.key(), "unknown field");
        }
    }
    if (doc.contains("name")) {
        if (!doc.at("name").is_string()) {
            throw ConfigError("name", "expected a string");
        }
        sc.name = doc.at("name").get<std::string>();
    }
    sc.cost = read_cost(required_object(doc, "cost"));
    sc.grid = read_grid(required_object(doc, "grid"));
    sc.service = read_service(required_object(doc, "service"));
    sc.run = read_run(required_object(doc, "run"));
    return sc;
}

json scenario_to_json(const Scenario& sc) {
    json doc;
    doc["name"] = sc.name;

    const auto& c = sc.cost;
    doc["cost"] = {{"gamma_a", c.gamma_a},
                   {"gamma_w", c.gamma_w},
                   {"gamma_r", c.gamma_r},
                   {key("gamma_o", Dim::unit_cost), c.gamma_o},
                   {key("vot", Dim::rate), c.vot}};

    const auto& g = sc.grid;
    json grid = {{key("l_x", Dim::length), g.l_x},
                 {key("l_y", Dim::length), g.l_y},
                 {key("gl_x", Dim::length), g.gl_x},
                 {key("d_xs", Dim::length), g.d_xs},
                 {key("stop_chainages", Dim::length), g.stop_chainages},
                 {"stop_weights", g.stop_weights}};
    if (g.gl_y.size() == 1) {
        grid[key("gl_y", Dim::length)] = g.gl_y.front();
    } else {
        grid[key("gl_y", Dim::length)] = g.gl_y;
    }
    doc["grid"] = std::move(grid);

    const auto& s = sc.service;
    json svc = {{key("headway", Dim::time), s.headway},
                {"capacity", s.capacity},
                {"n_parallel", s.n_parallel},
                {"n_zones", s.n_zones},
                {key("v_d", Dim::speed), s.v_d},
                {key("v_w", Dim::speed), s.v_w},
                {key("t_s", Dim::time), s.t_s},
                {key("t_s_prime", Dim::time), s.t_s_prime},
                {key("lambda", Dim::rate), s.lambda},
                {key("s_o", Dim::time), s.s_o},
                {key("horizon", Dim::time), s.horizon},
                {key("warmup_window", Dim::time), {s.warmup_window.begin, s.warmup_window.end}}};
    if (s.v_h) {
        svc[key("v_h", Dim::speed)] = *s.v_h;
    }
    doc["service"] = std::move(svc);

    doc["run"] = {{"seed", sc.run.seed},
                  {"replications", sc.run.replications},
                  {"sensitivity_replications", sc.run.sensitivity_replications}};
    return doc;
}

Scenario parse_scenario_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw ConfigError("line " + std::to_string(line), e.what());
    }
    return scenario_from_json(doc);
}

Scenario parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string(), "cannot open scenario file");
    }
    std::ostringstream text;
    text << in.rdbuf();
    Scenario sc = parse_scenario_text(text.str());
    require_valid(sc);
    return sc;
}

void write_scenario(const Scenario& scenario, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << scenario_to_json(scenario).dump(2) << '\n';
}

} // namespace amsod
