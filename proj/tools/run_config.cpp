#include "run_config.hpp"

#include "merodyn/error.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace merodyn::cli {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::ConfigError, "field '" + path + "': " + what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items())
        if (!ok.count(key)) fail(join(path, key), "unknown field");
}

double as_double(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

long long as_int(const json& j, const std::string& path, long long lo, long long hi) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "expected an integer");
    const auto v = j.get<long long>();
    if (v < lo || v > hi)
        fail(path, "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
}

cplx as_complex(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    fail(path, "expected a number or [re, im]");
}

std::vector<cplx> as_coefficients(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of coefficients");
    std::vector<cplx> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_complex(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

template <class F>
void opt(const json& j, const std::string& path, const char* key, F&& set) {
    if (j.contains(key)) set(j.at(key), join(path, key));
}

int as_pos(const json& j, const std::string& path) { return static_cast<int>(as_int(j, path, 1, 1 << 30)); }

std::vector<int> as_levels(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(static_cast<int>(as_int(j[i], path + "[" + std::to_string(i) + "]", 0, 30)));
    return out;
}

Viewport as_viewport(const json& j, const std::string& path) {
    check_keys(j, path, {"center", "width", "height"});
    Viewport v;
    opt(j, path, "center", [&](const json& x, const std::string& p) { v.center = as_complex(x, p); });
    opt(j, path, "width", [&](const json& x, const std::string& p) { v.width = as_double(x, p); });
    opt(j, path, "height", [&](const json& x, const std::string& p) { v.height = as_double(x, p); });
    return v;
}

void read_probe(const json& j, const std::string& path, Probe& probe) {
    opt(j, path, "max_steps", [&](const json& x, const std::string& p) { probe.max_steps = as_pos(x, p); });
    opt(j, path, "escape_radius", [&](const json& x, const std::string& p) { probe.escape_radius = as_double(x, p); });
    opt(j, path, "separation", [&](const json& x, const std::string& p) { probe.separation = as_double(x, p); });
}

json probe_to_json(const Probe& p) {
    return {{"max_steps", p.max_steps}, {"escape_radius", p.escape_radius}, {"separation", p.separation}};
}

json viewport_to_json(const Viewport& v) {
    return {{"center", complex_to_json(v.center)}, {"width", v.width}, {"height", v.height}};
}

json coefficients_to_json(const std::vector<cplx>& c) {
    json out = json::array();
    for (const auto& z : c) out.push_back(complex_to_json(z));
    return out;
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

int default_depth(const MapSpec& map) { return map.family() == Family::Rational ? 16 : 6; }

json complex_to_json(cplx z) {
    if (z.imag() == 0.0) return z.real();
    return json::array({z.real(), z.imag()});
}

MapSpec parse_map(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    if (!j.contains("family") || !j["family"].is_string()) fail(path + ".family", "expected a string");
    const auto family = j["family"].get<std::string>();
    const std::string name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "";
    auto need = [&](const char* key) -> const json& {
        if (!j.contains(key)) fail(join(path, key), "missing");
        return j.at(key);
    };
    try {
        if (family == "rational") {
            check_keys(j, path, {"family", "name", "numerator", "denominator"});
            return MapSpec::rational(as_coefficients(need("numerator"), join(path, "numerator")),
                                     as_coefficients(need("denominator"), join(path, "denominator")), name);
        }
        if (family == "polynomial") {
            check_keys(j, path, {"family", "name", "coefficients"});
            return MapSpec::polynomial(as_coefficients(need("coefficients"), join(path, "coefficients")), name);
        }
        if (family == "tangent") {
            check_keys(j, path, {"family", "name", "lambda"});
            return MapSpec::tangent(as_complex(need("lambda"), join(path, "lambda")), name);
        }
        if (family == "exponential") {
            check_keys(j, path, {"family", "name", "lambda"});
            return MapSpec::exponential(as_complex(need("lambda"), join(path, "lambda")), name);
        }
        if (family == "pole_series") {
            check_keys(j, path, {"family", "name", "p", "lambda", "n_max"});
            return MapSpec::pole_series(static_cast<int>(as_int(need("p"), join(path, "p"), 1, 64)),
                                        as_double(need("lambda"), join(path, "lambda")),
                                        static_cast<int>(as_int(need("n_max"), join(path, "n_max"), 1, 1 << 24)),
                                        name);
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        fail(path, e.what());
    }
    fail(path + ".family", "unknown family '" + family +
                               "' (expected rational, polynomial, tangent, exponential or pole_series)");
}

json map_to_json(const MapSpec& map) {
    json j;
    switch (map.family()) {
        case Family::Rational:
            j["family"] = "rational";
            j["numerator"] = coefficients_to_json(map.num());
            j["denominator"] = coefficients_to_json(map.den());
            break;
        case Family::Tangent:
            j["family"] = "tangent";
            j["lambda"] = complex_to_json(std::get<TangentParams>(map.params()).lambda);
            break;
        case Family::Exponential:
            j["family"] = "exponential";
            j["lambda"] = complex_to_json(std::get<ExponentialParams>(map.params()).lambda);
            break;
        case Family::PoleSeries: {
            const auto& p = std::get<PoleSeriesParams>(map.params());
            j["family"] = "pole_series";
            j["p"] = p.p;
            j["lambda"] = p.lambda;
            j["n_max"] = p.n_max;
            break;
        }
    }
    if (!map.name().empty()) j["name"] = map.name();
    return j;
}

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte);
        std::ostringstream os;
        os << "line " << line << ", column " << col << ": " << e.what();
        throw Error(ErrorCode::ConfigError, os.str());
    }
    check_keys(root, "", {"map", "seed", "classify", "pressure", "dim", "render", "code"});
    RunConfig c;
    if (root.contains("map")) c.map = parse_map(root["map"]);
    opt(root, "", "seed", [&](const json& x, const std::string& p) {
        if (!x.is_number_unsigned() && !(x.is_number_integer() && x.get<long long>() >= 0))
            fail(p, "expected a non-negative integer");
        c.seed = x.get<std::uint64_t>();
    });

    if (root.contains("classify")) {
        const auto& j = root["classify"];
        check_keys(j, "classify", {"horizon", "sample_count", "sample_depth"});
        opt(j, "classify", "horizon", [&](const json& x, const std::string& p) { c.classify.horizon = as_pos(x, p); });
        opt(j, "classify", "sample_count",
            [&](const json& x, const std::string& p) { c.classify.sample_count = as_pos(x, p); });
        opt(j, "classify", "sample_depth",
            [&](const json& x, const std::string& p) { c.classify.sample_depth = as_pos(x, p); });
    }

    if (root.contains("pressure")) {
        const auto& j = root["pressure"];
        auto& pp = c.pressure;
        check_keys(j, "pressure", {"t", "depth", "budget", "max_level_nodes", "sampling_t", "base_point"});
        opt(j, "pressure", "t", [&](const json& x, const std::string& p) {
            if (!x.is_array() || x.empty()) fail(p, "expected a non-empty array of numbers");
            pp.t_values.clear();
            for (std::size_t i = 0; i < x.size(); ++i)
                pp.t_values.push_back(as_double(x[i], p + "[" + std::to_string(i) + "]"));
        });
        opt(j, "pressure", "depth", [&](const json& x, const std::string& p) { pp.depth = as_pos(x, p); });
        opt(j, "pressure", "budget", [&](const json& x, const std::string& p) { pp.budget = as_pos(x, p); });
        opt(j, "pressure", "max_level_nodes",
            [&](const json& x, const std::string& p) { pp.max_level_nodes = as_pos(x, p); });
        opt(j, "pressure", "sampling_t", [&](const json& x, const std::string& p) { pp.sampling_t = as_double(x, p); });
        opt(j, "pressure", "base_point",
            [&](const json& x, const std::string& p) { pp.base_point = as_complex(x, p); });
    }

    if (root.contains("dim")) {
        const auto& j = root["dim"];
        auto& d = c.dim;
        check_keys(j, "dim", {"bracket", "tol", "depth", "budget", "max_level_nodes", "base_point", "horizon",
                              "sample_count", "sample_depth", "ifs_radius", "ifs_n_max", "viewport", "nx", "ny",
                              "probe", "box_levels", "box_tolerance", "ifs_tolerance"});
        opt(j, "dim", "bracket", [&](const json& x, const std::string& p) {
            if (!x.is_array() || x.size() != 2) fail(p, "expected [lo, hi]");
            d.bracket = {as_double(x[0], p + "[0]"), as_double(x[1], p + "[1]")};
        });
        opt(j, "dim", "tol", [&](const json& x, const std::string& p) { d.tol = as_double(x, p); });
        opt(j, "dim", "depth", [&](const json& x, const std::string& p) { d.depth = as_pos(x, p); });
        opt(j, "dim", "budget", [&](const json& x, const std::string& p) { d.budget = as_pos(x, p); });
        opt(j, "dim", "max_level_nodes",
            [&](const json& x, const std::string& p) { d.max_level_nodes = as_pos(x, p); });
        opt(j, "dim", "base_point", [&](const json& x, const std::string& p) { d.base_point = as_complex(x, p); });
        opt(j, "dim", "horizon", [&](const json& x, const std::string& p) { d.horizon = as_pos(x, p); });
        opt(j, "dim", "sample_count", [&](const json& x, const std::string& p) { d.sample_count = as_pos(x, p); });
        opt(j, "dim", "sample_depth", [&](const json& x, const std::string& p) { d.sample_depth = as_pos(x, p); });
        opt(j, "dim", "ifs_radius", [&](const json& x, const std::string& p) { d.ifs_radius = as_double(x, p); });
        opt(j, "dim", "ifs_n_max", [&](const json& x, const std::string& p) { d.ifs_n_max = as_pos(x, p); });
        opt(j, "dim", "viewport", [&](const json& x, const std::string& p) { d.viewport = as_viewport(x, p); });
        opt(j, "dim", "nx", [&](const json& x, const std::string& p) { d.nx = as_pos(x, p); });
        opt(j, "dim", "ny", [&](const json& x, const std::string& p) { d.ny = as_pos(x, p); });
        opt(j, "dim", "probe", [&](const json& x, const std::string& p) {
            check_keys(x, p, {"max_steps", "escape_radius", "separation"});
            read_probe(x, p, d.probe);
        });
        opt(j, "dim", "box_levels", [&](const json& x, const std::string& p) { d.box_levels = as_levels(x, p); });
        opt(j, "dim", "box_tolerance", [&](const json& x, const std::string& p) { d.box_tolerance = as_double(x, p); });
        opt(j, "dim", "ifs_tolerance", [&](const json& x, const std::string& p) { d.ifs_tolerance = as_double(x, p); });
    }

    bool render_viewport = false;
    if (root.contains("render")) {
        const auto& j = root["render"];
        auto& r = c.render;
        check_keys(j, "render", {"viewport", "nx", "ny", "max_steps", "escape_radius", "separation"});
        opt(j, "render", "viewport", [&](const json& x, const std::string& p) {
            r.viewport = as_viewport(x, p);
            render_viewport = true;
        });
        opt(j, "render", "nx", [&](const json& x, const std::string& p) { r.nx = as_pos(x, p); });
        opt(j, "render", "ny", [&](const json& x, const std::string& p) { r.ny = as_pos(x, p); });
        read_probe(j, "render", r.probe);
    }

    if (root.contains("code")) {
        const auto& j = root["code"];
        auto& k = c.code;
        check_keys(j, "code", {"count", "sample_depth", "depth", "prepole_depth", "prepole_budget"});
        opt(j, "code", "count", [&](const json& x, const std::string& p) { k.count = as_pos(x, p); });
        opt(j, "code", "sample_depth", [&](const json& x, const std::string& p) { k.sample_depth = as_pos(x, p); });
        opt(j, "code", "depth", [&](const json& x, const std::string& p) { k.depth = as_pos(x, p); });
        opt(j, "code", "prepole_depth",
            [&](const json& x, const std::string& p) { k.prepole_depth = static_cast<int>(as_int(x, p, 0, 8)); });
        opt(j, "code", "prepole_budget", [&](const json& x, const std::string& p) { k.prepole_budget = as_pos(x, p); });
    }

    // resolve the map-dependent defaults
    if (c.map) {
        const auto spec = default_raster(*c.map);
        if (!render_viewport) c.render.viewport = spec.viewport;
        if (c.render.nx == 0) c.render.nx = render_viewport ? 1024 : std::min(spec.nx, 4096);
        if (c.render.ny == 0) c.render.ny = render_viewport ? 1024 : std::min(spec.ny, 4096);
        if (!c.dim.viewport) c.dim.viewport = spec.viewport;
        if (c.dim.nx == 0) c.dim.nx = spec.nx;
        if (c.dim.ny == 0) c.dim.ny = spec.ny;
        if (c.dim.depth == 0) c.dim.depth = default_depth(*c.map);
        if (c.pressure.depth == 0) c.pressure.depth = default_depth(*c.map);
    }
    c.dim.seed = c.seed;
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

json resolved_config(const RunConfig& c) {
    json j;
    j["map"] = c.map ? map_to_json(*c.map) : json();
    j["seed"] = c.seed;
    j["classify"] = {{"horizon", c.classify.horizon},
                     {"sample_count", c.classify.sample_count},
                     {"sample_depth", c.classify.sample_depth}};
    const auto& p = c.pressure;
    j["pressure"] = {{"t", p.t_values},
                     {"depth", p.depth},
                     {"budget", p.budget},
                     {"max_level_nodes", p.max_level_nodes},
                     {"sampling_t", p.sampling_t},
                     {"base_point", p.base_point ? complex_to_json(*p.base_point) : json()}};
    const auto& d = c.dim;
    j["dim"] = {{"bracket", {d.bracket.first, d.bracket.second}},
                {"tol", d.tol},
                {"depth", d.depth},
                {"budget", d.budget},
                {"max_level_nodes", d.max_level_nodes},
                {"base_point", d.base_point ? complex_to_json(*d.base_point) : json()},
                {"horizon", d.horizon},
                {"sample_count", d.sample_count},
                {"sample_depth", d.sample_depth},
                {"ifs_radius", d.ifs_radius},
                {"ifs_n_max", d.ifs_n_max},
                {"viewport", d.viewport ? viewport_to_json(*d.viewport) : json()},
                {"nx", d.nx},
                {"ny", d.ny},
                {"probe", probe_to_json(d.probe)},
                {"box_levels", d.box_levels},
                {"box_tolerance", d.box_tolerance},
                {"ifs_tolerance", d.ifs_tolerance}};
    j["render"] = probe_to_json(c.render.probe);
    j["render"]["viewport"] = viewport_to_json(c.render.viewport);
    j["render"]["nx"] = c.render.nx;
    j["render"]["ny"] = c.render.ny;
    j["code"] = {{"count", c.code.count},
                 {"sample_depth", c.code.sample_depth},
                 {"depth", c.code.depth},
                 {"prepole_depth", c.code.prepole_depth},
                 {"prepole_budget", c.code.prepole_budget}};
    return j;
}

}  // namespace merodyn::cli
