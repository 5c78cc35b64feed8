#include "run_config.hpp"

#include "merodyn/dimension.hpp"
#include "merodyn/error.hpp"
#include "merodyn/hyperbolicity.hpp"
#include "merodyn/render.hpp"
#include "merodyn/symbolic.hpp"
#include "merodyn/transfer.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace merodyn;
using namespace merodyn::cli;
namespace fs = std::filesystem;

namespace {

struct Output {
    fs::path dir;
    std::vector<std::string> files;

    std::ofstream open(const std::string& name) {
        files.push_back(name);
        std::ofstream os(dir / name, std::ios::binary);
        if (!os) throw Error(ErrorCode::InvalidArgument, "cannot write " + (dir / name).string());
        return os;
    }
    void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }
};

json point_json(const SpherePoint& p) { return p.is_infinity() ? json("inf") : complex_to_json(p.raw()); }

json classification_json(const HyperbolicityReport& r) {
    json cycles = json::array();
    for (const auto& c : r.attracting_cycles) {
        json pts = json::array();
        for (const auto& p : c.points) pts.push_back(point_json(p));
        cycles.push_back({{"points", pts}, {"multiplier", c.multiplier}});
    }
    return {{"in_H_sphere", std::string(to_string(r.in_H_sphere))},
            {"in_H_plane", std::string(to_string(r.in_H_plane))},
            {"in_H_euclidean", std::string(to_string(r.in_H_euclidean))},
            {"post_singular_to_julia_distance", r.post_singular_to_julia_distance},
            {"sample_resolution", r.sample_resolution},
            {"attracting_cycles", cycles},
            {"evidence", r.evidence}};
}

json itinerary_json(const ItinerarySequence& s) {
    return {{"symbols", s.symbols},
            {"terminator", s.terminator == Terminator::Infinity ? "Infinity" : "None"},
            {"truncated_at", s.truncated_at ? json(*s.truncated_at) : json()},
            {"text", to_string(s)}};
}

json conjugacy_json(const JuliaSample& sample, const ConjugacyReport& r) {
    json its = json::array();
    for (std::size_t i = 0; i < sample.points.size(); ++i) {
        json e = itinerary_json(r.itineraries[i]);
        e["index"] = i;
        e["z"] = point_json(sample.points[i]);
        its.push_back(e);
    }
    json failures = json::array();
    for (const auto& f : r.failures) failures.push_back({{"index", f.index}, {"reason", f.reason}});
    json collisions = json::array();
    for (const auto& [a, b] : r.collisions) collisions.push_back({a, b});
    return {{"total", sample.points.size()},
            {"passes", r.passes},
            {"failures", failures},
            {"collisions", collisions},
            {"itineraries", its}};
}

json dimension_json(const DimensionReport& d) {
    json counts = json::array();
    for (const auto& [level, n] : d.box_count.counts) counts.push_back({level, n});
    return {{"s_bowen", d.s_bowen},
            {"bowen_residual", d.bowen_residual},
            {"bowen_depth", d.bowen_depth},
            {"base_point", complex_to_json(d.base_point)},
            {"ifs_lower", d.ifs_lower ? json(*d.ifs_lower) : json()},
            {"ifs_level", d.ifs_level},
            {"ifs_branches", d.ifs_branches},
            {"ifs_radius", d.ifs_radius},
            {"box_count", {{"dim", d.box_count.dim}, {"residual", d.box_count.residual}, {"counts", counts}}},
            {"raster",
             {{"center", complex_to_json(d.raster.viewport.center)},
              {"width", d.raster.viewport.width},
              {"height", d.raster.viewport.height},
              {"nx", d.raster.nx},
              {"ny", d.raster.ny}}},
            {"occupied_cells", d.occupied_cells},
            {"classification", classification_json(d.classification)},
            {"radial_note", std::string(to_string(d.radial_note))},
            {"verdict_consistent", d.verdict_consistent},
            {"notes", d.notes}};
}

const MapSpec& require_map(const RunConfig& c) {
    if (!c.map) throw Error(ErrorCode::ConfigError, "field 'map': missing");
    return *c.map;
}

int run_classify(const RunConfig& c, Output& out) {
    const auto& map = require_map(c);
    const auto sample = julia_sample(map, c.classify.sample_count, c.classify.sample_depth, c.seed);
    const auto r = classify(map, c.classify.horizon, sample);
    out.write_json("classification.json", classification_json(r));
    std::cout << "H(sphere): " << to_string(r.in_H_sphere) << "\nH(plane): " << to_string(r.in_H_plane)
              << "\nd(P(f), J): " << r.post_singular_to_julia_distance << '\n';
    const bool undetermined = r.in_H_sphere == Verdict::Undetermined || r.in_H_plane == Verdict::Undetermined;
    return undetermined ? 2 : 0;
}

int run_pressure(const RunConfig& c, Output& out) {
    const auto& map = require_map(c);
    const auto& p = c.pressure;
    const SpherePoint a = p.base_point ? SpherePoint(*p.base_point) : repelling_fixed_point(map);
    TreeOptions opts;
    opts.depth = p.depth;
    opts.branch_budget = p.budget;
    opts.max_level_nodes = p.max_level_nodes;
    opts.sampling_t = p.sampling_t;
    opts.seed = c.seed;
    const PressureEstimator est(map, a, opts);
    const auto curve = pressure_curve(est, p.t_values);
    const auto csv = to_csv(curve);
    out.open("pressure.csv") << csv;
    std::cout << csv;
    return 0;
}

int run_dim(const RunConfig& c, Output& out) {
    const auto d = dimension_report(require_map(c), c.dim);
    out.write_json("dimension.json", dimension_json(d));
    std::cout << "s_bowen: " << d.s_bowen << " (residual " << d.bowen_residual << ")\nbox dimension: "
              << d.box_count.dim << "\nifs lower bound: " << (d.ifs_lower ? std::to_string(*d.ifs_lower) : "none")
              << "\nconsistent: " << (d.verdict_consistent ? "yes" : "no") << '\n';
    return 0;
}

int run_render(const RunConfig& c, Output& out) {
    const auto& r = c.render;
    const auto grid = render_julia(require_map(c), r.viewport, r.nx, r.ny, r.probe);
    {
        auto os = out.open("julia.pgm");
        write_pgm(grid, os);
    }
    {
        auto os = out.open("occupancy.csv");
        write_occupancy_csv(grid, os);
    }
    std::cout << "occupied cells: " << grid.occupied_count() << " of " << grid.occupied.size() << '\n';
    return 0;
}

int run_code(const RunConfig& c, Output& out) {
    const auto& map = require_map(c);
    const SymbolicCoder coder(map, c.classify.horizon, c.seed);
    const auto sample = julia_sample(map, c.code.count, c.code.sample_depth, c.seed);
    const auto r = conjugacy_check(coder, sample, c.code.depth);
    json j{{"depth", c.code.depth}, {"julia", conjugacy_json(sample, r)}};
    bool all = r.failures.empty();
    for (std::size_t i = 0; i < sample.points.size(); ++i) std::cout << i << ' ' << to_string(r.itineraries[i]) << '\n';
    if (c.code.prepole_depth > 0) {
        const auto pre = prepole_sample(map, c.code.prepole_depth, c.code.prepole_budget);
        const auto rp = conjugacy_check(coder, pre, c.code.depth);
        j["prepoles"] = conjugacy_json(pre, rp);
        all = all && rp.failures.empty();
        std::cout << "prepoles: " << rp.passes << '/' << pre.points.size() << " pass\n";
    }
    out.write_json("itineraries.json", j);
    std::cout << "conjugacy: " << r.passes << '/' << sample.points.size() << " pass, " << r.collisions.size()
              << " collisions\n";
    return all ? 0 : 2;
}

int run_selftest(Output& out) {
    json checks = json::array();
    bool all = true;
    auto check = [&](const std::string& name, double value, double expected, double tol) {
        const bool pass = std::abs(value - expected) <= tol;
        all = all && pass;
        checks.push_back({{"name", name}, {"value", value}, {"expected", expected}, {"tolerance", tol}, {"pass", pass}});
        std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << value << " (expected " << expected << ")\n";
    };
    for (int d : {2, 3, 4}) {
        std::vector<cplx> coeffs(d + 1, 0.0);
        coeffs[d] = 1.0;
        const auto map = MapSpec::polynomial(coeffs);
        const std::string tag = "z^" + std::to_string(d);
        TreeOptions opts;
        opts.depth = 8;
        const PressureEstimator est(map, SpherePoint(1.0), opts);
        for (double t : {0.0, 0.5, 1.0, 1.5, 2.0})
            check(tag + " P(" + json(t).dump() + ")", est.at(t).P, (1.0 - t) * std::log(d), 1e-6);
        check(tag + " Bowen root", poincare_exponent(est, {0.5, 1.5}, 1e-6).s, 1.0, 1e-3);
        const auto eig = transfer_eigen(map, julia_sample(map, 128, 20, 1), 1.0, 20);
        check(tag + " eigenvalue at t=1", eig.eigenvalue_log, 0.0, 1e-6);
    }
    out.write_json("selftest.json", {{"checks", checks}, {"pass", all}});
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thermodynamic formalism toolkit for hyperbolic meromorphic maps"};
    app.set_version_flag("--version", std::string(MERODYN_VERSION));
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "random seed, overrides the config");
    app.add_option("--threads", threads, "worker threads, overrides THREADS")->check(CLI::PositiveNumber);
    app.fallthrough();
    for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
             {"classify", "hyperbolicity classification"},
             {"pressure", "pressure curve over a t grid"},
             {"dim", "dimension report"},
             {"render", "Julia set raster"},
             {"code", "itineraries and conjugacy check (tangent family)"},
             {"selftest", "analytic z^d oracle suite"}})
        app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    if (threads) {
        omp_set_num_threads(*threads);
    } else if (const char* env = std::getenv("THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) omp_set_num_threads(n);
    }

    try {
        RunConfig config = config_path.empty() ? parse_config("{}") : load_config(config_path);
        if (seed) {
            config.seed = *seed;
            config.dim.seed = *seed;
        }
        Output out{out_dir, {}};
        fs::create_directories(out.dir);
        int status = 0;
        if (command == "classify") status = run_classify(config, out);
        else if (command == "pressure") status = run_pressure(config, out);
        else if (command == "dim") status = run_dim(config, out);
        else if (command == "render") status = run_render(config, out);
        else if (command == "code") status = run_code(config, out);
        else status = run_selftest(out);
        auto files = out.files;
        out.write_json("manifest.json", {{"tool", "merodyn"},
                                         {"version", MERODYN_VERSION},
                                         {"command", command},
                                         {"config", resolved_config(config)},
                                         {"outputs", files}});
        return status;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.is_inconclusive() ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
