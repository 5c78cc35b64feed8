#include "merodyn/dimension.hpp"
#include "merodyn/error.hpp"
#include "merodyn/hyperbolicity.hpp"
#include "merodyn/symbolic.hpp"
#include "merodyn/transfer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace merodyn;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

MapSpec monomial(int d) {
    std::vector<cplx> c(d + 1, 0.0);
    c[d] = 1.0;
    return MapSpec::polynomial(c);
}

std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> out;
    for (int i = 0; lo + i * step <= hi + 1e-12; ++i) out.push_back(lo + i * step);
    return out;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("threw ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << title << "): " << o.detail << std::endl;
}

// shared results
std::vector<PressureCurve> curves;
std::optional<DimensionReport> quadratic_report;
std::optional<DimensionReport> tangent_report;
double z2_root = NAN;

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * (i + j) + 1.0;
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

int main() {
    report(1, "analytic pressure of z^d", [] {
        const auto t0 = Clock::now();
        double worst = 0.0;
        for (int d : {2, 3, 4}) {
            const auto map = monomial(d);
            TreeOptions opts;
            opts.depth = 8;
            const PressureEstimator est(map, repelling_fixed_point(map), opts);
            const auto c = pressure_curve(est, {0.0, 0.5, 1.0, 1.5, 2.0});
            for (std::size_t i = 0; i < c.t_values.size(); ++i)
                worst = std::max(worst, std::abs(c.P_values[i] - (1.0 - c.t_values[i]) * std::log(d)));
            curves.push_back(c);
        }
        const double secs = seconds_since(t0);
        return Outcome{worst < 1e-6 && secs < 5.0, "max error " + fmt(worst) + ", " + fmt(secs) + " s"};
    });

    report(2, "Bowen root of z^d", [] {
        const auto t0 = Clock::now();
        double worst = 0.0;
        for (int d : {2, 3}) {
            const auto map = monomial(d);
            TreeOptions opts;
            opts.depth = 10;
            const PressureEstimator est(map, repelling_fixed_point(map), opts);
            const auto root = poincare_exponent(est, {0.5, 1.5}, 1e-9);
            if (d == 2) z2_root = root.s;
            worst = std::max(worst, std::abs(root.s - 1.0));
            curves.push_back(pressure_curve(est, grid(0.5, 1.5, 0.25)));
        }
        const double secs = seconds_since(t0);
        return Outcome{worst < 1e-3 && secs < 10.0, "max |s - 1| " + fmt(worst) + ", " + fmt(secs) + " s"};
    });

    report(3, "z^2 + 0.1 Bowen root against box counting", [] {
        const auto map = MapSpec::polynomial({0.1, 0.0, 1.0});
        DimensionConfig cfg;
        quadratic_report = dimension_report(map, cfg);
        const auto& r = *quadratic_report;
        TreeOptions opts;
        opts.depth = r.bowen_depth;
        opts.sampling_t = r.s_bowen;
        curves.push_back(pressure_curve(PressureEstimator(map, r.base_point, opts), grid(0.8, 1.2, 0.1)));
        const double gap = std::abs(r.s_bowen - r.box_count.dim);
        return Outcome{gap < 0.05 && r.s_bowen > 1.0 && r.s_bowen < 1.02 && r.raster.nx == 2048 && r.raster.ny == 2048,
                       "s = " + fmt(r.s_bowen) + ", box = " + fmt(r.box_count.dim) + " at " +
                           std::to_string(r.raster.nx) + "x" + std::to_string(r.raster.ny)};
    });

    report(4, "tangent sandwich", [] {
        const auto map = MapSpec::tangent(0.5);
        const auto t0 = Clock::now();
        tangent_report = dimension_report(map, DimensionConfig{});
        const double secs = seconds_since(t0);
        const auto& r = *tangent_report;
        TreeOptions opts;
        opts.depth = r.bowen_depth;
        curves.push_back(pressure_curve(PressureEstimator(map, r.base_point, opts), grid(0.6, 1.0, 0.1)));
        const bool in_range = r.s_bowen > 0.5 && r.s_bowen < 1.0;
        const bool ifs_ok = r.ifs_lower && *r.ifs_lower <= r.s_bowen + 0.02;
        const double gap = std::abs(r.s_bowen - r.box_count.dim);
        return Outcome{in_range && ifs_ok && gap < 0.05 && secs < 120.0,
                       "s = " + fmt(r.s_bowen) + ", ifs = " + (r.ifs_lower ? fmt(*r.ifs_lower) : "none") +
                           ", box = " + fmt(r.box_count.dim) + ", " + fmt(secs) + " s"};
    });

    report(5, "base-point independence", [] {
        const auto map = MapSpec::tangent(0.5);
        const auto bases = julia_sample(map, 5, 30, 1);
        std::vector<PressureCurve> cs;
        for (const auto& a : bases.points) cs.push_back(pressure_curve(PressureEstimator(map, a, {}), {0.6, 0.7, 0.8}));
        double worst = -INFINITY;
        for (std::size_t i = 0; i < cs.size(); ++i)
            for (std::size_t j = i + 1; j < cs.size(); ++j)
                for (std::size_t k = 0; k < 3; ++k) {
                    const double diff = std::abs(cs[i].P_values[k] - cs[j].P_values[k]);
                    const double allowed = 5e-3 + cs[i].fit_residuals[k] + cs[j].fit_residuals[k];
                    worst = std::max(worst, diff - allowed);
                }
        curves.insert(curves.end(), cs.begin(), cs.end());
        return Outcome{worst < 0.0, "largest excess over the allowance " + fmt(worst)};
    });

    report(6, "monotone and convex pressure curves", [] {
        int bad = 0;
        for (const auto& c : curves) {
            const auto& P = c.P_values;
            const auto& r = c.fit_residuals;
            for (std::size_t i = 0; i + 1 < P.size(); ++i)
                if (P[i + 1] > P[i] + 2.0 * (r[i] + r[i + 1])) ++bad;
            for (std::size_t i = 1; i + 1 < P.size(); ++i)
                if (P[i] > 0.5 * (P[i - 1] + P[i + 1]) + 2.0 * (r[i - 1] + r[i] + r[i + 1])) ++bad;
        }
        return Outcome{bad == 0 && curves.size() == 12,
                       std::to_string(curves.size()) + " curves, " + std::to_string(bad) + " violations"};
    });

    report(7, "expansion constants", [] {
        const auto z2 = monomial(2);
        const auto e2 = expansion_estimate(z2, julia_sample(z2, 500, 30, 1), 10);
        const auto tan = MapSpec::tangent(0.5);
        const auto et = expansion_estimate(tan, julia_sample(tan, 500, 30, 1), 10);
        double worst = INFINITY;
        for (const auto& [n, v] : et.per_depth_minima) worst = std::min(worst, v - (et.intercept + et.slope * n));
        const bool ok = std::abs(e2.lambda_hat - 2.0) < 1e-6 && et.slope > 0.0 && worst >= -0.2;
        return Outcome{ok, "z^2 lambda = " + fmt(e2.lambda_hat) + "; tangent slope = " + fmt(et.slope) +
                               ", lowest minimum relative to the line " + fmt(worst)};
    });

    report(8, "distortion without growth", [] {
        const auto map = MapSpec::tangent(0.5);
        const auto res = distortion_check(map, repelling_fixed_point(map), 6, 0.7, 200);
        std::vector<double> n, k;
        std::string list;
        for (const auto& r : res) {
            n.push_back(r.n);
            k.push_back(r.k_hat);
            list += (list.empty() ? "" : " ") + fmt(r.k_hat);
        }
        const double rho = spearman(n, k);
        return Outcome{std::abs(rho) < 0.5, "K = [" + list + "], rho = " + fmt(rho)};
    });

    report(9, "shift conjugacy", [] {
        const SymbolicCoder coder(MapSpec::tangent(0.5));
        const auto r = conjugacy_check(coder, julia_sample(coder.map(), 200, 30, 1), 12);
        // prepoles of order k are the points added by the k-th closure step
        bool prepoles_ok = true;
        std::size_t checked = 0, prev = 0;
        for (int order = 1; order <= 3; ++order) {
            const auto pre = prepole_sample(coder.map(), order, 5);
            for (std::size_t i = prev; i < pre.points.size(); ++i, ++checked) {
                const auto s = coder.itinerary(pre.points[i], 12);
                prepoles_ok = prepoles_ok && s.terminator == Terminator::Infinity &&
                              s.symbols.size() == static_cast<std::size_t>(order);
            }
            const auto pr = conjugacy_check(coder, pre, 12);
            prepoles_ok = prepoles_ok && pr.failures.empty();
            prev = pre.points.size();
        }
        return Outcome{r.passes == 200 && prepoles_ok,
                       std::to_string(r.passes) + "/200 pass, " + std::to_string(r.collisions.size()) +
                           " collisions, " + std::to_string(checked) + " prepoles " +
                           (prepoles_ok ? "infinity-terminated" : "with violations")};
    });

    report(10, "eigenfunction at the Bowen root", [] {
        const auto z2 = monomial(2);
        const auto e2 = transfer_eigen(z2, julia_sample(z2, 400, 30, 1), z2_root, 40);
        double h_err = 0.0;
        for (double h : e2.eigenfunction_values) h_err = std::max(h_err, std::abs(h - 1.0));
        const auto tan = MapSpec::tangent(0.5);
        const double s = tangent_report ? tangent_report->s_bowen : NAN;
        const auto et = transfer_eigen(tan, julia_sample(tan, 400, 30, 1), s, 60);
        const bool ok = std::abs(e2.eigenvalue_log) < 1e-6 && h_err < 1e-6 && std::abs(et.eigenvalue_log) < 1e-2;
        return Outcome{ok, "z^2 log eigenvalue " + fmt(e2.eigenvalue_log) + ", max |h - 1| " + fmt(h_err) +
                               "; tangent log eigenvalue " + fmt(et.eigenvalue_log) + " at s = " + fmt(s)};
    });

    report(11, "zero-area scaling", [] {
        if (!quadratic_report || !tangent_report) return Outcome{false, "dimension reports missing"};
        const auto& a = tangent_report->box_count;
        const auto& b = quadratic_report->box_count;
        const bool ok = a.dim < 1.9 && a.residual < 0.1 && b.dim < 1.9 && b.residual < 0.1;
        return Outcome{ok, "tangent " + fmt(a.dim) + " (residual " + fmt(a.residual) + "), z^2 + 0.1 " +
                               fmt(b.dim) + " (residual " + fmt(b.residual) + ")"};
    });

    report(12, "deterministic dim artifacts", [] {
        const auto dir = fs::temp_directory_path() / "merodyn_acceptance_dim";
        fs::remove_all(dir);
        fs::create_directories(dir);
        std::ofstream(dir / "config.json")
            << R"({"map": {"family": "tangent", "lambda": 0.5}, "seed": 3,
                  "dim": {"nx": 8192, "ny": 64, "box_levels": [1, 2, 3, 4, 5, 6]}})";
        for (const char* run : {"a", "b"}) {
            const std::string cmd = std::string(MERODYN_CLI) + " dim --config " + (dir / "config.json").string() +
                                    " --out " + (dir / run).string() + " > /dev/null";
            if (std::system(cmd.c_str()) != 0) return Outcome{false, "dim run failed"};
        }
        bool same = true;
        for (const char* f : {"dimension.json", "manifest.json"})
            same = same && slurp(dir / "a" / f) == slurp(dir / "b" / f) && !slurp(dir / "a" / f).empty();
        return Outcome{same, same ? "dimension.json and manifest.json identical" : "artifacts differ"};
    });

    std::cout << (12 - failures) << "/12 criteria pass" << std::endl;
    return failures == 0 ? 0 : 1;
}
