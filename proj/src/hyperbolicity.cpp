#include "merodyn/hyperbolicity.hpp"

#include "merodyn/error.hpp"
#include "merodyn/nearest.hpp"
#include "merodyn/preimages.hpp"
#include "merodyn/roots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace merodyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEscapeRadius = 1e6;

bool point_order(const SpherePoint& a, const SpherePoint& b) {
    if (a.is_infinity() || b.is_infinity()) return b.is_infinity() && !a.is_infinity();
    const double ra = std::abs(a.raw()), rb = std::abs(b.raw());
    if (std::abs(ra - rb) > 1e-9 * std::max(1.0, ra)) return ra < rb;
    return std::arg(a.raw()) < std::arg(b.raw());
}

std::vector<SpherePoint> fixed_points(const MapSpec& map) {
    std::vector<SpherePoint> out;
    if (map.family() == Family::Rational) {
        // N(z) - z D(z)
        const auto& num = map.num();
        const auto& den = map.den();
        std::vector<cplx> poly(std::max(num.size(), den.size() + 1), cplx(0.0));
        for (std::size_t i = 0; i < num.size(); ++i) poly[i] += num[i];
        for (std::size_t i = 0; i < den.size(); ++i) poly[i + 1] -= den[i];
        for (const cplx r : polynomial_roots(poly)) out.emplace_back(r);
        if (eval(map, SpherePoint::infinity()).is_infinity()) out.push_back(SpherePoint::infinity());
        return out;
    }
    // Newton on f(z) - z from a grid
    const double R = 8.0;
    const int m = 17;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            cplx z(-R + 2 * R * i / (m - 1), -R + 2 * R * j / (m - 1));
            bool ok = false;
            for (int it = 0; it < 60; ++it) {
                if (is_pole(map, z)) break;
                const SpherePoint fz = eval(map, z);
                if (fz.is_infinity()) break;
                const cplx g = fz.raw() - z;
                if (std::abs(g) < 1e-13 * (1.0 + std::abs(z))) {
                    ok = true;
                    break;
                }
                const cplx dg = derivative(map, z) - 1.0;
                if (std::abs(dg) == 0.0) break;
                cplx step = g / dg;
                if (std::abs(step) > 1.0) step /= std::abs(step);
                z -= step;
                if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > 1e3) break;
            }
            if (!ok) continue;
            bool dup = false;
            for (const auto& q : out) dup |= std::abs(q.raw() - z) < 1e-8 * (1.0 + std::abs(z));
            if (!dup) out.emplace_back(z);
        }
    }
    return out;
}

struct Chain {
    std::vector<SpherePoint> points;  // points[0] = seed, points[k] = k-th backward step
    std::vector<double> log_fx;       // log f^x at points[k], k >= 1
};

bool shadows_chain(const MapSpec& map, const Chain& c) {
    const int depth = static_cast<int>(c.points.size()) - 1;
    SpherePoint z = c.points[depth];
    double amplification = 0.0;
    for (int k = depth; k >= 1; --k) {
        amplification += c.log_fx[k];
        if (k < depth && amplification > std::log(1e8)) break;
        z = eval(map, z);
        if (chordal_distance(z, c.points[k - 1]) > 1e-6) return false;
    }
    return true;
}

double least_squares_slope(const std::vector<std::pair<int, double>>& xy, double* intercept) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xy.size());
    for (const auto& [x, y] : xy) {
        sx += x;
        sy += y;
        sxx += static_cast<double>(x) * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if (intercept) *intercept = (sy - slope * sx) / n;
    return slope;
}

template <class StepLog>
ExpansionEstimate expansion_impl(const MapSpec& map, const JuliaSample& sample, int max_depth, StepLog step_log) {
    if (max_depth < 1) throw Error(ErrorCode::InvalidArgument, "max_depth must be positive");
    if (sample.points.empty()) throw Error(ErrorCode::InvalidArgument, "empty sample");
    const long count = static_cast<long>(sample.points.size());
    std::vector<std::vector<double>> per_point(count, std::vector<double>(max_depth + 1, kInf));
#pragma omp parallel for schedule(static)
    for (long i = 0; i < count; ++i) {
        SpherePoint z = sample.points[i];
        double cum = 0.0;
        per_point[i][0] = 0.0;
        for (int n = 1; n <= max_depth; ++n) {
            if (z.is_infinity() && map.is_transcendental()) break;
            if (map.is_transcendental() && is_pole(map, z)) break;
            double lv;
            try {
                lv = step_log(z);
            } catch (const Error&) {
                break;
            }
            if (!std::isfinite(lv)) break;
            cum += lv;
            per_point[i][n] = cum;
            z = eval(map, z);
        }
    }
    ExpansionEstimate est;
    for (int n = 0; n <= max_depth; ++n) {
        double m = kInf;
        for (long i = 0; i < count; ++i) m = std::min(m, per_point[i][n]);
        if (std::isfinite(m)) est.per_depth_minima.emplace_back(n, m);
    }
    if (est.per_depth_minima.size() < 3)
        throw Error(ErrorCode::DegenerateFit, std::to_string(est.per_depth_minima.size()) + " usable depths");
    est.slope = least_squares_slope(est.per_depth_minima, &est.intercept);
    est.lambda_hat = std::exp(est.slope);
    est.c_hat = std::exp(est.intercept);
    return est;
}

}  // namespace

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Yes: return "Yes";
        case Verdict::No: return "No";
        case Verdict::Undetermined: return "Undetermined";
    }
    return "?";
}

SpherePoint repelling_fixed_point(const MapSpec& map) {
    std::vector<SpherePoint> repelling;
    for (const auto& z : fixed_points(map)) {
        const auto d = spherical_derivative(map, z);
        if (!d.is_zero && d.log_value > 1e-9) repelling.push_back(z);
    }
    if (repelling.empty()) throw Error(ErrorCode::NoRepellingSeed, "no repelling fixed point in the search region");
    return *std::min_element(repelling.begin(), repelling.end(), point_order);
}

JuliaSample julia_sample(const MapSpec& map, int count, int depth, std::uint64_t seed, int budget) {
    if (count < 1 || depth < 1) throw Error(ErrorCode::InvalidArgument, "count and depth must be positive");
    const SpherePoint start = repelling_fixed_point(map);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    JuliaSample out;
    out.method = InverseIteration{start, depth};
    const int max_attempts = 20 * count;
    int attempts = 0;
    while (static_cast<int>(out.points.size()) < count) {
        if (++attempts > max_attempts)
            throw Error(ErrorCode::NotConverged, "backward orbits keep failing the forward check");
        Chain c;
        c.points.push_back(start);
        c.log_fx.push_back(0.0);
        bool ok = true;
        for (int k = 0; k < depth && ok; ++k) {
            const auto set = preimages(map, c.points.back(), budget);
            std::vector<double> w;
            double top = -kInf;
            for (const auto& b : set.branches) top = std::max(top, b.fx_zero ? -kInf : -b.log_fx);
            double total = 0.0;
            for (const auto& b : set.branches) {
                w.push_back(b.fx_zero ? 0.0 : std::exp(-b.log_fx - top));
                total += w.back();
            }
            if (!(total > 0.0)) {
                ok = false;
                break;
            }
            double u = unif(rng) * total;
            std::size_t pick = 0;
            while (pick + 1 < w.size() && u >= w[pick]) u -= w[pick++];
            c.points.push_back(set.branches[pick].point);
            c.log_fx.push_back(set.branches[pick].log_fx);
        }
        if (!ok || !shadows_chain(map, c)) continue;
        out.points.push_back(c.points.back());
    }
    out.count = count;
    return out;
}

JuliaSample prepole_sample(const MapSpec& map, int depth, int budget) {
    if (depth < 1 || budget < 1) throw Error(ErrorCode::InvalidArgument, "depth and budget must be positive");
    std::vector<SpherePoint> level;
    for (const auto& b : preimages(map, SpherePoint::infinity(), budget).branches)
        if (b.point.is_finite()) level.push_back(b.point);
    if (level.empty()) throw Error(ErrorCode::InvalidArgument, "map has no finite poles");
    JuliaSample out;
    out.points = level;
    for (int k = 1; k < depth; ++k) {
        std::vector<SpherePoint> next;
        for (const auto& p : level)
            for (const auto& b : preimages(map, p, budget).branches)
                if (b.point.is_finite()) next.push_back(b.point);
        out.points.insert(out.points.end(), next.begin(), next.end());
        level = std::move(next);
    }
    out.method = PrepoleClosure{depth};
    out.count = static_cast<int>(out.points.size());
    return out;
}

std::vector<SpherePoint> post_singular_orbit(const MapSpec& map, int horizon) {
    if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
    const auto sing = singular_values(map);
    std::vector<SpherePoint> out;
    auto add = [&](const SpherePoint& v) {
        const auto rec = orbit(map, v, horizon, kEscapeRadius);
        const auto* hit = std::get_if<OrbitHitPole>(&rec.terminal);
        const std::size_t keep = hit ? static_cast<std::size_t>(hit->step) : rec.points.size();
        out.insert(out.end(), rec.points.begin(), rec.points.begin() + keep);
    };
    for (const auto& v : sing.critical_values) add(v);
    for (const auto& v : sing.asymptotic_values) add(v);
    return out;
}

HyperbolicityReport classify(const MapSpec& map, int horizon, const JuliaSample& sample) {
    if (sample.points.empty()) throw Error(ErrorCode::InvalidArgument, "empty Julia sample");
    HyperbolicityReport rep;
    std::ostringstream ev;
    ev.precision(6);
    const auto sing = singular_values(map);
    std::vector<SpherePoint> values = sing.critical_values;
    values.insert(values.end(), sing.asymptotic_values.begin(), sing.asymptotic_values.end());

    bool violation = false, undecided = false;
    std::vector<SpherePoint> post;
    for (const auto& v : values) {
        const auto rec = orbit(map, v, horizon, kEscapeRadius);
        std::size_t keep = rec.points.size();
        if (const auto* cyc = std::get_if<OrbitCycle>(&rec.terminal)) {
            const double mult = cycle_multiplier(map, cyc->points);
            if (mult < 1.0 - 1e-6) {
                bool known = false;
                for (const auto& c : rep.attracting_cycles)
                    for (const auto& q : c.points) known |= chordal_distance(q, cyc->points[0]) < 1e-6;
                if (!known) rep.attracting_cycles.push_back({cyc->points, mult});
            } else {
                violation = true;
                ev << "singular orbit lands on a non-attracting cycle (multiplier " << mult << "); ";
            }
        } else if (const auto* hit = std::get_if<OrbitHitPole>(&rec.terminal)) {
            keep = static_cast<std::size_t>(hit->step);
            violation = true;
            ev << "singular value is a prepole (step " << hit->step << "); ";
        } else if (std::holds_alternative<OrbitEscaped>(rec.terminal)) {
            if (map.is_transcendental()) {
                violation = true;
                ev << "singular orbit escapes; ";
            } else {
                const SpherePoint inf = SpherePoint::infinity();
                const auto d = spherical_derivative(map, inf);
                if (eval(map, inf).is_infinity() && (d.is_zero || d.log_value < 0.0)) {
                    bool known = false;
                    for (const auto& c : rep.attracting_cycles) known |= c.points[0].is_infinity();
                    if (!known) rep.attracting_cycles.push_back({{inf}, d.is_zero ? 0.0 : std::exp(d.log_value)});
                } else {
                    undecided = true;
                    ev << "singular orbit leaves every bounded region without an attracting infinity; ";
                }
            }
        } else {
            undecided = true;
            ev << "singular orbit undecided after " << horizon << " steps; ";
        }
        post.insert(post.end(), rec.points.begin(), rec.points.begin() + keep);
    }

    const SphereIndex index(sample.points);
    rep.sample_resolution = index.mean_spacing();
    double dist = kInf;
    for (const auto& p : post) {
        if (map.is_transcendental() && p.is_infinity()) continue;
        dist = std::min(dist, index.nearest_distance(p));
    }
    if (map.is_transcendental()) {
        // the point at infinity belongs to the closed Julia set on the sphere
        for (const auto& p : post) dist = std::min(dist, chordal_distance(p, SpherePoint::infinity()));
    }
    rep.post_singular_to_julia_distance = dist;
    const bool far = dist > 3.0 * rep.sample_resolution;
    ev << "distance " << dist << " vs resolution " << rep.sample_resolution << "; ";

    Verdict plane;
    if (violation) plane = Verdict::No;
    else if (undecided || !far) plane = Verdict::Undetermined;
    else plane = Verdict::Yes;
    rep.in_H_plane = plane;

    if (map.is_transcendental()) {
        bool infinity_singular = sing.infinity_is_asymptotic;
        for (const auto& v : sing.critical_values) infinity_singular |= v.is_infinity();
        if (infinity_singular) ev << "infinity is a singular value; ";
        rep.in_H_sphere = infinity_singular ? Verdict::No : plane;
    } else {
        rep.in_H_sphere = plane;
    }

    if (plane == Verdict::Yes) {
        try {
            const auto eu = euclidean_expansion_estimate(map, sample, 10);
            rep.in_H_euclidean = eu.slope > 0.0 ? Verdict::Yes : Verdict::Undetermined;
            ev << "euclidean expansion slope " << eu.slope << "; ";
        } catch (const Error&) {
            rep.in_H_euclidean = Verdict::Undetermined;
        }
    } else {
        rep.in_H_euclidean = plane;
    }
    rep.evidence = ev.str();
    if (!rep.evidence.empty() && rep.evidence.back() == ' ') rep.evidence.resize(rep.evidence.size() - 2);
    return rep;
}

ExpansionEstimate expansion_estimate(const MapSpec& map, const JuliaSample& sample, int max_depth) {
    return expansion_impl(map, sample, max_depth, [&](const SpherePoint& z) {
        const auto d = spherical_derivative(map, z);
        return d.is_zero ? -kInf : d.log_value;
    });
}

ExpansionEstimate euclidean_expansion_estimate(const MapSpec& map, const JuliaSample& sample, int max_depth) {
    return expansion_impl(map, sample, max_depth, [&](const SpherePoint& z) {
        if (z.is_infinity()) return kInf;
        return std::log(std::abs(derivative(map, z)));
    });
}

}  // namespace merodyn
