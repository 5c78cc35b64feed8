#include "merodyn/dimension.hpp"

#include "merodyn/error.hpp"

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace merodyn {

namespace {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;
using BPoint = bg::model::point<double, 2, bg::cs::cartesian>;
using BBox = bg::model::box<BPoint>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kKoebe = 81.0;
constexpr double kAdmission = 4.0 * kKoebe;

double moran_sum(const std::vector<double>& b, double t) {
    double s = 0.0;
    for (double x : b) s += std::pow(x, t);
    return s;
}

struct Composite {
    cplx value;
    cplx derivative;
};

// f^N and (f^N)' at z; nullopt when the orbit meets a pole
std::optional<Composite> iterate_with_derivative(const MapSpec& map, cplx z, int N) {
    cplx d = 1.0;
    for (int k = 0; k < N; ++k) {
        if (is_pole(map, z)) return std::nullopt;
        d *= derivative(map, z);
        const SpherePoint w = eval(map, z);
        if (w.is_infinity()) return std::nullopt;
        z = w.raw();
    }
    return Composite{z, d};
}

// the inverse branch of f^N through z0 (f^N(z0) near w), evaluated at w
std::optional<cplx> inverse_branch(const MapSpec& map, cplx z0, cplx w, int N) {
    cplx z = z0;
    for (int it = 0; it < 40; ++it) {
        const auto c = iterate_with_derivative(map, z, N);
        if (!c || std::abs(c->derivative) == 0.0) return std::nullopt;
        const cplx step = (c->value - w) / c->derivative;
        z -= step;
        if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(z))) return z;
    }
    return std::nullopt;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y, double* intercept) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    *intercept = (sy - slope * sx) / n;
    return slope;
}

bool is_polynomial(const MapSpec& map) {
    if (map.family() != Family::Rational) return false;
    const auto& den = map.den();
    for (std::size_t i = 1; i < den.size(); ++i)
        if (den[i] != 0.0) return false;
    return true;
}

template <class F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        rethrow_with_context(e, name);
    }
}

}  // namespace

double moran_root(const std::vector<double>& ratios) {
    if (ratios.size() < 2) {
        std::ostringstream os;
        os << ratios.size() << " branches";
        throw Error(ErrorCode::TooFewBranches, os.str());
    }
    for (double b : ratios)
        if (!(b > 0.0 && b < 1.0)) throw Error(ErrorCode::InvalidArgument, "contraction ratios must lie in (0, 1)");
    double lo = 0.0, hi = 1.0;
    while (moran_sum(ratios, hi) > 1.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (moran_sum(ratios, mid) > 1.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

IFSBound ifs_lower_bound(const MapSpec& map, cplx a, double r, int N, const IFSOptions& options) {
    if (!(r > 0.0) || N < 1) throw Error(ErrorCode::InvalidArgument, "ifs_lower_bound needs r > 0 and N >= 1");
    TreeOptions topt;
    topt.depth = N;
    topt.branch_budget = options.budget;
    topt.max_level_nodes = options.max_level_nodes;
    topt.sampling_t = options.sampling_t;
    topt.seed = options.seed;
    const auto tree = build_tree(map, a, topt);

    IFSBound out;
    out.system.center = a;
    out.system.radius = r;
    out.system.level = N;
    std::vector<std::pair<IFSBranch, cplx>> admitted;  // with g(a)
    for (const auto& node : tree.levels[N]) {
        if (node.point.is_infinity() || std::abs(node.point.raw() - a) >= r) continue;
        ++out.candidates;
        // fixed point of the branch g with g(a) = node
        cplx z = node.point.raw();
        bool ok = true;
        for (int it = 0; it < 30; ++it) {
            const auto next = inverse_branch(map, z, z, N);
            if (!next || std::abs(*next - node.point.raw()) >= r) {
                ok = false;
                break;
            }
            const bool done = std::abs(*next - z) <= 1e-13 * std::max(1.0, std::abs(z));
            z = *next;
            if (done) break;
        }
        if (!ok) continue;
        const auto c = iterate_with_derivative(map, z, N);
        if (!c) continue;
        const double D = std::abs(c->derivative);
        if (!(D > kAdmission)) continue;
        IFSBranch b;
        b.fixed_point = z;
        b.derivative = D;
        b.b_lower = 1.0 / (kKoebe * D);
        b.b_upper = kKoebe / D;
        // g(B(a, r)) lies in B(g(a), b_upper r), which must stay inside B(a, r)
        if (std::abs(node.point.raw() - a) + b.b_upper * r >= r) continue;
        admitted.emplace_back(b, node.point.raw());
    }
    // smallest derivative first; an overlapping later branch is dropped
    std::stable_sort(admitted.begin(), admitted.end(),
                     [](const auto& x, const auto& y) { return x.first.derivative < y.first.derivative; });
    bgi::rtree<std::pair<BBox, std::size_t>, bgi::rstar<16>> accepted_index;
    std::vector<std::pair<cplx, double>> disks;
    for (const auto& [b, g_a] : admitted) {
        const double rad = b.b_upper * r;
        const BBox box(BPoint(g_a.real() - rad, g_a.imag() - rad), BPoint(g_a.real() + rad, g_a.imag() + rad));
        std::vector<std::pair<BBox, std::size_t>> hits;
        accepted_index.query(bgi::intersects(box), std::back_inserter(hits));
        bool overlap = false;
        for (const auto& h : hits) {
            const auto& [c2, r2] = disks[h.second];
            if (std::abs(c2 - g_a) < r2 + rad) {
                overlap = true;
                break;
            }
        }
        if (overlap) continue;
        accepted_index.insert({box, disks.size()});
        disks.emplace_back(g_a, rad);
        out.system.branches.push_back(b);
    }
    std::vector<double> ratios;
    for (const auto& b : out.system.branches) ratios.push_back(b.b_lower);
    out.t0 = moran_root(ratios);
    return out;
}

BoxCount box_counting(const RasterGrid& raster, const std::vector<int>& levels) {
    if (levels.size() < 4) throw Error(ErrorCode::InvalidArgument, "box counting needs at least 4 scales");
    if (raster.occupied_count() == 0) throw Error(ErrorCode::DegenerateRaster, "no occupied cells");
    BoxCount out;
    std::vector<double> x, y;
    for (int k : levels) {
        if (k < 0 || k > 30) throw Error(ErrorCode::InvalidArgument, "dyadic level out of range");
        const int side = 1 << k;
        // minimum over grids shifted by half a box in each direction
        std::size_t n = std::numeric_limits<std::size_t>::max();
        for (int oy = 0; oy < (side > 1 ? 2 : 1); ++oy)
            for (int ox = 0; ox < (side > 1 ? 2 : 1); ++ox) {
                const int sx = ox * side / 2, sy = oy * side / 2;
                const int bx = (raster.nx + sx + side - 1) / side, by = (raster.ny + sy + side - 1) / side;
                std::vector<std::uint8_t> box(static_cast<std::size_t>(bx) * by, 0);
                for (int j = 0; j < raster.ny; ++j)
                    for (int i = 0; i < raster.nx; ++i)
                        if (raster.at(i, j)) box[static_cast<std::size_t>((j + sy) / side) * bx + (i + sx) / side] = 1;
                n = std::min(n, static_cast<std::size_t>(std::count(box.begin(), box.end(), std::uint8_t{1})));
            }
        out.counts.emplace_back(k, n);
        x.push_back(-std::log(side * raster.pixel_width()));
        y.push_back(std::log(static_cast<double>(n)));
    }
    double intercept = 0.0;
    out.dim = fit_slope(x, y, &intercept);
    for (std::size_t i = 0; i < x.size(); ++i)
        out.residual = std::max(out.residual, std::abs(y[i] - (intercept + out.dim * x[i])));
    return out;
}

std::string_view to_string(RadialNote n) {
    switch (n) {
        case RadialNote::SphereHyperbolic_FullJulia: return "SphereHyperbolic_FullJulia";
        case RadialNote::PlaneHyperbolic_RadialOnly: return "PlaneHyperbolic_RadialOnly";
    }
    return "Unknown";
}

RasterSpec default_raster(const MapSpec& map) {
    constexpr double pi = std::numbers::pi;
    switch (map.family()) {
        case Family::Rational: {
            if (!is_polynomial(map)) return {{0.0, 4.0, 4.0}, 2048, 2048};
            // every |z| > R escapes
            const auto& num = map.num();
            const double scale = std::abs(map.den()[0]);
            const double lead = std::abs(num.back()) / scale;
            const int d = static_cast<int>(num.size()) - 1;
            double rest = 0.0;
            for (std::size_t i = 0; i + 1 < num.size(); ++i) rest += std::abs(num[i]) / scale;
            const double R = std::max({1.0, 2.0 * rest / lead, std::pow(2.0 / lead, 1.0 / std::max(1, d - 1))});
            return {{0.0, 2.0 * R, 2.0 * R}, 2048, 2048};
        }
        case Family::Tangent: {
            const cplx lambda = std::get<TangentParams>(map.params()).lambda;
            if (lambda.imag() == 0.0) {
                // J is pi-periodic and real; the period ends k pi are Fatou points
                const int nx = 32768, ny = 64;
                return {{cplx(pi / 2, 0.0), pi, pi * ny / nx}, nx, ny};
            }
            return {{0.0, 2.0 * pi, 2.0 * pi}, 2048, 2048};
        }
        case Family::Exponential:
            return {{cplx(2.0, 0.0), 8.0, 8.0}, 2048, 2048};
        case Family::PoleSeries:
            return {{0.0, 8.0, 8.0}, 2048, 2048};
    }
    return {};
}

DimensionReport dimension_report(const MapSpec& map, const DimensionConfig& cfg) {
    DimensionReport rep;
    const auto sample = stage("julia sample", [&] { return julia_sample(map, cfg.sample_count, cfg.sample_depth, cfg.seed); });
    rep.classification = stage("classify", [&] { return classify(map, cfg.horizon, sample); });
    if (rep.classification.in_H_sphere == Verdict::Yes) {
        rep.radial_note = RadialNote::SphereHyperbolic_FullJulia;
    } else if (rep.classification.in_H_plane == Verdict::Yes) {
        rep.radial_note = RadialNote::PlaneHyperbolic_RadialOnly;
        rep.notes.push_back("plane hyperbolic only: the box count covers the whole Julia set and may exceed s");
    } else {
        throw Error(ErrorCode::HypothesisUnverified, "map is not classified hyperbolic: " + rep.classification.evidence);
    }

    // Bowen root
    const SpherePoint a = cfg.base_point ? SpherePoint(*cfg.base_point)
                                         : stage("base point", [&] { return repelling_fixed_point(map); });
    if (a.is_infinity()) throw Error(ErrorCode::InvalidArgument, "base point must be finite");
    rep.base_point = a.raw();
    TreeOptions topt;
    topt.depth = cfg.depth > 0 ? cfg.depth : (map.family() == Family::Rational ? 16 : 6);
    topt.branch_budget = cfg.budget;
    topt.max_level_nodes = cfg.max_level_nodes;
    topt.seed = cfg.seed;
    topt.sampling_t = 0.5 * (cfg.bracket.first + cfg.bracket.second);
    auto root = stage("poincare exponent", [&] {
        const PressureEstimator est(map, a, topt);
        auto r = poincare_exponent(est, cfg.bracket, cfg.tol);
        bool thinned = false;
        for (const auto& lv : est.tree().truncation) thinned = thinned || lv.expanded_parents < lv.parents;
        if (!thinned) return r;
        // resample the levels with weights at the located root
        TreeOptions again = topt;
        again.sampling_t = r.s;
        return poincare_exponent(PressureEstimator(map, a, again), cfg.bracket, cfg.tol);
    });
    rep.s_bowen = root.s;
    rep.bowen_residual = root.residual;
    rep.bowen_depth = topt.depth;
    if (!(rep.s_bowen < 2.0)) rep.notes.push_back("s_bowen is not below 2");

    // IFS lower bound
    double r = cfg.ifs_radius;
    if (!(r > 0.0)) {
        double dist = kInf;
        for (const auto& p : post_singular_orbit(map, cfg.horizon)) dist = std::min(dist, chordal_distance(p, a));
        if (map.is_transcendental()) dist = std::min(dist, chordal_distance(a, SpherePoint::infinity()));
        r = 0.25 * dist * (1.0 + std::norm(a.raw()));
    }
    rep.ifs_radius = r;
    IFSOptions iopt;
    iopt.budget = cfg.budget;
    iopt.max_level_nodes = cfg.max_level_nodes;
    iopt.sampling_t = rep.s_bowen;
    iopt.seed = cfg.seed;
    for (int N = 1; N <= cfg.ifs_n_max && !rep.ifs_lower; ++N) {
        try {
            const auto b = ifs_lower_bound(map, a.raw(), r, N, iopt);
            rep.ifs_lower = b.t0;
            rep.ifs_level = N;
            rep.ifs_branches = b.system.branches.size();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::TooFewBranches) rethrow_with_context(e, "ifs lower bound");
        }
    }
    if (!rep.ifs_lower) rep.notes.push_back("no level up to ifs_n_max gave two admissible branches");

    // box counting
    rep.raster = default_raster(map);
    if (cfg.viewport) {
        rep.raster.viewport = *cfg.viewport;
        rep.raster.nx = 2048;
        rep.raster.ny = std::max(64, static_cast<int>(std::lround(2048 * cfg.viewport->height / cfg.viewport->width)));
    }
    if (cfg.nx > 0) rep.raster.nx = cfg.nx;
    if (cfg.ny > 0) rep.raster.ny = cfg.ny;
    const auto raster = stage("render", [&] {
        return render_julia(map, rep.raster.viewport, rep.raster.nx, rep.raster.ny, cfg.probe);
    });
    rep.occupied_cells = raster.occupied_count();
    rep.box_count = stage("box counting", [&] { return box_counting(raster, cfg.box_levels); });
    const int coarsest = *std::max_element(cfg.box_levels.begin(), cfg.box_levels.end());
    for (const auto& [k, n] : rep.box_count.counts)
        if (k == coarsest && n < 10) {
            std::ostringstream os;
            os << n << " occupied boxes at the coarsest scale";
            throw Error(ErrorCode::DegenerateRaster, os.str());
        }

    rep.verdict_consistent = rep.s_bowen < 2.0;
    if (rep.ifs_lower) rep.verdict_consistent = rep.verdict_consistent && *rep.ifs_lower <= rep.s_bowen + cfg.ifs_tolerance;
    if (rep.radial_note == RadialNote::SphereHyperbolic_FullJulia)
        rep.verdict_consistent =
            rep.verdict_consistent && std::abs(rep.s_bowen - rep.box_count.dim) <= cfg.box_tolerance;
    return rep;
}

}  // namespace merodyn
