#include "merodyn/map_family.hpp"

#include "merodyn/error.hpp"
#include "merodyn/roots.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace merodyn {

namespace {

constexpr double kPoleRel = 1e-13;
constexpr double kPi = std::numbers::pi;

std::vector<cplx> trimmed(std::vector<cplx> c) {
    while (!c.empty() && c.back() == cplx(0.0)) c.pop_back();
    return c;
}

std::string fmt_point(cplx z) {
    std::ostringstream os;
    os.precision(17);
    os << '(' << z.real() << ',' << z.imag() << ')';
    return os.str();
}

// Reversed-polynomial value: z^{-deg} P(z) = P*(1/z). Stable for |z| > 1.
cplx reversed_eval(std::span<const cplx> c, cplx w) noexcept {
    cplx acc = 0.0;
    for (const cplx& ci : c) acc = acc * w + ci;
    return acc;
}

double reversed_scale(std::span<const cplx> c, double rw) noexcept {
    double acc = 0.0;
    for (const cplx& ci : c) acc = acc * rw + std::abs(ci);
    return acc;
}

// --- pole series helpers ---------------------------------------------------

struct SeriesValue {
    cplx f, df, d2f;
    double tail_bound;
};

double pole_position(int n, int p) { return std::pow(static_cast<double>(n), p); }

SeriesValue pole_series_terms(const PoleSeriesParams& ps, cplx z) {
    const int first = ps.p * ps.p;
    cplx f = 0.0, df = 0.0, d2f = 0.0;
    for (int n = ps.n_max; n >= first; --n) {
        const double a = pole_position(n, ps.p);
        const cplx m = a - z;
        const cplx q = a + z;
        f += 2.0 * z / (m * q);
        df += 1.0 / (m * m) + 1.0 / (q * q);
        d2f += 2.0 / (m * m * m) - 2.0 / (q * q * q);
    }
    const double big_n = ps.n_max;
    const double two_p = 2.0 * ps.p;
    // sum_{n > N} n^{-2p} by Euler-Maclaurin; bound by the integral from N
    const double tail_sum = std::pow(big_n, 1.0 - two_p) / (two_p - 1.0) -
                            0.5 * std::pow(big_n, -two_p) + ps.p / 6.0 * std::pow(big_n, -two_p - 1.0);
    const double ratio = std::norm(z) / std::pow(big_n, two_p);
    double bound = std::numeric_limits<double>::infinity();
    if (ratio < 0.25)
        bound = 2.0 * ps.lambda * std::abs(z) * std::pow(big_n, 1.0 - two_p) / (two_p - 1.0) / (1.0 - ratio);
    f += 2.0 * z * tail_sum;
    df += 2.0 * tail_sum;
    return {ps.lambda * f, ps.lambda * df, ps.lambda * d2f, bound};
}

bool tail_ok(const SeriesValue& v) { return v.tail_bound <= 1e-10 * (1.0 + std::abs(v.f)); }

std::optional<double> nearest_series_pole(const PoleSeriesParams& ps, cplx z) {
    const double x = std::abs(z.real());
    const int n = static_cast<int>(std::lround(std::pow(x, 1.0 / ps.p)));
    const int first = ps.p * ps.p;
    double best = std::numeric_limits<double>::infinity();
    std::optional<double> pole;
    for (int k = std::max(first, n - 1); k <= std::min(ps.n_max, n + 1); ++k) {
        const double a = std::copysign(pole_position(k, ps.p), z.real());
        const double d = std::abs(z - a);
        if (d < best) {
            best = d;
            pole = a;
        }
    }
    return pole;
}

bool rational_is_pole_finite(const MapSpec& map, cplx z) {
    const auto& den = map.den();
    if (den.size() == 1) return false;
    const double r = std::abs(z);
    if (r <= 1.0) return std::abs(poly_eval(den, z)) <= kPoleRel * poly_scale(den, r);
    const cplx w = 1.0 / z;
    return std::abs(reversed_eval(den, w)) <= kPoleRel * reversed_scale(den, 1.0 / r);
}

SpherePoint rational_eval(const MapSpec& map, const SpherePoint& zp) {
    const auto& num = map.num();
    const auto& den = map.den();
    const int n = static_cast<int>(num.size()) - 1;
    const int m = static_cast<int>(den.size()) - 1;
    if (zp.is_infinity()) {
        if (n > m) return SpherePoint::infinity();
        if (n == m) return num.back() / den.back();
        return cplx(0.0);
    }
    const cplx z = zp.raw();
    if (rational_is_pole_finite(map, z)) return SpherePoint::infinity();
    cplx value;
    if (std::abs(z) <= 1.0) {
        value = poly_eval(num, z) / poly_eval(den, z);
    } else {
        const cplx w = 1.0 / z;
        cplx zk = 1.0;
        for (int k = 0; k < std::abs(n - m); ++k) zk *= n > m ? z : w;
        value = zk * reversed_eval(num, w) / reversed_eval(den, w);
    }
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) return SpherePoint::infinity();
    return value;
}

cplx rational_derivative(const MapSpec& map, cplx z) {
    const cplx nz = poly_eval(map.num(), z);
    const cplx dz = poly_eval(map.den(), z);
    const cplx dn = poly_eval(map.dnum(), z);
    const cplx dd = poly_eval(map.dden(), z);
    return (dn * dz - nz * dd) / (dz * dz);
}

// Critical points of the pole series: zeros of f' on the imaginary axis and one per pole gap,
// as far out as the truncated series can be evaluated.
std::vector<cplx> pole_series_critical_points(const PoleSeriesParams& ps) {
    std::vector<cplx> pts;
    auto dfun = [&](cplx z) { return pole_series_terms(ps, z); };

    // imaginary axis: f'(iy) is real, sign change by geometric scan
    const double first_pole = pole_position(ps.p * ps.p, ps.p);
    const double y_max = 0.4 * pole_position(ps.n_max, ps.p);
    double y_prev = 1e-3 * first_pole;
    double g_prev = dfun(cplx(0.0, y_prev)).df.real();
    for (double y = y_prev * 1.25; y < y_max; y *= 1.25) {
        const auto v = dfun(cplx(0.0, y));
        if (!tail_ok(v)) break;
        const double g = v.df.real();
        if ((g_prev > 0) != (g > 0)) {
            double lo = y_prev, hi = y, glo = g_prev;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double gm = dfun(cplx(0.0, mid)).df.real();
                if ((gm > 0) == (glo > 0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            if (hi - lo > 1e-9 * hi) {
                std::ostringstream os;
                os << "imaginary-axis critical point bracket [" << lo << ", " << hi << "]";
                throw Error(ErrorCode::RootSearchFailed, os.str());
            }
            pts.emplace_back(0.0, 0.5 * (lo + hi));
            pts.emplace_back(0.0, -0.5 * (lo + hi));
        }
        y_prev = y;
        g_prev = g;
    }

    // pole gaps on the positive axis: seed at midpoint +- i gap/2, damped Newton on f'
    const int first = ps.p * ps.p;
    for (int n = first; n + 1 <= ps.n_max - 1; ++n) {
        const double a = pole_position(n, ps.p), b = pole_position(n + 1, ps.p);
        const double gap = b - a;
        cplx z(0.5 * (a + b), 0.5 * gap);
        bool ok = false;
        for (int it = 0; it < 100; ++it) {
            const auto v = dfun(z);
            if (std::abs(v.d2f) == 0.0) break;
            cplx step = v.df / v.d2f;
            const double cap = 0.25 * gap;
            if (std::abs(step) > cap) step *= cap / std::abs(step);
            z -= step;
            if (std::abs(step) <= 1e-14 * std::abs(z)) {
                ok = true;
                break;
            }
        }
        if (!ok || z.real() <= a || z.real() >= b) {
            std::ostringstream os;
            os << "critical point polish in pole gap (" << a << ", " << b << ")";
            throw Error(ErrorCode::RootSearchFailed, os.str());
        }
        if (!tail_ok(dfun(z))) break;
        const cplx zc(z.real(), std::abs(z.imag()));
        for (cplx s : {zc, std::conj(zc), -zc, -std::conj(zc)}) pts.push_back(s);
    }
    return pts;
}

void push_unique(std::vector<SpherePoint>& out, const SpherePoint& p) {
    for (const auto& q : out)
        if (chordal_distance(p, q) < 1e-9) return;
    out.push_back(p);
}

}  // namespace

// --- MapSpec ---------------------------------------------------------------

std::string_view to_string(Family f) {
    switch (f) {
        case Family::Rational: return "rational";
        case Family::Tangent: return "tangent";
        case Family::Exponential: return "exponential";
        case Family::PoleSeries: return "pole_series";
    }
    return "unknown";
}

MapSpec::MapSpec(Family family, Params params, std::string name)
    : family_(family), params_(std::move(params)), name_(std::move(name)) {}

MapSpec MapSpec::rational(std::vector<cplx> numerator, std::vector<cplx> denominator, std::string name) {
    auto num = trimmed(numerator);
    auto den = trimmed(denominator);
    if (den.empty()) throw Error(ErrorCode::InvalidArgument, "zero denominator");
    if (num.empty()) throw Error(ErrorCode::InvalidArgument, "zero numerator");
    const int deg = static_cast<int>(std::max(num.size(), den.size())) - 1;
    if (deg < 2) throw Error(ErrorCode::InvalidArgument, "rational degree must be at least 2");
    // common roots: normalized resultant test on the roots of the denominator
    if (den.size() > 1) {
        for (const cplx r : polynomial_roots(den)) {
            const double v = std::abs(poly_eval(num, r)) / poly_scale(num, std::abs(r));
            if (!(v > 1e-9))
                throw Error(ErrorCode::InvalidArgument,
                            "numerator and denominator share the root " + fmt_point(r));
        }
    }
    if (name.empty()) name = "rational";
    MapSpec m(Family::Rational, RationalParams{std::move(numerator), std::move(denominator)}, std::move(name));
    m.degree_ = deg;
    m.num_ = std::move(num);
    m.den_ = std::move(den);
    m.dnum_ = poly_derivative(m.num_);
    m.dden_ = poly_derivative(m.den_);
    return m;
}

MapSpec MapSpec::polynomial(std::vector<cplx> coefficients, std::string name) {
    if (name.empty()) name = "polynomial";
    return rational(std::move(coefficients), {cplx(1.0)}, std::move(name));
}

MapSpec MapSpec::tangent(cplx lambda, std::string name) {
    if (lambda == cplx(0.0)) throw Error(ErrorCode::InvalidArgument, "tangent family needs lambda != 0");
    if (name.empty()) name = "tangent";
    return MapSpec(Family::Tangent, TangentParams{lambda}, std::move(name));
}

MapSpec MapSpec::exponential(cplx lambda, std::string name) {
    if (lambda == cplx(0.0)) throw Error(ErrorCode::InvalidArgument, "exponential family needs lambda != 0");
    if (name.empty()) name = "exponential";
    return MapSpec(Family::Exponential, ExponentialParams{lambda}, std::move(name));
}

MapSpec MapSpec::pole_series(int p, double lambda, int n_max, std::string name) {
    if (p < 1) throw Error(ErrorCode::InvalidArgument, "pole series needs p >= 1");
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "pole series needs lambda > 0");
    if (n_max < p * p) throw Error(ErrorCode::InvalidArgument, "pole series needs n_max >= p^2");
    if (name.empty()) name = "pole_series";
    return MapSpec(Family::PoleSeries, PoleSeriesParams{p, lambda, n_max}, std::move(name));
}

// --- polynomials -------------------------------------------------------------

cplx poly_eval(std::span<const cplx> c, cplx z) noexcept {
    cplx acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * z + c[i];
    return acc;
}

double poly_scale(std::span<const cplx> c, double r) noexcept {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * r + std::abs(c[i]);
    return acc;
}

std::vector<cplx> poly_derivative(std::span<const cplx> c) {
    if (c.size() <= 1) return {cplx(0.0)};
    std::vector<cplx> d(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = static_cast<double>(i) * c[i];
    return d;
}

// --- evaluation ----------------------------------------------------------------

bool is_pole(const MapSpec& map, const SpherePoint& zp) {
    if (zp.is_infinity()) {
        if (map.family() != Family::Rational) return false;
        return map.num().size() > map.den().size();
    }
    const cplx z = zp.raw();
    switch (map.family()) {
        case Family::Rational: return rational_is_pole_finite(map, z);
        case Family::Tangent: {
            const double k = std::round((z.real() - 0.5 * kPi) / kPi);
            const double pole = 0.5 * kPi + k * kPi;
            return std::abs(z - pole) < kPoleRel * std::max(1.0, std::abs(pole));
        }
        case Family::Exponential: return false;
        case Family::PoleSeries: {
            const auto& ps = std::get<PoleSeriesParams>(map.params());
            const auto pole = nearest_series_pole(ps, z);
            return pole && std::abs(z - *pole) < kPoleRel * std::abs(*pole);
        }
    }
    return false;
}

SpherePoint eval(const MapSpec& map, const SpherePoint& zp) {
    if (map.family() == Family::Rational) return rational_eval(map, zp);
    if (zp.is_infinity())
        throw Error(ErrorCode::TranscendentalAtInfinity, "cannot evaluate a transcendental map at infinity");
    if (is_pole(map, zp)) return SpherePoint::infinity();
    const cplx z = zp.raw();
    cplx value;
    switch (map.family()) {
        case Family::Tangent: value = std::get<TangentParams>(map.params()).lambda * std::tan(z); break;
        case Family::Exponential: {
            const cplx lam = std::get<ExponentialParams>(map.params()).lambda;
            if (z.real() + std::log(std::abs(lam)) > 700.0) return SpherePoint::infinity();
            value = lam * std::exp(z);
            break;
        }
        case Family::PoleSeries: {
            const auto& ps = std::get<PoleSeriesParams>(map.params());
            const auto v = pole_series_terms(ps, z);
            if (std::abs(v.f) > 1e13) return SpherePoint::infinity();
            if (!tail_ok(v))
                throw Error(ErrorCode::TailTooLarge, "series tail bound too large at " + fmt_point(z));
            value = v.f;
            break;
        }
        case Family::Rational: break;
    }
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) return SpherePoint::infinity();
    return value;
}

cplx derivative(const MapSpec& map, const SpherePoint& zp) {
    if (zp.is_infinity()) throw Error(ErrorCode::InvalidArgument, "derivative at infinity");
    if (is_pole(map, zp)) throw Error(ErrorCode::PoleAt, fmt_point(zp.raw()));
    const cplx z = zp.raw();
    switch (map.family()) {
        case Family::Rational: return rational_derivative(map, z);
        case Family::Tangent: {
            const cplx t = std::tan(z);
            return std::get<TangentParams>(map.params()).lambda * (1.0 + t * t);
        }
        case Family::Exponential: return std::get<ExponentialParams>(map.params()).lambda * std::exp(z);
        case Family::PoleSeries: {
            const auto& ps = std::get<PoleSeriesParams>(map.params());
            const auto v = pole_series_terms(ps, z);
            if (!tail_ok(v))
                throw Error(ErrorCode::TailTooLarge, "series tail bound too large at " + fmt_point(z));
            return v.df;
        }
    }
    return 0.0;
}

std::optional<cplx> simple_pole_residue(const MapSpec& map, cplx pole) {
    switch (map.family()) {
        case Family::Rational: {
            const cplx dd = poly_eval(map.dden(), pole);
            if (std::abs(dd) <= 1e-9 * poly_scale(map.dden(), std::abs(pole))) return std::nullopt;
            return poly_eval(map.num(), pole) / dd;
        }
        case Family::Tangent: return -std::get<TangentParams>(map.params()).lambda;
        case Family::Exponential: return std::nullopt;
        case Family::PoleSeries: return cplx(-std::get<PoleSeriesParams>(map.params()).lambda);
    }
    return std::nullopt;
}

std::vector<SpherePoint> poles_in_disk(const MapSpec& map, double radius) {
    if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
    std::vector<cplx> poles;
    switch (map.family()) {
        case Family::Rational:
            for (const cplx r : polynomial_roots(map.den()))
                if (std::abs(r) <= radius) poles.push_back(r);
            break;
        case Family::Tangent: {
            const int kmax = static_cast<int>(std::ceil(radius / kPi)) + 1;
            for (int k = -kmax; k <= kmax; ++k) {
                const double p = 0.5 * kPi + k * kPi;
                if (std::abs(p) <= radius) poles.emplace_back(p);
            }
            break;
        }
        case Family::Exponential: break;
        case Family::PoleSeries: {
            const auto& ps = std::get<PoleSeriesParams>(map.params());
            for (int n = ps.p * ps.p; n <= ps.n_max; ++n) {
                const double a = pole_position(n, ps.p);
                if (a > radius) break;
                poles.emplace_back(a);
                poles.emplace_back(-a);
            }
            break;
        }
    }
    std::sort(poles.begin(), poles.end(), [](cplx a, cplx b) {
        if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
        return std::arg(a) < std::arg(b);
    });
    return {poles.begin(), poles.end()};
}

SingularData singular_values(const MapSpec& map) {
    SingularData out;
    switch (map.family()) {
        case Family::Rational: {
            const auto& num = map.num();
            const auto& den = map.den();
            // W = N'D - ND'
            std::vector<cplx> w(num.size() + den.size(), cplx(0.0));
            for (std::size_t i = 0; i < map.dnum().size(); ++i)
                for (std::size_t j = 0; j < den.size(); ++j) w[i + j] += map.dnum()[i] * den[j];
            for (std::size_t i = 0; i < num.size(); ++i)
                for (std::size_t j = 0; j < map.dden().size(); ++j) w[i + j] -= num[i] * map.dden()[j];
            // cancellation of the leading terms leaves rounding noise; trim relative to the scale
            double scale = 0.0;
            for (const cplx c : w) scale = std::max(scale, std::abs(c));
            while (!w.empty() && std::abs(w.back()) <= 1e-14 * scale) w.pop_back();
            const auto crit = polynomial_roots(w);
            for (const cplx c : crit) push_unique(out.critical_values, eval(map, c));
            const int finite = static_cast<int>(crit.size());
            if (finite < 2 * map.degree() - 2) push_unique(out.critical_values, eval(map, SpherePoint::infinity()));
            break;
        }
        case Family::Tangent: {
            const cplx lam = std::get<TangentParams>(map.params()).lambda;
            out.asymptotic_values = {cplx(0.0, 1.0) * lam, cplx(0.0, -1.0) * lam};
            break;
        }
        case Family::Exponential:
            out.asymptotic_values = {cplx(0.0)};
            out.infinity_is_asymptotic = true;
            break;
        case Family::PoleSeries: {
            const auto& ps = std::get<PoleSeriesParams>(map.params());
            for (const cplx c : pole_series_critical_points(ps)) push_unique(out.critical_values, eval(map, c));
            out.asymptotic_values = {cplx(0.0)};
            break;
        }
    }
    return out;
}

// --- orbits --------------------------------------------------------------------

OrbitRecord orbit(const MapSpec& map, const SpherePoint& z0, int max_steps, double escape_radius,
                  double cycle_tolerance, int max_period) {
    if (max_steps < 1) throw Error(ErrorCode::InvalidArgument, "max_steps must be >= 1");
    OrbitRecord rec;
    rec.points.reserve(static_cast<std::size_t>(max_steps) + 1);
    rec.points.push_back(z0);
    rec.terminal = OrbitAlive{};
    const bool transcendental = map.is_transcendental();

    auto escaped = [&](const SpherePoint& p) {
        if (p.is_infinity()) return transcendental;
        return std::abs(p.raw()) > escape_radius;
    };
    if (transcendental && is_pole(map, z0)) {
        rec.terminal = OrbitHitPole{0};
        return rec;
    }
    if (escaped(z0)) {
        rec.terminal = OrbitEscaped{0, escape_radius};
        return rec;
    }
    for (int n = 1; n <= max_steps; ++n) {
        const SpherePoint next = eval(map, rec.points.back());
        rec.points.push_back(next);
        if (escaped(next)) {
            rec.terminal = OrbitEscaped{n, escape_radius};
            return rec;
        }
        if (transcendental && is_pole(map, next)) {
            rec.terminal = OrbitHitPole{n};
            return rec;
        }
        for (int p = 1; p <= max_period && n - 1 - p >= 0; ++p) {
            if (chordal_distance(rec.points[n], rec.points[n - p]) < cycle_tolerance &&
                chordal_distance(rec.points[n - 1], rec.points[n - 1 - p]) < cycle_tolerance) {
                OrbitCycle cyc;
                cyc.points.assign(rec.points.end() - p, rec.points.end());
                rec.terminal = std::move(cyc);
                return rec;
            }
        }
    }
    return rec;
}

double cycle_multiplier(const MapSpec& map, const std::vector<SpherePoint>& cycle) {
    double total = 0.0;
    for (const auto& p : cycle) {
        const auto d = spherical_derivative(map, p);
        if (d.is_zero) return 0.0;
        total += d.log_value;
    }
    return std::exp(total);
}

}  // namespace merodyn
