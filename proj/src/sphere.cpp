#include "merodyn/sphere.hpp"

#include "merodyn/error.hpp"
#include "merodyn/map_family.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace merodyn {

SpherePoint::SpherePoint(cplx z) : z_(z), infinite_(false) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw Error(ErrorCode::InvalidArgument, "finite sphere point with non-finite component");
}

cplx SpherePoint::value() const {
    if (infinite_) throw Error(ErrorCode::InvalidArgument, "value() of the point at infinity");
    return z_;
}

double chordal_distance(const SpherePoint& a, const SpherePoint& b) noexcept {
    if (a.is_infinity() && b.is_infinity()) return 0.0;
    if (a.is_infinity() || b.is_infinity()) {
        const double r = std::abs(a.is_infinity() ? b.raw() : a.raw());
        return std::atan2(1.0, r);
    }
    const double ra = std::hypot(1.0, std::abs(a.raw()));
    const double rb = std::hypot(1.0, std::abs(b.raw()));
    const double chord = std::abs(a.raw() - b.raw()) / (ra * rb);
    return std::asin(std::min(1.0, chord));
}

double log1p_abs2(cplx z) noexcept {
    const double r = std::abs(z);
    if (r <= 1.0) return std::log1p(r * r);
    return 2.0 * std::log(r) + std::log1p(1.0 / (r * r));
}

double log_sphere_factor(cplx fprime, cplx z, cplx fz) noexcept {
    return std::log(std::abs(fprime)) + log1p_abs2(z) - log1p_abs2(fz);
}

namespace {

// F(zeta) = 1/f(1/zeta) for a rational f; returns F^x(0).
SphericalDerivativeValue rational_at_infinity(const MapSpec& map) {
    const auto& num = map.num();
    const auto& den = map.den();
    const int n = static_cast<int>(num.size()) - 1;
    const int m = static_cast<int>(den.size()) - 1;
    std::vector<cplx> nrev(num.rbegin(), num.rend());
    std::vector<cplx> drev(den.rbegin(), den.rend());
    std::vector<cplx> p, q;
    if (n >= m) {
        p.assign(n - m, cplx(0.0));
        p.insert(p.end(), drev.begin(), drev.end());
        q = nrev;
    } else {
        p = drev;
        q.assign(m - n, cplx(0.0));
        q.insert(q.end(), nrev.begin(), nrev.end());
    }
    auto at = [](const std::vector<cplx>& c, std::size_t i) {
        return i < c.size() ? c[i] : cplx(0.0);
    };
    const cplx p0 = at(p, 0), p1 = at(p, 1), q0 = at(q, 0), q1 = at(q, 1);
    const double scale = std::max(std::abs(q0), std::abs(q1)) + std::abs(at(q, 2));
    if (std::abs(q0) <= 1e-13 * scale) {
        // pole of F at 0: F ~ (p0/q1) / zeta
        if (std::abs(q1) <= 1e-13 * scale) return {-std::numeric_limits<double>::infinity(), true};
        const cplx c = p0 / q1;
        return {-std::log(std::abs(c)), false};
    }
    const cplx f0 = p0 / q0;
    const cplx fp0 = (p1 * q0 - p0 * q1) / (q0 * q0);
    if (std::abs(fp0) == 0.0) return {-std::numeric_limits<double>::infinity(), true};
    return {std::log(std::abs(fp0)) - log1p_abs2(f0), false};
}

}  // namespace

SphericalDerivativeValue spherical_derivative(const MapSpec& map, const SpherePoint& z) {
    if (z.is_infinity()) {
        if (map.is_transcendental())
            throw Error(ErrorCode::TranscendentalAtInfinity,
                        "spherical derivative at infinity of a transcendental map");
        return rational_at_infinity(map);
    }
    const cplx w = z.raw();
    if (is_pole(map, z)) {
        const auto c = simple_pole_residue(map, w);
        if (!c) return {-std::numeric_limits<double>::infinity(), true};
        return {log1p_abs2(w) - std::log(std::abs(*c)), false};
    }
    const cplx fp = derivative(map, z);
    if (std::abs(fp) == 0.0) return {-std::numeric_limits<double>::infinity(), true};
    const SpherePoint fz = eval(map, z);
    if (fz.is_infinity()) {
        // overflowed without being a detected pole; treat as the pole limit
        const auto c = simple_pole_residue(map, w);
        if (!c) return {-std::numeric_limits<double>::infinity(), true};
        return {log1p_abs2(w) - std::log(std::abs(*c)), false};
    }
    return {log_sphere_factor(fp, w, fz.raw()), false};
}

SphereCoords to_sphere_coords(const SpherePoint& p) noexcept {
    if (p.is_infinity()) return {0.0, 0.0, 1.0};
    const cplx z = p.raw();
    const double r = std::abs(z);
    if (r > 1.0) {
        const double s = 1.0 / (1.0 + 1.0 / (r * r));
        const double inv = 1.0 / (r * r);
        return {z.real() * inv * s, z.imag() * inv * s, s};
    }
    const double d = 1.0 + r * r;
    return {z.real() / d, z.imag() / d, r * r / d};
}

}  // namespace merodyn
