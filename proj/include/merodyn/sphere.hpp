#pragma once

#include <complex>
#include <limits>

namespace merodyn {

using cplx = std::complex<double>;

class MapSpec;

/// A point of the Riemann sphere: a finite complex value or the point at infinity.
class SpherePoint {
public:
    /// Throws InvalidArgument for NaN or infinite components.
    SpherePoint(cplx z);  // NOLINT(google-explicit-constructor): finite points convert freely
    SpherePoint(double x) : SpherePoint(cplx(x, 0.0)) {}  // NOLINT

    static SpherePoint infinity() { return SpherePoint(); }

    bool is_infinity() const noexcept { return infinite_; }
    bool is_finite() const noexcept { return !infinite_; }

    /// Throws InvalidArgument at infinity.
    cplx value() const;

    /// Unchecked access; undefined at infinity.
    cplx raw() const noexcept { return z_; }

    friend bool operator==(const SpherePoint& a, const SpherePoint& b) noexcept {
        return a.infinite_ == b.infinite_ && (a.infinite_ || a.z_ == b.z_);
    }

private:
    SpherePoint() : z_(0.0), infinite_(true) {}

    cplx z_;
    bool infinite_;
};

/// log f^x(z). A critical point has is_zero set and log_value = -inf.
struct SphericalDerivativeValue {
    double log_value = 0.0;
    bool is_zero = false;
};

/// Geodesic distance for the density 1/(1+|z|^2); the distance from 0 to infinity is pi/2.
double chordal_distance(const SpherePoint& a, const SpherePoint& b) noexcept;

/// log(1 + |z|^2) without overflow for large |z|.
double log1p_abs2(cplx z) noexcept;

/// log f^x(z) from f'(z), z and f(z) at a finite non-pole point.
double log_sphere_factor(cplx fprime, cplx z, cplx fz) noexcept;

/// Spherical derivative of the map at z, including poles (limit convention) and, for
/// rational maps, infinity (conjugation by 1/z). Throws TranscendentalAtInfinity.
SphericalDerivativeValue spherical_derivative(const MapSpec& map, const SpherePoint& z);

/// Stereographic image on the sphere of diameter 1 resting on the origin.
/// |P(a) - P(b)| equals sin(chordal_distance(a, b)).
struct SphereCoords {
    double x, y, z;
};
SphereCoords to_sphere_coords(const SpherePoint& p) noexcept;

}  // namespace merodyn
