#pragma once

#include "merodyn/sphere.hpp"

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace merodyn {

/// Coefficients are in ascending powers: c[0] + c[1] z + ...
struct RationalParams {
    std::vector<cplx> numerator;
    std::vector<cplx> denominator;
};

/// lambda * tan(z)
struct TangentParams {
    cplx lambda;
};

/// lambda * exp(z)
struct ExponentialParams {
    cplx lambda;
};

/// lambda * sum_{n=p^2}^{n_max} (1/(n^p - z) - 1/(n^p + z)), with an explicit tail estimate.
struct PoleSeriesParams {
    int p;
    double lambda;
    int n_max;
};

enum class Family { Rational, Tangent, Exponential, PoleSeries };

std::string_view to_string(Family f);

/// Immutable description of one map. Construction validates the family invariants.
class MapSpec {
public:
    using Params = std::variant<RationalParams, TangentParams, ExponentialParams, PoleSeriesParams>;

    static MapSpec rational(std::vector<cplx> numerator, std::vector<cplx> denominator,
                            std::string name = {});
    static MapSpec polynomial(std::vector<cplx> coefficients, std::string name = {});
    static MapSpec tangent(cplx lambda, std::string name = {});
    static MapSpec exponential(cplx lambda, std::string name = {});
    static MapSpec pole_series(int p, double lambda, int n_max, std::string name = {});

    Family family() const noexcept { return family_; }
    const Params& params() const noexcept { return params_; }
    const std::string& name() const noexcept { return name_; }

    bool is_transcendental() const noexcept { return family_ != Family::Rational; }
    /// max(deg num, deg den) for rational maps, 0 for transcendental ones.
    int degree() const noexcept { return degree_; }

    // Rational internals, trimmed of trailing zero coefficients.
    const std::vector<cplx>& num() const noexcept { return num_; }
    const std::vector<cplx>& den() const noexcept { return den_; }
    const std::vector<cplx>& dnum() const noexcept { return dnum_; }
    const std::vector<cplx>& dden() const noexcept { return dden_; }

private:
    MapSpec(Family family, Params params, std::string name);

    Family family_;
    Params params_;
    std::string name_;
    int degree_ = 0;
    std::vector<cplx> num_, den_, dnum_, dden_;
};

/// Horner evaluation, ascending coefficients.
cplx poly_eval(std::span<const cplx> c, cplx z) noexcept;
/// Sum of |c_i| |z|^i, the scale used for relative pole tests.
double poly_scale(std::span<const cplx> c, double r) noexcept;
std::vector<cplx> poly_derivative(std::span<const cplx> c);

bool is_pole(const MapSpec& map, const SpherePoint& z);

/// f(z). Infinity exactly at poles; transcendental maps throw TranscendentalAtInfinity at infinity.
SpherePoint eval(const MapSpec& map, const SpherePoint& z);

/// f'(z) at a finite non-pole point; throws PoleAt.
cplx derivative(const MapSpec& map, const SpherePoint& z);

/// Laurent coefficient c of a simple pole p (f ~ c/(z-p)); nullopt for higher order poles.
std::optional<cplx> simple_pole_residue(const MapSpec& map, cplx pole);

/// Poles with |z| <= radius, sorted by modulus then argument.
std::vector<SpherePoint> poles_in_disk(const MapSpec& map, double radius);

struct SingularData {
    std::vector<SpherePoint> critical_values;
    std::vector<SpherePoint> asymptotic_values;
    bool infinity_is_asymptotic = false;
};

/// Critical and asymptotic values. Throws RootSearchFailed for the pole-series search.
SingularData singular_values(const MapSpec& map);

struct OrbitAlive {};
struct OrbitHitPole {
    int step;
};
struct OrbitEscaped {
    int step;
    double radius;
};
struct OrbitCycle {
    std::vector<SpherePoint> points;
};

struct OrbitRecord {
    std::vector<SpherePoint> points;
    std::variant<OrbitAlive, OrbitHitPole, OrbitEscaped, OrbitCycle> terminal;
};

/// Forward orbit with prepole termination, escape test and spherical cycle detection.
OrbitRecord orbit(const MapSpec& map, const SpherePoint& z0, int max_steps, double escape_radius,
                  double cycle_tolerance = 1e-9, int max_period = 16);

/// |(f^p)'| along a cycle, i.e. the product of f^x over its points.
double cycle_multiplier(const MapSpec& map, const std::vector<SpherePoint>& cycle);

}  // namespace merodyn
