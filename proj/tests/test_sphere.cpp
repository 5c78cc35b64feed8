#include "merodyn/error.hpp"
#include "merodyn/map_family.hpp"
#include "merodyn/sphere.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace merodyn;
using merodyn::testing::simpson;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("sphere point invariants") {
    CHECK_THROWS_AS(SpherePoint(cplx(std::nan(""), 0.0)), Error);
    CHECK_THROWS_AS(SpherePoint(cplx(0.0, std::numeric_limits<double>::infinity())), Error);
    CHECK(SpherePoint::infinity().is_infinity());
    CHECK_THROWS_AS((void)SpherePoint::infinity().value(), Error);
    CHECK(SpherePoint(cplx(1.0, 2.0)).value() == cplx(1.0, 2.0));
}

TEST_CASE("chordal distance examples against geodesic quadrature") {
    const SpherePoint a(cplx(0.3, -0.7));
    CHECK(chordal_distance(a, a) == 0.0);
    CHECK(chordal_distance(SpherePoint::infinity(), SpherePoint::infinity()) == 0.0);

    // along the positive real ray the geodesic length is the integral of 1/(1+r^2)
    const double ray = simpson([](double u) {
        // r = u/(1-u) maps [0,1) onto [0, inf)
        const double r = u / (1.0 - u);
        return 1.0 / (1.0 + r * r) / ((1.0 - u) * (1.0 - u));
    }, 0.0, 1.0 - 1e-12, 20000);
    CHECK(chordal_distance(cplx(0.0), SpherePoint::infinity()) == doctest::Approx(kPi / 2).epsilon(1e-14));
    CHECK(ray == doctest::Approx(kPi / 2).epsilon(1e-8));

    const double unit = simpson([](double r) { return 1.0 / (1.0 + r * r); }, 0.0, 1.0);
    CHECK(chordal_distance(cplx(0.0), cplx(1.0)) == doctest::Approx(kPi / 4).epsilon(1e-14));
    CHECK(unit == doctest::Approx(chordal_distance(cplx(0.0), cplx(1.0))).epsilon(1e-12));
}

TEST_CASE("chordal distance is symmetric, bounded and satisfies the triangle inequality") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lr(-6.0, 6.0), ang(0.0, 2 * kPi);
    auto draw = [&]() -> SpherePoint {
        if (rng() % 17 == 0) return SpherePoint::infinity();
        return std::polar(std::pow(10.0, lr(rng)), ang(rng));
    };
    for (int i = 0; i < 5000; ++i) {
        const SpherePoint a = draw(), b = draw(), c = draw();
        const double ab = chordal_distance(a, b);
        CHECK(ab == chordal_distance(b, a));
        CHECK(ab >= 0.0);
        CHECK(ab <= kPi / 2);
        const double slack = 4 * std::numeric_limits<double>::epsilon() * kPi;
        CHECK(ab <= chordal_distance(a, c) + chordal_distance(c, b) + slack);
    }
}

TEST_CASE("sphere coordinates reproduce the chordal distance") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const SpherePoint a = merodyn::testing::random_point(rng, 50.0);
        const SpherePoint b = (i % 10 == 0) ? SpherePoint::infinity() : SpherePoint(merodyn::testing::random_point(rng, 3.0));
        const auto pa = to_sphere_coords(a), pb = to_sphere_coords(b);
        const double chord = std::sqrt((pa.x - pb.x) * (pa.x - pb.x) + (pa.y - pb.y) * (pa.y - pb.y) +
                                       (pa.z - pb.z) * (pa.z - pb.z));
        CHECK(chord == doctest::Approx(std::sin(chordal_distance(a, b))).epsilon(1e-12));
    }
}

TEST_CASE("spherical derivative at infinity for rational maps") {
    // z^2/((z-1)(z-2))
    const auto f = MapSpec::rational({0.0, 0.0, 1.0}, {2.0, -3.0, 1.0});
    const auto df = spherical_derivative(f, SpherePoint::infinity());
    CHECK_FALSE(df.is_zero);
    CHECK(std::exp(df.log_value) == doctest::Approx(1.5).epsilon(1e-14));

    // 2z + 1/z = (2z^2 + 1)/z
    const auto g = MapSpec::rational({1.0, 0.0, 2.0}, {0.0, 1.0});
    CHECK(std::exp(spherical_derivative(g, SpherePoint::infinity()).log_value) == doctest::Approx(0.5).epsilon(1e-14));

    // z^2: infinity is a critical point
    const auto sq = MapSpec::polynomial({0.0, 0.0, 1.0});
    CHECK(spherical_derivative(sq, SpherePoint::infinity()).is_zero);

    CHECK_THROWS_AS(spherical_derivative(MapSpec::tangent(0.5), SpherePoint::infinity()), Error);
}

TEST_CASE("spherical derivative of degree-one maps through the raw formula") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        const cplx z = merodyn::testing::random_point(rng, 5.0);
        // identity
        CHECK(std::abs(log_sphere_factor(1.0, z, z)) < 1e-15);
        // 1/z is an isometry of the sphere
        CHECK(std::abs(std::exp(log_sphere_factor(-1.0 / (z * z), z, 1.0 / z)) - 1.0) < 1e-12);
    }
}

TEST_CASE("spherical derivative at poles uses the residue limit") {
    const auto t = MapSpec::tangent(0.5);
    const double p = kPi / 2;
    const auto at_pole = spherical_derivative(t, cplx(p));
    CHECK_FALSE(at_pole.is_zero);
    CHECK(std::exp(at_pole.log_value) == doctest::Approx((1 + p * p) / 0.5).epsilon(1e-14));
    // the limit from nearby points converges to the same value
    const auto near = spherical_derivative(t, cplx(p + 1e-7, 0.0));
    CHECK(std::exp(near.log_value) == doctest::Approx((1 + p * p) / 0.5).epsilon(1e-6));

    // double pole: f^x vanishes
    const auto dbl = MapSpec::rational({1.0}, {0.0, 0.0, 1.0});
    CHECK(spherical_derivative(dbl, cplx(0.0)).is_zero);
}

TEST_CASE("chain rule in log space") {
    const auto f = MapSpec::polynomial({0.1, 0.0, 1.0});
    const auto g = MapSpec::polynomial({-1.0, 0.0, 1.0});
    // (g o f)(z) = (z^2 + 0.1)^2 - 1 = z^4 + 0.2 z^2 - 0.99
    const auto gf = MapSpec::polynomial({-0.99, 0.0, 0.2, 0.0, 1.0});
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const cplx z = merodyn::testing::random_point(rng, 3.0);
        const double lhs = spherical_derivative(gf, z).log_value;
        const double rhs = spherical_derivative(g, eval(f, z)).log_value + spherical_derivative(f, z).log_value;
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("log1p_abs2 is overflow safe") {
    CHECK(log1p_abs2(cplx(1e200, 0.0)) == doctest::Approx(2 * std::log(1e200)));
    CHECK(log1p_abs2(cplx(1e-10, 0.0)) == doctest::Approx(1e-20).epsilon(1e-6));
}
