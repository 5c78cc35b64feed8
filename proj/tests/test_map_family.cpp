#include "merodyn/error.hpp"
#include "merodyn/map_family.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace merodyn;
using merodyn::testing::random_point;

namespace {

constexpr double kPi = std::numbers::pi;

bool near_pole(const MapSpec& m, cplx z, double margin) {
    for (const auto& p : poles_in_disk(m, std::abs(z) + 2 * margin + 1.0))
        if (std::abs(p.raw() - z) < margin) return true;
    return false;
}

template <class T>
bool holds(const OrbitRecord& r) {
    return std::holds_alternative<T>(r.terminal);
}

}  // namespace

TEST_CASE("map spec validation") {
    CHECK_THROWS_AS(MapSpec::polynomial({1.0, 1.0}), Error);
    // z(z-1)/(z-1) has a common root
    CHECK_THROWS_AS(MapSpec::rational({0.0, -1.0, 1.0}, {-1.0, 1.0}), Error);
    CHECK_THROWS_AS(MapSpec::tangent(0.0), Error);
    CHECK_THROWS_AS(MapSpec::exponential(0.0), Error);
    CHECK_THROWS_AS(MapSpec::pole_series(0, 1.0, 10), Error);
    CHECK_THROWS_AS(MapSpec::pole_series(2, -1.0, 10), Error);
    CHECK_THROWS_AS(MapSpec::pole_series(3, 1.0, 8), Error);
    CHECK_NOTHROW(MapSpec::pole_series(3, 1.0, 9));
    CHECK(MapSpec::rational({0.0, 0.0, 1.0}, {2.0, -3.0, 1.0}).degree() == 2);
}

TEST_CASE("eval examples") {
    const auto sq = MapSpec::polynomial({0.0, 0.0, 1.0});
    CHECK(eval(sq, 2.0).value() == cplx(4.0));
    CHECK(eval(sq, SpherePoint::infinity()).is_infinity());
    const auto t = MapSpec::tangent(0.5);
    CHECK(eval(t, 0.0).value() == cplx(0.0));
    CHECK(eval(t, kPi / 2).is_infinity());
    CHECK(eval(t, -3 * kPi / 2).is_infinity());
    CHECK_THROWS_AS(eval(t, SpherePoint::infinity()), Error);
    CHECK_THROWS_AS(eval(MapSpec::exponential(0.1), SpherePoint::infinity()), Error);

    const auto r = MapSpec::rational({1.0, 0.0, 1.0}, {0.0, 1.0});
    CHECK(eval(r, 0.0).is_infinity());
    CHECK(eval(r, SpherePoint::infinity()).is_infinity());
    CHECK(eval(MapSpec::rational({0.0, 0.0, 1.0}, {2.0, -3.0, 1.0}), SpherePoint::infinity()).value() == cplx(1.0));
}

TEST_CASE("derivative examples") {
    CHECK(derivative(MapSpec::polynomial({0.0, 0.0, 1.0}), 3.0) == cplx(6.0));
    CHECK(derivative(MapSpec::tangent(0.5), 0.0) == cplx(0.5));
    CHECK(derivative(MapSpec::exponential(0.1), 0.0) == cplx(0.1));
    try {
        (void)derivative(MapSpec::tangent(0.5), kPi / 2);
        FAIL("expected PoleAt");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PoleAt);
    }
}

TEST_CASE("derivative matches central differences") {
    const std::vector<MapSpec> maps = {
        MapSpec::rational({0.0, 0.0, 1.0}, {2.0, -3.0, 1.0}),
        MapSpec::polynomial({cplx(-0.12, 0.74), 0.0, 1.0}),
        MapSpec::tangent(cplx(0.5, 0.2)),
        MapSpec::exponential(0.1),
        MapSpec::pole_series(2, 0.01, 4000),
    };
    std::mt19937_64 rng(17);
    for (const auto& m : maps) {
        const double radius = m.family() == Family::PoleSeries ? 1.5 : 3.0;
        int tested = 0;
        while (tested < 100) {
            const cplx z = random_point(rng, radius);
            if (near_pole(m, z, 0.05)) continue;
            const double h = 1e-6 * (1.0 + std::abs(z));
            const cplx fd = (eval(m, z + h).value() - eval(m, z - h).value()) / (2.0 * h);
            const cplx d = derivative(m, z);
            CHECK(std::abs(fd - d) <= 1e-5 * std::abs(d));
            ++tested;
        }
    }
}

TEST_CASE("tangent is pi periodic") {
    const auto t = MapSpec::tangent(cplx(0.7, -0.3));
    std::mt19937_64 rng(19);
    for (int i = 0; i < 100; ++i) {
        const cplx z = random_point(rng, 4.0);
        const cplx a = eval(t, z).value(), b = eval(t, z + kPi).value();
        CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("pole series is odd and refuses large tails") {
    const auto f = MapSpec::pole_series(2, 0.01, 4000);
    std::mt19937_64 rng(23);
    for (int i = 0; i < 100; ++i) {
        const cplx z = random_point(rng, 3.0);
        if (near_pole(f, z, 1e-3)) continue;
        const cplx a = eval(f, z).value(), b = eval(f, -z).value();
        CHECK(std::abs(a + b) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
    try {
        (void)eval(MapSpec::pole_series(1, 1.0, 1), 1000.5);
        FAIL("expected TailTooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TailTooLarge);
    }
}

TEST_CASE("poles in disk") {
    const auto tp = poles_in_disk(MapSpec::tangent(0.5), 5.0);
    REQUIRE(tp.size() == 4);
    CHECK(std::abs(std::abs(tp[0].raw()) - kPi / 2) < 1e-15);
    CHECK(std::abs(std::abs(tp[3].raw()) - 3 * kPi / 2) < 1e-15);
    CHECK(poles_in_disk(MapSpec::exponential(0.1), 100.0).empty());
    const auto rp = poles_in_disk(MapSpec::rational({1.0, 0.0, 1.0}, {0.0, 1.0}), 2.0);
    REQUIRE(rp.size() == 1);
    CHECK(std::abs(rp[0].raw()) < 1e-15);

    const auto f = MapSpec::pole_series(2, 0.01, 400);
    const auto pp = poles_in_disk(f, 30.0);
    // n = 4, 5 give n^2 = 16, 25
    REQUIRE(pp.size() == 4);
    for (const auto& p : pp) {
        const double x = std::abs(p.raw().real());
        CHECK((std::abs(x - 16.0) < 1e-9 || std::abs(x - 25.0) < 1e-9));
        CHECK(eval(f, p).is_infinity());
    }
}

TEST_CASE("singular values") {
    const auto sq = singular_values(MapSpec::polynomial({0.0, 0.0, 1.0}));
    REQUIRE(sq.critical_values.size() == 2);
    bool has_zero = false, has_inf = false;
    for (const auto& v : sq.critical_values) {
        if (v.is_infinity()) has_inf = true;
        else if (std::abs(v.raw()) < 1e-14) has_zero = true;
    }
    CHECK(has_zero);
    CHECK(has_inf);
    CHECK(sq.asymptotic_values.empty());

    const auto t = MapSpec::tangent(0.5);
    const auto ts = singular_values(t);
    CHECK(ts.critical_values.empty());
    CHECK_FALSE(ts.infinity_is_asymptotic);
    REQUIRE(ts.asymptotic_values.size() == 2);
    // tan(iy) -> i as y -> +inf: evaluate far up and down the imaginary direction
    for (double sgn : {1.0, -1.0}) {
        const cplx far = eval(t, cplx(0.3, sgn * 40.0)).value();
        bool matched = false;
        for (const auto& a : ts.asymptotic_values) matched |= std::abs(a.raw() - far) < 1e-12;
        CHECK(matched);
    }

    const auto es = singular_values(MapSpec::exponential(0.1));
    CHECK(es.infinity_is_asymptotic);
    REQUIRE(es.asymptotic_values.size() == 1);
    CHECK(es.asymptotic_values[0].raw() == cplx(0.0));
    CHECK(es.critical_values.empty());
}

TEST_CASE("pole series critical values are images of zeros of the derivative") {
    const auto f = MapSpec::pole_series(2, 0.01, 3000);
    const auto s = singular_values(f);
    CHECK_FALSE(s.critical_values.empty());
    REQUIRE(s.asymptotic_values.size() == 1);
    CHECK(s.asymptotic_values[0].raw() == cplx(0.0));
    // values come in +-pairs by oddness
    for (const auto& v : s.critical_values) {
        bool paired = false;
        for (const auto& w : s.critical_values) paired |= std::abs(v.raw() + w.raw()) < 1e-9 * (1 + std::abs(v.raw()));
        CHECK(paired);
    }
}

TEST_CASE("orbit examples") {
    const auto sq = MapSpec::polynomial({0.0, 0.0, 1.0});
    const auto r1 = orbit(sq, 2.0, 10, 1e6);
    REQUIRE(holds<OrbitEscaped>(r1));
    CHECK(std::get<OrbitEscaped>(r1.terminal).step == 5);
    CHECK(r1.points.size() == 6);

    const auto t = MapSpec::tangent(0.5);
    const auto r2 = orbit(t, kPi / 2, 10, 1e6);
    REQUIRE(holds<OrbitHitPole>(r2));
    CHECK(std::get<OrbitHitPole>(r2.terminal).step == 0);
    CHECK(r2.points.size() == 1);

    const auto r3 = orbit(t, 0.3, 200, 1e6);
    REQUIRE(holds<OrbitCycle>(r3));
    const auto& cyc = std::get<OrbitCycle>(r3.terminal).points;
    REQUIRE(cyc.size() == 1);
    CHECK(std::abs(cyc[0].raw()) < 1e-8);
    CHECK(cycle_multiplier(t, cyc) == doctest::Approx(0.5).epsilon(1e-6));

    // a single step returns [z0, f(z0)]
    const auto r4 = orbit(t, 0.3, 1, 1e6);
    CHECK(holds<OrbitAlive>(r4));
    REQUIRE(r4.points.size() == 2);
    CHECK(r4.points[0].raw() == cplx(0.3));
    CHECK(r4.points[1].raw() == eval(t, 0.3).raw());

    // attracting fixed point of 0.1 e^z on the real line
    const auto e = orbit(MapSpec::exponential(0.1), 0.0, 200, 1e6);
    REQUIRE(holds<OrbitCycle>(e));
    const cplx w = std::get<OrbitCycle>(e.terminal).points[0].raw();
    CHECK(std::abs(0.1 * std::exp(w) - w) < 1e-8);
}
