#include "merodyn/dimension.hpp"
#include "merodyn/error.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace merodyn;

namespace {

RasterGrid empty_raster(int n, double width) {
    RasterGrid g;
    g.viewport = {0.0, width, width};
    g.nx = g.ny = n;
    g.occupied.assign(static_cast<std::size_t>(n) * n, 0);
    g.steps.assign(g.occupied.size(), 0);
    return g;
}

void mark(RasterGrid& g, cplx z) {
    if (const auto c = g.cell_of(z)) g.occupied[static_cast<std::size_t>(c->second) * g.nx + c->first] = 1;
}

}  // namespace

TEST_CASE("moran equation") {
    CHECK(moran_root({1.0 / 3, 1.0 / 3}) == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-12));
    CHECK(moran_root({0.5, 0.5}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(moran_root({0.25, 0.25, 0.25, 0.25}) == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<double> b{0.3, 0.2, 0.1, 0.05};
    const double t = moran_root(b);
    double s = 0.0;
    for (double x : b) s += std::pow(x, t);
    CHECK(std::abs(s - 1.0) < 1e-10);
    auto more = b;
    more.push_back(0.01);
    CHECK(moran_root(more) > t);

    CHECK_THROWS_AS(moran_root({0.5}), Error);
    CHECK_THROWS_AS(moran_root({0.5, 1.5}), Error);
}

TEST_CASE("box counting examples") {
    const std::vector<int> levels{1, 2, 3, 4, 5, 6, 7};
    SUBCASE("unit circle") {
        auto g = empty_raster(2048, 4.2);
        for (int k = 0; k < 200000; ++k) mark(g, std::polar(1.0, 2 * std::numbers::pi * k / 200000));
        const auto b = box_counting(g, levels);
        CHECK(std::abs(b.dim - 1.0) < 0.05);
    }
    SUBCASE("full raster") {
        auto g = empty_raster(512, 1.0);
        std::fill(g.occupied.begin(), g.occupied.end(), 1);
        const auto b = box_counting(g, levels);
        CHECK(std::abs(b.dim - 2.0) < 0.01);
    }
    SUBCASE("single cell") {
        auto g = empty_raster(512, 1.0);
        g.occupied[0] = 1;
        const auto b = box_counting(g, levels);
        CHECK(std::abs(b.dim) < 1e-12);
        CHECK(b.residual < 1e-12);
    }
    SUBCASE("middle-third cantor set") {
        auto g = empty_raster(6561, 1.0);
        for (int i = 0; i < 6561; ++i) {
            bool in = true;
            for (int v = i; v > 0; v /= 3) in = in && v % 3 != 1;
            if (in) mark(g, cplx(-0.5 + (i + 0.5) / 6561.0, 0.0));
        }
        const auto b = box_counting(g, {2, 3, 4, 5, 6, 7, 8});
        CHECK(std::abs(b.dim - std::log(2.0) / std::log(3.0)) < 0.05);
    }
    SUBCASE("errors") {
        auto g = empty_raster(64, 1.0);
        CHECK_THROWS_AS(box_counting(g, levels), Error);
        g.occupied[5] = 1;
        CHECK_THROWS_AS(box_counting(g, {1, 2, 3}), Error);
    }
}

TEST_CASE("ifs lower bound for the tangent map") {
    const auto m = MapSpec::tangent(0.5);
    const auto a = repelling_fixed_point(m).raw();
    const auto b = ifs_lower_bound(m, a, 0.4, 3);
    REQUIRE(b.system.branches.size() >= 2);
    for (const auto& br : b.system.branches) {
        CHECK(br.derivative > 324.0);
        CHECK(br.b_lower <= br.b_upper);
        CHECK(br.b_upper < 0.25);
        CHECK(std::abs(br.fixed_point - a) < 0.4);
    }
    CHECK(b.t0 > 0.0);
    CHECK(b.t0 < 0.7501 + 0.02);
    CHECK_THROWS_AS(ifs_lower_bound(m, a, 0.4, 1), Error);
}

TEST_CASE("default rasters") {
    const auto q = default_raster(MapSpec::polynomial({0.1, 0.0, 1.0}));
    CHECK(q.viewport.width == doctest::Approx(4.0));
    CHECK(q.nx == 2048);
    const auto t = default_raster(MapSpec::tangent(0.5));
    CHECK(t.viewport.width == doctest::Approx(std::numbers::pi));
    CHECK(t.ny == 64);
}

TEST_CASE("dimension report for z^2") {
    DimensionConfig cfg;
    cfg.nx = cfg.ny = 1024;
    cfg.box_levels = {1, 2, 3, 4, 5, 6};
    const auto r = dimension_report(MapSpec::polynomial({0.0, 0.0, 1.0}), cfg);
    CHECK(std::abs(r.s_bowen - 1.0) < 1e-3);
    CHECK(std::abs(r.box_count.dim - 1.0) < 0.05);
    CHECK(r.radial_note == RadialNote::SphereHyperbolic_FullJulia);
    CHECK(r.verdict_consistent);
    REQUIRE(r.ifs_lower);
    CHECK(*r.ifs_lower <= r.s_bowen + 0.02);
}

TEST_CASE("dimension report refuses non-hyperbolic maps") {
    DimensionConfig cfg;
    cfg.nx = cfg.ny = 128;
    try {
        dimension_report(MapSpec::polynomial({-0.75, 0.0, 1.0}), cfg);
        FAIL("expected HypothesisUnverified");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::HypothesisUnverified);
    }
}
