#include "merodyn/error.hpp"
#include "merodyn/hyperbolicity.hpp"
#include "merodyn/render.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace merodyn;

namespace {

constexpr double kPi = std::numbers::pi;

MapSpec square() { return MapSpec::polynomial({0.0, 0.0, 1.0}); }

}  // namespace

TEST_CASE("circle raster") {
    const auto g = render_julia(square(), {0.0, 4.0, 4.0}, 512, 512);
    REQUIRE(g.occupied_count() > 0);
    // every marked cell is within a few pixels of the unit circle
    const double px = g.pixel_width();
    std::size_t near = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.at(i, j)) {
                const double d = std::abs(std::abs(g.cell_center(i, j)) - 1.0);
                CHECK(d < 4 * px);
                if (d < px) ++near;
            }
    CHECK(near > g.occupied_count() / 2);
    // and every circle crossing is marked
    for (int k = 0; k < 720; ++k) {
        const auto c = g.cell_of(std::polar(1.0, 2 * kPi * (k + 0.5) / 720));
        REQUIRE(c);
        CHECK(g.at(c->first, c->second));
    }
}

TEST_CASE("tangent raster concentrates on the real axis") {
    const auto m = MapSpec::tangent(0.5);
    const auto g = render_julia(m, {0.0, 4 * kPi, 4.0}, 1024, 328);
    REQUIRE(g.occupied_count() > 0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.at(i, j)) CHECK(std::abs(g.cell_center(i, j).imag()) < 4 * g.pixel_height());
}

TEST_CASE("escaping viewport is empty") {
    const auto g = render_julia(square(), {cplx(10.0, 10.0), 2.0, 2.0}, 64, 64);
    CHECK(g.occupied_count() == 0);
}

TEST_CASE("sample points fall in marked cells") {
    const auto m = MapSpec::polynomial({0.1, 0.0, 1.0});
    const auto sample = julia_sample(m, 500, 30, 2);
    const auto g = render_julia(m, {0.0, 4.0, 4.0}, 1024, 1024);
    int inside = 0;
    for (const auto& p : sample.points) {
        const auto c = g.cell_of(p.raw());
        REQUIRE(c);
        if (g.at(c->first, c->second)) ++inside;
    }
    CHECK(inside >= 495);
}

TEST_CASE("parallel and serial rasters agree") {
    const auto m = MapSpec::tangent(0.5);
    const Viewport vp{cplx(kPi / 2, 0.0), kPi, 0.5};
    const auto a = render_julia(m, vp, 256, 64);
    const auto b = render_julia_serial(m, vp, 256, 64);
    CHECK(a.occupied == b.occupied);
    CHECK(a.steps == b.steps);
}

TEST_CASE("raster validation") {
    CHECK_THROWS_AS(render_julia(square(), {}, 32, 64), Error);
    CHECK_THROWS_AS(render_julia(square(), {0.0, -1.0, 1.0}, 64, 64), Error);
}

TEST_CASE("pgm and csv output") {
    const auto g = render_julia(square(), {0.0, 4.0, 4.0}, 64, 80);
    std::ostringstream pgm;
    write_pgm(g, pgm);
    const auto s = pgm.str();
    CHECK(s.rfind("P5\n64 80\n255\n", 0) == 0);
    CHECK(s.size() == std::string("P5\n64 80\n255\n").size() + 64 * 80);

    std::ostringstream csv;
    write_occupancy_csv(g, csv);
    const auto c = csv.str();
    CHECK(c.rfind("x,y\n", 0) == 0);
    CHECK(static_cast<std::size_t>(std::count(c.begin(), c.end(), '\n')) == g.occupied_count() + 1);
}
