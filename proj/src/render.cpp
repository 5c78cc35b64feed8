#include "merodyn/error.hpp"
#include "merodyn/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <numbers>
#include <ostream>

namespace merodyn {

namespace {

constexpr double kMerged = 1e-4;  // relative to the initial corner spread

struct CellResult {
    bool marked = false;
    int steps = 0;
};

double chord2(const SphereCoords& a, const SphereCoords& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

CellResult probe_cell(const MapSpec& map, const std::array<cplx, 4>& start, const Probe& probe) {
    std::array<SpherePoint, 4> z{start[0], start[1], start[2], start[3]};
    std::array<bool, 4> escaped{};
    std::array<SphereCoords, 4> p{};
    const bool transcendental = map.is_transcendental();
    // squared chords on the sphere of diameter 1: |P(a) - P(b)| = sin d(a, b)
    const double s = std::sin(std::min(probe.separation, std::numbers::pi / 2));
    const double split = s * s;
    double merged = 0.0;
    for (int step = 0; step <= probe.max_steps; ++step) {
        int n_escaped = 0;
        double sep = 0.0;
        for (int a = 0; a < 4; ++a)
            if (!escaped[a]) p[a] = to_sphere_coords(z[a]);
        for (int a = 0; a < 4; ++a) {
            if (escaped[a]) {
                ++n_escaped;
                continue;
            }
            for (int b = a + 1; b < 4; ++b)
                if (!escaped[b]) sep = std::max(sep, chord2(p[a], p[b]));
        }
        if (step == 0) merged = sep * kMerged * kMerged;
        if (n_escaped == 4) return {false, step};
        if (n_escaped > 0) return {true, step};
        if (sep > split) return {true, step};
        if (sep < merged || step == probe.max_steps) return {false, step};
        for (int a = 0; a < 4; ++a) {
            z[a] = eval(map, z[a]);
            if (transcendental && (z[a].is_infinity() || std::abs(z[a].raw()) > probe.escape_radius)) escaped[a] = true;
        }
    }
    return {false, probe.max_steps};
}

RasterGrid render_impl(const MapSpec& map, const Viewport& vp, int nx, int ny, const Probe& probe, bool parallel) {
    if (nx < 64 || ny < 64) throw Error(ErrorCode::InvalidArgument, "resolution must be at least 64x64");
    if (!(vp.width > 0.0) || !(vp.height > 0.0)) throw Error(ErrorCode::InvalidArgument, "viewport must have positive size");
    if (probe.max_steps < 1 || !(probe.separation > 0.0))
        throw Error(ErrorCode::InvalidArgument, "probe needs max_steps >= 1 and separation > 0");
    RasterGrid g;
    g.viewport = vp;
    g.nx = nx;
    g.ny = ny;
    const std::size_t cells = static_cast<std::size_t>(nx) * ny;
    g.occupied.assign(cells, 0);
    g.steps.assign(cells, 0);
    const double x0 = vp.center.real() - 0.5 * vp.width;
    const double y0 = vp.center.imag() + 0.5 * vp.height;
    const double hx = vp.width / nx, hy = vp.height / ny;
    auto corner = [&](int i, int j) { return cplx(x0 + i * hx, y0 - j * hy); };
    std::vector<std::exception_ptr> errors(ny);
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
    for (int j = 0; j < ny; ++j) {
        try {
            for (int i = 0; i < nx; ++i) {
                const auto r =
                    probe_cell(map, {corner(i, j), corner(i + 1, j), corner(i, j + 1), corner(i + 1, j + 1)}, probe);
                const std::size_t k = static_cast<std::size_t>(j) * nx + i;
                g.occupied[k] = r.marked ? 1 : 0;
                g.steps[k] = r.steps;
            }
        } catch (...) {
            errors[j] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return g;
}

}  // namespace

std::size_t RasterGrid::occupied_count() const {
    return static_cast<std::size_t>(std::count(occupied.begin(), occupied.end(), std::uint8_t{1}));
}

cplx RasterGrid::cell_center(int i, int j) const {
    return {viewport.center.real() - 0.5 * viewport.width + (i + 0.5) * pixel_width(),
            viewport.center.imag() + 0.5 * viewport.height - (j + 0.5) * pixel_height()};
}

std::optional<std::pair<int, int>> RasterGrid::cell_of(cplx z) const {
    const double u = (z.real() - (viewport.center.real() - 0.5 * viewport.width)) / pixel_width();
    const double v = ((viewport.center.imag() + 0.5 * viewport.height) - z.imag()) / pixel_height();
    if (!(u >= 0.0 && u < nx && v >= 0.0 && v < ny)) return std::nullopt;
    return std::make_pair(static_cast<int>(u), static_cast<int>(v));
}

RasterGrid render_julia(const MapSpec& map, const Viewport& viewport, int nx, int ny, const Probe& probe) {
    return render_impl(map, viewport, nx, ny, probe, true);
}

RasterGrid render_julia_serial(const MapSpec& map, const Viewport& viewport, int nx, int ny, const Probe& probe) {
    return render_impl(map, viewport, nx, ny, probe, false);
}

void write_pgm(const RasterGrid& grid, std::ostream& os) {
    os << "P5\n" << grid.nx << ' ' << grid.ny << "\n255\n";
    std::vector<char> row(grid.nx);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const std::size_t k = static_cast<std::size_t>(j) * grid.nx + i;
            const int shade = grid.occupied[k] ? 0 : 255 - std::min(200, 4 * grid.steps[k]);
            row[i] = static_cast<char>(static_cast<unsigned char>(shade));
        }
        os.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
}

void write_occupancy_csv(const RasterGrid& grid, std::ostream& os) {
    os << "x,y\n";
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
            if (grid.at(i, j)) os << i << ',' << j << '\n';
}

}  // namespace merodyn
