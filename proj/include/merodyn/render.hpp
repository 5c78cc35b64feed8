#pragma once

#include "merodyn/map_family.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace merodyn {

struct Viewport {
    cplx center{0.0};
    double width = 4.0;
    double height = 4.0;
};

struct Probe {
    int max_steps = 200;
    double escape_radius = 1e6;  // transcendental families only
    double separation = 0.8;     // corner orbits farther apart than this mark the cell
};

/// Row 0 is the top of the viewport.
struct RasterGrid {
    Viewport viewport;
    int nx = 0;
    int ny = 0;
    std::vector<std::uint8_t> occupied;
    std::vector<std::int32_t> steps;  // iterations until the cell was decided

    bool at(int i, int j) const { return occupied[static_cast<std::size_t>(j) * nx + i] != 0; }
    std::size_t occupied_count() const;
    double pixel_width() const { return viewport.width / nx; }
    double pixel_height() const { return viewport.height / ny; }
    cplx cell_center(int i, int j) const;
    /// Cell containing z, or nullopt outside the viewport.
    std::optional<std::pair<int, int>> cell_of(cplx z) const;
};

/// A cell is marked when its corner orbits separate by more than probe.separation (spherical
/// distance), or when some but not all of them escape or hit a pole.
RasterGrid render_julia(const MapSpec& map, const Viewport& viewport, int nx, int ny, const Probe& probe = {});
/// Single-threaded reference.
RasterGrid render_julia_serial(const MapSpec& map, const Viewport& viewport, int nx, int ny, const Probe& probe = {});

/// Binary P5; marked cells are black, the rest shaded by step count.
void write_pgm(const RasterGrid& grid, std::ostream& os);
/// Header x,y then one line per occupied cell.
void write_occupancy_csv(const RasterGrid& grid, std::ostream& os);

}  // namespace merodyn
