#pragma once

#include "merodyn/hyperbolicity.hpp"
#include "merodyn/map_family.hpp"
#include "merodyn/render.hpp"
#include "merodyn/transfer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace merodyn {

/// Root t of sum b_i^t = 1 by bisection. Throws TooFewBranches with fewer than 2 ratios and
/// InvalidArgument unless every ratio lies in (0, 1).
double moran_root(const std::vector<double>& ratios);

struct IFSBranch {
    cplx fixed_point;
    double derivative = 0.0;  // |(f^N)'| at the fixed point
    double b_lower = 0.0;
    double b_upper = 0.0;
};

struct IFSSystem {
    cplx center;
    double radius = 0.0;
    int level = 0;
    std::vector<IFSBranch> branches;
};

struct IFSBound {
    IFSSystem system;
    double t0 = 0.0;
    std::size_t candidates = 0;  // preimages in the disk before admission and pruning
};

struct IFSOptions {
    int budget = 41;
    std::size_t max_level_nodes = 200000;
    double sampling_t = 1.0;
    std::uint64_t seed = 1;
};

/// Inverse branches of f^N near a that map B(a, r) into itself with |(f^N)'| > 324, pruned to
/// disjoint images, and the Moran root of their lower contraction ratios. Throws TooFewBranches.
IFSBound ifs_lower_bound(const MapSpec& map, cplx a, double r, int N, const IFSOptions& options = {});

struct BoxCount {
    double dim = 0.0;
    double residual = 0.0;
    std::vector<std::pair<int, std::size_t>> counts;  // (dyadic level, occupied boxes)
};

/// Least-squares slope of log N(box) against log(1/side) over boxes of 2^k pixels, k in levels.
/// N(box) is the smallest count over grids shifted by half a box.
/// Throws InvalidArgument with fewer than 4 levels and DegenerateRaster for an empty raster.
BoxCount box_counting(const RasterGrid& raster, const std::vector<int>& levels);

enum class RadialNote { SphereHyperbolic_FullJulia, PlaneHyperbolic_RadialOnly };
std::string_view to_string(RadialNote n);

struct DimensionConfig {
    std::uint64_t seed = 1;
    // Bowen root
    std::pair<double, double> bracket{0.55, 1.5};
    double tol = 1e-4;
    int depth = 0;   // 0: 16 for rational maps, 6 otherwise
    int budget = 41;
    std::size_t max_level_nodes = 200000;
    std::optional<cplx> base_point;  // default: the repelling fixed point
    // classification
    int horizon = 200;
    int sample_count = 400;
    int sample_depth = 30;
    // IFS
    double ifs_radius = 0.0;  // 0: a quarter of the distance from a to the post-singular set
    int ifs_n_max = 10;
    // raster; unset fields take the family defaults of default_raster
    std::optional<Viewport> viewport;
    int nx = 0;
    int ny = 0;
    Probe probe;
    std::vector<int> box_levels{2, 3, 4, 5, 6, 7};
    // tolerances
    double box_tolerance = 0.05;
    double ifs_tolerance = 0.02;
};

struct RasterSpec {
    Viewport viewport;
    int nx = 0;
    int ny = 0;
};

/// Default raster for box counting: 2048^2 around the filled Julia set for polynomials, and for
/// real tangent maps one period [0, pi] of the real line at 32768 x 64.
RasterSpec default_raster(const MapSpec& map);

struct DimensionReport {
    double s_bowen = 0.0;
    double bowen_residual = 0.0;
    int bowen_depth = 0;
    cplx base_point;
    std::optional<double> ifs_lower;  // nullopt when no level up to ifs_n_max gave two branches
    int ifs_level = 0;
    std::size_t ifs_branches = 0;
    double ifs_radius = 0.0;
    BoxCount box_count;
    RasterSpec raster;
    std::size_t occupied_cells = 0;
    HyperbolicityReport classification;
    RadialNote radial_note = RadialNote::PlaneHyperbolic_RadialOnly;
    bool verdict_consistent = false;
    std::vector<std::string> notes;
};

/// Throws HypothesisUnverified when the map is not classified hyperbolic; other stage errors are
/// rethrown with the stage name attached.
DimensionReport dimension_report(const MapSpec& map, const DimensionConfig& config);

}  // namespace merodyn
