#pragma once

#include "merodyn/map_family.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace merodyn {

struct InverseIteration {
    SpherePoint seed;
    int depth;
};
struct PrepoleClosure {
    int depth;
};

struct JuliaSample {
    std::vector<SpherePoint> points;
    std::variant<InverseIteration, PrepoleClosure> method = PrepoleClosure{0};
    int count = 0;
};

/// A repelling fixed point, found by root finding (rational) or a Newton grid search.
/// Throws NoRepellingSeed.
SpherePoint repelling_fixed_point(const MapSpec& map);

/// Random backward orbits of length `depth` from a repelling fixed point. Branches are drawn with
/// probability proportional to 1/f^x among the first `budget` preimages. Each returned point is
/// checked by forward iteration against its own backward chain.
JuliaSample julia_sample(const MapSpec& map, int count, int depth, std::uint64_t seed, int budget = 41);

/// Prepoles of order 1..depth: poles, then up to `budget` preimages of each prepole of the
/// previous order. Throws InvalidArgument for maps without poles.
JuliaSample prepole_sample(const MapSpec& map, int depth, int budget);

/// Forward orbits of all singular values, cut at poles.
std::vector<SpherePoint> post_singular_orbit(const MapSpec& map, int horizon);

enum class Verdict { Yes, No, Undetermined };
std::string_view to_string(Verdict v);

struct AttractingCycle {
    std::vector<SpherePoint> points;
    double multiplier;
};

struct HyperbolicityReport {
    Verdict in_H_sphere = Verdict::Undetermined;
    Verdict in_H_plane = Verdict::Undetermined;
    Verdict in_H_euclidean = Verdict::Undetermined;  // diagnostic only
    double post_singular_to_julia_distance = 0.0;
    double sample_resolution = 0.0;
    std::vector<AttractingCycle> attracting_cycles;
    std::string evidence;
};

HyperbolicityReport classify(const MapSpec& map, int horizon, const JuliaSample& sample);

struct ExpansionEstimate {
    double c_hat = 0.0;
    double lambda_hat = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    /// (n, min over the sample of log (f^n)^x), n = 0..max_depth
    std::vector<std::pair<int, double>> per_depth_minima;
};

/// Throws DegenerateFit with fewer than 3 usable depths.
ExpansionEstimate expansion_estimate(const MapSpec& map, const JuliaSample& sample, int max_depth);

/// Same, with Euclidean derivatives |(f^n)'|.
ExpansionEstimate euclidean_expansion_estimate(const MapSpec& map, const JuliaSample& sample, int max_depth);

}  // namespace merodyn
