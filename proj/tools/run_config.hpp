#pragma once

#include "merodyn/dimension.hpp"
#include "merodyn/map_family.hpp"
#include "merodyn/render.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace merodyn::cli {

using nlohmann::json;

struct ClassifyParams {
    int horizon = 200;
    int sample_count = 400;
    int sample_depth = 30;
};

struct PressureParams {
    std::vector<double> t_values{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
    int depth = 0;
    int budget = 41;
    std::size_t max_level_nodes = 200000;
    double sampling_t = 1.0;
    std::optional<cplx> base_point;
};

struct RenderParams {
    Viewport viewport;
    int nx = 0;
    int ny = 0;
    Probe probe;
};

struct CodeParams {
    int count = 200;
    int sample_depth = 30;
    int depth = 12;
    int prepole_depth = 2;
    int prepole_budget = 5;
};

struct RunConfig {
    std::optional<MapSpec> map;
    std::uint64_t seed = 1;
    ClassifyParams classify;
    PressureParams pressure;
    DimensionConfig dim;
    RenderParams render;
    CodeParams code;
};

/// Parses a config document. Throws Error(ConfigError) naming the line or the field at fault.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

MapSpec parse_map(const json& j, const std::string& path = "map");
json map_to_json(const MapSpec& map);

json complex_to_json(cplx z);
/// The configuration with every default filled in.
json resolved_config(const RunConfig& config);

/// Rational maps use depth 16, the transcendental families 6.
int default_depth(const MapSpec& map);

}  // namespace merodyn::cli
