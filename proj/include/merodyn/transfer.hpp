#pragma once

#include "merodyn/hyperbolicity.hpp"
#include "merodyn/map_family.hpp"
#include "merodyn/preimages.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace merodyn {

struct TreeNode {
    SpherePoint point;
    double log_fx = 0.0;      // log f^x(point)
    double cum_log_fx = 0.0;  // log (f^n)^x(point)
    double log_ht = 0.0;      // log of the inverse inclusion probability of the sampled path
    int parent = -1;
    long branch = 0;
    bool flagged = false;     // f^x underflow; excluded from sums and expansion
    int tail_begin = 0;       // tails represented by this node: tails[tail_begin, tail_begin + tail_count)
    int tail_count = 0;
};

struct TreeTail {
    TailModel model;
    int level = 0;
    int node = 0;
};

struct LevelTruncation {
    int branch_budget_used = 0;
    double tail_bound_log = 0.0;  // log of the modelled tail mass at the sampling exponent
    int parents = 0;
    int expanded_parents = 0;     // fewer than parents when the level was thinned
};

struct TreeOptions {
    int depth = 6;
    int branch_budget = 41;
    std::size_t max_level_nodes = 200000;
    double sampling_t = 1.0;  // exponent of the weights used to thin wide levels
    std::uint64_t seed = 1;
    bool parallel = true;
};

class PreimageTree {
public:
    SpherePoint base_point = SpherePoint::infinity();
    std::vector<std::vector<TreeNode>> levels;  // levels[0] holds the base point
    std::vector<TreeTail> tails;
    std::vector<LevelTruncation> truncation;    // truncation[n] for the expansion of level n-1 into n

    int depth() const noexcept { return static_cast<int>(levels.size()) - 1; }
    std::size_t node_count() const noexcept;
};

PreimageTree build_tree(const MapSpec& map, const SpherePoint& a, int depth, int branch_budget);
PreimageTree build_tree(const MapSpec& map, const SpherePoint& a, const TreeOptions& options);
/// Single-threaded reference with the same output as build_tree.
PreimageTree build_tree_serial(const MapSpec& map, const SpherePoint& a, const TreeOptions& options);

struct TransferSum {
    double log_value = 0.0;  // log L^n_t(1)(a); +inf when a tail diverges
    double tail_log = -std::numeric_limits<double>::infinity();  // log of the tail-modelled part
};

TransferSum transfer_sum(const PreimageTree& tree, double t, int n);
/// All levels 1..depth in one pass; element n-1 is level n.
std::vector<TransferSum> transfer_sums(const PreimageTree& tree, double t);

struct ConsistencyReport {
    double max_step_error = 0.0;     // max d(f(node), parent)
    double max_forward_error = 0.0;  // max d(f^n(node), base)
    std::size_t nodes = 0;
};
ConsistencyReport tree_consistency(const MapSpec& map, const PreimageTree& tree);

struct PressureEstimate {
    double P = 0.0;
    double residual = 0.0;
    int depth = 0;
    double tail_bound_log = -std::numeric_limits<double>::infinity();
};

PressureEstimate pressure_from_tree(const PreimageTree& tree, double t);
PressureEstimate pressure_estimate(const MapSpec& map, const SpherePoint& a, double t, int depth, int budget);

/// Builds one tree and evaluates the pressure at any t from it.
class PressureEstimator {
public:
    PressureEstimator(const MapSpec& map, const SpherePoint& a, const TreeOptions& options);
    PressureEstimate at(double t) const { return pressure_from_tree(tree_, t); }
    const PreimageTree& tree() const noexcept { return tree_; }

private:
    PreimageTree tree_;
};

struct BowenRoot {
    double s = 0.0;
    double residual = 0.0;     // pressure fit residual at s
    double pressure_at_s = 0.0;
    int iterations = 0;
};

BowenRoot poincare_exponent(const MapSpec& map, const SpherePoint& a, std::pair<double, double> bracket, double tol,
                            int depth, int budget);
BowenRoot poincare_exponent(const PressureEstimator& estimator, std::pair<double, double> bracket, double tol);

struct PressureCurve {
    std::vector<double> t_values;
    std::vector<double> P_values;       // +inf where the sum diverges
    std::vector<double> fit_residuals;
    std::vector<double> tail_bound_logs;
    int depth_used = 0;
    SpherePoint base_point = SpherePoint::infinity();
};

PressureCurve pressure_curve(const PressureEstimator& estimator, const std::vector<double>& t_values);
/// Header t,P,residual,depth,tail_bound_log.
std::string to_csv(const PressureCurve& curve);
/// Leftmost grid point with finite pressure, or nullopt.
std::optional<double> finite_edge(const PressureCurve& curve);

struct TransferEigenData {
    JuliaSample sample;
    double eigenvalue_log = 0.0;
    std::vector<double> eigenfunction_values;
    int iterations = 0;
};

TransferEigenData transfer_eigen(const MapSpec& map, const JuliaSample& sample, double t, int iterations,
                                 int budget = 41);
TransferEigenData transfer_eigen_serial(const MapSpec& map, const JuliaSample& sample, double t, int iterations,
                                        int budget = 41);

struct DistortionOptions {
    double radius = 0.0;  // 0 picks a quarter of the distance from a to the post-singular orbit
    int horizon = 200;
    std::uint64_t seed = 1;
    int budget = 41;
};

struct DistortionResult {
    int n = 0;
    double k_hat = 0.0;  // max |1 - ratio| / d(u, v) over pairs and tracked branches
    int pairs = 0;
    int branches = 0;
};

/// One result per n in 1..max_n.
std::vector<DistortionResult> distortion_check(const MapSpec& map, const SpherePoint& a, int max_n, double t,
                                               int pair_count, const DistortionOptions& options = {});

}  // namespace merodyn
