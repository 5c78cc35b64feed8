#include "merodyn/error.hpp"
#include "merodyn/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <sstream>

namespace merodyn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

std::string node_path(const PreimageTree& tree, int level, int index) {
    std::vector<long> path;
    for (int n = level; n > 0 && index >= 0; --n) {
        path.push_back(tree.levels[n][index].branch);
        index = tree.levels[n][index].parent;
    }
    std::ostringstream os;
    os << "tree path [";
    for (std::size_t i = path.size(); i-- > 0;) os << path[i] << (i ? "," : "");
    os << "]";
    return os.str();
}

// Probability-proportional-to-size systematic sample of m items.
std::vector<std::pair<int, double>> pps_sample(const std::vector<double>& log_w, std::size_t m, std::mt19937_64& rng) {
    const std::size_t n = log_w.size();
    std::vector<std::pair<int, double>> out;
    if (n <= m) {
        for (std::size_t i = 0; i < n; ++i) out.emplace_back(static_cast<int>(i), 1.0);
        return out;
    }
    const double top = *std::max_element(log_w.begin(), log_w.end());
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(log_w[i] - top);
    std::vector<double> pi(n, 0.0);
    std::vector<bool> certain(n, false);
    std::size_t n_certain = 0;
    for (;;) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (!certain[i]) total += w[i];
        const double slots = static_cast<double>(m - n_certain);
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (certain[i]) continue;
            pi[i] = total > 0.0 ? slots * w[i] / total : 0.0;
            if (pi[i] >= 1.0) {
                certain[i] = true;
                pi[i] = 1.0;
                ++n_certain;
                changed = true;
            }
        }
        if (!changed || n_certain >= m) break;
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (certain[i]) {
            out.emplace_back(static_cast<int>(i), 1.0);
            continue;
        }
        if (pi[i] <= 0.0) continue;
        const double before = std::floor(cum - u);
        cum += pi[i];
        if (std::floor(cum - u) > before) out.emplace_back(static_cast<int>(i), pi[i]);
    }
    return out;
}

struct Expansion {
    PreimageSet set;
    std::exception_ptr error;
};

PreimageTree build_impl(const MapSpec& map, const SpherePoint& a, const TreeOptions& opt, bool parallel) {
    if (opt.depth < 1) throw Error(ErrorCode::InvalidArgument, "tree depth must be at least 1");
    if (opt.branch_budget < 1) throw Error(ErrorCode::InvalidArgument, "branch budget must be positive");

    PreimageTree tree;
    tree.base_point = a;
    tree.levels.push_back({TreeNode{a}});
    tree.truncation.push_back({});
    std::vector<double> mult_ref{0.0};  // cumulative log tail multiplier at the sampling exponent

    for (int n = 1; n <= opt.depth; ++n) {
        const auto& parents = tree.levels[n - 1];
        std::vector<double> log_w;
        std::vector<int> eligible;
        for (int i = 0; i < static_cast<int>(parents.size()); ++i) {
            const auto& p = parents[i];
            if (p.flagged) continue;
            eligible.push_back(i);
            log_w.push_back(p.log_ht - opt.sampling_t * p.cum_log_fx + mult_ref[i]);
        }
        const std::size_t cap = std::max<std::size_t>(1, opt.max_level_nodes / opt.branch_budget);
        std::mt19937_64 rng(opt.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(n));
        auto picks = pps_sample(log_w, cap, rng);
        for (auto& pk : picks) pk.first = eligible[pk.first];

        std::vector<Expansion> results(picks.size());
        const long count = static_cast<long>(picks.size());
        if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
            for (long i = 0; i < count; ++i) {
                try {
                    results[i].set = preimages(map, parents[picks[i].first].point, opt.branch_budget);
                } catch (...) {
                    results[i].error = std::current_exception();
                }
            }
        } else {
            for (long i = 0; i < count; ++i) {
                try {
                    results[i].set = preimages(map, parents[picks[i].first].point, opt.branch_budget);
                } catch (...) {
                    results[i].error = std::current_exception();
                }
            }
        }

        std::vector<TreeNode> level;
        std::vector<double> level_mult;
        double tail_mass = kNegInf;
        for (long i = 0; i < count; ++i) {
            const int pi = picks[i].first;
            const TreeNode& parent = parents[pi];
            if (results[i].error) {
                try {
                    std::rethrow_exception(results[i].error);
                } catch (const Error& e) {
                    rethrow_with_context(e, node_path(tree, n - 1, pi));
                }
            }
            const PreimageSet& set = results[i].set;
            const double log_ht = parent.log_ht - std::log(picks[i].second);
            const int offset = static_cast<int>(level.size());
            for (const auto& b : set.branches) {
                TreeNode node{b.point};
                node.log_fx = b.log_fx;
                node.cum_log_fx = parent.cum_log_fx + b.log_fx;
                node.log_ht = log_ht;
                node.parent = pi;
                node.branch = b.branch;
                node.flagged = b.fx_zero || !std::isfinite(node.cum_log_fx);
                level.push_back(node);
                level_mult.push_back(mult_ref[pi]);
            }
            // tails sorted by representative so each node owns a contiguous range
            std::vector<TailModel> tails = set.tails;
            std::stable_sort(tails.begin(), tails.end(),
                             [](const TailModel& x, const TailModel& y) { return x.representative < y.representative; });
            for (const auto& tm : tails) {
                TreeNode& rep = level[offset + tm.representative];
                if (rep.tail_count == 0) rep.tail_begin = static_cast<int>(tree.tails.size());
                ++rep.tail_count;
                tree.tails.push_back({tm, n, offset + tm.representative});
            }
        }
        // multipliers and tail mass at the sampling exponent
        for (std::size_t j = 0; j < level.size(); ++j) {
            const TreeNode& node = level[j];
            if (node.tail_count == 0 || node.flagged) continue;
            double acc = 0.0;
            for (int k = node.tail_begin; k < node.tail_begin + node.tail_count; ++k) {
                const auto& tm = tree.tails[k].model;
                const double ts = std::max(opt.sampling_t, tm.convergence_edge() + 0.25);
                acc = log_add(acc, log_tail_ratio(tm, node.log_fx, node.point, ts));
            }
            const double base = node.log_ht - opt.sampling_t * node.cum_log_fx + level_mult[j];
            tail_mass = log_add(tail_mass, base + std::log(std::expm1(acc)));
            level_mult[j] += acc;
        }
        tree.truncation.push_back({opt.branch_budget, tail_mass, static_cast<int>(parents.size()),
                                   static_cast<int>(picks.size())});
        tree.levels.push_back(std::move(level));
        mult_ref = std::move(level_mult);
    }
    return tree;
}

}  // namespace

std::size_t PreimageTree::node_count() const noexcept {
    std::size_t c = 0;
    for (const auto& l : levels) c += l.size();
    return c;
}

PreimageTree build_tree(const MapSpec& map, const SpherePoint& a, int depth, int branch_budget) {
    TreeOptions opt;
    opt.depth = depth;
    opt.branch_budget = branch_budget;
    return build_tree(map, a, opt);
}

PreimageTree build_tree(const MapSpec& map, const SpherePoint& a, const TreeOptions& options) {
    return build_impl(map, a, options, options.parallel);
}

PreimageTree build_tree_serial(const MapSpec& map, const SpherePoint& a, const TreeOptions& options) {
    return build_impl(map, a, options, false);
}

std::vector<TransferSum> transfer_sums(const PreimageTree& tree, double t) {
    std::vector<TransferSum> out;
    std::vector<double> mult_prev{0.0};
    for (int n = 1; n <= tree.depth(); ++n) {
        const auto& level = tree.levels[n];
        std::vector<double> mult(level.size(), 0.0);
        double with = kNegInf, without = kNegInf;
        for (std::size_t j = 0; j < level.size(); ++j) {
            const TreeNode& node = level[j];
            if (node.flagged) continue;
            double m = mult_prev[node.parent];
            if (node.tail_count > 0) {
                double acc = 0.0;
                for (int k = node.tail_begin; k < node.tail_begin + node.tail_count; ++k)
                    acc = log_add(acc, log_tail_ratio(tree.tails[k].model, node.log_fx, node.point, t));
                m += acc;
            }
            mult[j] = m;
            const double base = node.log_ht - t * node.cum_log_fx;
            with = log_add(with, base + m);
            without = log_add(without, base);
        }
        TransferSum s;
        s.log_value = with;
        if (std::isfinite(with) && with > without) s.tail_log = with + std::log1p(-std::exp(without - with));
        out.push_back(s);
        mult_prev = std::move(mult);
    }
    return out;
}

TransferSum transfer_sum(const PreimageTree& tree, double t, int n) {
    if (n < 1 || n > tree.depth()) throw Error(ErrorCode::InvalidArgument, "level outside the tree");
    return transfer_sums(tree, t)[n - 1];
}

ConsistencyReport tree_consistency(const MapSpec& map, const PreimageTree& tree) {
    ConsistencyReport r;
    for (int n = 1; n <= tree.depth(); ++n) {
        for (const auto& node : tree.levels[n]) {
            ++r.nodes;
            const SpherePoint& parent = tree.levels[n - 1][node.parent].point;
            r.max_step_error = std::max(r.max_step_error, chordal_distance(eval(map, node.point), parent));
            SpherePoint z = node.point;
            double err = 0.0;
            try {
                for (int k = 0; k < n; ++k) z = eval(map, z);
                err = chordal_distance(z, tree.base_point);
            } catch (const Error&) {
                err = std::numeric_limits<double>::infinity();
            }
            r.max_forward_error = std::max(r.max_forward_error, err);
        }
    }
    return r;
}

}  // namespace merodyn
