#include "merodyn/error.hpp"
#include "merodyn/nearest.hpp"
#include "merodyn/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

namespace merodyn {

namespace {

struct Row {
    std::vector<std::size_t> target;
    std::vector<double> weight;
};

Row build_row(const MapSpec& map, const SphereIndex& index, const SpherePoint& a, double t, int budget) {
    const auto set = preimages(map, a, budget);
    Row row;
    std::vector<double> mult(set.branches.size(), 0.0);
    for (const auto& tail : set.tails) {
        const auto& rep = set.branches[tail.representative];
        const double r = log_tail_ratio(tail, rep.log_fx, rep.point, t);
        if (!std::isfinite(r)) {
            std::ostringstream os;
            os << "tail sum diverges at t=" << t;
            throw Error(ErrorCode::Diverged, os.str());
        }
        mult[tail.representative] += std::exp(r);
    }
    for (std::size_t j = 0; j < set.branches.size(); ++j) {
        const auto& b = set.branches[j];
        if (b.fx_zero) continue;
        row.target.push_back(index.nearest(b.point));
        row.weight.push_back(std::exp(-t * b.log_fx) * (1.0 + mult[j]));
    }
    return row;
}

TransferEigenData eigen_impl(const MapSpec& map, const JuliaSample& sample, double t, int iterations, int budget,
                             bool parallel) {
    if (sample.points.size() < 100) throw Error(ErrorCode::InvalidArgument, "transfer_eigen needs at least 100 points");
    if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be positive");
    const SphereIndex index(sample.points);
    const long n = static_cast<long>(sample.points.size());
    std::vector<Row> rows(n);
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
    for (long i = 0; i < n; ++i) {
        try {
            rows[i] = build_row(map, index, sample.points[i], t, budget);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<double> g(n, 1.0), next(n);
    std::vector<double> log_norms;
    for (int it = 0; it < iterations; ++it) {
#pragma omp parallel for schedule(static) if (parallel)
        for (long i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < rows[i].target.size(); ++k) s += rows[i].weight[k] * g[rows[i].target[k]];
            next[i] = s;
        }
        double mean = 0.0;
        for (long i = 0; i < n; ++i) mean += next[i];
        mean /= static_cast<double>(n);
        if (!(mean > 0.0) || !std::isfinite(mean)) throw Error(ErrorCode::NotConverged, "degenerate normalization");
        for (long i = 0; i < n; ++i) g[i] = next[i] / mean;
        log_norms.push_back(std::log(mean));
    }
    const std::size_t tail = std::min<std::size_t>(10, log_norms.size());
    const auto first = log_norms.end() - static_cast<long>(tail);
    const auto [lo, hi] = std::minmax_element(first, log_norms.end());
    if (*hi - *lo > 1e-3) {
        std::ostringstream os;
        os << "normalization spread " << (*hi - *lo) << " over the last " << tail << " iterations";
        throw Error(ErrorCode::NotConverged, os.str());
    }
    TransferEigenData out;
    out.sample = sample;
    double acc = 0.0;
    for (auto it = first; it != log_norms.end(); ++it) acc += *it;
    out.eigenvalue_log = acc / static_cast<double>(tail);
    out.eigenfunction_values = g;
    out.iterations = iterations;
    return out;
}

}  // namespace

TransferEigenData transfer_eigen(const MapSpec& map, const JuliaSample& sample, double t, int iterations, int budget) {
    return eigen_impl(map, sample, t, iterations, budget, true);
}

TransferEigenData transfer_eigen_serial(const MapSpec& map, const JuliaSample& sample, double t, int iterations,
                                        int budget) {
    return eigen_impl(map, sample, t, iterations, budget, false);
}

}  // namespace merodyn
