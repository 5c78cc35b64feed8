#include "merodyn/error.hpp"
#include "merodyn/transfer.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace merodyn {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

PressureEstimate pressure_from_tree(const PreimageTree& tree, double t) {
    const auto sums = transfer_sums(tree, t);
    const int depth = static_cast<int>(sums.size());
    std::vector<double> y(depth);
    for (int n = 0; n < depth; ++n) {
        y[n] = sums[n].log_value;
        if (!std::isfinite(y[n])) {
            std::ostringstream os;
            os << "transfer sum at t=" << t << " level " << n + 1 << " is not finite";
            throw Error(ErrorCode::Diverged, os.str());
        }
    }
    PressureEstimate est;
    est.depth = depth;
    if (depth == 1) {
        est.P = y[0];
    } else {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int n = 1; n <= depth; ++n) {
            sx += n;
            sy += y[n - 1];
            sxx += static_cast<double>(n) * n;
            sxy += n * y[n - 1];
        }
        est.P = (depth * sxy - sx * sy) / (depth * sxx - sx * sx);
        bool accelerating = depth >= 4;
        for (int n = 2; n <= depth; ++n) {
            const double inc = y[n - 1] - y[n - 2];
            est.residual = std::max(est.residual, std::abs(inc - est.P));
            if (n >= 3 && !(inc > y[n - 2] - y[n - 3])) accelerating = false;
        }
        if (accelerating) {
            const double growth = (y[depth - 1] - y[depth - 2]) - (y[1] - y[0]);
            if (growth > 1.0) {
                std::ostringstream os;
                os << "increments grow by " << growth << " at t=" << t;
                throw Error(ErrorCode::Diverged, os.str());
            }
        }
    }
    est.tail_bound_log = sums.back().tail_log - sums.back().log_value;
    return est;
}

PressureEstimate pressure_estimate(const MapSpec& map, const SpherePoint& a, double t, int depth, int budget) {
    TreeOptions opt;
    opt.depth = depth;
    opt.branch_budget = budget;
    opt.sampling_t = t;
    return pressure_from_tree(build_tree(map, a, opt), t);
}

PressureEstimator::PressureEstimator(const MapSpec& map, const SpherePoint& a, const TreeOptions& options)
    : tree_(build_tree(map, a, options)) {}

BowenRoot poincare_exponent(const PressureEstimator& est, std::pair<double, double> bracket, double tol) {
    auto [lo, hi] = bracket;
    if (!(lo < hi) || !(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "bracket must satisfy lo < hi, tol > 0");
    auto P = [&](double t) {
        try {
            return est.at(t).P;
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Diverged) return kInf;
            throw;
        }
    };
    const double p_lo = P(lo), p_hi = P(hi);
    if (!(p_lo > 0.0) || !(p_hi < 0.0)) {
        std::ostringstream os;
        os << "P(" << lo << ")=" << p_lo << ", P(" << hi << ")=" << p_hi;
        throw Error(ErrorCode::BadBracket, os.str());
    }
    BowenRoot root;
    while (hi - lo >= tol) {
        const double mid = 0.5 * (lo + hi);
        if (P(mid) > 0.0) lo = mid;
        else hi = mid;
        ++root.iterations;
    }
    root.s = 0.5 * (lo + hi);
    const auto at = est.at(root.s);
    root.pressure_at_s = at.P;
    root.residual = at.residual;
    return root;
}

BowenRoot poincare_exponent(const MapSpec& map, const SpherePoint& a, std::pair<double, double> bracket, double tol,
                            int depth, int budget) {
    TreeOptions opt;
    opt.depth = depth;
    opt.branch_budget = budget;
    opt.sampling_t = 0.5 * (bracket.first + bracket.second);
    const PressureEstimator est(map, a, opt);
    return poincare_exponent(est, bracket, tol);
}

PressureCurve pressure_curve(const PressureEstimator& estimator, const std::vector<double>& t_values) {
    PressureCurve c;
    c.base_point = estimator.tree().base_point;
    c.depth_used = estimator.tree().depth();
    for (double t : t_values) {
        c.t_values.push_back(t);
        try {
            const auto e = estimator.at(t);
            c.P_values.push_back(e.P);
            c.fit_residuals.push_back(e.residual);
            c.tail_bound_logs.push_back(e.tail_bound_log);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Diverged) throw;
            c.P_values.push_back(kInf);
            c.fit_residuals.push_back(kInf);
            c.tail_bound_logs.push_back(kInf);
        }
    }
    return c;
}

std::string to_csv(const PressureCurve& curve) {
    std::ostringstream os;
    os << "t,P,residual,depth,tail_bound_log\n";
    os << std::setprecision(12);
    for (std::size_t i = 0; i < curve.t_values.size(); ++i) {
        os << curve.t_values[i] << ',' << curve.P_values[i] << ',' << curve.fit_residuals[i] << ','
           << curve.depth_used << ',' << curve.tail_bound_logs[i] << '\n';
    }
    return os.str();
}

std::optional<double> finite_edge(const PressureCurve& curve) {
    for (std::size_t i = 0; i < curve.t_values.size(); ++i)
        if (std::isfinite(curve.P_values[i])) return curve.t_values[i];
    return std::nullopt;
}

}  // namespace merodyn
