#include "merodyn/error.hpp"
#include "merodyn/transfer.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <random>

namespace merodyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// The preimage of `target` on the branch through `z` (with f(z) close to target).
std::optional<cplx> follow_branch(const MapSpec& map, cplx z, cplx target) {
    cplx w = z;
    for (int it = 0; it < 50; ++it) {
        const SpherePoint fw = eval(map, w);
        if (fw.is_infinity()) return std::nullopt;
        const cplx step = (fw.raw() - target) / derivative(map, w);
        w -= step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(w))) return w;
    }
    return std::nullopt;
}

// log (f^n)^x along the chain continued from u; nullopt when the continuation fails
std::optional<double> chain_log_derivative(const MapSpec& map, const std::vector<SpherePoint>& chain, cplx u) {
    double acc = 0.0;
    cplx cur = u;
    for (std::size_t k = 1; k < chain.size(); ++k) {
        if (chain[k].is_infinity()) return std::nullopt;
        const auto w = follow_branch(map, chain[k].raw(), cur);
        if (!w) return std::nullopt;
        // stay on the branch: the continuation must remain near the chain point
        if (chordal_distance(*w, chain[k]) > 0.25) return std::nullopt;
        const auto d = spherical_derivative(map, *w);
        if (d.is_zero) return std::nullopt;
        acc += d.log_value;
        cur = *w;
    }
    return acc;
}

}  // namespace

std::vector<DistortionResult> distortion_check(const MapSpec& map, const SpherePoint& a, int max_n, double t,
                                               int pair_count, const DistortionOptions& options) {
    if (max_n < 1 || pair_count < 1) throw Error(ErrorCode::InvalidArgument, "max_n and pair_count must be positive");
    if (a.is_infinity()) throw Error(ErrorCode::InvalidArgument, "distortion base point must be finite");
    double rho = options.radius;
    if (!(rho > 0.0)) {
        double dist = kInf;
        for (const auto& p : post_singular_orbit(map, options.horizon)) dist = std::min(dist, chordal_distance(p, a));
        if (map.is_transcendental()) dist = std::min(dist, chordal_distance(a, SpherePoint::infinity()));
        rho = 0.25 * dist;
    }
    // spherical radius rho corresponds to a Euclidean radius of about rho (1 + |a|^2)
    const double r_euclid = rho * (1.0 + std::norm(a.raw()));
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw = [&]() {
        const double r = r_euclid * std::sqrt(unif(rng));
        return a.raw() + std::polar(r, 2.0 * std::numbers::pi * unif(rng));
    };
    std::vector<std::pair<cplx, cplx>> pairs;
    for (int i = 0; i < pair_count; ++i) pairs.emplace_back(draw(), draw());

    const int chains_per_n = 16;
    std::vector<DistortionResult> out;
    for (int n = 1; n <= max_n; ++n) {
        DistortionResult res;
        res.n = n;
        res.pairs = pair_count;
        for (int c = 0; c < chains_per_n; ++c) {
            std::vector<SpherePoint> chain{a};
            for (int k = 0; k < n; ++k) {
                const auto set = preimages(map, chain.back(), options.budget);
                std::vector<double> w;
                double total = 0.0, top = -kInf;
                for (const auto& b : set.branches) top = std::max(top, b.fx_zero ? -kInf : -b.log_fx);
                for (const auto& b : set.branches) {
                    w.push_back(b.fx_zero ? 0.0 : std::exp(-b.log_fx - top));
                    total += w.back();
                }
                double u = unif(rng) * total;
                std::size_t pick = 0;
                while (pick + 1 < w.size() && u >= w[pick]) u -= w[pick++];
                chain.push_back(set.branches[pick].point);
            }
            bool used = false;
            for (const auto& [u, v] : pairs) {
                const double d = chordal_distance(u, v);
                if (d == 0.0) continue;
                const auto lu = chain_log_derivative(map, chain, u);
                const auto lv = chain_log_derivative(map, chain, v);
                if (!lu || !lv) continue;
                used = true;
                const double defect = std::abs(1.0 - std::exp(t * (*lu - *lv))) / d;
                res.k_hat = std::max(res.k_hat, defect);
            }
            if (used) ++res.branches;
        }
        out.push_back(res);
    }
    return out;
}

}  // namespace merodyn
