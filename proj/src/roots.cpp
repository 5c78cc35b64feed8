#include "merodyn/roots.hpp"

#include "merodyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace merodyn {

namespace {

struct EvalResult {
    cplx p, dp;
    double scale;  // sum |c_i| |z|^i
};

EvalResult eval_with_derivative(std::span<const cplx> c, cplx z) {
    cplx p = 0.0, dp = 0.0;
    double scale = 0.0;
    const double r = std::abs(z);
    for (std::size_t i = c.size(); i-- > 0;) {
        dp = dp * z + p;
        p = p * z + c[i];
        scale = scale * r + std::abs(c[i]);
    }
    return {p, dp, scale};
}

std::vector<cplx> quadratic_roots(cplx c0, cplx c1, cplx c2) {
    const cplx disc = std::sqrt(c1 * c1 - 4.0 * c2 * c0);
    const cplx sgn = (std::real(std::conj(c1) * disc) >= 0.0) ? 1.0 : -1.0;
    const cplx q = -0.5 * (c1 + sgn * disc);
    if (std::abs(q) == 0.0) return {cplx(0.0), cplx(0.0)};
    return {q / c2, c0 / q};
}

}  // namespace

cplx polish_root(std::span<const cplx> coeffs, cplx z, int iterations) {
    auto e = eval_with_derivative(coeffs, z);
    for (int it = 0; it < iterations; ++it) {
        if (std::abs(e.dp) == 0.0) break;
        const cplx next = z - e.p / e.dp;
        const auto en = eval_with_derivative(coeffs, next);
        if (!(std::abs(en.p) < std::abs(e.p))) break;
        z = next;
        e = en;
    }
    return z;
}

std::vector<cplx> polynomial_roots(std::span<const cplx> coeffs, int max_iterations) {
    std::size_t hi = coeffs.size();
    while (hi > 0 && coeffs[hi - 1] == cplx(0.0)) --hi;
    if (hi <= 1) return {};

    std::vector<cplx> roots;
    std::size_t lo = 0;
    while (lo < hi && coeffs[lo] == cplx(0.0)) {
        roots.emplace_back(0.0);
        ++lo;
    }
    const std::span<const cplx> c = coeffs.subspan(lo, hi - lo);
    const int n = static_cast<int>(c.size()) - 1;
    if (n == 0) return roots;
    if (n == 1) {
        roots.push_back(-c[0] / c[1]);
        return roots;
    }
    if (n == 2) {
        for (cplx r : quadratic_roots(c[0], c[1], c[2])) roots.push_back(polish_root(c, r));
        return roots;
    }

    // Aberth-Ehrlich from points on the circle of the geometric-mean root modulus
    const double radius = std::pow(std::abs(c[0]) / std::abs(c[n]), 1.0 / n);
    std::vector<cplx> z(n);
    for (int k = 0; k < n; ++k)
        z[k] = std::polar(radius, 2.0 * std::numbers::pi * k / n + 0.4);

    std::vector<bool> done(n, false);
    int converged = 0;
    for (int it = 0; it < max_iterations && converged < n; ++it) {
        for (int i = 0; i < n; ++i) {
            if (done[i]) continue;
            const auto e = eval_with_derivative(c, z[i]);
            if (std::abs(e.p) <= 1e-15 * e.scale) {
                done[i] = true;
                ++converged;
                continue;
            }
            const cplx ratio = e.p / e.dp;
            cplx sum = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) sum += 1.0 / (z[i] - z[j]);
            const cplx w = ratio / (1.0 - ratio * sum);
            z[i] -= w;
            if (std::abs(w) <= 1e-15 * std::max(1.0, std::abs(z[i]))) {
                done[i] = true;
                ++converged;
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        const cplx r = polish_root(c, z[i], 3);
        const auto e = eval_with_derivative(c, r);
        if (!(std::abs(e.p) <= 1e-8 * e.scale))
            throw Error(ErrorCode::RootSearchFailed,
                        "Aberth iteration did not converge for degree " + std::to_string(n));
        roots.push_back(r);
    }
    return roots;
}

}  // namespace merodyn
