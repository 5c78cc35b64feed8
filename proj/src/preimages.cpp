#include "merodyn/preimages.hpp"

#include "merodyn/error.hpp"
#include "merodyn/roots.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace merodyn {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kDirectTerms = 32;

std::string fmt(const SpherePoint& a) {
    if (a.is_infinity()) return "inf";
    std::ostringstream os;
    os.precision(17);
    os << '(' << a.raw().real() << ',' << a.raw().imag() << ')';
    return os.str();
}

// Branch order 0, 1, -1, 2, -2, ...
long branch_at(int i) { return (i % 2) ? (i + 1) / 2 : -(i / 2); }

Preimage make_preimage(const MapSpec& map, const SpherePoint& z, long branch) {
    const auto d = spherical_derivative(map, z);
    return {z, d.log_value, d.is_zero, branch};
}

void check_not_omitted_lattice(cplx w, const SpherePoint& a) {
    // tan z = +-i has no solution
    if (std::abs(w - cplx(0.0, 1.0)) < 1e-12 || std::abs(w + cplx(0.0, 1.0)) < 1e-12)
        throw Error(ErrorCode::OmittedValue, fmt(a));
}

// Fills branches 0, 1, -1, ... of z0 + k*omega and attaches the two side tails.
PreimageSet lattice_preimages(cplx z0, cplx omega, double log_fprime_abs, double log_den, int budget,
                              bool log_growth, cplx lambda) {
    PreimageSet out;
    long kmax_pos = 0, kmax_neg = 0;
    int rep_pos = 0, rep_neg = 0;
    for (int i = 0; i < budget; ++i) {
        const long k = branch_at(i);
        const cplx z = z0 + static_cast<double>(k) * omega;
        out.branches.push_back({z, log_fprime_abs + log1p_abs2(z) - log_den, false, k});
        if (k >= kmax_pos) {
            kmax_pos = k;
            rep_pos = i;
        }
        if (k <= -kmax_neg) {
            kmax_neg = -k;
            rep_neg = i;
        }
    }
    for (int dir : {1, -1}) {
        TailModel t;
        t.kind = TailKind::Lattice;
        t.direction = dir;
        t.representative = dir > 0 ? rep_pos : rep_neg;
        t.z0 = z0;
        t.omega = omega;
        t.log_c = log_fprime_abs - log_den;
        t.first = (dir > 0 ? kmax_pos : kmax_neg) + 1;
        t.log_growth = log_growth;
        t.lambda = lambda;
        out.tails.push_back(t);
    }
    return out;
}

PreimageSet rational_preimages(const MapSpec& map, const SpherePoint& a, int budget) {
    const auto& num = map.num();
    const auto& den = map.den();
    std::vector<cplx> poly;
    int infinite_roots = 0;
    if (a.is_infinity()) {
        poly = den;
        infinite_roots = std::max(0, static_cast<int>(num.size()) - static_cast<int>(den.size()));
    } else {
        const cplx w = a.raw();
        const std::size_t n = std::max(num.size(), den.size());
        poly.assign(n, cplx(0.0));
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const cplx ni = i < num.size() ? num[i] : cplx(0.0);
            const cplx di = i < den.size() ? den[i] : cplx(0.0);
            poly[i] = ni - w * di;
            scale = std::max(scale, std::abs(ni) + std::abs(w * di));
        }
        while (poly.size() > 1 && std::abs(poly.back()) <= 1e-14 * scale) {
            poly.pop_back();
            ++infinite_roots;
        }
    }
    std::vector<SpherePoint> roots;
    for (const cplx r : polynomial_roots(poly)) roots.emplace_back(r);
    std::sort(roots.begin(), roots.end(), [](const SpherePoint& x, const SpherePoint& y) {
        const double rx = std::abs(x.raw()), ry = std::abs(y.raw());
        if (rx != ry) return rx < ry;
        return std::arg(x.raw()) < std::arg(y.raw());
    });
    for (int i = 0; i < infinite_roots; ++i) roots.push_back(SpherePoint::infinity());

    PreimageSet out;
    for (std::size_t i = 0; i < roots.size() && static_cast<int>(i) < budget; ++i) {
        const SpherePoint image = eval(map, roots[i]);
        if (chordal_distance(image, a) > 1e-8)
            throw Error(ErrorCode::RootPolishFailed, "branch " + std::to_string(i) + " of " + fmt(a));
        out.branches.push_back(make_preimage(map, roots[i], static_cast<long>(i)));
    }
    return out;
}

PreimageSet tangent_preimages(const MapSpec& map, const SpherePoint& a, int budget) {
    const cplx lam = std::get<TangentParams>(map.params()).lambda;
    if (a.is_infinity())
        return lattice_preimages(cplx(0.5 * kPi), kPi, -std::log(std::abs(lam)), 0.0, budget, false, lam);
    const cplx w = a.raw() / lam;
    check_not_omitted_lattice(w, a);
    // tan z0 = w, f'(z_k) = lambda (1 + w^2)
    const cplx z0 = std::atan(w);
    const double log_fp = std::log(std::abs(lam * (1.0 + w * w)));
    return lattice_preimages(z0, kPi, log_fp, log1p_abs2(a.raw()), budget, false, lam);
}

PreimageSet exponential_preimages(const MapSpec& map, const SpherePoint& a, int budget) {
    const cplx lam = std::get<ExponentialParams>(map.params()).lambda;
    if (a.is_infinity() || std::abs(a.raw()) == 0.0) throw Error(ErrorCode::OmittedValue, fmt(a));
    const cplx z0 = std::log(a.raw() / lam);
    return lattice_preimages(z0, cplx(0.0, 2.0 * kPi), std::log(std::abs(a.raw())), log1p_abs2(a.raw()), budget,
                             true, lam);
}

// f real-increasing on each gap (lo, hi) from -inf to +inf: safeguarded Newton.
double pole_series_real_solution(const MapSpec& map, double lo, double hi, double target, double seed) {
    double x = (seed > lo && seed < hi) ? seed : 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double fx = eval(map, x).raw().real() - target;
        if (fx == 0.0) return x;
        if (fx < 0.0) lo = x;
        else hi = x;
        const double d = derivative(map, x).real();
        double next = x - fx / d;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) return next;
        x = next;
    }
    return x;
}

PreimageSet pole_series_preimages(const MapSpec& map, const SpherePoint& a, int budget) {
    const auto& ps = std::get<PoleSeriesParams>(map.params());
    const int first = ps.p * ps.p;
    auto pole = [&](int n) { return std::pow(static_cast<double>(n), ps.p); };
    PreimageSet out;
    if (a.is_infinity()) {
        // poles +-n^p, f^x = (1 + n^{2p}) / lambda
        for (int i = 0; i < budget; ++i) {
            const int j = static_cast<int>(i / 2);
            if (first + j > ps.n_max) break;
            const double x = (i % 2 ? -1.0 : 1.0) * pole(first + j);
            out.branches.push_back({x, log1p_abs2(x) - std::log(ps.lambda), false, (i % 2 ? -1L : 1L) * (j + 1)});
        }
    } else {
        const cplx w = a.raw();
        const bool real_target = std::abs(w.imag()) <= 1e-14 * std::abs(w);
        const int gaps = ps.n_max - first;
        for (int i = 0; i < budget; ++i) {
            const long g = branch_at(i);
            if (std::abs(g) > gaps) break;
            double lo, hi;
            if (g == 0) {
                lo = -pole(first);
                hi = pole(first);
            } else {
                const int n = first + static_cast<int>(std::abs(g)) - 1;
                lo = g > 0 ? pole(n) : -pole(n + 1);
                hi = g > 0 ? pole(n + 1) : -pole(n);
            }
            // near the pole at which f is large with the sign of w
            const double near = w.real() >= 0.0 ? hi : lo;
            const double seed = w.real() != 0.0 ? near - ps.lambda / w.real() : 0.5 * (lo + hi);
            const double xr = pole_series_real_solution(map, lo, hi, w.real(), seed);
            cplx z = xr;
            if (!real_target) {
                for (int it = 0; it < 100; ++it) {
                    const SpherePoint fz = eval(map, z);
                    if (fz.is_infinity()) break;
                    cplx step = (fz.raw() - w) / derivative(map, z);
                    const double cap = 0.25 * (hi - lo);
                    if (std::abs(step) > cap) step *= cap / std::abs(step);
                    z -= step;
                    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
                }
            }
            const SpherePoint image = eval(map, z);
            if (chordal_distance(image, a) > 1e-8)
                throw Error(ErrorCode::RootPolishFailed, "gap " + std::to_string(g) + " of " + fmt(a));
            out.branches.push_back(make_preimage(map, z, g));
        }
    }
    // one tail per side, calibrated on the outermost branch of that side
    for (int dir : {1, -1}) {
        int rep = -1;
        double best = -1.0;
        for (int i = 0; i < static_cast<int>(out.branches.size()); ++i) {
            const double x = out.branches[i].point.raw().real();
            if ((dir > 0 ? x >= 0.0 : x < 0.0) && std::abs(x) > best) {
                best = std::abs(x);
                rep = i;
            }
        }
        if (rep < 0) rep = 0;
        if (out.branches.empty()) break;
        const double x = std::abs(out.branches[rep].point.raw().real());
        const int n_rep = std::max(first, static_cast<int>(std::lround(std::pow(x, 1.0 / ps.p))));
        TailModel t;
        t.kind = TailKind::PoleGaps;
        t.direction = dir;
        t.representative = rep;
        t.p = ps.p;
        t.first = n_rep + 1;
        t.log_c = out.branches[rep].log_fx - std::log1p(std::pow(static_cast<double>(n_rep), 2.0 * ps.p));
        out.tails.push_back(t);
    }
    return out;
}

// sum_{j>=0} binom(-t, j) h^{2j} U^{1-2t-2j} / (2t+2j-1) = int_U^inf (u^2+h^2)^{-t} du, h < U
double lattice_tail_integral(double U, double h, double t) {
    double coef = 1.0, sum = 0.0;
    const double r = (h * h) / (U * U);
    double pw = std::pow(U, 1.0 - 2.0 * t);
    for (int j = 0; j < 200; ++j) {
        const double term = coef * pw / (2.0 * t + 2.0 * j - 1.0);
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
        coef *= (-t - j) / (j + 1.0);
        pw *= r;
    }
    return sum;
}

// int_X^inf (1 + x^{2p})^{-t} dx for X > 1
double gap_tail_integral(double X, int p, double t) {
    double coef = 1.0, sum = 0.0;
    const double r = std::pow(X, -2.0 * p);
    double pw = std::pow(X, 1.0 - 2.0 * p * t);
    for (int j = 0; j < 200; ++j) {
        const double term = coef * pw / (2.0 * p * t + 2.0 * p * j - 1.0);
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
        coef *= (-t - j) / (j + 1.0);
        pw *= r;
    }
    return sum;
}

// log of the exponential-family subtree growth factor at a far point z
double log_growth_factor(cplx z, cplx lambda, double t) {
    const double lz = std::log(std::abs(z) / std::abs(lambda));
    return t * (log1p_abs2(z) - std::log(std::abs(z))) + (0.5 - t) * std::log1p(lz * lz);
}

// sum_{k>=first} of (1+|z_k|^2)^{-t} * growth(z_k), scaled by exp(-shift)
double lattice_tail_sum(const TailModel& tl, double t, double shift) {
    const cplx step = static_cast<double>(tl.direction) * tl.omega;
    auto log_term = [&](double x) {
        const cplx z = tl.z0 + x * step;
        double v = -t * log1p_abs2(z);
        if (tl.log_growth) v += log_growth_factor(z, tl.lambda, t);
        return v - shift;
    };
    const double om = std::abs(tl.omega);
    const double b = std::real(tl.z0 * std::conj(step)) / (om * om);
    const double c2 = std::max(0.0, std::norm(tl.z0) - om * om * b * b);
    const double h = std::sqrt((1.0 + c2) / (om * om));

    long n_direct = kDirectTerms;
    if (!tl.log_growth) {
        const double need = std::max(4.0 * h, 16.0) - b - static_cast<double>(tl.first);
        n_direct = std::max<long>(n_direct, static_cast<long>(std::ceil(need)));
        n_direct = std::min<long>(n_direct, 2000000);
    }
    double sum = 0.0;
    for (long k = tl.first; k < tl.first + n_direct; ++k) sum += std::exp(log_term(static_cast<double>(k)));
    const double X = static_cast<double>(tl.first + n_direct);

    double integral;
    double dgx;
    const double gx = std::exp(log_term(X));
    if (!tl.log_growth) {
        const double U = X + b;
        integral = std::pow(om, -2.0 * t) * lattice_tail_integral(U, h, t) * std::exp(-shift);
        dgx = -2.0 * t * U / (U * U + h * h) * gx;
    } else {
        // in v = log(x / X): integrand x g(x); exact up to X e^30, asymptotic form beyond
        auto integrand = [&](double v) {
            const double log_x = std::log(X) + v;
            if (v > 30.0) {
                const double lz = std::log(om / std::abs(tl.lambda)) + log_x;
                return std::exp(log_x - t * (std::log(om) + log_x) + (0.5 - t) * std::log1p(lz * lz) - shift);
            }
            return std::exp(log_term(std::exp(log_x)) + log_x);
        };
        boost::math::quadrature::exp_sinh<double> integrator;
        integral = integrator.integrate(integrand, 0.0, kInf, 1e-10);
        const double hstep = 1e-3 * X;
        dgx = (std::exp(log_term(X + hstep)) - std::exp(log_term(X - hstep))) / (2.0 * hstep);
    }
    return sum + integral + 0.5 * gx - dgx / 12.0;
}

double gap_tail_sum(const TailModel& tl, double t, double shift) {
    auto term = [&](double x) { return std::exp(-t * std::log1p(std::pow(x, 2.0 * tl.p)) - shift); };
    double sum = 0.0;
    for (long n = tl.first; n < tl.first + kDirectTerms; ++n) sum += term(static_cast<double>(n));
    const double X = static_cast<double>(tl.first + kDirectTerms);
    const double gx = term(X);
    const double q = std::pow(X, 2.0 * tl.p);
    const double dgx = -t * 2.0 * tl.p * q / X / (1.0 + q) * gx;
    return sum + gap_tail_integral(X, tl.p, t) * std::exp(-shift) + 0.5 * gx - dgx / 12.0;
}

}  // namespace

double TailModel::convergence_edge() const noexcept {
    switch (kind) {
        case TailKind::Lattice: return log_growth ? 1.0 : 0.5;
        case TailKind::PoleGaps: return 1.0 / (2.0 * p);
    }
    return 0.0;
}

PreimageSet preimages(const MapSpec& map, const SpherePoint& a, int budget) {
    if (budget < 1) throw Error(ErrorCode::InvalidArgument, "branch budget must be positive");
    switch (map.family()) {
        case Family::Rational: return rational_preimages(map, a, budget);
        case Family::Tangent: return tangent_preimages(map, a, budget);
        case Family::Exponential: return exponential_preimages(map, a, budget);
        case Family::PoleSeries: return pole_series_preimages(map, a, budget);
    }
    return {};
}

double log_tail_ratio(const TailModel& tail, double rep_log_fx, const SpherePoint& rep_point, double t) {
    if (!(t > tail.convergence_edge())) return kInf;
    double log_sum;
    if (tail.kind == TailKind::Lattice) {
        // scale by the first term to keep the sum near 1
        const cplx z1 = tail.z0 + static_cast<double>(tail.direction * tail.first) * tail.omega;
        double shift = -t * log1p_abs2(z1);
        if (tail.log_growth) shift += log_growth_factor(z1, tail.lambda, t);
        log_sum = std::log(lattice_tail_sum(tail, t, shift)) + shift;
        if (tail.log_growth) log_sum -= log_growth_factor(rep_point.raw(), tail.lambda, t);
    } else {
        const double shift = -t * std::log1p(std::pow(static_cast<double>(tail.first), 2.0 * tail.p));
        log_sum = std::log(gap_tail_sum(tail, t, shift)) + shift;
    }
    return -t * tail.log_c + log_sum + t * rep_log_fx;
}

}  // namespace merodyn
