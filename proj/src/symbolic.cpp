#include "merodyn/symbolic.hpp"

#include "merodyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <numbers>
#include <sstream>

namespace merodyn {

namespace {

constexpr double kBoundaryTol = 1e-9;
constexpr long double kPoleTol = 1e-9L;

template <class Real>
std::uint64_t strip_symbol(Real x) {
    constexpr Real pi = std::numbers::pi_v<Real>;
    const Real k = std::floor(x / pi);
    const Real d = std::min(x - k * pi, (k + 1) * pi - x);
    if (d < static_cast<Real>(kBoundaryTol)) {
        std::ostringstream os;
        os.precision(17);
        os << "Re z = " << static_cast<double>(x) << " is within " << kBoundaryTol << " of a strip boundary";
        throw Error(ErrorCode::StripAmbiguous, os.str());
    }
    return zigzag_encode(static_cast<long>(k));
}

// lambda tan z in long double; nullopt at a pole
std::optional<std::complex<long double>> tangent_step(std::complex<long double> lambda, std::complex<long double> z) {
    constexpr long double pi = std::numbers::pi_v<long double>;
    const long double k = std::round((z.real() - pi / 2) / pi);
    const std::complex<long double> off(z.real() - (pi / 2 + k * pi), z.imag());
    if (std::abs(off) < kPoleTol * std::max(1.0L, std::abs(pi / 2 + k * pi))) return std::nullopt;
    const auto v = lambda * std::tan(z);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return std::nullopt;
    return v;
}

bool near_pole(cplx z) {
    constexpr double pi = std::numbers::pi;
    const double k = std::round((z.real() - pi / 2) / pi);
    const double pole = pi / 2 + k * pi;
    return std::abs(z - pole) < static_cast<double>(kPoleTol) * std::max(1.0, std::abs(pole));
}

bool same(const ItinerarySequence& a, const ItinerarySequence& b) {
    return a.symbols == b.symbols && a.terminator == b.terminator;
}

}  // namespace

std::uint64_t zigzag_encode(long k) {
    return k >= 0 ? 2 * static_cast<std::uint64_t>(k) + 1 : 2 * static_cast<std::uint64_t>(-k);
}

long zigzag_decode(std::uint64_t s) {
    if (s == 0) throw Error(ErrorCode::InvalidArgument, "symbols start at 1");
    return s % 2 ? static_cast<long>((s - 1) / 2) : -static_cast<long>(s / 2);
}

std::string to_string(const ItinerarySequence& s) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < s.symbols.size(); ++i) os << (i ? ", " : "") << s.symbols[i];
    if (s.terminator == Terminator::Infinity) os << (s.symbols.empty() ? "" : ", ") << "∞";
    else if (s.truncated_at) os << (s.symbols.empty() ? "" : ", ") << "...";
    os << ')';
    return os.str();
}

ItinerarySequence shift(const ItinerarySequence& s) {
    if (s.symbols.empty()) throw Error(ErrorCode::EmptySequence, "cannot shift a sequence without symbols");
    ItinerarySequence out;
    out.symbols.assign(s.symbols.begin() + 1, s.symbols.end());
    out.terminator = s.terminator;
    if (s.truncated_at) out.truncated_at = *s.truncated_at - 1;
    return out;
}

MoserNeighborhood MoserNeighborhood::V(const ItinerarySequence& center, int k) {
    if (k < 0 || static_cast<std::size_t>(k) > center.symbols.size())
        throw Error(ErrorCode::InvalidArgument, "V_k needs k resolved symbols of the center");
    MoserNeighborhood n;
    n.kind = Kind::V;
    n.prefix.assign(center.symbols.begin(), center.symbols.begin() + k);
    return n;
}

MoserNeighborhood MoserNeighborhood::W(const ItinerarySequence& center, std::uint64_t k) {
    if (center.terminator != Terminator::Infinity)
        throw Error(ErrorCode::InvalidArgument, "W_k is defined for infinity-terminated centers only");
    MoserNeighborhood n;
    n.kind = Kind::W;
    n.prefix = center.symbols;
    n.threshold = k;
    return n;
}

bool in_neighborhood(const ItinerarySequence& s, const MoserNeighborhood& nbhd) {
    const std::size_t n = nbhd.prefix.size();
    const std::size_t have = s.symbols.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= have) {
            // an infinity-terminated sequence has no symbol here, a truncated one is unresolved
            if (s.terminator == Terminator::Infinity) return false;
            std::ostringstream os;
            os << "needs depth " << n;
            throw Error(ErrorCode::Undecidable, os.str());
        }
        if (s.symbols[i] != nbhd.prefix[i]) return false;
    }
    if (nbhd.kind == MoserNeighborhood::Kind::V) return true;
    if (have > n) return s.symbols[n] >= nbhd.threshold;
    if (s.terminator == Terminator::Infinity) return true;
    std::ostringstream os;
    os << "needs depth " << n + 1;
    throw Error(ErrorCode::Undecidable, os.str());
}

SymbolicCoder::SymbolicCoder(const MapSpec& map, int horizon, std::uint64_t seed) : map_(map) {
    if (map.family() != Family::Tangent)
        throw Error(ErrorCode::HypothesisUnverified, "strip coding is implemented for the tangent family only");
    report_ = classify(map, horizon, julia_sample(map, 200, 30, seed));
    if (report_.in_H_sphere != Verdict::Yes)
        throw Error(ErrorCode::HypothesisUnverified,
                    "map is not classified hyperbolic on the sphere: " + std::string(to_string(report_.in_H_sphere)));
    if (report_.attracting_cycles.size() != 1 || report_.attracting_cycles[0].points.size() != 1)
        throw Error(ErrorCode::HypothesisUnverified, "singular orbits do not all converge to one attracting fixed point");
}

ItinerarySequence SymbolicCoder::itinerary(const SpherePoint& z0, int depth, Precision precision) const {
    if (depth < 1) throw Error(ErrorCode::InvalidArgument, "depth must be positive");
    ItinerarySequence out;
    if (z0.is_infinity()) {
        out.terminator = Terminator::Infinity;
        return out;
    }
    if (precision == Precision::Double) {
        SpherePoint z = z0;
        for (int n = 0; n < depth; ++n) {
            out.symbols.push_back(strip_symbol(z.raw().real()));
            z = near_pole(z.raw()) ? SpherePoint::infinity() : eval(map_, z);
            if (z.is_infinity()) {
                out.terminator = Terminator::Infinity;
                return out;
            }
        }
    } else {
        const cplx lam = std::get<TangentParams>(map_.params()).lambda;
        const std::complex<long double> lambda(lam.real(), lam.imag());
        std::complex<long double> z(z0.raw().real(), z0.raw().imag());
        for (int n = 0; n < depth; ++n) {
            out.symbols.push_back(strip_symbol(z.real()));
            const auto next = tangent_step(lambda, z);
            if (!next) {
                out.terminator = Terminator::Infinity;
                return out;
            }
            z = *next;
        }
    }
    out.truncated_at = depth;
    return out;
}

ItinerarySequence itinerary(const MapSpec& map, const SpherePoint& z0, int depth) {
    return SymbolicCoder(map).itinerary(z0, depth);
}

ConjugacyReport conjugacy_check(const SymbolicCoder& coder, const JuliaSample& sample, int depth) {
    if (depth < 2) throw Error(ErrorCode::InvalidArgument, "conjugacy check needs depth >= 2");
    const long n = static_cast<long>(sample.points.size());
    std::vector<std::optional<ItinerarySequence>> its(n);
    std::vector<std::string> reasons(n);
#pragma omp parallel for schedule(dynamic, 8)
    for (long i = 0; i < n; ++i) {
        try {
            const auto& z = sample.points[i];
            const auto s = coder.itinerary(z, depth);
            const auto lhs = shift(s);
            const auto fz = z.is_finite() && near_pole(z.raw()) ? SpherePoint::infinity() : eval(coder.map(), z);
            const auto rhs = coder.itinerary(fz, depth - 1);
            if (same(lhs, rhs)) its[i] = s;
            else reasons[i] = "shift " + to_string(lhs) + " != " + to_string(rhs);
        } catch (const std::exception& e) {
            reasons[i] = e.what();
        }
    }
    ConjugacyReport rep;
    std::map<std::pair<std::vector<std::uint64_t>, int>, std::vector<std::size_t>> groups;
    for (long i = 0; i < n; ++i) {
        if (its[i]) {
            ++rep.passes;
            groups[{its[i]->symbols, static_cast<int>(its[i]->terminator)}].push_back(static_cast<std::size_t>(i));
            rep.itineraries.push_back(*its[i]);
        } else {
            rep.failures.push_back({static_cast<std::size_t>(i), reasons[i]});
            rep.itineraries.emplace_back();
        }
    }
    for (const auto& [key, idx] : groups)
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = a + 1; b < idx.size(); ++b)
                if (chordal_distance(sample.points[idx[a]], sample.points[idx[b]]) > 1e-6)
                    rep.collisions.emplace_back(idx[a], idx[b]);
    return rep;
}

ConjugacyReport conjugacy_check(const MapSpec& map, const JuliaSample& sample, int depth) {
    return conjugacy_check(SymbolicCoder(map), sample, depth);
}

}  // namespace merodyn
