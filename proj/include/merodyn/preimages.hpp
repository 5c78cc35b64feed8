#pragma once

#include "merodyn/map_family.hpp"

#include <vector>

namespace merodyn {

struct Preimage {
    SpherePoint point;
    double log_fx;       // log f^x(point); -inf at critical points
    bool fx_zero;
    long branch;         // lattice index k, gap index, or root index
};

enum class TailKind {
    Lattice,     // z0 + k*omega, f^x = C (1 + |z_k|^2)
    PoleGaps,    // one preimage per pole gap, f^x ~ c (1 + n^{2p})
};

/// Analytic model of the branches beyond the enumerated ones on one side of the lattice.
/// The tail is represented in the tree by one enumerated sibling (the outermost on its side),
/// whose subtree stands in for the subtrees of the tail points.
struct TailModel {
    TailKind kind = TailKind::Lattice;
    int representative = 0;  // index into PreimageSet::branches
    int direction = 1;       // +1: k >= first, -1: k <= -first

    // Lattice
    cplx z0{0.0};
    cplx omega{0.0};
    double log_c = 0.0;
    long first = 1;
    // Exponential family: subtree sums of far points grow like |z|^t log|z/lambda|^{1-2t}
    bool log_growth = false;
    cplx lambda{1.0};

    // PoleGaps: index n runs over n >= first with abscissa n^p
    int p = 1;

    /// Smallest exponent for which the tail sum is finite (exclusive).
    double convergence_edge() const noexcept;
};

struct PreimageSet {
    std::vector<Preimage> branches;
    std::vector<TailModel> tails;
};

/// Solutions of f(z) = a, at most `budget` of them, plus tail models for the rest of the
/// lattice (transcendental families). Throws OmittedValue and RootPolishFailed.
PreimageSet preimages(const MapSpec& map, const SpherePoint& a, int budget);

/// log of sum over the tail of f^x(z)^{-t} times the subtree-growth ratio relative to the
/// representative, divided by the representative's own weight f^x(rep)^{-t}.
/// Returns +inf when the tail diverges at t.
double log_tail_ratio(const TailModel& tail, double rep_log_fx, const SpherePoint& rep_point, double t);

}  // namespace merodyn
