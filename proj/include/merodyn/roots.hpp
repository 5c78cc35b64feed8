#pragma once

#include "merodyn/sphere.hpp"

#include <span>
#include <vector>

namespace merodyn {

/// All roots of a polynomial given by ascending coefficients (trailing zeros ignored).
/// Simultaneous Aberth-Ehrlich iteration followed by Newton polishing of each root.
/// Throws RootSearchFailed if the iteration stalls.
std::vector<cplx> polynomial_roots(std::span<const cplx> coeffs, int max_iterations = 500);

/// Newton refinement of one root; returns the polished value (unchanged if Newton diverges).
cplx polish_root(std::span<const cplx> coeffs, cplx z, int iterations = 8);

}  // namespace merodyn
