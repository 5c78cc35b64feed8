#pragma once

#include "merodyn/hyperbolicity.hpp"
#include "merodyn/map_family.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace merodyn {

/// Strip index k in Z to a symbol in {1, 2, ...}: 0, -1, 1, -2, ... -> 1, 2, 3, 4, ...
std::uint64_t zigzag_encode(long k);
long zigzag_decode(std::uint64_t s);

enum class Terminator { None, Infinity };

struct ItinerarySequence {
    std::vector<std::uint64_t> symbols;  // zigzag-encoded strip indices
    Terminator terminator = Terminator::None;
    std::optional<int> truncated_at;
};

/// Printed as (s1, s2, ..., ∞) or (s1, s2, ...).
std::string to_string(const ItinerarySequence& s);

/// Throws EmptySequence.
ItinerarySequence shift(const ItinerarySequence& s);

struct MoserNeighborhood {
    enum class Kind { V, W };
    Kind kind = Kind::V;
    std::vector<std::uint64_t> prefix;
    std::uint64_t threshold = 0;  // W only

    /// Cylinder of the first k symbols of center.
    static MoserNeighborhood V(const ItinerarySequence& center, int k);
    /// Sequences that follow an infinity-terminated center up to its end and then continue
    /// with a symbol >= k. Throws InvalidArgument for other centers.
    static MoserNeighborhood W(const ItinerarySequence& center, std::uint64_t k);
};

/// Throws Undecidable when s is truncated before the deciding symbol.
bool in_neighborhood(const ItinerarySequence& s, const MoserNeighborhood& nbhd);

enum class Precision { Double, Extended };

/// Itineraries through the strips D_k = {k pi <= Re z < (k+1) pi} of a tangent map. The
/// constructor checks the coding hypotheses numerically and throws HypothesisUnverified.
class SymbolicCoder {
public:
    explicit SymbolicCoder(const MapSpec& map, int horizon = 200, std::uint64_t seed = 1);

    /// Throws StripAmbiguous within 1e-9 of a strip boundary.
    ItinerarySequence itinerary(const SpherePoint& z0, int depth, Precision precision = Precision::Double) const;

    const MapSpec& map() const noexcept { return map_; }
    const HyperbolicityReport& classification() const noexcept { return report_; }

private:
    MapSpec map_;
    HyperbolicityReport report_;
};

ItinerarySequence itinerary(const MapSpec& map, const SpherePoint& z0, int depth);

struct ConjugacyFailure {
    std::size_t index;
    std::string reason;
};

struct ConjugacyReport {
    std::size_t passes = 0;
    std::vector<ConjugacyFailure> failures;
    std::vector<std::pair<std::size_t, std::size_t>> collisions;  // distinct points, equal itineraries
    std::vector<ItinerarySequence> itineraries;                   // per sample point; empty on failure
};

/// Checks itinerary(f(z), depth - 1) == shift(itinerary(z, depth)) for every sample point.
ConjugacyReport conjugacy_check(const SymbolicCoder& coder, const JuliaSample& sample, int depth);
ConjugacyReport conjugacy_check(const MapSpec& map, const JuliaSample& sample, int depth);

}  // namespace merodyn
