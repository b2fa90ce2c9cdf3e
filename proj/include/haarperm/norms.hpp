#ifndef HAARPERM_NORMS_HPP
#define HAARPERM_NORMS_HPP

#include "haarperm/bmo.hpp"
#include "haarperm/dyadic.hpp"
#include "haarperm/rearrangement.hpp"

#include <cstdint>

namespace haarperm {

inline constexpr std::size_t kExhaustiveDomainCap = 15; // 2^15 subsets

struct DistortionReport {
    Rational ratio;      // sup_E [[tau(E)]] / [[E]] (exact max in exhaustive mode)
    IntervalSet witness; // attaining family; least in enumeration order
    bool exhaustive = false;
};

/// Exact maximum of [[tau(E)]]/[[E]] over nonempty subsets of the domain.
/// Throws ParamError beyond the subset-enumeration cap.
DistortionReport carleson_distortion_exhaustive(const Rearrangement& tau);

/// Greedy lower bound: grow from singleton (and seeded random) starts,
/// adding the ratio-maximizing interval. Deterministic for a fixed seed.
DistortionReport carleson_distortion_greedy(const Rearrangement& tau, int budget,
                                            std::uint64_t seed);

struct DisjointOracleReport {
    Rational value; // max [[tau(E)]] over pairwise disjoint E in the domain
    IntervalSet witness;
};

/// Enumerates pairwise disjoint families; exhaustive up to universe depth 4
/// (or any domain within the subset cap).
DisjointOracleReport max_disjoint_image_constant(const Rearrangement& tau);

struct LowerBoundReport {
    double value = 0;   // best bmo_norm(Tx)/bmo_norm(x) found
    Rational value_sq;  // the same ratio squared, exact
    HaarExpansion witness;
};

/// Norm lower bound via indicator witnesses from the distortion oracle plus
/// coordinate ascent over coefficients on the 2^-10 grid.
LowerBoundReport operator_norm_lower_bound(const Rearrangement& tau, int budget,
                                           std::uint64_t seed);

struct UpperBoundReport {
    Rational bound_sq;   // max { [[tau(E)]] : [[E]] <= 3 }
    IntervalSet witness;
    bool certified = false; // false when only a greedy estimate was feasible
};

UpperBoundReport operator_norm_upper_bound(const Rearrangement& tau, int budget = 5000,
                                           std::uint64_t seed = 0);

struct SandwichReport {
    Rational distortion;
    IntervalSet distortion_witness;
    double lower_bound = 0;
    Rational lower_bound_sq;
    HaarExpansion lower_witness;
    Rational upper_bound_sq;
    IntervalSet upper_witness;
    bool certified = false;
};

/// distortion <= lower_bound^2 <= upper bound, the first two exact; the last
/// asserted whenever the upper bound is certified.
SandwichReport sandwich(const Rearrangement& tau, bool exhaustive, int budget,
                        std::uint64_t seed);

} // namespace haarperm

#endif
