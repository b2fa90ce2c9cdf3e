#ifndef HAARPERM_GENERATORS_HPP
#define HAARPERM_GENERATORS_HPP

#include "haarperm/dyadic.hpp"
#include "haarperm/rearrangement.hpp"

#include <cstdint>
#include <vector>

namespace haarperm {

/// Depth cap for operations that enumerate a whole universe.
inline constexpr int kEnumerationDepthCap = 20;

/// One stage of the cascade construction: a base interval K_n of depth
/// kn_depth, l_n generations below it, and the compression exponent e with
/// epsilon_n = 2^-e.
struct StageParams {
    int kn_depth = 0;
    int l_n = 0;
    int eps_exp = 0;
};

struct CascadeParams {
    int depth = 0; // universe depth
    std::vector<StageParams> stages;

    /// Stage sizes following the defaults |K_1| = 1/8, l_n = 1/(2|K_n|),
    /// |K_{n+1}| = |K_n|^2 / 4, with l_n truncated to fit the universe.
    /// Throws when a stage cannot fit at all.
    static CascadeParams defaults(int depth, int num_stages);
};

struct StageReport {
    StageParams used;
    int l_n_default = 0; // untruncated generation count for this K_n
    DyadicInterval base;          // K_n
    DyadicInterval compressed;    // S_n, same left endpoint, scaled by 2^-e
    std::vector<DyadicRational> generation_covers; // |G_i*|, i = 0..l_n
    DyadicRational slot_mass;       // sum_{i>=1} |rho(G_i)*| = l_n |K_n|
    DyadicRational cumulative_mass; // running sum over stages
};

struct ExtensionStats {
    std::size_t identity = 0;
    std::size_t first_fit = 0;
    std::size_t skipped = 0; // no same-length image was free
};

/// rho spreads the generations of each K_n onto disjoint slots of [1/2, 1)
/// (generation 0 moves to [1/4, 1/2)); sigma compresses each K_n-tree onto
/// the S_n-tree; tau = rho o sigma^{-1}. All three are extended toward
/// totality by identity-first, then first-fit among same-length free
/// intervals; domain intervals with no free same-length image are skipped
/// and counted, so sigma and tau stay partial whenever e >= 1.
struct CascadeBundle {
    Rearrangement rho;
    Rearrangement sigma;
    Rearrangement tau;
    std::vector<StageReport> stages;
    ExtensionStats rho_extension;
    ExtensionStats sigma_extension;
    ExtensionStats tau_extension;
};

CascadeBundle build_cascade(const CascadeParams& params);

/// Seeded uniform rearrangement: an independent permutation of every level
/// when level_preserving, a permutation of the whole universe otherwise.
/// Identical seeds give identical maps.
Rearrangement random_rearrangement(int depth, std::uint64_t seed, bool level_preserving);

} // namespace haarperm

#endif
