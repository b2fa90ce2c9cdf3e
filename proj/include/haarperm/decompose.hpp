#ifndef HAARPERM_DECOMPOSE_HPP
#define HAARPERM_DECOMPOSE_HPP

#include "haarperm/bmo.hpp"
#include "haarperm/dyadic.hpp"
#include "haarperm/rearrangement.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace haarperm {

struct TraceEntry {
    int rule = 0; // 1 = growth step, 2 = recolor sweep
    DyadicInterval interval;
    bool green = false;

    std::string to_string() const;
};

/// Output of the stopping-time coloring below I0: a pairwise disjoint red
/// collection, the green remainder, and the ordered rule-application log.
struct MainLemmaResult {
    IntervalSet red;
    IntervalSet green;
    std::vector<TraceEntry> trace;
};

struct MainLemmaOptions {
    /// Sweep recolor candidates in reverse canonical order; the outcome is
    /// unchanged (the recolor threshold only grows), exposed for testing.
    bool rule2_reverse = false;
};

/// The coloring construction below I0 at threshold parameter A >= 1.
///
/// Growth rule: candidates are family members whose nearest colored family
/// ancestor is green, taken in canonical order; a candidate X turns green
/// when |tau(X)|/|X| <= A |tau(K u {X})*| / |I0| and red otherwise, and
/// joins the colored collection K either way. Recolor rule: a red interval
/// turns green once |tau(I)|/|I| <= A |tau(K)*| / |I0|. Growth saturation
/// and recolor sweeps alternate until neither changes anything; the final
/// red collection is the stopping family.
///
/// family == nullopt means the whole subtree of I0 inside tau's universe;
/// otherwise only members of *family below I0 are colored, with the full
/// tree used for traversal. I0 itself is colored only when it belongs to
/// the working family.
MainLemmaResult main_lemma(const Rearrangement& tau, const DyadicInterval& I0,
                           const Rational& A, const std::optional<IntervalSet>& family,
                           const MainLemmaOptions& opts = {});

/// One decomposition block: the preimage collection L_i and the image-side
/// error collection E_i.
struct CertificateBlock {
    IntervalSet preimage;
    IntervalSet error;
};

struct PropertyPCertificate {
    DyadicInterval root;
    bool weak_mode = false;
    std::vector<CertificateBlock> blocks;
    Rational error_carleson; // [[ union E_i ]]
    Rational homogeneity;    // max_i max_{I in L_i} (|tau(I)|/|I|) |L_i*| / (|tau(L_i)*|+|E_i*|)
    Rational mass;           // sum_i |tau(L_i)*| / |J|
    Rational weak_sup;       // sup_i [[ tau^-1(max tau(L_i)) ]]
};

struct GenerationNode {
    DyadicInterval node;
    int generation = 0;
    MainLemmaResult result;
};

struct GenerationTree {
    std::vector<IntervalSet> generations;
    std::vector<GenerationNode> nodes;
    bool nesting_ok = true; // strict nesting across generations, disjoint within
    bool packing_ok = true; // geometric decay of generation mass inside any node
    std::string violation;
};

/// Iterated coloring: generation 0 consists of the maximal preimages of the
/// target family under J; each node is colored, red intervals send their
/// children to the next generation, and every node yields one certificate
/// block (greens, images of reds).
std::pair<PropertyPCertificate, GenerationTree> generational_decomposition(
    const Rearrangement& tau, const DyadicInterval& J,
    const std::optional<IntervalSet>& family, const Rational& A);

/// Carleson constant of union V_k given the layered disjointness and decay
/// hypotheses; checks them and throws HypothesisError naming the first
/// failure. The returned value never exceeds twice the largest [[V_k]].
Rational lemma2_union_bound(const std::vector<IntervalSet>& generations,
                            const std::vector<IntervalSet>& V);

/// Density peeling: repeatedly strip the members whose local packing in the
/// remainder is at most 4. Parts are disjoint, union to B, and each part
/// satisfies the 4 Carleson condition.
std::vector<IntervalSet> jones_split(const IntervalSet& B);

/// Squared coefficients of an expansion, indexed by interval.
using CoeffSquares = std::map<DyadicInterval, Rational>;

CoeffSquares squares_of(const HaarExpansion& x);

/// Rounds squares down to the 1/K grid: value -> floor(K value)/K.
CoeffSquares floor_to_grid(const CoeffSquares& squares, int K);

/// sup_J (1/|J|) sum_{I subset J} s_I |I| for a squares map.
Rational grid_norm_sq(const CoeffSquares& squares);

/// Splits the intervals carrying the squares (restricted to tau(I) inside J)
/// into K classes by scale-wise round robin: at each scale the intervals are
/// ordered by left endpoint, repeated K s_I times, and dealt to classes
/// cyclically. Requires each K s_I to be an integer in [0, K].
std::vector<IntervalSet> coefficient_split(const CoeffSquares& squares, int K,
                                           const DyadicInterval& J,
                                           const Rearrangement& tau);

struct VerifyVerdict {
    bool structural_ok = false;
    std::string message;
    std::optional<DyadicInterval> offending;
    Rational error_carleson; // minimal constant for the error-collection clause
    Rational homogeneity;    // minimal constant for the homogeneity clause
    Rational mass;           // minimal constant for the image-mass clause
    std::optional<Rational> weak_sup;
    Rational overall;
};

/// Checks that the blocks partition { tau(I) : tau(I) subset J } and returns
/// the minimal constant for each clause.
VerifyVerdict verify_property_p(const Rearrangement& tau, const DyadicInterval& J,
                                const PropertyPCertificate& cert);

/// Restricted variant: the target family is { tau(I) : I in B, tau(I) subset J },
/// blocks must draw preimages from B, and the mass clause is weighted by
/// sup_i [[ tau^-1(max tau(L_i)) ]].
VerifyVerdict verify_weak_property_p(const Rearrangement& tau, const IntervalSet& B,
                                     const DyadicInterval& J,
                                     const PropertyPCertificate& cert);

/// Single-block variant: target = tau(L) disjoint-union E, homogeneity
/// denominator |tau(L)*| alone.
VerifyVerdict verify_condition_s(const Rearrangement& tau, const DyadicInterval& J,
                                 const IntervalSet& L, const IntervalSet& E);

} // namespace haarperm

#endif
