#ifndef HAARPERM_REARRANGEMENT_HPP
#define HAARPERM_REARRANGEMENT_HPP

#include "haarperm/bmo.hpp"
#include "haarperm/dyadic.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace haarperm {

/// A finite injective map of dyadic intervals inside a universe, possibly
/// defined only on part of it. Immutable after validation.
class Rearrangement {
public:
    using Pair = std::pair<DyadicInterval, DyadicInterval>;

    /// Validates injectivity and universe bounds; throws ValidationError
    /// naming the first violation.
    static Rearrangement validate(const Universe& universe, std::vector<Pair> pairs);

    static Rearrangement identity(const Universe& universe);

    const Universe& universe() const { return universe_; }
    bool total() const { return total_; }
    std::size_t size() const { return pairs_.size(); }

    /// Pairs in canonical domain order.
    const std::vector<Pair>& pairs() const { return pairs_; }

    std::optional<DyadicInterval> apply(const DyadicInterval& I) const;
    bool in_domain(const DyadicInterval& I) const { return apply(I).has_value(); }

    /// apply() that throws DomainError when I is outside the domain.
    DyadicInterval image_of(const DyadicInterval& I) const;

    IntervalSet domain() const;
    IntervalSet image() const;

    /// Defined on the image; inverse(tau) o tau = id on the domain.
    Rearrangement inverse() const;

    /// { tau(I) : I in S }; throws DomainError when S exceeds the domain.
    IntervalSet map_collection(const IntervalSet& S) const;

    /// The induced operator T h_I = h_{tau(I)} applied coefficient-wise.
    HaarExpansion transport(const HaarExpansion& x) const;

    /// this o other, defined where the chain is.
    Rearrangement compose(const Rearrangement& other) const;

    /// Restriction to domain intervals of depth <= d.
    Rearrangement restrict_domain_depth(int d) const;

private:
    Rearrangement(Universe u, std::vector<Pair> pairs, bool total)
        : universe_(u), pairs_(std::move(pairs)), total_(total) {}

    Universe universe_;
    std::vector<Pair> pairs_; // sorted by domain interval, unique
    bool total_;
};

} // namespace haarperm

#endif
