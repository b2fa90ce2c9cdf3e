#include "haarperm/rearrangement.hpp"

#include "haarperm/errors.hpp"

#include <algorithm>
#include <map>

namespace haarperm {

Rearrangement Rearrangement::validate(const Universe& universe, std::vector<Pair> pairs) {
    std::sort(pairs.begin(), pairs.end(),
              [](const Pair& a, const Pair& b) { return a.first < b.first; });
    for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
        if (pairs[i].first == pairs[i + 1].first) {
            throw ValidationError("duplicate domain interval " + pairs[i].first.to_string());
        }
    }
    std::map<DyadicInterval, DyadicInterval> seen_images;
    for (const auto& [from, to] : pairs) {
        if (!universe.contains(from) || !universe.contains(to)) {
            const auto& bad = universe.contains(from) ? to : from;
            throw ValidationError("interval " + bad.to_string() + " exceeds max depth " +
                                  std::to_string(universe.max_depth));
        }
        auto [it, inserted] = seen_images.emplace(to, from);
        if (!inserted) {
            throw ValidationError("not injective at (" + it->second.to_string() + ", " +
                                  from.to_string() + "): both map to " + to.to_string());
        }
    }
    const bool total = pairs.size() == universe.size();
    return Rearrangement(universe, std::move(pairs), total);
}

Rearrangement Rearrangement::identity(const Universe& universe) {
    std::vector<Pair> pairs;
    pairs.reserve(universe.size());
    for (const auto& I : universe.all_intervals()) {
        pairs.emplace_back(I, I);
    }
    return Rearrangement(universe, std::move(pairs), true);
}

std::optional<DyadicInterval> Rearrangement::apply(const DyadicInterval& I) const {
    auto it = std::lower_bound(pairs_.begin(), pairs_.end(), I,
                               [](const Pair& p, const DyadicInterval& x) { return p.first < x; });
    if (it == pairs_.end() || it->first != I) return std::nullopt;
    return it->second;
}

DyadicInterval Rearrangement::image_of(const DyadicInterval& I) const {
    auto img = apply(I);
    if (!img) throw DomainError("interval " + I.to_string() + " not in domain of tau");
    return *img;
}

IntervalSet Rearrangement::domain() const {
    std::vector<DyadicInterval> items;
    items.reserve(pairs_.size());
    for (const auto& [from, to] : pairs_) items.push_back(from);
    return IntervalSet(std::move(items));
}

IntervalSet Rearrangement::image() const {
    std::vector<DyadicInterval> items;
    items.reserve(pairs_.size());
    for (const auto& [from, to] : pairs_) items.push_back(to);
    return IntervalSet(std::move(items));
}

Rearrangement Rearrangement::inverse() const {
    std::vector<Pair> flipped;
    flipped.reserve(pairs_.size());
    for (const auto& [from, to] : pairs_) flipped.emplace_back(to, from);
    return validate(universe_, std::move(flipped));
}

IntervalSet Rearrangement::map_collection(const IntervalSet& S) const {
    std::vector<DyadicInterval> out;
    out.reserve(S.size());
    for (const auto& I : S) out.push_back(image_of(I));
    return IntervalSet(std::move(out));
}

HaarExpansion Rearrangement::transport(const HaarExpansion& x) const {
    HaarExpansion out;
    for (const auto& [I, c] : x.coefficients()) {
        out.set(image_of(I), c);
    }
    return out;
}

Rearrangement Rearrangement::compose(const Rearrangement& other) const {
    std::vector<Pair> pairs;
    for (const auto& [from, mid] : other.pairs_) {
        if (auto to = apply(mid)) pairs.emplace_back(from, *to);
    }
    return validate(universe_, std::move(pairs));
}

Rearrangement Rearrangement::restrict_domain_depth(int d) const {
    std::vector<Pair> pairs;
    for (const auto& p : pairs_) {
        if (p.first.depth <= d) pairs.push_back(p);
    }
    return validate(universe_, std::move(pairs));
}

} // namespace haarperm
