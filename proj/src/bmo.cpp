#include "haarperm/bmo.hpp"

#include <algorithm>

namespace haarperm {

void HaarExpansion::set(const DyadicInterval& I, const Rational& value) {
    if (value == 0) {
        coeffs_.erase(I);
    } else {
        coeffs_[I] = value;
    }
}

Rational HaarExpansion::coeff(const DyadicInterval& I) const {
    auto it = coeffs_.find(I);
    return it == coeffs_.end() ? Rational(0) : it->second;
}

IntervalSet HaarExpansion::support() const {
    std::vector<DyadicInterval> items;
    items.reserve(coeffs_.size());
    for (const auto& [I, c] : coeffs_) items.push_back(I);
    return IntervalSet(std::move(items));
}

HaarExpansion HaarExpansion::operator+(const HaarExpansion& o) const {
    HaarExpansion out = *this;
    for (const auto& [I, c] : o.coeffs_) {
        out.set(I, out.coeff(I) + c);
    }
    return out;
}

HaarExpansion HaarExpansion::scaled(const Rational& c) const {
    HaarExpansion out;
    for (const auto& [I, v] : coeffs_) out.set(I, v * c);
    return out;
}

PackingResult sup_normalized_packing(const std::map<DyadicInterval, Rational>& weights,
                                     bool want_sums) {
    PackingResult result;
    result.value = 0;
    if (weights.empty()) return result;

    std::vector<DyadicInterval> support;
    support.reserve(weights.size());
    for (const auto& [I, w] : weights) support.push_back(I);
    const IntervalSet closure = ancestor_closure(IntervalSet(std::move(support)));

    // Subtree totals, deepest first: total(J) = w(J) + totals of J's children.
    std::map<DyadicInterval, Rational> totals;
    const auto& nodes = closure.items();
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
        const DyadicInterval& J = *it;
        Rational t = 0;
        if (auto w = weights.find(J); w != weights.end()) t += w->second;
        if (auto c = totals.find(J.left_child()); c != totals.end()) t += c->second;
        if (auto c = totals.find(J.right_child()); c != totals.end()) t += c->second;
        totals.emplace(J, std::move(t));
    }

    bool first = true;
    for (const auto& J : nodes) {
        Rational normalized = totals.at(J) * pow2(J.depth);
        if (want_sums) result.sums.emplace(J, normalized);
        if (first || normalized > result.value) {
            result.value = normalized;
            result.witness = J;
            first = false;
        }
    }
    return result;
}

CarlesonReport carleson_constant(const IntervalSet& S, bool want_sums) {
    std::map<DyadicInterval, Rational> weights;
    for (const auto& I : S) {
        weights.emplace(I, I.measure().to_rational());
    }
    PackingResult r = sup_normalized_packing(weights, want_sums);
    return CarlesonReport{std::move(r.value), r.witness, std::move(r.sums)};
}

DyadicRational packing_sum(const IntervalSet& S, const DyadicInterval& J) {
    DyadicRational sum;
    for (const auto& I : S) {
        if (J.covers(I)) sum += I.measure();
    }
    return sum;
}

Rational bmo_norm_sq(const HaarExpansion& x) {
    std::map<DyadicInterval, Rational> weights;
    for (const auto& [I, c] : x.coefficients()) {
        weights.emplace(I, c * c * I.measure().to_rational());
    }
    return sup_normalized_packing(weights).value;
}

double bmo_norm(const HaarExpansion& x) {
    return rational_sqrt(bmo_norm_sq(x));
}

HaarExpansion indicator_expansion(const IntervalSet& S) {
    HaarExpansion x;
    for (const auto& I : S) x.set(I, 1);
    return x;
}

} // namespace haarperm
