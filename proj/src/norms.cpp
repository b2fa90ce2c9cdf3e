#include "haarperm/norms.hpp"

#include "haarperm/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <random>
#include <stdexcept>

namespace haarperm {

namespace {

/// Bit-parallel engine for total rearrangements at depth <= 3: families are
/// 15-bit masks and Carleson constants scaled by 2^D fit in 16 bits.
struct MaskEngine {
    int D;
    int n;
    std::vector<DyadicInterval> ivs; // canonical order, bit i <-> ivs[i]
    std::vector<std::uint16_t> c8;   // per mask: [[E]] * 2^D
    std::vector<std::uint32_t> img;  // per mask: image mask under tau
    std::vector<char> anti;          // per mask: pairwise disjoint

    static bool eligible(const Rearrangement& tau) {
        return tau.total() && tau.universe().max_depth <= 3;
    }

    explicit MaskEngine(const Rearrangement& tau)
        : D(tau.universe().max_depth),
          n(static_cast<int>(tau.universe().size())),
          ivs(tau.universe().all_intervals()) {
        const std::size_t m = std::size_t(1) << n;
        std::vector<std::uint32_t> desc(n, 0);
        std::vector<std::uint32_t> related(n, 0);
        std::vector<std::uint16_t> weight(n);
        auto id = [&](const DyadicInterval& I) {
            // canonical position: (2^depth - 1) + index
            return static_cast<int>(((std::uint64_t(1) << I.depth) - 1) + I.index);
        };
        for (int i = 0; i < n; ++i) {
            weight[i] = static_cast<std::uint16_t>(1u << (D - ivs[i].depth));
            for (int j = 0; j < n; ++j) {
                if (ivs[i].covers(ivs[j])) desc[i] |= (1u << j);
                if (i != j && (ivs[i].covers(ivs[j]) || ivs[j].covers(ivs[i]))) {
                    related[i] |= (1u << j);
                }
            }
        }
        std::vector<std::uint32_t> img_bit(n);
        for (int i = 0; i < n; ++i) {
            img_bit[i] = 1u << id(tau.image_of(ivs[i]));
        }

        std::vector<std::array<std::uint16_t, 15>> sums(m);
        c8.assign(m, 0);
        img.assign(m, 0);
        anti.assign(m, 1);
        sums[0].fill(0);
        for (std::size_t mask = 1; mask < m; ++mask) {
            const int low = std::countr_zero(mask);
            const std::size_t rest = mask & (mask - 1);
            sums[mask] = sums[rest];
            std::uint16_t best = 0;
            for (int j = 0; j < n; ++j) {
                if ((desc[j] >> low) & 1u) sums[mask][j] += weight[low];
                const std::uint16_t v =
                    static_cast<std::uint16_t>(sums[mask][j] << ivs[j].depth);
                if (v > best) best = v;
            }
            c8[mask] = best;
            img[mask] = img[rest] | img_bit[low];
            anti[mask] = anti[rest] && ((rest & related[low]) == 0);
        }
    }

    IntervalSet decode(std::uint32_t mask) const {
        std::vector<DyadicInterval> out;
        for (int i = 0; i < n; ++i) {
            if ((mask >> i) & 1u) out.push_back(ivs[i]);
        }
        return IntervalSet(std::move(out));
    }
};

Rational ratio_of(const Rearrangement& tau, const IntervalSet& E) {
    const Rational den = carleson_constant(E).constant;
    const Rational num = carleson_constant(tau.map_collection(E)).constant;
    return num / den;
}

IntervalSet mask_to_set(const std::vector<DyadicInterval>& dom, std::uint32_t mask) {
    std::vector<DyadicInterval> out;
    for (std::size_t i = 0; i < dom.size(); ++i) {
        if ((mask >> i) & 1u) out.push_back(dom[i]);
    }
    return IntervalSet(std::move(out));
}

bool pairwise_disjoint(const IntervalSet& E) {
    return maximal_elements(E) == E;
}

} // namespace

DistortionReport carleson_distortion_exhaustive(const Rearrangement& tau) {
    if (tau.size() > kExhaustiveDomainCap) {
        throw ParamError("domain too large for exhaustive mode");
    }
    if (tau.size() == 0) throw ParamError("empty rearrangement");

    if (MaskEngine::eligible(tau)) {
        const MaskEngine eng(tau);
        const std::size_t m = std::size_t(1) << eng.n;
        std::uint32_t best_num = 0, best_den = 1, best_mask = 1;
        for (std::size_t mask = 1; mask < m; ++mask) {
            const std::uint32_t num = eng.c8[eng.img[mask]];
            const std::uint32_t den = eng.c8[mask];
            if (std::uint64_t(num) * best_den > std::uint64_t(best_num) * den) {
                best_num = num;
                best_den = den;
                best_mask = static_cast<std::uint32_t>(mask);
            }
        }
        return {Rational(best_num, best_den), eng.decode(best_mask), true};
    }

    const std::vector<DyadicInterval> dom = tau.domain().items();
    Rational best = 0;
    std::uint32_t best_mask = 1;
    const std::uint32_t m = 1u << dom.size();
    for (std::uint32_t mask = 1; mask < m; ++mask) {
        const Rational r = ratio_of(tau, mask_to_set(dom, mask));
        if (r > best) {
            best = r;
            best_mask = mask;
        }
    }
    return {best, mask_to_set(dom, best_mask), true};
}

DistortionReport carleson_distortion_greedy(const Rearrangement& tau, int budget,
                                            std::uint64_t seed) {
    if (tau.size() == 0) throw ParamError("empty rearrangement");
    if (budget <= 0) budget = 5000;
    const std::vector<DyadicInterval> dom = tau.domain().items();
    std::mt19937_64 rng(seed);

    long evals = 0;
    Rational best = 0;
    IntervalSet best_set;
    auto consider = [&](const IntervalSet& E) {
        ++evals;
        const Rational r = ratio_of(tau, E);
        if (r > best) {
            best = r;
            best_set = E;
        }
        return r;
    };
    auto climb = [&](IntervalSet E) {
        Rational current = consider(E);
        while (evals < budget) {
            Rational best_step = current;
            const DyadicInterval* best_add = nullptr;
            for (const auto& J : dom) {
                if (E.contains(J)) continue;
                if (evals >= budget) break;
                IntervalSet trial = E;
                trial.insert(J);
                const Rational r = consider(trial);
                if (r > best_step) {
                    best_step = r;
                    best_add = &J;
                }
            }
            if (!best_add) break;
            E.insert(*best_add);
            current = best_step;
        }
    };

    for (const auto& I : dom) {
        if (evals >= budget) break;
        climb(IntervalSet{I});
    }
    while (evals < budget) {
        IntervalSet start;
        for (int t = 0; t < 3; ++t) {
            start.insert(dom[rng() % dom.size()]);
        }
        climb(start);
    }
    return {best, best_set, false};
}

namespace {

/// All pairwise disjoint families inside the subtree of `node` drawn from
/// `dom`, as explicit interval vectors. Sizes stay small through depth 3.
std::vector<std::vector<DyadicInterval>> antichains_below(const DyadicInterval& node,
                                                          const Universe& U,
                                                          const IntervalSet& dom) {
    std::vector<std::vector<DyadicInterval>> out;
    out.push_back({}); // empty family
    if (node.depth < U.max_depth) {
        const auto left = antichains_below(node.left_child(), U, dom);
        const auto right = antichains_below(node.right_child(), U, dom);
        for (const auto& a : left) {
            for (const auto& b : right) {
                if (a.empty() && b.empty()) continue;
                std::vector<DyadicInterval> c = a;
                c.insert(c.end(), b.begin(), b.end());
                out.push_back(std::move(c));
            }
        }
    }
    if (dom.contains(node)) out.push_back({node});
    return out;
}

} // namespace

DisjointOracleReport max_disjoint_image_constant(const Rearrangement& tau) {
    if (tau.size() == 0) throw ParamError("empty rearrangement");

    if (MaskEngine::eligible(tau)) {
        const MaskEngine eng(tau);
        const std::size_t m = std::size_t(1) << eng.n;
        std::uint16_t best = 0;
        std::uint32_t best_mask = 0;
        for (std::size_t mask = 1; mask < m; ++mask) {
            if (!eng.anti[mask]) continue;
            const std::uint16_t v = eng.c8[eng.img[mask]];
            if (v > best) {
                best = v;
                best_mask = static_cast<std::uint32_t>(mask);
            }
        }
        return {Rational(best, Int(1) << eng.D), eng.decode(best_mask)};
    }

    if (tau.size() <= kExhaustiveDomainCap) {
        const std::vector<DyadicInterval> dom = tau.domain().items();
        Rational best = 0;
        IntervalSet best_set;
        const std::uint32_t m = 1u << dom.size();
        for (std::uint32_t mask = 1; mask < m; ++mask) {
            IntervalSet E = mask_to_set(dom, mask);
            if (!pairwise_disjoint(E)) continue;
            const Rational v = carleson_constant(tau.map_collection(E)).constant;
            if (v > best) {
                best = v;
                best_set = std::move(E);
            }
        }
        return {best, best_set};
    }

    const Universe& U = tau.universe();
    if (U.max_depth > 4) {
        throw ParamError("domain too large for the disjoint-family oracle");
    }
    // Depth 4: combine per-subtree antichain lists at the root and evaluate
    // each family on the fly (458 329 families).
    const IntervalSet dom = tau.domain();
    Rational best = 0;
    IntervalSet best_set;
    auto consider = [&](std::vector<DyadicInterval> fam) {
        if (fam.empty()) return;
        IntervalSet E(std::move(fam));
        const Rational v = carleson_constant(tau.map_collection(E)).constant;
        if (v > best) {
            best = v;
            best_set = std::move(E);
        }
    };
    const DyadicInterval root(0, 0);
    if (dom.contains(root)) consider({root});
    const auto left = antichains_below(root.left_child(), U, dom);
    const auto right = antichains_below(root.right_child(), U, dom);
    for (const auto& a : left) {
        for (const auto& b : right) {
            std::vector<DyadicInterval> c = a;
            c.insert(c.end(), b.begin(), b.end());
            consider(std::move(c));
        }
    }
    return {best, best_set};
}

LowerBoundReport operator_norm_lower_bound(const Rearrangement& tau, int budget,
                                           std::uint64_t seed) {
    if (tau.size() == 0) throw ParamError("empty rearrangement");
    if (budget <= 0) budget = 2000;
    std::mt19937_64 rng(seed);

    long evals = 0;
    Rational best_sq = 0;
    HaarExpansion best_x;
    auto consider = [&](const HaarExpansion& x) {
        ++evals;
        const Rational den = bmo_norm_sq(x);
        if (den == 0) return Rational(0);
        const Rational r = bmo_norm_sq(tau.transport(x)) / den;
        if (r > best_sq) {
            best_sq = r;
            best_x = x;
        }
        return r;
    };

    // Indicator witness from the distortion oracle.
    const DistortionReport d = tau.size() <= kExhaustiveDomainCap
                                   ? carleson_distortion_exhaustive(tau)
                                   : carleson_distortion_greedy(tau, budget, seed);
    consider(indicator_expansion(d.witness));

    // Coordinate ascent on the dyadic coefficient grid from seeded starts.
    const std::vector<DyadicInterval> dom = tau.domain().items();
    const std::array<Rational, 6> deltas = {Rational(1),       Rational(1, 2),
                                            Rational(1, 4),    Rational(1, 16),
                                            Rational(1, 128),  Rational(1, 1024)};
    auto ascend = [&](HaarExpansion x) {
        if (x.empty()) return;
        Rational current = consider(x);
        bool improved = true;
        while (improved && evals < budget) {
            improved = false;
            for (const auto& I : dom) {
                if (evals >= budget) break;
                for (const auto& delta : deltas) {
                    for (int sign : {+1, -1}) {
                        HaarExpansion trial = x;
                        trial.set(I, x.coeff(I) + sign * delta);
                        if (trial.empty()) continue;
                        const Rational r = consider(trial);
                        if (r > current) {
                            current = r;
                            x = std::move(trial);
                            improved = true;
                        }
                        if (evals >= budget) break;
                    }
                    if (evals >= budget) break;
                }
            }
        }
    };

    ascend(indicator_expansion(d.witness));
    std::uniform_int_distribution<int> numer(-4, 4);
    while (evals < budget) {
        HaarExpansion x;
        for (const auto& I : dom) {
            const int v = numer(rng);
            if (v != 0) x.set(I, Rational(v, 4));
        }
        if (x.empty()) x.set(dom[rng() % dom.size()], 1);
        ascend(x);
    }

    LowerBoundReport rep;
    rep.value_sq = best_sq;
    rep.value = rational_sqrt(best_sq);
    rep.witness = best_x;

    if (MaskEngine::eligible(tau)) {
        const UpperBoundReport ub = operator_norm_upper_bound(tau);
        if (ub.certified && rep.value_sq > ub.bound_sq) {
            throw std::logic_error("lower bound exceeds the certified upper bound");
        }
    }
    return rep;
}

UpperBoundReport operator_norm_upper_bound(const Rearrangement& tau, int budget,
                                           std::uint64_t seed) {
    if (tau.size() == 0) throw ParamError("empty rearrangement");

    if (MaskEngine::eligible(tau)) {
        const MaskEngine eng(tau);
        const std::size_t m = std::size_t(1) << eng.n;
        const std::uint16_t cap = static_cast<std::uint16_t>(3u << eng.D);
        std::uint16_t best = 0;
        std::uint32_t best_mask = 0;
        for (std::size_t mask = 1; mask < m; ++mask) {
            if (eng.c8[mask] > cap) continue;
            const std::uint16_t v = eng.c8[eng.img[mask]];
            if (v > best) {
                best = v;
                best_mask = static_cast<std::uint32_t>(mask);
            }
        }
        return {Rational(best, Int(1) << eng.D), eng.decode(best_mask), true};
    }

    if (tau.size() <= kExhaustiveDomainCap) {
        const std::vector<DyadicInterval> dom = tau.domain().items();
        Rational best = 0;
        IntervalSet best_set;
        const std::uint32_t m = 1u << dom.size();
        for (std::uint32_t mask = 1; mask < m; ++mask) {
            IntervalSet E = mask_to_set(dom, mask);
            if (carleson_constant(E).constant > 3) continue;
            const Rational v = carleson_constant(tau.map_collection(E)).constant;
            if (v > best) {
                best = v;
                best_set = std::move(E);
            }
        }
        return {best, best_set, true};
    }

    // Uncertified greedy estimate of the constrained maximum.
    if (budget <= 0) budget = 5000;
    std::mt19937_64 rng(seed);
    const std::vector<DyadicInterval> dom = tau.domain().items();
    long evals = 0;
    Rational best = 0;
    IntervalSet best_set;
    auto climb = [&](IntervalSet E) {
        ++evals;
        Rational current = carleson_constant(tau.map_collection(E)).constant;
        if (current > best) {
            best = current;
            best_set = E;
        }
        bool improved = true;
        while (improved && evals < budget) {
            improved = false;
            for (const auto& J : dom) {
                if (E.contains(J)) continue;
                if (evals >= budget) break;
                IntervalSet trial = E;
                trial.insert(J);
                ++evals;
                if (carleson_constant(trial).constant > 3) continue;
                const Rational v = carleson_constant(tau.map_collection(trial)).constant;
                if (v > current) {
                    current = v;
                    E = std::move(trial);
                    improved = true;
                    if (current > best) {
                        best = current;
                        best_set = E;
                    }
                    break;
                }
            }
        }
    };
    for (const auto& I : dom) {
        if (evals >= budget) break;
        climb(IntervalSet{I});
    }
    while (evals < budget) {
        climb(IntervalSet{dom[rng() % dom.size()]});
    }
    return {best, best_set, false};
}

SandwichReport sandwich(const Rearrangement& tau, bool exhaustive, int budget,
                        std::uint64_t seed) {
    const DistortionReport d = exhaustive ? carleson_distortion_exhaustive(tau)
                                          : carleson_distortion_greedy(tau, budget, seed);
    const LowerBoundReport lb = operator_norm_lower_bound(tau, budget, seed);
    const UpperBoundReport ub = operator_norm_upper_bound(tau, budget, seed);

    if (d.ratio > lb.value_sq) {
        throw std::logic_error("distortion exceeds the squared lower bound");
    }
    if (ub.certified && lb.value_sq > ub.bound_sq) {
        throw std::logic_error("lower bound exceeds the certified upper bound");
    }

    SandwichReport rep;
    rep.distortion = d.ratio;
    rep.distortion_witness = d.witness;
    rep.lower_bound = lb.value;
    rep.lower_bound_sq = lb.value_sq;
    rep.lower_witness = lb.witness;
    rep.upper_bound_sq = ub.bound_sq;
    rep.upper_witness = ub.witness;
    rep.certified = ub.certified;
    return rep;
}

} // namespace haarperm
